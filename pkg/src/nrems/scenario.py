"""JSON scenario files: schema, validation and construction of model objects.

All quantities are SI.  Angles may be given in radians (``pointing``) or in
degrees with a ``_deg`` suffix (``pointing_deg``), never both.  Unknown keys
are rejected.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from .ems import (
    AnchorScheme,
    EmsLayout,
    build_modular_ems,
    effective_aperture,
    elements_per_module,
    select_anchor_points,
)
from .geometry import SPEED_OF_LIGHT, GeometryError, Point2, SourceTrajectory
from .imaging import GridSpec, WEIGHTINGS, default_pixel_pitch
from .synth import NoiseModel, RadarConfig, Target, TargetSet, thermal_noise_power
from .waveform import Waveform, make_pulse


class ScenarioError(ValueError):
    """Scenario does not match the schema or violates a precondition."""


_POS = {"type": "number", "exclusiveMinimum": 0}
_NUM = {"type": "number"}
_AREA = {"type": "array", "items": _NUM, "minItems": 4, "maxItems": 4}
_POINT = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


SCHEMA = _obj(
    {
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "description": {"type": "string"},
        "model": {"enum": ["general", "narrowbeam"]},
        "radar": _obj(
            {
                "f0": _POS,
                "bandwidth": _POS,
                "pointing": _POS,
                "pointing_deg": _POS,
                "beamwidth": _POS,
                "beamwidth_deg": _POS,
                "aperture": _POS,
                "tx_power": _POS,
                "tx_power_dbm": _NUM,
                "directivity_exponent": _NUM,
                "calib": _POS,
                "trajectory": _obj(
                    {
                        "height": _POS,
                        "d_i": _POS,
                        "speed": _POS,
                        "start_x": _NUM,
                        "duration": _POS,
                        "dtau": _POS,
                        "n_snapshots": {"type": "integer", "minimum": 1},
                    }
                ),
            },
            required=("f0", "bandwidth", "trajectory"),
        ),
        "waveform": _obj({"oversample": {"type": "integer", "minimum": 2}, "n_lobes": {"type": "integer", "minimum": 4}}),
        "ems": _obj(
            {
                "clusters": {"type": "integer", "minimum": 1},
                "modules_per_cluster": {"type": "integer", "minimum": 1},
                "module_width": _POS,
                "elements_per_module": {"type": "integer", "minimum": 1},
                "pitch": _POS,
                "decimation": {"type": "integer", "minimum": 1},
                "module_height": _POS,
                "center_x": _NUM,
                "quantization_bits": {"type": "integer", "minimum": 1, "maximum": 16},
                "mirror": {"type": "boolean"},
                "anchor_points": {"type": "array", "items": _POINT, "minItems": 1},
                "anchors": _obj(
                    {
                        "ranges": {"type": "array", "items": _POS, "minItems": 1},
                        "per_range_count": {"type": "integer", "minimum": 1},
                        "area": _AREA,
                        "layer": {"type": "integer", "minimum": 0},
                    },
                    required=("ranges", "per_range_count", "area"),
                ),
            },
            required=("clusters", "modules_per_cluster"),
        ),
        "targets": {
            "type": "array",
            "items": _obj({"position": _POINT, "rcs": _POS}, required=("position",)),
        },
        "noise": _obj(
            {
                "sigma2": {"type": "number", "minimum": 0},
                "noise_figure_db": _NUM,
                "temperature": _POS,
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
            }
        ),
        "grid": _obj({"area": _AREA, "pitch": _POS}, required=("area",)),
        "imaging": _obj({"weighting": {"enum": list(WEIGHTINGS)}}),
        "snr": _obj({"area": _AREA, "pitch": _POS, "probe_rcs": _POS, "threshold_db": _NUM}),
        "analysis": _obj(
            {"match_radius": _POS, "floor_db": _NUM, "search_radius": _POS, "psf_floor_db": _NUM}
        ),
    },
    required=("radar", "ems"),
)


@dataclass(frozen=True)
class Scenario:
    name: str
    doc: dict
    model: str
    radar: RadarConfig
    layout: EmsLayout
    targets: TargetSet
    noise: NoiseModel
    waveform: Waveform
    grid: GridSpec
    probes: GridSpec
    probe_rcs: float
    threshold_db: float
    weighting: str
    match_radius: float
    floor_db: float
    search_radius: float
    psf_floor_db: float

    @property
    def digest(self) -> str:
        canon = json.dumps(self.doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def _angle(section: dict, key: str, where: str) -> float | None:
    rad, deg = section.get(key), section.get(key + "_deg")
    if rad is not None and deg is not None:
        raise ScenarioError(f"{where}: give {key} or {key}_deg, not both")
    if deg is not None:
        return math.radians(deg)
    return rad


def _area_tuple(a, where: str) -> tuple:
    xmin, xmax, ymin, ymax = (float(v) for v in a)
    if not (xmax > xmin and ymax > ymin):
        raise ScenarioError(f"{where}: area must be [xmin, xmax, ymin, ymax] with positive extent")
    if ymin <= 0:
        raise GeometryError(f"{where}: area must lie above the skin (ymin > 0)")
    return xmin, xmax, ymin, ymax


def _layout(doc: dict, wavelength: float, psi: float, source_height: float) -> EmsLayout:
    e = doc["ems"]
    base = e.get("pitch", wavelength / 4.0)
    pitch = base * e.get("decimation", 1)
    if "elements_per_module" in e and "module_width" in e:
        raise ScenarioError("ems: give module_width or elements_per_module, not both")
    n_mod = e.get("elements_per_module") or elements_per_module(e.get("module_width", 0.1), pitch)
    k = e["clusters"]
    if "anchor_points" in e and "anchors" in e:
        raise ScenarioError("ems: give anchors or anchor_points, not both")
    if "anchor_points" in e:
        anchors = [Point2(*p) for p in e["anchor_points"]]
    elif "anchors" in e:
        a = e["anchors"]
        scheme = AnchorScheme(tuple(a["ranges"]), a["per_range_count"], _area_tuple(a["area"], "ems.anchors"))
        center = (e.get("center_x", 0.0), 0.0)
        anchors = select_anchor_points(scheme, center)
        layer = a.get("layer", 0)
        if len(anchors) % k:
            raise ScenarioError(f"ems: {len(anchors)} anchors do not split into layers of {k} clusters")
        if layer >= len(anchors) // k:
            raise ScenarioError(f"ems: anchor layer {layer} out of range")
        anchors = anchors[layer * k : (layer + 1) * k]
    else:
        raise ScenarioError("ems: anchors or anchor_points required")
    if len(anchors) != k:
        raise ScenarioError(f"ems: {k} clusters need {k} anchors, got {len(anchors)}")
    if any(p.y <= 0 for p in anchors):
        raise GeometryError("ems: anchors must lie above the skin")
    layout = build_modular_ems(
        k, e["modules_per_cluster"], n_mod, pitch, wavelength, psi, anchors,
        source_height=source_height, center_x=e.get("center_x", 0.0),
        module_height=e.get("module_height", 0.5), quantization_bits=e.get("quantization_bits"),
    )
    return layout.as_mirror() if e.get("mirror", False) else layout


def _trajectory(tr: dict, layout: EmsLayout, psi: float, wavelength: float) -> SourceTrajectory:
    if ("height" in tr) == ("d_i" in tr):
        raise ScenarioError("radar.trajectory: give exactly one of height or d_i")
    height = tr["height"] if "height" in tr else tr["d_i"] * math.sin(psi)
    speed = tr.get("speed", 10.0)
    dtau = tr.get("dtau", wavelength / 4.0 / speed)
    lead = height / math.tan(psi) if psi < math.pi / 2 else 0.0
    start_x = tr.get("start_x", float(layout.element_x[0]) - lead)
    if "duration" in tr and "n_snapshots" in tr:
        raise ScenarioError("radar.trajectory: give duration or n_snapshots, not both")
    if "n_snapshots" in tr:
        duration = max(tr["n_snapshots"] - 1, 0) * dtau
    else:
        duration = tr.get("duration", float(layout.element_x[-1] - layout.element_x[0]) / speed)
    # a single snapshot still needs a positive duration; half a step keeps the count at one
    duration = duration if duration > 0 else 0.5 * dtau
    return SourceTrajectory(Point2(start_x, height), speed, duration, dtau)


def _grid(area, pitch) -> GridSpec:
    xmin, xmax, ymin, ymax = area
    return GridSpec.from_bounds(xmin, xmax, ymin, ymax, pitch)


def scenario_from_dict(doc: dict, seed: int | None = None) -> Scenario:
    """Validate ``doc`` and build every model object (raises Scenario/GeometryError)."""
    doc = copy.deepcopy(doc)
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"{path}: {exc.message}") from None
    if seed is not None:
        doc.setdefault("noise", {})["seed"] = int(seed)

    try:
        r = doc["radar"]
        f0, bandwidth = r["f0"], r["bandwidth"]
        wavelength = SPEED_OF_LIGHT / f0
        psi = _angle(r, "pointing", "radar")
        if psi is None:
            raise ScenarioError("radar: pointing angle required")
        if not psi <= math.pi / 2 + 1e-12:
            raise GeometryError("radar: pointing angle must lie in (0, 90] degrees")
        psi = min(psi, math.pi / 2)
        dpsi = _angle(r, "beamwidth", "radar")
        aperture = r.get("aperture")
        if dpsi is None and aperture is None:
            raise ScenarioError("radar: beamwidth or aperture required")
        if "tx_power" in r and "tx_power_dbm" in r:
            raise ScenarioError("radar: give tx_power or tx_power_dbm, not both")
        tx = r.get("tx_power", 10.0 ** ((r.get("tx_power_dbm", -10.0) - 30.0) / 10.0))

        tr = r["trajectory"]
        height = tr.get("height", tr.get("d_i", 1.0) * math.sin(psi))
        layout = _layout(doc, wavelength, psi, height)
        trajectory = _trajectory(tr, layout, psi, wavelength)
        radar = RadarConfig(
            f0, bandwidth, psi, trajectory, dpsi=dpsi, aperture=None if dpsi is not None else aperture,
            tx_power=tx, directivity_exponent=r.get("directivity_exponent", 4.0), calib=r.get("calib"),
        )

        w = doc.get("waveform", {})
        wf = make_pulse(f0, bandwidth, w.get("oversample", 8), w.get("n_lobes", 16))
        targets = TargetSet(tuple(Target(Point2(*t["position"]), t.get("rcs", 1.0)) for t in doc.get("targets", [])))

        n = doc.get("noise", {})
        sigma2 = n.get("sigma2")
        if sigma2 is None:
            sigma2 = thermal_noise_power(bandwidth, n.get("noise_figure_db", 10.0), n.get("temperature", 290.0))
        noise = NoiseModel(float(sigma2), int(n.get("seed", 0)))

        anchors_area = doc["ems"].get("anchors", {}).get("area")
        g = doc.get("grid")
        if g is None and anchors_area is None:
            raise ScenarioError("grid: area required when no anchor area is given")
        grid_area = _area_tuple(g["area"] if g else anchors_area, "grid")
        pitch = (g or {}).get("pitch")
        if pitch is None:
            corners = [(x, y) for x in grid_area[:2] for y in grid_area[2:]]
            r_max = max(math.hypot(x - layout.center_x, y) for x, y in corners)
            a_eff = effective_aperture(trajectory.speed, trajectory.duration, radar.d_i, radar.dpsi, psi)
            pitch = default_pixel_pitch(bandwidth, wavelength, r_max, a_eff)
        grid = _grid(grid_area, pitch)

        s = doc.get("snr", {})
        snr_area = _area_tuple(s["area"], "snr") if "area" in s else grid_area
        probes = _grid(snr_area, s.get("pitch", 0.5))
        a = doc.get("analysis", {})
    except (GeometryError, ScenarioError):
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None

    return Scenario(
        name=doc.get("name", "scenario"),
        doc=doc,
        model=doc.get("model", "narrowbeam"),
        radar=radar,
        layout=layout,
        targets=targets,
        noise=noise,
        waveform=wf,
        grid=grid,
        probes=probes,
        probe_rcs=float(s.get("probe_rcs", 0.1)),
        threshold_db=float(s.get("threshold_db", 0.0)),
        weighting=doc.get("imaging", {}).get("weighting", "matched"),
        match_radius=float(a.get("match_radius", 1.0)),
        floor_db=float(a.get("floor_db", -10.0)),
        search_radius=float(a.get("search_radius", 1.0)),
        psf_floor_db=float(a.get("psf_floor_db", -20.0)),
    )


def load_scenario(path, seed: int | None = None) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg} at line {exc.lineno}") from None
    return scenario_from_dict(doc, seed)


def bundled_scenario(name: str) -> Path:
    """Path of a scenario shipped with the package (``paper_full`` or ``paper_desk``)."""
    ref = resources.files("nrems") / "scenarios" / f"{name}.json"
    return Path(str(ref))
