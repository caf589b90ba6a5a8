"""Image-quality and link metrics: SNR maps, PSF widths, coverage and ghosts."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numba as nb
import numpy as np
from scipy.ndimage import maximum_filter

from .ems import EmsLayout
from .geometry import Point2, as_point
from .imaging import GridSpec, ImageGrid, backproject_points, to_db_normalized
from .synth import (
    NoiseModel,
    RadarConfig,
    RxDataMatrix,
    TargetSet,
    _array_sum,
    array_model,
    _target_scale,
    add_noise,
    fast_time_axis,
    snapshot_geometry,
    synthesize,
)
from .waveform import Waveform

SNR_CAP_DB = 200.0
HALF_POWER_DB = -10.0 * math.log10(2.0)


# --------------------------------------------------------------------------- SNR maps


@dataclass(frozen=True)
class SnrMap:
    grid: GridSpec
    snr_db: np.ndarray = field(repr=False)
    probe_rcs: float

    def __post_init__(self):
        v = np.asarray(self.snr_db, dtype=float)
        if v.shape != (self.grid.nx, self.grid.ny):
            raise ValueError("SNR map shape does not match its grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("SNR map entries must be finite")


def _snr_db(power: np.ndarray, sigma2: float, gain: np.ndarray) -> np.ndarray:
    noise = sigma2 * gain
    with np.errstate(divide="ignore", invalid="ignore"):
        snr = 10.0 * np.log10(power / noise)
    snr = np.where(noise > 0, snr, np.where(power > 0, SNR_CAP_DB, -SNR_CAP_DB))
    return np.clip(np.nan_to_num(snr, nan=-SNR_CAP_DB), -SNR_CAP_DB, SNR_CAP_DB)


@nb.njit(cache=True, parallel=True)
def _probe_kernel(pts, amps, cx, lo, hi, am, k0, cos_psi, d_i, dt, s_m1, s_0, s_p1, matched, norm):
    """Noise-free narrow-beam echo of a lone probe, focused onto itself.

    Reproduces the synthesis and back-projection arithmetic on a fast-time grid
    whose origin is a multiple of ``dt``; the carrier and path phases cancel.
    """
    n_pts = pts.shape[0]
    val = np.zeros(n_pts, dtype=np.complex128)
    gain = np.zeros(n_pts)
    for p in nb.prange(n_pts):
        rx, ry = pts[p, 0], pts[p, 1]
        acc = 0.0 + 0.0j
        g2 = 0.0
        for m in range(cx.shape[0]):
            if hi[m] <= lo[m]:
                continue
            p_x = cx[m]
            d_o = math.hypot(rx - p_x, ry)
            g = cos_psi - (rx - p_x) / d_o
            s1 = _array_sum(am, lo[m], hi[m], p_x, k0 * g)
            sq = s1 * s1
            u = 2.0 * (d_i + d_o) / (299792458.0 * dt)
            f = u - math.floor(u)
            shape = (1.0 - f) * ((1.0 - f) * s_0 + f * s_m1) + f * ((1.0 - f) * s_p1 + f * s_0)
            coef = amps[p] / (d_i * d_o) ** 2 * shape
            lin = (1.0 - f) ** 2 + f * f
            if matched:
                mag2 = sq.real * sq.real + sq.imag * sq.imag
                acc += coef * mag2 * norm
                g2 += mag2 * norm * norm * lin
            else:
                acc += coef * sq
                g2 += lin
        val[p] = acc
        gain[p] = g2
    return val, gain


def probe_responses(
    radar: RadarConfig,
    layout: EmsLayout,
    points,
    probe_rcs: float,
    wf: Waveform,
    weighting: str = "matched",
) -> tuple[np.ndarray, np.ndarray]:
    """Focused value and noise gain of a lone narrow-beam probe at each point."""
    pts = np.ascontiguousarray(np.asarray(points, dtype=float).reshape(-1, 2))
    geo = snapshot_geometry(radar, layout)
    one = TargetSet.single(Point2(0.0, 1.0), probe_rcs)
    amps = np.full(len(pts), _target_scale(radar, layout, one)[0])
    s = np.asarray(wf.samples)
    nh = wf.n_half
    return _probe_kernel(
        pts, amps, geo.center_x, geo.lo, geo.hi, array_model(layout),
        radar.wavenumber, math.cos(radar.psi), geo.d_i, wf.dt,
        s[nh - 1], s[nh], s[nh + 1], weighting == "matched", 1.0 / geo.n_rad**2,
    )


def probe_pipeline(
    radar: RadarConfig,
    layout: EmsLayout,
    point,
    probe_rcs: float,
    wf: Waveform,
    model: str = "narrowbeam",
    weighting: str = "matched",
) -> tuple[complex, float]:
    """Reference path: full synthesis then a one-pixel back-projection."""
    tg = TargetSet.single(point, probe_rcs)
    data = synthesize(model, radar, layout, tg, wf)
    val, gain = backproject_points(data, radar, layout, [tuple(point)], weighting)
    return complex(val[0]), float(gain[0])


def snr_map(
    radar: RadarConfig,
    layout: EmsLayout,
    probes: GridSpec,
    probe_rcs: float,
    noise: NoiseModel,
    wf: Waveform,
    model: str = "narrowbeam",
    weighting: str = "matched",
) -> SnrMap:
    """Post-imaging SNR of one fictitious target per probe cell.

    The noise power at a pixel is ``sigma2`` times the squared-coefficient sum
    of the back-projection (analytic, deterministic).
    """
    pts = probes.points()
    if model == "narrowbeam":
        vals, gains = probe_responses(radar, layout, pts, probe_rcs, wf, weighting)
    elif model == "general":
        out = [probe_pipeline(radar, layout, p, probe_rcs, wf, model, weighting) for p in pts]
        vals = np.array([o[0] for o in out])
        gains = np.array([o[1] for o in out])
    else:
        raise ValueError(f"unknown model {model!r}")
    snr = _snr_db(np.abs(vals) ** 2, noise.sigma2, gains)
    return SnrMap(probes, snr.reshape(probes.nx, probes.ny), float(probe_rcs))


def monte_carlo_noise_gain(
    radar: RadarConfig,
    layout: EmsLayout,
    point,
    wf: Waveform,
    noise: NoiseModel,
    n_draws: int = 100,
    weighting: str = "matched",
) -> tuple[float, float]:
    """Empirical and analytic post-imaging noise power at ``point``.

    Each draw uses seed ``noise.seed + i``.  Returns ``(empirical, analytic)``
    in watts.
    """
    if n_draws < 1:
        raise ValueError("need at least one draw")
    if not noise.sigma2 > 0:
        raise ValueError("Monte-Carlo check needs a positive noise power")
    tg = TargetSet.single(point, 1.0)
    t0, n_fast = fast_time_axis(radar, layout, tg, wf)
    base = RxDataMatrix(np.zeros((n_fast, radar.trajectory.n_snapshots)), t0, wf.dt, 0.0, radar.trajectory.dtau)
    acc = 0.0
    gain = 0.0
    for i in range(n_draws):
        noisy = add_noise(base, NoiseModel(noise.sigma2, (noise.seed + i) % 2**64))
        val, g = backproject_points(noisy, radar, layout, [tuple(point)], weighting)
        acc += abs(val[0]) ** 2
        gain = g[0]
    return acc / n_draws, noise.sigma2 * float(gain)


def coverage_fraction(snr: SnrMap | np.ndarray, threshold_db: float) -> float:
    """Fraction of probe cells whose SNR exceeds ``threshold_db``."""
    v = np.asarray(snr.snr_db if isinstance(snr, SnrMap) else snr, dtype=float)
    if v.size == 0:
        return 0.0
    return float(np.count_nonzero(v > threshold_db)) / v.size


def beam_widening_loss(dpsi_wide: float, dpsi_narrow: float) -> float:
    """Cubic SNR loss ``30 log10(wide / narrow)`` in dB."""
    if not (dpsi_wide > 0 and dpsi_narrow > 0):
        raise ValueError("beamwidths must be positive")
    if dpsi_wide < dpsi_narrow:
        raise ValueError("the wide beam must not be narrower than the narrow one")
    return 30.0 * math.log10(dpsi_wide / dpsi_narrow)


def map_maxima(snr: SnrMap, count: int, min_separation: float = 0.0) -> list[tuple[Point2, float]]:
    """Strongest local maxima (3 x 3 neighbourhood) of the map, best first."""
    v = snr.snr_db
    peaks = np.argwhere((v == maximum_filter(v, size=3, mode="nearest")))
    order = sorted(peaks.tolist(), key=lambda ij: -v[ij[0], ij[1]])
    chosen: list[tuple[Point2, float]] = []
    for i, j in order:
        pt = Point2(float(snr.grid.x[i]), float(snr.grid.y[j]))
        if all(pt.distance(c) >= min_separation for c, _ in chosen):
            chosen.append((pt, float(v[i, j])))
        if len(chosen) == count:
            break
    return chosen


# --------------------------------------------------------------------------- PSF


class PsfError(ValueError):
    """No usable peak near the requested position."""


@dataclass(frozen=True)
class PsfReport:
    peak_position: Point2
    delta_x: float
    delta_y: float
    peak_snr_db: float | None
    highest_sidelobe_db: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["peak_position"] = [self.peak_position.x, self.peak_position.y]
        return d


def _parabola_vertex(ym1: float, y0: float, yp1: float) -> tuple[float, float]:
    den = ym1 - 2.0 * y0 + yp1
    if den >= 0:
        return 0.0, y0
    off = 0.5 * (ym1 - yp1) / den
    off = max(-0.5, min(0.5, off))
    return off, y0 - 0.25 * (ym1 - yp1) * off


def _width(cut_db: np.ndarray, i0: int, level: float, step: float) -> float:
    """Distance between the ``level`` crossings on both sides of index ``i0``."""
    n = len(cut_db)

    def crossing(direction: int) -> float:
        i = i0
        while 0 <= i + direction < n and cut_db[i + direction] > level:
            i += direction
        j = i + direction
        if not 0 <= j < n:
            return i * step  # ran off the raster; width is a lower bound
        a, b = cut_db[i], cut_db[j]
        frac = (a - level) / (a - b) if a != b else 0.0
        return (i + direction * frac) * step

    return crossing(+1) - crossing(-1)


def psf_metrics(
    img: ImageGrid,
    near,
    search_radius: float = 1.0,
    floor_db: float = -20.0,
    sigma2: float | None = None,
) -> PsfReport:
    """Peak location, -3 dB widths along x and y, and the highest sidelobe.

    The peak is the strongest pixel within ``search_radius`` of ``near``,
    refined by a quadratic fit of the dB image along each axis.  Widths are
    measured on cuts through the peak pixel at the half-power level relative to
    the refined peak.  Sidelobes are searched within the radius but outside an
    ellipse of semi-axes ``1.2 * delta`` around the peak, among local maxima.
    """
    near = as_point(near)
    g = img.grid
    db = to_db_normalized(img)
    xx, yy = np.meshgrid(g.x, g.y, indexing="ij")
    inside = np.hypot(xx - near.x, yy - near.y) <= search_radius
    if not inside.any():
        raise PsfError("search radius holds no pixel")
    masked = np.where(inside, db, -np.inf)
    ix, iy = np.unravel_index(int(np.argmax(masked)), db.shape)
    if db[ix, iy] < floor_db:
        raise PsfError(f"no peak above {floor_db} dB within {search_radius} m of {tuple(near)}")

    ox, vx = (0.0, db[ix, iy])
    oy, vy = (0.0, db[ix, iy])
    if 0 < ix < g.nx - 1:
        ox, vx = _parabola_vertex(db[ix - 1, iy], db[ix, iy], db[ix + 1, iy])
    if 0 < iy < g.ny - 1:
        oy, vy = _parabola_vertex(db[ix, iy - 1], db[ix, iy], db[ix, iy + 1])
    peak_db = max(vx, vy)
    level = peak_db + HALF_POWER_DB
    delta_x = _width(db[:, iy], ix, level, g.dx)
    delta_y = _width(db[ix, :], iy, level, g.dy)
    px, py = g.x[ix] + ox * g.dx, g.y[iy] + oy * g.dy

    ell = ((xx - px) / (1.2 * delta_x)) ** 2 + ((yy - py) / (1.2 * delta_y)) ** 2
    # local maxima only, so the flank of a smooth main lobe is not a sidelobe
    side = inside & (ell > 1.0) & (db == maximum_filter(db, size=3, mode="nearest"))
    sidelobe = float(db[side].max() - peak_db) if side.any() else float(-120.0)

    peak_snr = None
    if sigma2 is not None and img.noise_gain is not None:
        power = np.array([abs(img.values[ix, iy]) ** 2])
        peak_snr = float(_snr_db(power, sigma2, np.array([img.noise_gain[ix, iy]]))[0])

    return PsfReport(Point2(float(px), float(py)), float(delta_x), float(delta_y), peak_snr, sidelobe)


# --------------------------------------------------------------------------- ghosts


@dataclass(frozen=True)
class Ghost:
    position: Point2
    level_db: float

    def to_dict(self) -> dict:
        return {"position": [self.position.x, self.position.y], "level_db": self.level_db}


def ghost_report(img: ImageGrid, truth: TargetSet, match_radius: float, floor_db: float) -> list[Ghost]:
    """Local maxima above ``floor_db`` farther than ``match_radius`` from every true target."""
    db = to_db_normalized(img)
    peaks = (db == maximum_filter(db, size=3, mode="nearest")) & (db > floor_db)
    g = img.grid
    truth_xy = truth.positions
    out = []
    for i, j in np.argwhere(peaks):
        pt = Point2(float(g.x[i]), float(g.y[j]))
        if truth_xy.size:
            dist = np.hypot(truth_xy[:, 0] - pt.x, truth_xy[:, 1] - pt.y)
            if dist.min() <= match_radius:
                continue
        out.append(Ghost(pt, float(db[i, j])))
    out.sort(key=lambda gh: (-gh.level_db, gh.position.x, gh.position.y))
    return out
