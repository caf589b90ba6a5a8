"""Command-line front end.

Subcommands ``design``, ``simulate``, ``image``, ``snrmap`` and ``analyze`` read
a JSON scenario and write their artifacts into ``--out``.  Outputs are staged in
a scratch directory and moved into place only after every file has been
written, so a failing run leaves no partial results.  Each artifact gets a
``<file>.meta.json`` sidecar with the scenario digest, seed and version.

Exit codes: 0 success, 2 invalid scenario, 3 infeasible geometry, 4 I/O error.
Errors are reported as one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import tempfile
from pathlib import Path

from . import __version__, set_threads
from . import io as nio
from .analysis import coverage_fraction, ghost_report, psf_metrics, snr_map
from .geometry import GeometryError
from .imaging import backproject
from .scenario import Scenario, ScenarioError, load_scenario
from .synth import synthesize

EXIT_OK, EXIT_SCHEMA, EXIT_GEOMETRY, EXIT_IO = 0, 2, 3, 4


class _Staging:
    """Collects outputs in a scratch directory and commits them together."""

    def __init__(self, out: Path, scn: Scenario, args):
        self.out = out
        self.scn = scn
        self.args = args
        self.names: list[str] = []
        out.mkdir(parents=True, exist_ok=True)
        self.tmp = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))

    def path(self, name: str) -> Path:
        self.names.append(name)
        return self.tmp / name

    def commit(self) -> list[Path]:
        meta_common = {
            "config_digest": self.scn.digest,
            "seed": self.scn.noise.seed,
            "version": __version__,
            "subcommand": self.args.command,
            "model": self.args.model or self.scn.model,
            "scenario": self.scn.name,
        }
        for name in list(self.names):
            nio.write_json(self.tmp / f"{name}.meta.json", dict(meta_common, file=name))
        done = []
        for name in self.names:
            for f in (name, f"{name}.meta.json"):
                os.replace(self.tmp / f, self.out / f)
                done.append(self.out / f)
        shutil.rmtree(self.tmp, ignore_errors=True)
        return done

    def abort(self) -> None:
        shutil.rmtree(self.tmp, ignore_errors=True)


def _model(args, scn: Scenario) -> str:
    return args.model or scn.model


def _data(args, scn: Scenario):
    if getattr(args, "raw", None):
        mat = nio.read_raw(args.raw)
        if mat.n_slow != scn.radar.trajectory.n_snapshots:
            raise nio.RawFormatError("raw file and scenario disagree on the number of snapshots")
        return mat
    return synthesize(_model(args, scn), scn.radar, scn.layout, scn.targets, scn.waveform, scn.noise)


def _require_targets(scn: Scenario) -> None:
    if len(scn.targets) == 0:
        raise ScenarioError("targets: this subcommand needs at least one target")


def cmd_design(args, scn: Scenario, st: _Staging) -> dict:
    from .plotting import plot_phase_profile

    nio.write_phase_csv(st.path(f"{scn.name}_phases.csv"), scn.layout)
    plot_phase_profile(st.path(f"{scn.name}_phases.png"), scn.layout)
    lay = scn.layout
    return {"elements": lay.n_elements, "clusters": lay.n_clusters,
            "modules_per_cluster": lay.modules_per_cluster, "elements_per_module": lay.n_mod}


def cmd_simulate(args, scn: Scenario, st: _Staging) -> dict:
    from .plotting import plot_range_profile

    mat = synthesize(_model(args, scn), scn.radar, scn.layout, scn.targets, scn.waveform, scn.noise)
    nio.write_raw(st.path(f"{scn.name}.emsraw"), mat)
    plot_range_profile(st.path(f"{scn.name}_range_profile.png"), mat)
    return {"n_fast": mat.n_fast, "n_slow": mat.n_slow, "model": _model(args, scn)}


def cmd_image(args, scn: Scenario, st: _Staging) -> dict:
    from .plotting import plot_image

    mat = _data(args, scn)
    img = backproject(mat, scn.radar, scn.layout, scn.grid, scn.weighting)
    nio.write_image_csv(st.path(f"{scn.name}_image.csv"), img)
    nio.write_pgm(st.path(f"{scn.name}_image.pgm"), img)
    plot_image(st.path(f"{scn.name}_image.png"), img, scn.targets)
    return {"nx": scn.grid.nx, "ny": scn.grid.ny, "pitch": scn.grid.dx}


def cmd_snrmap(args, scn: Scenario, st: _Staging) -> dict:
    from .plotting import plot_snr_map

    m = snr_map(scn.radar, scn.layout, scn.probes, scn.probe_rcs, scn.noise, scn.waveform,
                _model(args, scn), scn.weighting)
    nio.write_snr_csv(st.path(f"{scn.name}_snr.csv"), m)
    plot_snr_map(st.path(f"{scn.name}_snr.png"), m, scn.layout.anchors, scn.threshold_db)
    return {"coverage": coverage_fraction(m, scn.threshold_db), "threshold_db": scn.threshold_db,
            "max_snr_db": float(m.snr_db.max()), "min_snr_db": float(m.snr_db.min())}


def cmd_analyze(args, scn: Scenario, st: _Staging) -> dict:
    _require_targets(scn)
    mat = _data(args, scn)
    img = backproject(mat, scn.radar, scn.layout, scn.grid, scn.weighting)
    reports = []
    for t in scn.targets:
        rep = psf_metrics(img, t.position, scn.search_radius, scn.psf_floor_db, scn.noise.sigma2)
        reports.append(dict(rep.to_dict(), target=[t.position.x, t.position.y]))
    ghosts = ghost_report(img, scn.targets, scn.match_radius, scn.floor_db)
    nio.write_json(st.path(f"{scn.name}_psf.json"), {"psf": reports})
    nio.write_json(st.path(f"{scn.name}_ghosts.json"), {
        "floor_db": scn.floor_db, "match_radius": scn.match_radius,
        "ghosts": [g.to_dict() for g in ghosts],
    })
    return {"targets": len(reports), "ghosts": len(ghosts)}


COMMANDS = {
    "design": cmd_design,
    "simulate": cmd_simulate,
    "image": cmd_image,
    "snrmap": cmd_snrmap,
    "analyze": cmd_analyze,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nrems", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"nrems {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--scenario", required=True, help="scenario JSON file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--seed", type=int, help="override the noise seed (u64)")
        sp.add_argument("--threads", type=int, help="upper bound on worker threads")
        sp.add_argument("--model", choices=("general", "narrowbeam"), help="forward model")
        if name in ("image", "analyze"):
            sp.add_argument("--raw", help="EMSRAW1 file to focus instead of simulating")
    return p


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit": code}) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        return _fail("schema", "seed must fit in 64 unsigned bits", EXIT_SCHEMA)
    if args.threads is not None and args.threads < 1:
        return _fail("schema", "threads must be positive", EXIT_SCHEMA)
    st = None
    try:
        set_threads(args.threads)
        scn = load_scenario(args.scenario, args.seed)
        st = _Staging(Path(args.out), scn, args)
        summary = COMMANDS[args.command](args, scn, st)
        files = st.commit()
    except GeometryError as exc:
        code = _fail("geometry", str(exc), EXIT_GEOMETRY)
    except (OSError, nio.RawFormatError) as exc:
        code = _fail("io", str(exc), EXIT_IO)
    except (ScenarioError, ValueError) as exc:
        code = _fail("schema", str(exc), EXIT_SCHEMA)
    else:
        out = dict(summary, command=args.command, files=[f.name for f in files])
        sys.stdout.write(json.dumps(out, sort_keys=True) + "\n")
        return EXIT_OK
    if st is not None:
        st.abort()
    return code


if __name__ == "__main__":
    sys.exit(main())
