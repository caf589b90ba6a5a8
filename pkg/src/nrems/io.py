"""File formats: phase masks, raw echoes, images, SNR maps and JSON reports.

Every writer is deterministic: identical inputs give byte-identical files.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .ems import EmsLayout
from .imaging import ImageGrid, to_db_normalized
from .synth import RxDataMatrix

RAW_MAGIC = b"EMSRAW1\0"
_RAW_HEADER = struct.Struct("<8sQQdddd")
PGM_RANGE_DB = (-80.0, 0.0)


def _fmt(v: float) -> str:
    return repr(float(v))


def write_phase_csv(path, layout: EmsLayout) -> None:
    lines = ["element_index,x_meters,phase_radians,module_id,cluster_id"]
    for n, x, ph, m, k in zip(
        layout.element_index, layout.element_x, layout.wrapped_phases, layout.module_id, layout.cluster_id
    ):
        lines.append(f"{int(n)},{_fmt(x)},{_fmt(ph)},{int(m)},{int(k)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_phase_csv(path) -> dict[str, np.ndarray]:
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {
        "element_index": arr[:, 0].astype(np.int64),
        "x_meters": arr[:, 1],
        "phase_radians": arr[:, 2],
        "module_id": arr[:, 3].astype(np.int64),
        "cluster_id": arr[:, 4].astype(np.int64),
    }


def write_raw(path, mat: RxDataMatrix) -> None:
    """EMSRAW1: header then interleaved little-endian complex128, fast index contiguous."""
    header = _RAW_HEADER.pack(RAW_MAGIC, mat.n_fast, mat.n_slow, mat.t0, mat.dt, mat.tau0, mat.dtau)
    # column-major order puts consecutive fast-time samples next to each other
    body = np.asarray(mat.data).astype("<c16").tobytes(order="F")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)


class RawFormatError(ValueError):
    pass


def read_raw(path, meta: dict | None = None) -> RxDataMatrix:
    blob = Path(path).read_bytes()
    if len(blob) < _RAW_HEADER.size:
        raise RawFormatError("file too short for an EMSRAW1 header")
    magic, n_fast, n_slow, t0, dt, tau0, dtau = _RAW_HEADER.unpack_from(blob)
    if magic != RAW_MAGIC:
        raise RawFormatError("bad magic, not an EMSRAW1 file")
    expected = _RAW_HEADER.size + 16 * n_fast * n_slow
    if len(blob) != expected:
        raise RawFormatError(f"payload size mismatch: {len(blob)} bytes, expected {expected}")
    flat = np.frombuffer(blob, dtype="<c16", offset=_RAW_HEADER.size)
    data = flat.reshape((n_fast, n_slow), order="F")
    return RxDataMatrix(data, t0, dt, tau0, dtau, dict(meta or {}))


def write_image_csv(path, img: ImageGrid) -> None:
    db = to_db_normalized(img)
    lines = ["x,y,magnitude_db"]
    for i, x in enumerate(img.x):
        for j, y in enumerate(img.y):
            lines.append(f"{_fmt(x)},{_fmt(y)},{_fmt(db[i, j])}")
    Path(path).write_text("\n".join(lines) + "\n")


def image_to_pgm_bytes(img: ImageGrid) -> bytes:
    """16-bit binary PGM, top row = largest y, [-80, 0] dB mapped to [0, 65535]."""
    lo, hi = PGM_RANGE_DB
    db = np.clip(to_db_normalized(img), lo, hi)
    levels = np.rint((db - lo) / (hi - lo) * 65535.0).astype(">u2")
    raster = levels.T[::-1, :]  # rows along y, from max y down
    header = f"P5\n{img.grid.nx} {img.grid.ny}\n65535\n".encode("ascii")
    return header + np.ascontiguousarray(raster).tobytes()


def write_pgm(path, img: ImageGrid) -> None:
    Path(path).write_bytes(image_to_pgm_bytes(img))


def read_pgm(path) -> np.ndarray:
    """Raster of a 16-bit P5 file as written by :func:`write_pgm` (rows from max y)."""
    blob = Path(path).read_bytes()
    parts = blob.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    nx, ny = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=">u2").reshape(ny, nx)


def write_snr_csv(path, snr) -> None:
    lines = ["x,y,snr_db"]
    for i, x in enumerate(snr.grid.x):
        for j, y in enumerate(snr.grid.y):
            lines.append(f"{_fmt(x)},{_fmt(y)},{_fmt(snr.snr_db[i, j])}")
    Path(path).write_text("\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps_json(obj))
