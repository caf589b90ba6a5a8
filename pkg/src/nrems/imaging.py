"""Time-domain back-projection onto a rectangular raster of the hidden area.

For a pixel ``r`` and snapshot ``tau`` the echo is sampled at the two-way delay
``2 (D_i + D_o(r, tau)) / c`` through the continuous boresight point, phase
rotated by ``exp(+j 4 pi (D_i + D_o) / lambda)`` and summed over ``tau`` in
ascending order.

Two weightings are available.

``"plain"``
    Delay and carrier compensation only.
``"matched"`` (default)
    Additionally multiplies by the conjugate of the squared array sum that the
    skin imprints on an echo from ``r``, normalized by ``N_rad**2``.  The skin's
    own phase gradients are then compensated and the image focuses where the
    skin points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .ems import EmsLayout
from .geometry import SPEED_OF_LIGHT
from .synth import RadarConfig, RxDataMatrix, _array_sum, array_model, snapshot_geometry

DB_FLOOR = -120.0
WEIGHTINGS = ("matched", "plain")


@dataclass(frozen=True)
class GridSpec:
    """Pixel-center raster ``x0 + i dx, y0 + j dy``."""

    x0: float
    y0: float
    dx: float
    dy: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError("pixel pitch must be positive")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs at least one pixel")

    @classmethod
    def from_bounds(cls, xmin: float, xmax: float, ymin: float, ymax: float, pitch: float, pitch_y: float | None = None):
        pitch_y = pitch if pitch_y is None else pitch_y
        nx = int(math.floor((xmax - xmin) / pitch + 1e-9)) + 1
        ny = int(math.floor((ymax - ymin) / pitch_y + 1e-9)) + 1
        return cls(float(xmin), float(ymin), float(pitch), float(pitch_y), nx, ny)

    @classmethod
    def centered(cls, center, half_x: float, half_y: float, pitch: float):
        cx, cy = center
        n_x = int(round(half_x / pitch))
        n_y = int(round(half_y / pitch))
        return cls(cx - n_x * pitch, cy - n_y * pitch, pitch, pitch, 2 * n_x + 1, 2 * n_y + 1)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + np.arange(self.nx) * self.dx

    @property
    def y(self) -> np.ndarray:
        return self.y0 + np.arange(self.ny) * self.dy

    def points(self) -> np.ndarray:
        """Pixel centers, shape ``(nx * ny, 2)``, x-major."""
        xx, yy = np.meshgrid(self.x, self.y, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def shifted(self, dx: float) -> "GridSpec":
        return GridSpec(self.x0 + dx, self.y0, self.dx, self.dy, self.nx, self.ny)


@dataclass(frozen=True)
class ImageGrid:
    """Complex image ``values[ix, iy]`` plus the noise gain of every pixel.

    ``noise_gain`` is the sum of squared interpolation-and-weight coefficients,
    so white data noise of power ``sigma2`` appears in a pixel with power
    ``sigma2 * noise_gain``.
    """

    grid: GridSpec
    values: np.ndarray = field(repr=False)
    noise_gain: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (self.grid.nx, self.grid.ny):
            raise ValueError("image shape does not match its grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("image values must be finite")

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def y(self) -> np.ndarray:
        return self.grid.y

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


def default_pixel_pitch(bandwidth: float, wavelength: float, r_max: float, aperture: float) -> float:
    """Quarter of the finer of range and cross-range resolution."""
    return min(SPEED_OF_LIGHT / (2.0 * bandwidth), wavelength * r_max / (2.0 * aperture)) / 4.0


@nb.njit(cache=True, parallel=True)
def _bp_kernel(data, t0, dt, pix, cx, lo, hi, am, k0, cos_psi, d_i, matched, norm):
    n_pix = pix.shape[0]
    n_fast = data.shape[0]
    out = np.zeros(n_pix, dtype=np.complex128)
    gain = np.zeros(n_pix)
    for p in nb.prange(n_pix):
        rx, ry = pix[p, 0], pix[p, 1]
        acc = 0.0 + 0.0j
        g2 = 0.0
        # ascending slow time keeps the summation order fixed
        for m in range(cx.shape[0]):
            if hi[m] <= lo[m]:
                continue
            p_x = cx[m]
            d_o = math.hypot(rx - p_x, ry)
            path = d_i + d_o
            ph = 2.0 * k0 * path
            w = complex(math.cos(ph), math.sin(ph))
            if matched:
                g = cos_psi - (rx - p_x) / d_o
                s1 = _array_sum(am, lo[m], hi[m], p_x, k0 * g)
                w *= (s1 * s1).conjugate() * norm
            u = (2.0 * path / 299792458.0 - t0) / dt
            if u < 0.0 or u > n_fast - 1:
                continue
            i0 = int(math.floor(u))
            if i0 >= n_fast - 1:
                i0 = n_fast - 2
            a = u - i0
            sample = (1.0 - a) * data[i0, m] + a * data[i0 + 1, m]
            acc += w * sample
            g2 += (w.real * w.real + w.imag * w.imag) * ((1.0 - a) ** 2 + a * a)
        out[p] = acc
        gain[p] = g2
    return out, gain


def backproject_points(
    data: RxDataMatrix,
    radar: RadarConfig,
    layout: EmsLayout,
    points,
    weighting: str = "matched",
) -> tuple[np.ndarray, np.ndarray]:
    """Back-project onto arbitrary points; returns ``(values, noise_gain)``."""
    if weighting not in WEIGHTINGS:
        raise ValueError(f"weighting must be one of {WEIGHTINGS}")
    pts = np.ascontiguousarray(np.asarray(points, dtype=float).reshape(-1, 2))
    if np.any(pts[:, 1] <= 0):
        raise ValueError("image points must lie above the skin (y > 0)")
    geo = snapshot_geometry(radar, layout)
    if geo.sources.shape[0] != data.n_slow:
        raise ValueError("data and trajectory disagree on the number of snapshots")
    if data.n_fast < 2:
        raise ValueError("need at least two fast-time samples")
    return _bp_kernel(
        np.asarray(data.data), data.t0, data.dt, pts, geo.center_x, geo.lo, geo.hi,
        array_model(layout), radar.wavenumber,
        math.cos(radar.psi), geo.d_i, weighting == "matched", 1.0 / geo.n_rad**2,
    )


def backproject(
    data: RxDataMatrix,
    radar: RadarConfig,
    layout: EmsLayout,
    grid: GridSpec,
    weighting: str = "matched",
) -> ImageGrid:
    """Focus ``data`` onto ``grid``."""
    vals, gain = backproject_points(data, radar, layout, grid.points(), weighting)
    return ImageGrid(grid, vals.reshape(grid.nx, grid.ny), gain.reshape(grid.nx, grid.ny))


def to_db_normalized(img: ImageGrid | np.ndarray, floor_db: float = DB_FLOOR) -> np.ndarray:
    """``20 log10(|I| / max |I|)`` clamped below at ``floor_db``."""
    mag = np.abs(img.values if isinstance(img, ImageGrid) else np.asarray(img))
    peak = mag.max() if mag.size else 0.0
    if not peak > 0:
        raise ValueError("cannot normalize an all-zero image")
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag / peak)
    return np.maximum(db, floor_db)
