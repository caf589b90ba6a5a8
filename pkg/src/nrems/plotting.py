"""PNG figures that accompany the delimited outputs.

Figures use the non-interactive Agg backend and drop the ``Software`` PNG
metadata, so a rerun with the same inputs writes the same bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .ems import EmsLayout  # noqa: E402
from .imaging import ImageGrid, to_db_normalized  # noqa: E402

_PNG_META = {"Software": None}


def _extent(grid):
    hx, hy = 0.5 * grid.dx, 0.5 * grid.dy
    return (grid.x[0] - hx, grid.x[-1] + hx, grid.y[0] - hy, grid.y[-1] + hy)


def _save(fig, path) -> None:
    fig.savefig(path, dpi=110, metadata=_PNG_META)
    plt.close(fig)


def plot_phase_profile(path, layout: EmsLayout) -> None:
    """Wrapped design phase along the skin, module boundaries marked."""
    fig, ax = plt.subplots(figsize=(7.0, 3.2), constrained_layout=True)
    x_mm = np.asarray(layout.element_x) * 1e3
    ax.plot(x_mm, layout.wrapped_phases, ".", ms=1.5, color="tab:blue")
    edges = x_mm[:: layout.n_mod][1:] - 0.5e3 * layout.pitch
    for e in edges:
        ax.axvline(e, color="0.8", lw=0.5)
    ax.set_xlabel("x [mm]")
    ax.set_ylabel("phase [rad]")
    ax.set_ylim(0.0, 2.0 * np.pi)
    ax.set_title(f"{layout.n_clusters} clusters x {layout.modules_per_cluster} modules x {layout.n_mod} elements")
    _save(fig, path)


def plot_image(path, img: ImageGrid, truth=None, dynamic_range_db: float = 40.0) -> None:
    """Normalized image in dB with optional true target markers."""
    db = to_db_normalized(img)
    fig, ax = plt.subplots(figsize=(5.0, 6.0), constrained_layout=True)
    im = ax.imshow(db.T, origin="lower", extent=_extent(img.grid), vmin=-dynamic_range_db, vmax=0.0,
                   cmap="viridis", aspect="auto", interpolation="nearest")
    if truth is not None and len(truth):
        pos = truth.positions
        ax.plot(pos[:, 0], pos[:, 1], "r+", ms=8, mew=1.0)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    fig.colorbar(im, ax=ax, label="|I| [dB]")
    _save(fig, path)


def plot_snr_map(path, snr, anchors=(), threshold_db: float = 0.0) -> None:
    """SNR map with the threshold contour and the anchor points."""
    fig, ax = plt.subplots(figsize=(5.0, 6.0), constrained_layout=True)
    v = snr.snr_db
    im = ax.imshow(v.T, origin="lower", extent=_extent(snr.grid), cmap="magma", aspect="auto",
                   interpolation="nearest")
    if v.min() < threshold_db < v.max() and min(v.shape) > 1:
        ax.contour(snr.grid.x, snr.grid.y, v.T, levels=[threshold_db], colors="w", linewidths=0.8)
    if len(anchors):
        a = np.asarray([tuple(p) for p in anchors])
        ax.plot(a[:, 0], a[:, 1], "c^", ms=6)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    fig.colorbar(im, ax=ax, label="SNR [dB]")
    _save(fig, path)


def plot_range_profile(path, mat, column: int | None = None) -> None:
    """Magnitude of one slow-time column of the raw data."""
    col = mat.n_slow // 2 if column is None else column
    fig, ax = plt.subplots(figsize=(6.0, 3.0), constrained_layout=True)
    mag = np.abs(mat.data[:, col])
    ax.plot(mat.fast_times * 1e9, mag, lw=0.8)
    ax.set_xlabel("fast time [ns]")
    ax.set_ylabel("|y|")
    ax.set_title(f"snapshot {col} of {mat.n_slow}")
    _save(fig, path)
