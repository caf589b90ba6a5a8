"""Range-compressed baseband pulse.

The pulse is a sinc of bandwidth ``B`` under a raised-cosine (Hann) taper that
brings it smoothly to zero at ``+-n_lobes / B``.  It is stored on a uniform grid
with spacing ``1 / (oversample * B)`` and evaluated by linear interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import SPEED_OF_LIGHT


@dataclass(frozen=True)
class Waveform:
    f0: float
    bandwidth: float
    oversample: int
    n_lobes: int
    samples: np.ndarray = field(repr=False)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f0

    @property
    def dt(self) -> float:
        return 1.0 / (self.oversample * self.bandwidth)

    @property
    def t_support(self) -> float:
        return self.n_lobes / self.bandwidth

    @property
    def n_half(self) -> int:
        return (len(self.samples) - 1) // 2

    @property
    def times(self) -> np.ndarray:
        return (np.arange(len(self.samples)) - self.n_half) * self.dt

    def __call__(self, t):
        return eval_pulse(self, t)


def make_pulse(f0: float, bandwidth: float, oversample: int = 8, n_lobes: int = 16) -> Waveform:
    if not (f0 > 0 and bandwidth > 0):
        raise ValueError("carrier and bandwidth must be positive")
    if oversample < 2:
        raise ValueError("oversample must be >= 2")
    if n_lobes < 4:
        raise ValueError("n_lobes must be >= 4")
    oversample, n_lobes = int(oversample), int(n_lobes)
    n_half = oversample * n_lobes
    k = np.arange(-n_half, n_half + 1)
    bt = k / oversample  # B * t on the grid
    taper = 0.5 * (1.0 + np.cos(np.pi * bt / n_lobes))
    g = np.sinc(bt) * taper
    g[k == 0] = 1.0
    samples = g.astype(np.complex128)
    samples.setflags(write=False)
    return Waveform(float(f0), float(bandwidth), oversample, n_lobes, samples)


def eval_pulse(w: Waveform, t):
    """Linearly interpolated pulse value(s); exactly zero outside the support."""
    t = np.asarray(t, dtype=float)
    pos = t / w.dt + w.n_half
    scalar = pos.ndim == 0
    pos = np.atleast_1d(pos)
    out = np.zeros(pos.shape, dtype=np.complex128)
    inside = (pos >= 0) & (pos <= len(w.samples) - 1)
    if np.any(inside):
        p = pos[inside]
        # snap round-off so that grid nodes return stored samples bit-exactly
        nearest = np.rint(p)
        p = np.where(np.abs(p - nearest) < 1e-9, nearest, p)
        i0 = np.minimum(np.floor(p).astype(np.int64), len(w.samples) - 2)
        a = p - i0
        out[inside] = (1.0 - a) * w.samples[i0] + a * w.samples[i0 + 1]
        exact = a == 0.0
        out[np.flatnonzero(inside)[exact]] = w.samples[i0[exact]]
    return out[0] if scalar else out


def range_resolution(bandwidth: float) -> float:
    """Two-way range resolution ``c / (2 B)``."""
    return SPEED_OF_LIGHT / (2.0 * bandwidth)
