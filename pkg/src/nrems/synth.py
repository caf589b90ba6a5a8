"""Forward model: received baseband data for the double bounce via the skin.

Two models are provided.

``synthesize_general``
    Exact near-field, spatially wideband model.  Every ordered element pair
    ``(n, n')`` of the illuminated window contributes a pulse at its own
    four-leg delay with its own amplitude and carrier phase.

``synthesize_narrowbeam``
    Far-field, narrowband model.  One pulse per snapshot at the phase-center
    delay, weighted by the squared array sum of the illuminated window.

Pulse placement
---------------
The pulse is stored on the same grid as the fast-time axis and is evaluated by
two-tap linear interpolation.  A pulse at delay ``u * dt`` (``u = j + f``) is then
exactly ``(1 - f) * g[k - j] + f * g[k - j - 1]``, so every pair is deposited
into a fractional-delay histogram that is convolved once with the pulse
samples.  This is the same per-pair envelope evaluation, only reordered.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numba as nb
import numpy as np

from .ems import EmsLayout
from .geometry import SPEED_OF_LIGHT, GeometryError, Point2, SourceTrajectory, as_point
from .waveform import Waveform

BOLTZMANN = 1.380649e-23


def thermal_noise_power(bandwidth: float, noise_figure_db: float = 10.0, temperature: float = 290.0) -> float:
    """Complex noise power ``k_B T0 B F`` in watts."""
    return BOLTZMANN * temperature * bandwidth * 10.0 ** (noise_figure_db / 10.0)


def calibration_constant(pitch: float, module_height: float, wavelength: float) -> float:
    """Amplitude calibration (m^3) of one element pair.

    Chains the radar equation over radar -> element -> target -> element ->
    radar with element area ``pitch * module_height`` acting as receive aperture
    and re-radiator.  Writing the radar gain as ``4 pi / dpsi**2`` gives
    ``|rho|^2 = P sigma (d h)^4 / (4 pi lambda^2 dpsi^4 D^8)``.
    """
    return (pitch * module_height) ** 2 / (wavelength * math.sqrt(4.0 * math.pi))


@dataclass(frozen=True)
class NoiseModel:
    sigma2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.sigma2 >= 0:
            raise ValueError("noise power must be non-negative")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class Target:
    position: Point2
    rcs: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "position", as_point(self.position))
        if not self.rcs > 0:
            raise ValueError("target RCS must be positive")
        if not self.position.y > 0:
            raise GeometryError("targets must lie above the skin (y > 0)")


@dataclass(frozen=True)
class TargetSet:
    targets: tuple = ()

    def __post_init__(self):
        ts = tuple(t if isinstance(t, Target) else Target(*t) for t in self.targets)
        object.__setattr__(self, "targets", ts)

    @classmethod
    def single(cls, position, rcs: float = 1.0) -> "TargetSet":
        return cls((Target(position, rcs),))

    def __len__(self):
        return len(self.targets)

    def __iter__(self):
        return iter(self.targets)

    def __add__(self, other: "TargetSet") -> "TargetSet":
        return TargetSet(self.targets + other.targets)

    @property
    def positions(self) -> np.ndarray:
        if not self.targets:
            return np.zeros((0, 2))
        return np.array([[t.position.x, t.position.y] for t in self.targets])

    @property
    def rcs(self) -> np.ndarray:
        return np.array([t.rcs for t in self.targets], dtype=float)

    def shifted(self, dx: float) -> "TargetSet":
        return TargetSet(tuple(Target(t.position.shifted(dx), t.rcs) for t in self.targets))


@dataclass(frozen=True)
class RadarConfig:
    """Radar parameters.

    Either the beamwidth ``dpsi`` or the physical aperture ``aperture`` is
    primary; when only the aperture is given the beamwidth follows
    ``lambda / (A cos psi)``.  ``directivity_exponent`` is the power-law exponent
    of the beamwidth in the received pair power.  ``calib`` defaults to
    :func:`calibration_constant` of the layout in use.
    """

    f0: float
    bandwidth: float
    psi: float
    trajectory: SourceTrajectory
    dpsi: float | None = None
    aperture: float | None = None
    tx_power: float = 1e-4
    directivity_exponent: float = 4.0
    calib: float | None = None

    def __post_init__(self):
        if not (self.f0 > 0 and self.bandwidth > 0):
            raise ValueError("carrier and bandwidth must be positive")
        if not (0.0 < self.psi <= math.pi / 2 + 1e-15):
            raise GeometryError("pointing angle outside (0, pi/2]")
        if not self.tx_power > 0:
            raise ValueError("transmit power must be positive")
        if self.dpsi is None:
            if self.aperture is None:
                raise ValueError("give the beamwidth or the physical aperture")
            if not self.aperture > 0:
                raise ValueError("aperture must be positive")
            cos_psi = math.cos(self.psi)
            if cos_psi < 1e-12:
                raise GeometryError("aperture-derived beamwidth diverges at psi = pi/2")
            object.__setattr__(self, "dpsi", self.wavelength / (self.aperture * cos_psi))
        if not self.dpsi > 0:
            raise ValueError("beamwidth must be positive")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f0

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def d_i(self) -> float:
        return self.trajectory.start.y / math.sin(self.psi)

    def calibration(self, layout: EmsLayout) -> float:
        if self.calib is not None:
            return self.calib
        return calibration_constant(layout.pitch, layout.module_height, self.wavelength)

    def digest(self) -> str:
        tr = self.trajectory
        doc = {
            "f0": self.f0, "bandwidth": self.bandwidth, "psi": self.psi, "dpsi": self.dpsi,
            "tx_power": self.tx_power, "directivity_exponent": self.directivity_exponent,
            "calib": self.calib, "start": list(tr.start), "speed": tr.speed,
            "duration": tr.duration, "dtau": tr.dtau,
        }
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class RxDataMatrix:
    """Fast-time x slow-time complex samples ``data[k, m]``."""

    data: np.ndarray = field(repr=False)
    t0: float
    dt: float
    tau0: float
    dtau: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.complex128, order="C")
        if arr.ndim != 2:
            raise ValueError("data must be a 2-D matrix")
        if not self.dt > 0:
            raise ValueError("fast-time step must be positive")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n_fast(self) -> int:
        return self.data.shape[0]

    @property
    def n_slow(self) -> int:
        return self.data.shape[1]

    @property
    def fast_times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_fast) * self.dt

    @property
    def slow_times(self) -> np.ndarray:
        return self.tau0 + np.arange(self.n_slow) * self.dtau


# --------------------------------------------------------------------------- geometry helpers


def n_rad(d_i: float, dpsi: float, pitch: float, psi: float, n_total: int | None = None) -> int:
    """Number of illuminated elements ``round(D_i dpsi / (d sin psi))``."""
    if not (d_i > 0 and dpsi > 0 and pitch > 0):
        raise ValueError("distance, beamwidth and pitch must be positive")
    if not (0.0 < psi <= math.pi / 2 + 1e-15):
        raise GeometryError("pointing angle outside (0, pi/2]")
    n = max(1, int(round(d_i * dpsi / (pitch * math.sin(psi)))))
    if n_total is not None:
        n = min(n, int(n_total))
    return n


def _window_bounds(layout: EmsLayout, p_x: np.ndarray, nr: int) -> tuple[np.ndarray, np.ndarray]:
    lo_ext, hi_ext = layout.extent
    x_first = layout.element_x[0]
    n0 = np.floor((p_x - x_first) / layout.pitch + 0.5).astype(np.int64)
    lo = n0 - nr // 2
    hi = lo + nr
    lo = np.clip(lo, 0, layout.n_elements)
    hi = np.clip(hi, 0, layout.n_elements)
    miss = (p_x < lo_ext) | (p_x > hi_ext)
    lo[miss] = 0
    hi[miss] = 0
    return lo, hi


def illumination_window(layout: EmsLayout, s, psi: float, nr: int) -> range:
    """Array positions lit by the beam from ``s``; empty if the boresight misses.

    The window has ``nr`` elements centered on the element nearest the
    boresight point (``n0 - nr//2 ... n0 + nr - nr//2 - 1``), truncated at the
    skin edges.
    """
    s = as_point(s)
    p_x = s.x + s.y / math.tan(psi) if psi < math.pi / 2 else s.x
    lo, hi = _window_bounds(layout, np.array([p_x]), nr)
    return range(int(lo[0]), int(hi[0]))


@dataclass(frozen=True)
class SnapshotGeometry:
    """Per-snapshot source position, continuous boresight point and window."""

    sources: np.ndarray
    center_x: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    d_i: float
    n_rad: int

    @property
    def lit(self) -> np.ndarray:
        return self.hi > self.lo


def snapshot_geometry(radar: RadarConfig, layout: EmsLayout) -> SnapshotGeometry:
    src = radar.trajectory.positions()
    d_i = radar.d_i
    c_x = src[:, 0] + d_i * math.cos(radar.psi)
    nr = n_rad(d_i, radar.dpsi, layout.pitch, radar.psi, layout.n_elements)
    lo, hi = _window_bounds(layout, c_x, nr)
    return SnapshotGeometry(src, c_x, lo, hi, d_i, nr)


def exact_delay(s, x_n, r, x_n2) -> float:
    """Four-leg delay ``(D_sn + D_nr + D_rn' + D_n's) / c``."""
    s, x_n, r, x_n2 = map(as_point, (s, x_n, r, x_n2))
    total = s.distance(x_n) + x_n.distance(r) + r.distance(x_n2) + x_n2.distance(s)
    return total / SPEED_OF_LIGHT


def farfield_delay(d_i: float, d_o: float, n: float, n2: float, pitch: float, u_i: float, u_o: float) -> float:
    """Linearized delay about the phase center.

    ``u_i`` is the x direction cosine of the incident ray (source -> skin) and
    ``u_o`` that of the outgoing ray (skin -> target).  Each element offset
    ``n d`` changes its two legs by ``n d (u_i - u_o)``.
    """
    return (2.0 * (d_i + d_o) + (n + n2) * pitch * (u_i - u_o)) / SPEED_OF_LIGHT


def narrowband_margin(bandwidth: float, d_i: float, dpsi: float, psi: float) -> float:
    """``(1/B) / ((D_i / c) dpsi cot psi)``; at least 10 for a safe narrowband model."""
    if not (0.0 < psi <= math.pi / 2 + 1e-15):
        raise GeometryError("pointing angle outside (0, pi/2]")
    cot = math.cos(psi) / math.sin(psi)
    spread = d_i / SPEED_OF_LIGHT * dpsi * cot
    if spread <= 1e-300 or abs(psi - math.pi / 2) < 1e-12:
        return math.inf
    return (1.0 / bandwidth) / spread


def pair_amplitude(
    d_sn: float,
    d_nr: float,
    d_rn2: float,
    d_n2s: float,
    dpsi: float,
    tx_power: float,
    rcs: float,
    calib: float,
    exponent: float = 4.0,
) -> float:
    """Real pair amplitude ``calib sqrt(P sigma) dpsi^(-exponent/2) / (D D D D)``."""
    dists = (d_sn, d_nr, d_rn2, d_n2s)
    if min(dists) <= 0:
        raise GeometryError("pair amplitude needs positive distances")
    return calib * math.sqrt(tx_power * rcs) * dpsi ** (-0.5 * exponent) / math.prod(dists)


def _target_scale(radar: RadarConfig, layout: EmsLayout, targets: TargetSet) -> np.ndarray:
    calib = radar.calibration(layout)
    return calib * np.sqrt(radar.tx_power * targets.rcs) * radar.dpsi ** (-0.5 * radar.directivity_exponent)


# --------------------------------------------------------------------------- fast-time axis


def fast_time_axis(
    radar: RadarConfig, layout: EmsLayout, targets: TargetSet, wf: Waveform
) -> tuple[float, int]:
    """Origin and length of a fast-time grid covering every echo of the scene.

    The bound uses the extreme element-to-source and element-to-target legs of
    each lit window, so it covers both the exact and the narrow-beam delays.
    """
    geo = snapshot_geometry(radar, layout)
    if not geo.lit.any():
        raise GeometryError("boresight never intersects the skin")
    if len(targets) == 0:
        t_lo = t_hi = 2.0 * geo.d_i / SPEED_OF_LIGHT
    else:
        t_lo, t_hi = math.inf, -math.inf
        pos = targets.positions
        x = layout.element_x
        for m in np.flatnonzero(geo.lit):
            xs = x[geo.lo[m] : geo.hi[m]]
            # the boresight point carries the narrow-beam phase-center delay
            xs = np.append(xs, geo.center_x[m])
            sx, sy = geo.sources[m]
            d_s = np.hypot(xs - sx, sy)
            for rx, ry in pos:
                a = d_s + np.hypot(rx - xs, ry)
                t_lo = min(t_lo, 2.0 * a.min() / SPEED_OF_LIGHT)
                t_hi = max(t_hi, 2.0 * a.max() / SPEED_OF_LIGHT)
    dt = wf.dt
    margin = wf.t_support + 2 * dt
    t0 = math.floor((t_lo - margin) / dt) * dt
    n_fast = int(math.ceil((t_hi + margin - t0) / dt)) + 1
    return t0, n_fast


# --------------------------------------------------------------------------- kernels


@nb.njit(cache=True, parallel=True)
def _general_hist(src, lo, hi, ex, ephi, tpos, tamp, k0, t0, dt, n_fast, off):
    n_slow = src.shape[0]
    n_hist = n_fast + 2 * off
    hist = np.zeros((n_slow, n_hist), dtype=np.complex128)
    inv = 1.0 / (dt * 299792458.0)
    for m in nb.prange(n_slow):
        a0, a1 = lo[m], hi[m]
        w = a1 - a0
        if w <= 0:
            continue
        sx, sy = src[m, 0], src[m, 1]
        a = np.empty(w)
        cc = np.empty(w, dtype=np.complex128)
        for q in range(tpos.shape[0]):
            rx, ry = tpos[q, 0], tpos[q, 1]
            for i in range(w):
                xn = ex[a0 + i]
                dsn = math.hypot(xn - sx, sy)
                dnr = math.hypot(rx - xn, ry)
                a[i] = dsn + dnr
                ph = -k0 * a[i]
                cc[i] = ephi[a0 + i] * complex(math.cos(ph), math.sin(ph)) / (dsn * dnr)
            amp = tamp[q]
            for i in range(w):
                ci = amp * cc[i]
                for j in range(i, w):
                    coef = ci * cc[j]
                    if j != i:
                        coef *= 2.0
                    u = (a[i] + a[j]) * inv - t0 / dt
                    jj = math.floor(u)
                    f = u - jj
                    idx = int(jj) + off
                    if idx < 0 or idx + 1 >= n_hist:
                        continue
                    hist[m, idx] += coef * (1.0 - f)
                    hist[m, idx + 1] += coef * f
    return hist


def array_model(layout: EmsLayout) -> tuple:
    """Kernel-side description of the skin as runs of affine phase.

    Returns ``(x, phases, segment_of_element, segment_end, segment_step, pitch)``.
    Each module with an affine profile becomes one segment whose array sum has a
    closed form; any other module is split into single-element segments.
    """
    x = np.ascontiguousarray(layout.element_x, dtype=float)
    ph = np.ascontiguousarray(layout.phases, dtype=float)
    n = len(x)
    pitch = float(x[1] - x[0]) if n > 1 else float(layout.pitch)
    if n > 2 and np.max(np.abs(np.diff(x, 2))) > 1e-9 * pitch:
        raise ValueError("element positions must be uniformly spaced")
    seg_of = np.empty(n, dtype=np.int64)
    ends, steps = [], []
    bounds = np.flatnonzero(np.diff(layout.module_id)) + 1
    for a, b in zip(np.r_[0, bounds], np.r_[bounds, n]):
        # affinity is tested modulo 2 pi so wrapped profiles qualify too
        step = np.angle(np.exp(1j * np.diff(ph[a:b])))
        affine = len(step) < 2 or np.max(np.abs(step - step[0])) < 1e-9
        if affine:
            seg_of[a:b] = len(ends)
            ends.append(b)
            steps.append(float(np.mean(step)) if len(step) else 0.0)
        else:
            for i in range(a, b):
                seg_of[i] = len(ends)
                ends.append(i + 1)
                steps.append(0.0)
    return x, ph, seg_of, np.array(ends, dtype=np.int64), np.array(steps), pitch


@nb.njit(cache=True)
def _array_sum(am, a0, a1, p_x, k0g):
    """``sum_n exp(j phi_n) exp(-j k g (x_n - p_x))`` over positions ``[a0, a1)``.

    Each affine segment is summed in closed form (Dirichlet kernel).
    """
    x, ph, seg_of, seg_end, seg_step, pitch = am
    acc = 0.0 + 0.0j
    a = a0
    while a < a1:
        s = seg_of[a]
        b = min(a1, seg_end[s])
        n = b - a
        psi0 = ph[a] - k0g * (x[a] - p_x)
        if n == 1:
            acc += complex(math.cos(psi0), math.sin(psi0))
        else:
            theta = seg_step[s] - k0g * pitch
            theta -= 2.0 * math.pi * math.floor(theta / (2.0 * math.pi) + 0.5)
            half = 0.5 * theta
            if abs(half) < 1e-7:
                dk = n * (1.0 - (n * n - 1.0) * half * half / 6.0)
            else:
                dk = math.sin(n * half) / math.sin(half)
            c = psi0 + half * (n - 1)
            acc += dk * complex(math.cos(c), math.sin(c))
        a = b
    return acc


@nb.njit(cache=True, parallel=True)
def _narrowbeam_hist(src, cx, lo, hi, am, tpos, tamp, k0, cos_psi, d_i, t0, dt, n_fast, off):
    n_slow = src.shape[0]
    n_hist = n_fast + 2 * off
    hist = np.zeros((n_slow, n_hist), dtype=np.complex128)
    for m in nb.prange(n_slow):
        if hi[m] <= lo[m]:
            continue
        p_x = cx[m]
        for q in range(tpos.shape[0]):
            rx, ry = tpos[q, 0], tpos[q, 1]
            d_o = math.hypot(rx - p_x, ry)
            g = cos_psi - (rx - p_x) / d_o
            s1 = _array_sum(am, lo[m], hi[m], p_x, k0 * g)
            ph = -2.0 * k0 * (d_i + d_o)
            coef = tamp[q] / (d_i * d_o) ** 2 * s1 * s1 * complex(math.cos(ph), math.sin(ph))
            u = 2.0 * (d_i + d_o) / (299792458.0 * dt) - t0 / dt
            jj = math.floor(u)
            f = u - jj
            idx = int(jj) + off
            if idx < 0 or idx + 1 >= n_hist:
                continue
            hist[m, idx] += coef * (1.0 - f)
            hist[m, idx + 1] += coef * f
    return hist


def _render(hist: np.ndarray, wf: Waveform, n_fast: int, off: int) -> np.ndarray:
    """Convolve each histogram row with the pulse; returns ``(n_fast, n_slow)``."""
    nh = wf.n_half
    samples = np.asarray(wf.samples)
    out = np.zeros((n_fast, hist.shape[0]), dtype=np.complex128)
    start = nh + off
    for m in range(hist.shape[0]):
        row = hist[m]
        nz = np.flatnonzero(row)
        if nz.size == 0:
            continue
        # convolve only the occupied span of the histogram
        a, b = nz[0], nz[-1] + 1
        full = np.convolve(row[a:b], samples)
        # full[i] corresponds to global conv index a + i
        g0 = start - a
        lo_i, hi_i = max(g0, 0), min(g0 + n_fast, full.size)
        if hi_i > lo_i:
            out[lo_i - g0 : hi_i - g0, m] = full[lo_i:hi_i]
    return out


def _meta(radar: RadarConfig, model: str, noise: NoiseModel | None) -> dict:
    from . import __version__

    return {
        "model": model,
        "config_digest": radar.digest(),
        "seed": None if noise is None else int(noise.seed),
        "sigma2": 0.0 if noise is None else float(noise.sigma2),
        "version": __version__,
    }


def _synthesize(model, radar, layout, targets, wf, noise=None, fast_window=None):
    if abs(wf.f0 - radar.f0) > 1e-6 * radar.f0 or abs(wf.bandwidth - radar.bandwidth) > 1e-6 * radar.bandwidth:
        raise ValueError("waveform and radar disagree on carrier or bandwidth")
    geo = snapshot_geometry(radar, layout)
    if not geo.lit.any():
        raise GeometryError("boresight never intersects the skin: scene never visible")
    if fast_window is None:
        t0, n_fast = fast_time_axis(radar, layout, targets, wf)
    else:
        t0, n_fast = float(fast_window[0]), int(fast_window[1])
    dt = wf.dt
    off = wf.n_half + 2
    tpos = np.ascontiguousarray(targets.positions, dtype=float)
    tamp = _target_scale(radar, layout, targets) if len(targets) else np.zeros(0)
    ex = np.ascontiguousarray(layout.element_x, dtype=float)
    ephi = np.exp(1j * np.asarray(layout.phases, dtype=float))
    k0 = radar.wavenumber
    if model == "general":
        hist = _general_hist(geo.sources, geo.lo, geo.hi, ex, ephi, tpos, tamp, k0, t0, dt, n_fast, off)
    else:
        hist = _narrowbeam_hist(
            geo.sources, geo.center_x, geo.lo, geo.hi, array_model(layout), tpos, tamp,
            k0, math.cos(radar.psi), geo.d_i, t0, dt, n_fast, off,
        )
    data = _render(hist, wf, n_fast, off)
    mat = RxDataMatrix(data, t0, dt, 0.0, radar.trajectory.dtau, _meta(radar, model, noise))
    if noise is not None and noise.sigma2 > 0:
        mat = add_noise(mat, noise)
    return mat


def synthesize_general(
    radar: RadarConfig,
    layout: EmsLayout,
    targets: TargetSet,
    wf: Waveform,
    noise: NoiseModel | None = None,
    fast_window: tuple[float, int] | None = None,
) -> RxDataMatrix:
    """Exact pairwise synthesis (all ordered pairs, diagonal included)."""
    return _synthesize("general", radar, layout, targets, wf, noise, fast_window)


def synthesize_narrowbeam(
    radar: RadarConfig,
    layout: EmsLayout,
    targets: TargetSet,
    wf: Waveform,
    noise: NoiseModel | None = None,
    fast_window: tuple[float, int] | None = None,
) -> RxDataMatrix:
    """Narrow-beam synthesis with the factorized (squared) array sum."""
    return _synthesize("narrowbeam", radar, layout, targets, wf, noise, fast_window)


def synthesize(model: str, *args, **kwargs) -> RxDataMatrix:
    """Dispatch on ``model`` (``"general"`` or ``"narrowbeam"``)."""
    if model not in ("general", "narrowbeam"):
        raise ValueError(f"unknown model {model!r}")
    return _synthesize(model, *args, **kwargs)


def narrowbeam_double_sum(phases, pitch: float, wavelength: float, g: float, pairwise: bool = False) -> complex:
    """Double array sum for element offsets ``n = 0 .. len-1``.

    ``pairwise=True`` evaluates all ``len**2`` terms; otherwise the squared
    single sum is returned.
    """
    phases = np.asarray(phases, dtype=float)
    n = np.arange(len(phases))
    term = np.exp(1j * phases) * np.exp(-1j * 2 * np.pi * pitch / wavelength * n * g)
    if pairwise:
        return complex(np.sum(term[:, None] * term[None, :]))
    s = term.sum()
    return complex(s * s)


# --------------------------------------------------------------------------- noise


def noise_column(seed: int, column: int, n_fast: int, sigma2: float) -> np.ndarray:
    """Complex Gaussian noise for one slow-time column (counter-based stream)."""
    bitgen = np.random.Philox(key=int(seed), counter=[0, 0, 0, int(column)])
    z = np.random.Generator(bitgen).standard_normal(2 * n_fast)
    scale = math.sqrt(sigma2 / 2.0)
    return scale * (z[0::2] + 1j * z[1::2])


def add_noise(mat: RxDataMatrix, noise: NoiseModel) -> RxDataMatrix:
    """Add ``CN(0, sigma2)`` noise; each column depends only on (seed, column)."""
    if noise.sigma2 == 0:
        return mat
    data = np.array(mat.data)
    for m in range(mat.n_slow):
        data[:, m] += noise_column(noise.seed, m, mat.n_fast, noise.sigma2)
    meta = dict(mat.meta, seed=int(noise.seed), sigma2=float(noise.sigma2))
    return RxDataMatrix(data, mat.t0, mat.dt, mat.tau0, mat.dtau, meta)
