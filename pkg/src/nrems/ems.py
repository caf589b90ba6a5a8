"""Modular electromagnetic-skin layout and phase design.

The skin is a line of ``N = K * L * N_mod`` elements at pitch ``d`` on the x axis,
split into ``K`` clusters of ``L`` modules.  Each module carries an affine phase
profile (a linear gradient), and the modules of one cluster are stitched so that
together they approximate the curved profile focusing a plane wave arriving at
the pointing angle onto that cluster's anchor point.

Phase convention: the element reflection coefficient is ``exp(+j phi_n)`` and
propagation over a path ``D`` contributes ``exp(-j 2 pi D / lambda)``, so a
profile ``phi_n = 2 pi / lambda * (path through element n)`` is phase matched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .geometry import GeometryError, Point2, as_point, x_projection

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EmsLayout:
    """Immutable element layout with per-element design phases.

    ``phases`` are the design phases in radians, kept continuous (not wrapped)
    across each cluster so they can be compared with the exact focusing
    profile; use :attr:`wrapped_phases` for the manufactured values.
    """

    pitch: float
    wavelength: float
    n_mod: int
    modules_per_cluster: int
    n_clusters: int
    element_x: np.ndarray = field(repr=False)
    phases: np.ndarray = field(repr=False)
    module_id: np.ndarray = field(repr=False)
    cluster_id: np.ndarray = field(repr=False)
    module_centers: np.ndarray = field(repr=False)
    module_slopes: np.ndarray = field(repr=False)
    anchors: tuple = ()
    module_height: float = 0.5

    def __post_init__(self):
        if not self.pitch > 0:
            raise ValueError("element pitch must be positive")
        n = self.n_clusters * self.modules_per_cluster * self.n_mod
        for name in ("element_x", "phases", "module_id", "cluster_id"):
            arr = np.asarray(getattr(self, name))
            if arr.shape != (n,):
                raise ValueError(f"{name} must have {n} entries, got {arr.shape}")
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("module_centers", "module_slopes"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "anchors", tuple(as_point(a) for a in self.anchors))

    @property
    def n_elements(self) -> int:
        return len(self.element_x)

    @property
    def n_modules(self) -> int:
        return self.n_clusters * self.modules_per_cluster

    @property
    def element_index(self) -> np.ndarray:
        """Signed element indices ``n = -N/2 ... N/2 - 1``."""
        return np.arange(self.n_elements) - self.n_elements // 2

    @property
    def extent(self) -> tuple[float, float]:
        half = 0.5 * self.pitch
        return float(self.element_x[0] - half), float(self.element_x[-1] + half)

    @property
    def center_x(self) -> float:
        lo, hi = self.extent
        return 0.5 * (lo + hi)

    @property
    def wrapped_phases(self) -> np.ndarray:
        return np.mod(self.phases, TWO_PI)

    @property
    def wavenumber(self) -> float:
        return TWO_PI / self.wavelength

    def nearest_element(self, x: float) -> int:
        """Array position of the element closest to ``x`` (may fall outside)."""
        return int(math.floor((x - self.element_x[0]) / self.pitch + 0.5))

    def with_phases(self, phases) -> "EmsLayout":
        return replace(self, phases=np.asarray(phases, dtype=float))

    def as_mirror(self) -> "EmsLayout":
        """Same skin with every phase set to zero (plain specular reflector)."""
        return replace(
            self,
            phases=np.zeros(self.n_elements),
            module_slopes=np.zeros(self.n_modules),
        )

    def shifted(self, dx: float) -> "EmsLayout":
        """Rigidly translated copy (phases are carried over unchanged)."""
        return replace(
            self,
            element_x=self.element_x + dx,
            module_centers=self.module_centers + dx,
            anchors=tuple(a.shifted(dx) for a in self.anchors),
        )


@dataclass(frozen=True)
class AnchorScheme:
    ranges: tuple
    per_range_count: int
    area: tuple  # (xmin, xmax, ymin, ymax)

    def __post_init__(self):
        object.__setattr__(self, "ranges", tuple(float(r) for r in self.ranges))
        object.__setattr__(self, "area", tuple(float(a) for a in self.area))
        if any(r <= 0 for r in self.ranges):
            raise GeometryError("anchor ranges must be positive")
        if self.per_range_count < 1:
            raise GeometryError("need at least one anchor per range")
        xmin, xmax, ymin, ymax = self.area
        if not (xmax > xmin and ymax > ymin):
            raise GeometryError("anchor area must have positive extent")


def elements_per_module(module_width: float, pitch: float) -> int:
    """Element count of a module of physical width ``module_width``."""
    n = int(round(module_width / pitch))
    if n < 1:
        raise ValueError("module narrower than one element")
    return n


def double_focus_phases(s, r, element_x, wavelength: float) -> np.ndarray:
    """Exact two-point focusing profile, wrapped to ``[0, 2 pi)``.

    ``element_x`` may also be an :class:`EmsLayout`.
    """
    s, r = as_point(s), as_point(r)
    if s.y <= 0 or r.y <= 0:
        raise GeometryError("source and target must be above the skin")
    x = np.asarray(getattr(element_x, "element_x", element_x), dtype=float)
    path = np.hypot(x - s.x, s.y) + np.hypot(r.x - x, r.y)
    return np.mod(TWO_PI / wavelength * path, TWO_PI)


def plane_wave_focus_profile(x, psi: float, anchor, wavelength: float) -> np.ndarray:
    """Continuous profile focusing a plane wave arriving at ``psi`` onto ``anchor``."""
    anchor = as_point(anchor)
    x = np.asarray(x, dtype=float)
    return TWO_PI / wavelength * (x * math.cos(psi) + np.hypot(anchor.x - x, anchor.y))


def module_linear_profile(
    module_center,
    offsets,
    source,
    anchor,
    pitch: float,
    wavelength: float,
) -> np.ndarray:
    """Linear phase gradient steering the ray ``source -> center`` onto ``anchor``.

    ``offsets`` are element positions relative to the module center, in units
    of the pitch (half-integers for even-sized modules).  The returned phase is
    zero at the module center.

    The per-element increment is ``2 pi d / lambda * (u_in - u_out)``, with
    ``u_in`` the x direction cosine of the incident ray and ``u_out`` that of the
    ray leaving toward the anchor; it vanishes for a specular anchor.
    """
    c, a, s = as_point(module_center), as_point(anchor), as_point(source)
    if c.y != 0.0:
        raise GeometryError("module center must lie on the skin plane")
    if a.y <= 0:
        raise GeometryError("anchor must lie above the skin")
    if a.distance(c) == 0.0:
        raise GeometryError("anchor coincides with the module center")
    u_in = x_projection(s, c)
    u_out = x_projection(c, a)
    offsets = np.asarray(offsets, dtype=float)
    return TWO_PI * pitch / wavelength * offsets * (u_in - u_out)


def build_modular_ems(
    n_clusters: int,
    modules_per_cluster: int,
    n_mod: int,
    pitch: float,
    wavelength: float,
    psi: float,
    anchors: Sequence,
    source_height: float = 10.0,
    center_x: float = 0.0,
    module_height: float = 0.5,
    quantization_bits: int | None = None,
) -> EmsLayout:
    """Assemble ``K`` clusters of ``L`` linear-gradient modules.

    Each module is designed for the source position whose boresight hits the
    module center; cluster ``k`` focuses on ``anchors[k]``.  Module intercepts
    follow the continuous focusing profile so that the piecewise-linear phase
    tracks it across the cluster.
    """
    anchors = [as_point(a) for a in anchors]
    if n_clusters < 1 or modules_per_cluster < 1 or n_mod < 1:
        raise ValueError("cluster, module and element counts must be positive")
    if len(anchors) != n_clusters:
        raise ValueError(f"expected {n_clusters} anchors, got {len(anchors)}")
    if source_height <= 0:
        raise GeometryError("design source height must be positive")

    n_modules = n_clusters * modules_per_cluster
    n = n_modules * n_mod
    element_x = center_x + (np.arange(n) - n // 2) * pitch
    module_id = np.repeat(np.arange(n_modules), n_mod)
    cluster_id = module_id // modules_per_cluster
    offsets = np.arange(n_mod) - 0.5 * (n_mod - 1)
    k0 = TWO_PI / wavelength

    phases = np.empty(n)
    centers = np.empty(n_modules)
    slopes = np.empty(n_modules)
    d_i = source_height / math.sin(psi)
    for m in range(n_modules):
        sl = slice(m * n_mod, (m + 1) * n_mod)
        xc = float(element_x[sl].mean())
        anchor = anchors[m // modules_per_cluster]
        source = Point2(xc - d_i * math.cos(psi), source_height)
        centre = Point2(xc, 0.0)
        profile = module_linear_profile(centre, offsets, source, anchor, pitch, wavelength)
        intercept = plane_wave_focus_profile(xc, psi, anchor, wavelength)
        phases[sl] = intercept + profile
        centers[m] = xc
        slopes[m] = k0 * (x_projection(source, centre) - x_projection(centre, anchor))

    if quantization_bits is not None:
        phases = quantize_phases(phases, quantization_bits)

    return EmsLayout(
        pitch=pitch,
        wavelength=wavelength,
        n_mod=n_mod,
        modules_per_cluster=modules_per_cluster,
        n_clusters=n_clusters,
        element_x=element_x,
        phases=phases,
        module_id=module_id,
        cluster_id=cluster_id,
        module_centers=centers,
        module_slopes=slopes,
        anchors=tuple(anchors),
        module_height=module_height,
    )


def quantize_phases(phases, bits: int) -> np.ndarray:
    """Uniform ``bits``-bit phase quantizer on ``[0, 2 pi)``."""
    if bits < 1:
        raise ValueError("quantizer needs at least one bit")
    levels = 2 ** int(bits)
    step = TWO_PI / levels
    q = np.mod(np.rint(np.mod(phases, TWO_PI) / step), levels)
    return q * step


def _arc_intervals(radius: float, area) -> list[tuple[float, float]]:
    """Angular intervals in [0, pi] of the arc of ``radius`` inside ``area``."""
    xmin, xmax, ymin, ymax = area
    clip = lambda v: min(1.0, max(-1.0, v))
    # x range -> a single interval since cos is monotone on [0, pi]
    lo_x, hi_x = math.acos(clip(xmax / radius)), math.acos(clip(xmin / radius))
    if xmax / radius < -1 or xmin / radius > 1:
        return []
    pieces = [(lo_x, hi_x)]

    a = ymin / radius
    if a > 1:
        return []
    if a > 0:
        t = math.asin(a)
        pieces = _intersect(pieces, [(t, math.pi - t)])
    b = ymax / radius
    if b < 0:
        return []
    if b < 1:
        t = math.asin(b)
        pieces = _intersect(pieces, [(0.0, t), (math.pi - t, math.pi)])
    return [(lo, hi) for lo, hi in pieces if hi > lo]


def _intersect(a, b):
    out = []
    for lo1, hi1 in a:
        for lo2, hi2 in b:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if hi > lo:
                out.append((lo, hi))
    return out


def select_anchor_points(scheme: AnchorScheme, center=(0.0, 0.0)) -> list[Point2]:
    """Anchors evenly spaced in angle on each iso-range arc inside the area.

    Anchors sit at the centers of ``per_range_count`` equal angular cells, so a
    single anchor on a symmetric area lands on the axis.  Within each range they
    are ordered by increasing x.
    """
    cx, cy = as_point(center)
    xmin, xmax, ymin, ymax = scheme.area
    local_area = (xmin - cx, xmax - cx, ymin - cy, ymax - cy)
    anchors: list[Point2] = []
    for radius in scheme.ranges:
        intervals = _arc_intervals(radius, local_area)
        total = sum(hi - lo for lo, hi in intervals)
        if total <= 0:
            raise GeometryError(f"iso-range arc R={radius} m misses the anchor area")
        # walk the union from large angles (left) to small angles (right)
        intervals = sorted(intervals, key=lambda iv: -iv[1])
        count = scheme.per_range_count
        for i in range(count):
            remaining = (i + 0.5) / count * total
            for lo, hi in intervals:
                width = hi - lo
                if remaining <= width:
                    theta = hi - remaining
                    break
                remaining -= width
            anchors.append(Point2(cx + radius * math.cos(theta), cy + radius * math.sin(theta)))
    return anchors


def effective_aperture(speed: float, duration: float, d_i: float, dpsi: float, psi: float) -> float:
    """Aperture mapped onto the skin: swept length plus the beam footprint."""
    if not (0.0 < psi <= math.pi / 2 + 1e-15):
        raise GeometryError("pointing angle outside (0, pi/2]")
    return speed * duration + d_i * dpsi / math.sin(psi)


def aperture_duration_bound(modules_per_cluster: int, n_mod: int, n_rad: int, pitch: float, speed: float) -> float:
    """Minimum sweep time for the beam footprint to cover one whole cluster."""
    if not speed > 0:
        raise ValueError("speed must be positive")
    return max(0, modules_per_cluster * n_mod - n_rad) * pitch / speed


def full_coverage_duration(n_clusters: int, modules_per_cluster: int, n_mod: int, pitch: float, speed: float) -> float:
    """Sweep time needed to illuminate every cluster once."""
    if not speed > 0:
        raise ValueError("speed must be positive")
    return n_clusters * modules_per_cluster * n_mod * pitch / speed

