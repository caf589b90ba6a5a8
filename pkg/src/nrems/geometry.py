"""Planar geometry shared by the whole simulator.

Frame conventions
-----------------
* The skin lies on the x axis (y = 0), centered at the origin by default.
* Radar and targets live in the half-plane y > 0.
* The pointing angle ``psi`` is the depression angle of the radar boresight
  measured from the +x axis, so the boresight hits the skin at
  ``s_x + D_i cos(psi)`` with ``D_i = s_y / sin(psi)``.

All angles are radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

SPEED_OF_LIGHT = 299792458.0


class GeometryError(ValueError):
    """Raised for degenerate or infeasible geometric input."""


class Point2(NamedTuple):
    x: float
    y: float

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y], dtype=dtype or float)

    def distance(self, other: "Point2") -> float:
        return math.hypot(other.x - self.x, other.y - self.y)

    def shifted(self, dx: float = 0.0, dy: float = 0.0) -> "Point2":
        return Point2(self.x + dx, self.y + dy)


def as_point(p) -> Point2:
    """Coerce a 2-sequence into a finite :class:`Point2`."""
    if isinstance(p, Point2):
        pt = p
    else:
        x, y = p
        pt = Point2(float(x), float(y))
    if not (math.isfinite(pt.x) and math.isfinite(pt.y)):
        raise GeometryError(f"non-finite point {pt}")
    return pt


def _check_pointing(psi: float) -> None:
    if not (0.0 < psi <= math.pi / 2 + 1e-15):
        raise GeometryError(f"pointing angle {psi!r} rad outside (0, pi/2]")


@dataclass(frozen=True)
class SourceTrajectory:
    """Straight-line source motion along +x at constant height.

    ``dtau`` is the slow-time spacing between snapshots; the number of
    snapshots is ``floor(duration / dtau) + 1`` so both ends are included.
    """

    start: Point2
    speed: float
    duration: float
    dtau: float

    def __post_init__(self):
        object.__setattr__(self, "start", as_point(self.start))
        if not self.speed > 0:
            raise GeometryError("trajectory speed must be positive")
        if not self.duration > 0:
            raise GeometryError("trajectory duration must be positive")
        if not self.dtau > 0:
            raise GeometryError("snapshot spacing must be positive")
        if not self.start.y > 0:
            raise GeometryError("source must be above the skin (s_y > 0)")

    @property
    def n_snapshots(self) -> int:
        return int(math.floor(self.duration / self.dtau + 1e-9)) + 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_snapshots) * self.dtau

    def position(self, tau: float) -> Point2:
        return Point2(self.start.x + self.speed * tau, self.start.y)

    def positions(self) -> np.ndarray:
        """Source positions, shape ``(n_snapshots, 2)``."""
        xs = self.start.x + self.speed * self.times
        return np.column_stack([xs, np.full_like(xs, self.start.y)])

    def shifted(self, dx: float) -> "SourceTrajectory":
        return SourceTrajectory(self.start.shifted(dx), self.speed, self.duration, self.dtau)


def specular_point(s, r) -> Point2:
    """Mirror-reflection point on the skin plane between ``s`` and ``r``.

    Built from the image source ``(s_x, -s_y)``: the straight line from the
    image to ``r`` crosses ``y = 0`` at the specular point.
    """
    s, r = as_point(s), as_point(r)
    if s.y <= 0 or r.y <= 0:
        raise GeometryError("specular point needs s_y > 0 and r_y > 0")
    t = s.y / (s.y + r.y)
    return Point2(s.x + t * (r.x - s.x), 0.0)


def boresight_center(s, psi: float) -> tuple[Point2, float]:
    """Boresight hit point on the skin and the forward distance ``D_i``."""
    s = as_point(s)
    _check_pointing(psi)
    if s.y <= 0:
        raise GeometryError("source must be above the skin (s_y > 0)")
    d_i = s.y / math.sin(psi)
    return Point2(s.x + d_i * math.cos(psi), 0.0), d_i


def reflection_angle(p, r) -> float:
    """Reflection angle from the skin normal, ``arccos(r_y / |r - p|)``."""
    p, r = as_point(p), as_point(r)
    dist = p.distance(r)
    if dist == 0.0 or r.y <= 0:
        raise GeometryError("target must lie strictly above the skin plane")
    return math.acos(min(1.0, r.y / dist))


def x_projection(origin, target) -> float:
    """x component of the unit vector pointing from ``origin`` to ``target``."""
    a, b = as_point(origin), as_point(target)
    dist = a.distance(b)
    if dist == 0.0:
        raise GeometryError("x_projection of coincident points")
    return (b.x - a.x) / dist


def mirror_continuation(s, p, length: float) -> Point2:
    """Point at ``length`` along the specularly reflected ray through ``p``."""
    s, p = as_point(s), as_point(p)
    d = s.distance(p)
    ux, uy = (p.x - s.x) / d, (p.y - s.y) / d
    return Point2(p.x + length * ux, p.y - length * uy)
