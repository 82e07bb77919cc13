# hexagon.py
#
# Right-angled hexagons, the cells of a marimba surface.
#
# Date: 2026-09-15

import math

from ..hyp2 import (PointH2, GeodesicH2, UnitTangentH2, Isometry2,
                    point_along, geodesic_through, direction_toward,
                    normalize_angle, polygon_area, dist, DEFAULT_POLICY)
from ..errors import GeometryFailure
from .issues import SpecIssue, SpecError

__all__ = [
    "RightHexagon",
    "pants_hexagon",
    "seam_length",
]

CLOSURE_TOLERANCE = 1e-9


def seam_length(opposite: float, first: float, second: float) -> float:
    """Length of the seam opposite to the half-cuff `opposite` in a
    right-angled hexagon with half-cuffs `opposite`, `first`, `second`."""
    numerator = math.cosh(opposite) + math.cosh(first) * math.cosh(second)
    return math.acosh(numerator / (math.sinh(first) * math.sinh(second)))


def _hyperboloid(p: PointH2) -> tuple[float, float, float]:
    r2 = p.re * p.re + p.im * p.im
    return ((r2 + 1.0) / (2.0 * p.im), p.re / p.im, (r2 - 1.0) / (2.0 * p.im))


def _centroid(points: list[PointH2]) -> PointH2:
    x0 = x1 = x2 = 0.0
    for p in points:
        h0, h1, h2 = _hyperboloid(p)
        x0 += h0
        x1 += h1
        x2 += h2
    norm = math.sqrt(x0 * x0 - x1 * x1 - x2 * x2)
    x0, x1, x2 = x0 / norm, x1 / norm, x2 / norm
    y = 1.0 / (x0 - x2)
    return PointH2(x1 * y, y)


class RightHexagon:
    """Right-angled hexagon embedded in the upper half-plane.

    Side `k` runs from vertex `k` to vertex `k + 1`. A hexagon built by
    `pants_hexagon` is counter-clockwise; its mirror image is clockwise.
    """
    lengths: tuple[float, ...]
    vertices: tuple[PointH2, ...]
    sides: tuple[GeodesicH2, ...]
    orientation: int
    """`+1` when the interior lies on the left of the sides, `-1` when it
    lies on the right."""

    def __init__(self, lengths: tuple[float, ...], vertices: tuple[PointH2, ...],
                 orientation: int = 1):
        self.lengths = tuple(lengths)
        self.vertices = tuple(vertices)
        self.orientation = orientation
        self.sides = tuple(geodesic_through(vertices[k], vertices[(k + 1) % 6])
                           for k in range(6))
        self._frames = tuple(Isometry2.normalizing(side) for side in self.sides)

    def segment(self, k: int) -> tuple[PointH2, PointH2]:
        return (self.vertices[k], self.vertices[(k + 1) % 6])

    def mirrored(self) -> "RightHexagon":
        """Mirror image under `z ↦ -z̄`."""
        vertices = tuple(PointH2(-v.re, v.im) for v in self.vertices)
        return RightHexagon(self.lengths, vertices, -self.orientation)

    def area(self) -> float:
        return polygon_area(list(self.vertices))

    def angles(self) -> list[float]:
        result: list[float] = []
        for k in range(6):
            vertex = self.vertices[k]
            to_prev = direction_toward(vertex, self.vertices[(k - 1) % 6])
            to_next = direction_toward(vertex, self.vertices[(k + 1) % 6])
            angle = normalize_angle(to_prev - to_next)
            result.append(min(angle, 2.0 * math.pi - angle))
        return result

    def contains(self, p: PointH2, tol: float = DEFAULT_POLICY.geometric_tol) -> bool:
        """True when `p` lies in the closed hexagon."""
        z = p.z
        for frame in self._frames:
            w = frame.apply_complex(z)
            # interior on the left of an upward axis means negative real part
            if self.orientation * w.real > tol * abs(w):
                return False
        return True

    @property
    def center(self) -> PointH2:
        return _centroid(list(self.vertices))

    def __repr__(self) -> str:
        lengths = ", ".join(f"{length:.6g}" for length in self.lengths)
        return f"RightHexagon({lengths})"


def pants_hexagon(l1: float, l2: float, l3: float) -> RightHexagon:
    """Right-angled hexagon of a pair of pants with cuffs `l1`, `l2`, `l3`.

    Sides are `[l1/2, s3, l2/2, s1, l3/2, s2]` where `s_k` is the seam
    opposite to the half-cuff `l_k/2`. The hexagon is counter-clockwise and
    its hyperbolic centroid is at `i`.
    """
    issues = [SpecIssue.non_positive_length(f"l{i + 1}", value)
              for i, value in enumerate((l1, l2, l3))
              if not math.isfinite(value) or value <= 0.0]
    if issues:
        raise SpecError(issues)

    h1, h2, h3 = l1 / 2.0, l2 / 2.0, l3 / 2.0
    lengths = (h1, seam_length(h3, h1, h2),
               h2, seam_length(h1, h2, h3),
               h3, seam_length(h2, h3, h1))

    start = UnitTangentH2(PointH2(0.0, 1.0), 0.0)
    current = start
    vertices: list[PointH2] = [start.base]
    for length in lengths:
        moved = point_along(current, length)
        vertices.append(moved.base)
        current = UnitTangentH2(moved.base, moved.dir + math.pi / 2.0)

    residual = dist(vertices[6], vertices[0])
    if residual > CLOSURE_TOLERANCE:
        raise GeometryFailure(f"Hexagon ({l1}, {l2}, {l3}) does not close", residual)

    center = _centroid(vertices[:6])
    h = math.sqrt(center.im)
    to_center = Isometry2(1.0 / h, -center.re / h, 0.0, h)
    placed = tuple(to_center.apply_point(v) for v in vertices[:6])
    return RightHexagon(lengths, placed)
