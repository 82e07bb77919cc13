# hyp2.py
#
# Numerical kernel for the hyperbolic plane in the upper half-plane model.
#
# Date: 2026-09-14

from typing import Optional, Union, Self
from dataclasses import dataclass
import math

import numpy as np

from .errors import SharedEndpoint, Crossing, Degenerate, GeometryFailure

__all__ = [
    "Infinity",
    "INFINITY",
    "IdealPoint",
    "NumericPolicy",
    "DEFAULT_POLICY",
    "PointH2",
    "GeodesicH2",
    "UnitTangentH2",
    "Isometry2",
    "GeodesicHit",
    "Perpendicular",

    "apply",
    "dist",
    "common_perpendicular",
    "hit_geodesic",
    "renormalize",

    "normalize_angle",
    "geodesic_through",
    "geodesic_from_tangent",
    "direction_toward",
    "tangent_direction",
    "angle_between",
    "point_along",
    "frame_isometry",
    "reflection_across",
    "translation_along",
    "fermi_coordinates",
    "intersection",
    "line_distance",
    "segment_geodesic_distance",
    "polygon_area",
]

TWO_PI = 2.0 * math.pi


class Infinity:
    """The ideal point at infinity of the upper half-plane.

    There is exactly one instance, `INFINITY`.
    """
    _instance: Optional["Infinity"] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"

    def __reduce__(self):
        return (Infinity, ())


INFINITY = Infinity()

IdealPoint = Union[float, Infinity]
"""Ideal boundary point: a real number or `INFINITY`."""


@dataclass(frozen=True)
class NumericPolicy:
    """Tolerances used by the geometric computations."""

    geometric_tol: float = 1e-10
    """Tolerance for comparing points, lengths and angles."""

    matrix_tol: float = 1e-12
    """Tolerance for determinants of isometry matrices."""

    tangency_tol: float = 1e-9
    """Crossings with `|sin θ|` below this value are treated as tangent."""

    det_min: float = 0.5
    det_max: float = 2.0


DEFAULT_POLICY = NumericPolicy()


def normalize_angle(angle: float) -> float:
    """Return the angle reduced to `[0, 2π)`."""
    result = math.fmod(angle, TWO_PI)
    if result < 0.0:
        result += TWO_PI
    if result >= TWO_PI:
        result = 0.0
    return result


def _same_ideal(x: IdealPoint, y: IdealPoint, tol: float) -> bool:
    if isinstance(x, Infinity) or isinstance(y, Infinity):
        return x is y
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


@dataclass(frozen=True)
class PointH2:
    re: float
    im: float

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise GeometryFailure(f"Non-finite point ({self.re}, {self.im})")
        if self.im <= 0.0:
            raise GeometryFailure(f"Point ({self.re}, {self.im}) is not in the upper half-plane")

    @classmethod
    def from_complex(cls, z: complex) -> Self:
        return cls(z.real, z.imag)

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    def __str__(self) -> str:
        return f"{self.re:.12g}+{self.im:.12g}i"


@dataclass(frozen=True)
class GeodesicH2:
    """Oriented geodesic given by its ideal endpoints, running from `a` to
    `b`."""
    a: IdealPoint
    b: IdealPoint

    def __post_init__(self):
        if _same_ideal(self.a, self.b, 0.0):
            raise GeometryFailure(f"Geodesic with equal endpoints {self.a}")

    @property
    def is_vertical(self) -> bool:
        return isinstance(self.a, Infinity) or isinstance(self.b, Infinity)

    @property
    def center(self) -> float:
        """Center of the half-circle, or the abscissa of a vertical line."""
        match (self.a, self.b):
            case (Infinity(), b):
                return float(b)  # type: ignore
            case (a, Infinity()):
                return float(a)  # type: ignore
            case (a, b):
                return (a + b) / 2.0  # type: ignore

    @property
    def radius(self) -> float:
        if self.is_vertical:
            return math.inf
        return abs(self.b - self.a) / 2.0  # type: ignore

    def reversed(self) -> "GeodesicH2":
        return GeodesicH2(self.b, self.a)

    def homogeneous(self) -> tuple[float, float, float, float]:
        """Endpoints as homogeneous real vectors `(a1, a2, b1, b2)` with
        infinity represented by `(1, 0)`."""
        a = (1.0, 0.0) if isinstance(self.a, Infinity) else (float(self.a), 1.0)
        b = (1.0, 0.0) if isinstance(self.b, Infinity) else (float(self.b), 1.0)
        return (a[0], a[1], b[0], b[1])

    def contains(self, p: PointH2, tol: float = DEFAULT_POLICY.geometric_tol) -> bool:
        _, offset = fermi_coordinates(self, p)
        return abs(offset) <= tol

    def shares_endpoint(self, other: "GeodesicH2",
                        tol: float = DEFAULT_POLICY.geometric_tol) -> bool:
        return any(_same_ideal(x, y, tol)
                   for x in (self.a, self.b) for y in (other.a, other.b))


@dataclass(frozen=True)
class UnitTangentH2:
    base: PointH2
    dir: float
    """Euclidean direction angle of the vector at its base point."""

    def __post_init__(self):
        object.__setattr__(self, "dir", normalize_angle(self.dir))

    def reversed(self) -> "UnitTangentH2":
        return UnitTangentH2(self.base, self.dir + math.pi)


@dataclass(frozen=True)
class GeodesicHit:
    time: float
    """Distance from the base of the vector to the hit point."""
    angle: float
    """Angle in `[0, 2π)` from the direction of the geodesic to the
    direction of the ray at the hit point."""
    position: float
    """Signed arclength along the geodesic from the foot of the
    perpendicular dropped from the base point."""
    point: PointH2


@dataclass(frozen=True)
class Perpendicular:
    length: float
    foot1: PointH2
    foot2: PointH2

    def __iter__(self):
        return iter((self.length, self.foot1, self.foot2))


@dataclass(frozen=True)
class Isometry2:
    """Isometry of the hyperbolic plane as a real 2×2 matrix.

    Matrices with positive determinant act as Möbius maps
    `z ↦ (az + b)/(cz + d)`. Matrices with negative determinant are the
    orientation-reversing isometries `z ↦ (a z̄ + b)/(c z̄ + d)`; they are
    used for reflections only. Composition is the matrix product in both
    cases.
    """
    a: float
    b: float
    c: float
    d: float

    @classmethod
    def identity(cls) -> Self:
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> Self:
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    @classmethod
    def axis_translation(cls, t: float) -> Self:
        """Translation by `t` along the imaginary axis."""
        h = math.exp(t / 2.0)
        return cls(h, 0.0, 0.0, 1.0 / h)

    @classmethod
    def rotation_at_i(cls, angle: float) -> Self:
        """Rotation about `i` turning tangent vectors by `angle`."""
        half = -angle / 2.0
        return cls(math.cos(half), -math.sin(half), math.sin(half), math.cos(half))

    @classmethod
    def mirror(cls) -> Self:
        """The reflection `z ↦ -z̄` in the imaginary axis."""
        return cls(-1.0, 0.0, 0.0, 1.0)

    @classmethod
    def normalizing(cls, g: GeodesicH2) -> Self:
        """Orientation-preserving isometry sending `g` onto the imaginary
        axis, `g.a` to 0 and `g.b` to infinity."""
        match (g.a, g.b):
            case (Infinity(), b):
                m = cls(0.0, -1.0, 1.0, -float(b))  # type: ignore
            case (a, Infinity()):
                m = cls(1.0, -float(a), 0.0, 1.0)  # type: ignore
            case (a, b) if a > b:  # type: ignore
                m = cls(1.0, -float(a), 1.0, -float(b))  # type: ignore
            case (a, b):
                m = cls(-1.0, float(a), 1.0, -float(b))  # type: ignore
        return m.scaled()

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def preserves_orientation(self) -> bool:
        return self.det > 0.0

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def scaled(self) -> "Isometry2":
        """Matrix rescaled to determinant ±1, without range checks."""
        s = math.sqrt(abs(self.det))
        return Isometry2(self.a / s, self.b / s, self.c / s, self.d / s)

    def compose(self, other: "Isometry2") -> "Isometry2":
        """Return `self ∘ other`."""
        return Isometry2(self.a * other.a + self.b * other.c,
                         self.a * other.b + self.b * other.d,
                         self.c * other.a + self.d * other.c,
                         self.c * other.b + self.d * other.d)

    def __matmul__(self, other: "Isometry2") -> "Isometry2":
        return self.compose(other)

    def inverse(self) -> "Isometry2":
        det = self.det
        return Isometry2(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def is_close(self, other: "Isometry2", tol: float = 1e-10) -> bool:
        """Equality as maps: matrices agree up to sign."""
        diff = max(abs(self.a - other.a), abs(self.b - other.b),
                   abs(self.c - other.c), abs(self.d - other.d))
        summ = max(abs(self.a + other.a), abs(self.b + other.b),
                   abs(self.c + other.c), abs(self.d + other.d))
        return min(diff, summ) <= tol

    # Actions
    # ------------------------------------------------------------------

    def apply_complex(self, z: complex) -> complex:
        if self.det < 0.0:
            z = z.conjugate()
        return (self.a * z + self.b) / (self.c * z + self.d)

    def apply_point(self, p: PointH2) -> PointH2:
        w = self.apply_complex(p.z)
        return PointH2(w.real, w.imag)

    def apply_ideal(self, x: IdealPoint) -> IdealPoint:
        if isinstance(x, Infinity):
            if self.c == 0.0:
                return INFINITY
            return self.a / self.c
        denominator = self.c * x + self.d
        if denominator == 0.0:
            return INFINITY
        return (self.a * x + self.b) / denominator

    def apply_geodesic(self, g: GeodesicH2) -> GeodesicH2:
        return GeodesicH2(self.apply_ideal(g.a), self.apply_ideal(g.b))

    def apply_tangent(self, v: UnitTangentH2) -> UnitTangentH2:
        z = v.base.z
        if self.det > 0.0:
            direction = v.dir - 2.0 * math.atan2(self.c * z.imag,
                                                 self.c * z.real + self.d)
        else:
            w = z.conjugate()
            direction = math.pi - v.dir - 2.0 * math.atan2(self.c * w.imag,
                                                           self.c * w.real + self.d)
        return UnitTangentH2(self.apply_point(v.base), direction)


def apply(g: Isometry2, p: PointH2 | GeodesicH2 | UnitTangentH2):
    """Apply an isometry to a point, oriented geodesic or unit tangent
    vector."""
    match p:
        case PointH2():
            return g.apply_point(p)
        case GeodesicH2():
            return g.apply_geodesic(p)
        case UnitTangentH2():
            return g.apply_tangent(p)
        case _:
            raise TypeError(f"Can not apply an isometry to {type(p).__name__}")


def renormalize(g: Isometry2, policy: NumericPolicy = DEFAULT_POLICY) -> Isometry2:
    """Rescale the matrix of `g` to determinant ±1.

    Raises `Degenerate` when the determinant drifted outside the policy
    bounds, which means the accumulated product can not be trusted.
    """
    det = abs(g.det)
    if not math.isfinite(det) or det < policy.det_min or det > policy.det_max:
        raise Degenerate(det)
    return g.scaled()


def dist(p: PointH2, q: PointH2) -> float:
    dx = p.re - q.re
    dy = p.im - q.im
    chord = math.sqrt(dx * dx + dy * dy) / (2.0 * math.sqrt(p.im * q.im))
    return 2.0 * math.asinh(chord)


def _tangent_frame(v: UnitTangentH2) -> Isometry2:
    """Isometry moving `v` to the upward vector at `i`."""
    translate = Isometry2(1.0, -v.base.re, 0.0, 1.0)
    h = math.sqrt(v.base.im)
    scale = Isometry2(1.0 / h, 0.0, 0.0, h)
    rotate = Isometry2.rotation_at_i(math.pi / 2.0 - v.dir)
    return rotate @ scale @ translate


def frame_isometry(v: UnitTangentH2, w: UnitTangentH2) -> Isometry2:
    """The orientation-preserving isometry that moves `v` to `w`."""
    return _tangent_frame(w).inverse() @ _tangent_frame(v)


def point_along(v: UnitTangentH2, t: float) -> UnitTangentH2:
    """Flow `v` along its geodesic for time `t`."""
    frame = _tangent_frame(v)
    moved = UnitTangentH2(PointH2(0.0, math.exp(t)), math.pi / 2.0)
    return frame.inverse().apply_tangent(moved)


def direction_toward(p: PointH2, q: PointH2) -> float:
    """Direction angle at `p` of the geodesic segment from `p` to `q`."""
    h = p.im
    u = (q.re - p.re) / h
    w = q.im / h
    if abs(u) <= 1e-15 * max(1.0, w):
        return math.pi / 2.0 if w > 1.0 else 3.0 * math.pi / 2.0
    c = (u * u + w * w - 1.0) / (2.0 * u)
    if u > 0.0:
        return normalize_angle(math.atan2(c, 1.0))
    return normalize_angle(math.atan2(-c, -1.0))


def geodesic_from_tangent(v: UnitTangentH2) -> GeodesicH2:
    """Oriented geodesic through the base of `v` in its direction."""
    x, y = v.base.re, v.base.im
    cos_d = math.cos(v.dir)
    sin_d = math.sin(v.dir)
    if abs(cos_d) <= 1e-15:
        if sin_d > 0.0:
            return GeodesicH2(x, INFINITY)
        return GeodesicH2(INFINITY, x)
    center = x + y * sin_d / cos_d
    radius = y / abs(cos_d)
    if cos_d > 0.0:
        return GeodesicH2(center - radius, center + radius)
    return GeodesicH2(center + radius, center - radius)


def geodesic_through(p: PointH2, q: PointH2) -> GeodesicH2:
    """Oriented geodesic through `p` and then `q`."""
    if p == q:
        raise GeometryFailure("Geodesic through coincident points")
    return geodesic_from_tangent(UnitTangentH2(p, direction_toward(p, q)))


def reflection_across(g: GeodesicH2) -> Isometry2:
    """The reflection fixing `g` pointwise."""
    if g.is_vertical:
        return Isometry2(-1.0, 2.0 * g.center, 0.0, 1.0)
    c = g.center
    r = g.radius
    return Isometry2(c / r, (r * r - c * c) / r, 1.0 / r, -c / r)


def translation_along(g: GeodesicH2, t: float) -> Isometry2:
    """Translation by `t` along `g` in its direction."""
    n = Isometry2.normalizing(g)
    return n.inverse() @ Isometry2.axis_translation(t) @ n


def fermi_coordinates(g: GeodesicH2, p: PointH2) -> tuple[float, float]:
    """Fermi coordinates of `p` relative to `g`.

    Returns `(s, u)`: `s` is the position of the foot of the perpendicular
    along `g` in the chart of `Isometry2.normalizing(g)`, `u` is the signed
    distance from `g`, positive on the left of `g`.
    """
    w = Isometry2.normalizing(g).apply_complex(p.z)
    s = math.log(abs(w))
    u = math.asinh(-w.real / w.imag)
    return (s, u)


def _split_endpoints(n: Isometry2, g: GeodesicH2) -> tuple[IdealPoint, IdealPoint]:
    return (n.apply_ideal(g.a), n.apply_ideal(g.b))


def intersection(g1: GeodesicH2, g2: GeodesicH2) -> Optional[PointH2]:
    """Intersection point of two geodesics, or `None` if they are disjoint
    or asymptotic."""
    n = Isometry2.normalizing(g1)
    p, q = _split_endpoints(n, g2)
    if isinstance(p, Infinity) or isinstance(q, Infinity):
        return None
    if p * q >= 0.0:
        return None
    w = complex(0.0, math.sqrt(-p * q))
    return PointH2.from_complex(n.inverse().apply_complex(w))


def common_perpendicular(g1: GeodesicH2, g2: GeodesicH2,
                         policy: NumericPolicy = DEFAULT_POLICY) -> Perpendicular:
    """Common perpendicular of two disjoint geodesics.

    Returns the length and the feet on `g1` and `g2`. Raises
    `SharedEndpoint` for asymptotic geodesics and `Crossing` for
    intersecting ones.
    """
    if g1.shares_endpoint(g2, policy.geometric_tol):
        raise SharedEndpoint(g1, g2)
    n = Isometry2.normalizing(g1)
    p, q = _split_endpoints(n, g2)
    if isinstance(p, Infinity) or isinstance(q, Infinity) \
            or abs(p) <= policy.geometric_tol or abs(q) <= policy.geometric_tol:
        raise SharedEndpoint(g1, g2)
    if p * q < 0.0:
        raise Crossing(g1, g2)

    back = n.inverse()
    if p < 0.0:
        back = back @ Isometry2.mirror()
        p, q = -p, -q
    lo, hi = min(p, q), max(p, q)
    ratio = math.sqrt(hi / lo)
    length = math.log((ratio + 1.0) / (ratio - 1.0))

    pq = lo * hi
    foot1 = complex(0.0, math.sqrt(pq))
    x = 2.0 * pq / (lo + hi)
    foot2 = complex(x, math.sqrt(max(pq - x * x, 0.0)))
    return Perpendicular(length,
                         PointH2.from_complex(back.apply_complex(foot1)),
                         PointH2.from_complex(back.apply_complex(foot2)))


def line_distance(g1: GeodesicH2, g2: GeodesicH2,
                  policy: NumericPolicy = DEFAULT_POLICY) -> float:
    """Distance between two geodesics: zero when they meet or are
    asymptotic."""
    try:
        return common_perpendicular(g1, g2, policy).length
    except (SharedEndpoint, Crossing):
        return 0.0


def hit_geodesic(v: UnitTangentH2, g: GeodesicH2,
                 policy: NumericPolicy = DEFAULT_POLICY) -> Optional[GeodesicHit]:
    """First positive time at which the geodesic ray of `v` meets `g`."""
    frame = _tangent_frame(v)
    p, q = _split_endpoints(frame, g)
    if isinstance(p, Infinity) or isinstance(q, Infinity):
        return None
    if p * q >= 0.0:
        return None
    height = math.sqrt(-p * q)
    time = math.log(height)
    if time <= policy.geometric_tol:
        return None
    angle = math.atan2(2.0 * height / (q - p), (p + q) / (q - p))
    back = frame.inverse()
    point = PointH2.from_complex(back.apply_complex(complex(0.0, height)))
    start, _ = fermi_coordinates(g, v.base)
    end, _ = fermi_coordinates(g, point)
    return GeodesicHit(time=time,
                       angle=normalize_angle(angle),
                       position=end - start,
                       point=point)


def segment_geodesic_distance(p: PointH2, q: PointH2, g: GeodesicH2) -> float:
    """Distance between the geodesic segment `[p, q]` and the geodesic `g`.
    """
    _, u_p = fermi_coordinates(g, p)
    _, u_q = fermi_coordinates(g, q)
    a = math.sinh(u_p)
    end = math.sinh(u_q)
    if a == 0.0 or end == 0.0 or (a > 0.0) != (end > 0.0):
        return 0.0
    length = dist(p, q)
    if length == 0.0:
        return abs(u_p)
    # sinh of the signed offset is A cosh s + B sinh s along the segment
    b = (end - a * math.cosh(length)) / math.sinh(length)
    best = min(abs(a), abs(end))
    if abs(b) < abs(a):
        s = math.atanh(-b / a)
        if 0.0 < s < length:
            best = min(best, abs(a * math.cosh(s) + b * math.sinh(s)))
    return math.asinh(best)


def polygon_area(vertices: list[PointH2]) -> float:
    """Area of a convex geodesic polygon by the angle defect."""
    n = len(vertices)
    total = 0.0
    for i, vertex in enumerate(vertices):
        prev = vertices[(i - 1) % n]
        nxt = vertices[(i + 1) % n]
        to_prev = direction_toward(vertex, prev)
        to_next = direction_toward(vertex, nxt)
        angle = abs(normalize_angle(to_prev - to_next))
        total += min(angle, TWO_PI - angle)
    return (n - 2) * math.pi - total


def tangent_direction(g: GeodesicH2, p: PointH2) -> float:
    """Direction angle of the oriented geodesic `g` at its point `p`."""
    if g.is_vertical:
        return math.pi / 2.0 if isinstance(g.b, Infinity) else 3.0 * math.pi / 2.0
    c = g.center
    if g.a < g.b:  # type: ignore
        return normalize_angle(math.atan2(c - p.re, p.im))
    return normalize_angle(math.atan2(p.re - c, -p.im))


def angle_between(g1: GeodesicH2, g2: GeodesicH2) -> Optional[float]:
    """Angle in `[0, 2π)` from `g1` to `g2` at their intersection point, or
    `None` when they do not intersect."""
    p = intersection(g1, g2)
    if p is None:
        return None
    return normalize_angle(tangent_direction(g2, p) - tangent_direction(g1, p))
