# teich.py
#
# Lengths of 2-step arcs along a one-parameter twist deformation.
#
# A 2-step arc crossing a curve δ once is made of two 1-step halves that
# meet δ perpendicularly at feet a signed distance d apart along δ. Its
# length is determined by the halves and d:
#
#     cosh ℓ = sinh ℓ₁ sinh ℓ₂ cosh d + cosh ℓ₁ cosh ℓ₂
#
# Twisting along δ by θ changes d to d + θ and nothing else.
#
# Date: 2026-09-21

from typing import Optional, Any
from dataclasses import dataclass, replace
import logging
import math

import numpy as np

from .hyp2 import GeodesicH2, common_perpendicular, fermi_coordinates
from .errors import WrongStepCount, OutOfRange, UnknownLabel
from .surface import MarimbaSpec, Surface, build_surface
from .arcs import ArcClass, develop_arc, orthogeodesic_length, find_orthoarcs

__all__ = [
    "TwoStepComponents",
    "two_step_components",
    "TwistArc",
    "TwistFamily",
    "two_step_length",
    "twist_variety_residual",
]

logger = logging.getLogger(__name__)

DISTINCT_TOL = 1e-9
INITIAL_SEARCH_LENGTH = 2.0
MAX_SEARCH_LENGTH = 12.0
SEARCH_GROWTH = 1.25


@dataclass(frozen=True)
class TwoStepComponents:
    l_half1: float
    l_half2: float
    d: float
    """Signed distance along the crossed curve from the foot of the first
    half to the foot of the second one."""
    length: float
    """Length of the orthogeodesic of the whole arc."""
    cuff: str
    """Gluing id of the crossed curve."""

    def reconstructed_cosh(self) -> float:
        return (math.sinh(self.l_half1) * math.sinh(self.l_half2) * math.cosh(self.d)
                + math.cosh(self.l_half1) * math.cosh(self.l_half2))


def two_step_components(surface: Surface, arc: ArcClass,
                        reverse: bool = False) -> TwoStepComponents:
    """Split a 2-step arc at the curve it crosses.

    The crossed curve is oriented so that the start of the arc lies on its
    right; `reverse` uses the opposite orientation, which flips the sign of
    `d`.
    """
    if arc.k != 2:
        raise WrongStepCount(2, arc.k)
    whole = orthogeodesic_length(surface, arc)
    developed = develop_arc(surface, arc)
    crossed = [side for side in developed.sides if side.gamma]
    if len(crossed) != 1:
        raise WrongStepCount(2, len(crossed) + 1)
    side = crossed[0]

    start = developed.start_half
    middle: GeodesicH2 = side.line
    _, u = fermi_coordinates(middle, start.point_at(start.length / 2.0))
    if u > 0.0:
        middle = middle.reversed()

    first = common_perpendicular(developed.start_line, middle)
    second = common_perpendicular(middle, developed.end_line)
    s1, _ = fermi_coordinates(middle, first.foot2)
    s2, _ = fermi_coordinates(middle, second.foot1)
    d = s2 - s1
    if reverse:
        d = -d

    half = surface.half_sides[(side.crossing.cell, side.crossing.side)]
    return TwoStepComponents(first.length, second.length, d, whole.length, half.gluing)


@dataclass(frozen=True)
class TwistArc:
    arc_class: ArcClass
    a: float
    """sinh ℓ₁ · sinh ℓ₂"""
    b: float
    """cosh ℓ₁ · cosh ℓ₂"""
    d: float
    delta: float
    """Offset `d - d₁` relative to the first arc of the family."""
    length: float

    def cosh_length(self, theta: float) -> float:
        return self.a * math.cosh(self.d + theta) + self.b

    def as_dict(self) -> dict[str, Any]:
        return {"a": self.a, "b": self.b, "d": self.d, "delta": self.delta,
                "length": self.length, "class": self.arc_class.as_dict()}


def _single_curve_spec(spec: MarimbaSpec, gluing: str) -> MarimbaSpec:
    if spec.sheets != 1:
        raise OutOfRange("Twist families are defined for single-sheet specs only",
                         spec.sheets)
    try:
        target = spec.gluing(gluing)
    except KeyError:
        raise UnknownLabel(gluing)
    label = target.label if target.label is not None else gluing
    gluings = tuple(replace(g, label=label if g.id == gluing else None)
                    for g in spec.gluings)
    return replace(spec, gluings=gluings)


class TwistFamily:
    """Twist deformation along one curve with the `r` shortest 2-step arcs
    crossing it.

    The multicurve of the family is the single distinguished curve. The
    twist parameter `theta` is the change of the curve's twist relative to
    `spec`.
    """

    spec: MarimbaSpec
    gluing: str
    arcs: tuple[TwistArc, ...]

    def __init__(self, spec: MarimbaSpec, gluing: str, arcs: tuple[TwistArc, ...]):
        if len(arcs) < 2:
            raise OutOfRange(f"A twist family needs at least two arcs, got {len(arcs)}",
                             len(arcs))
        self.spec = spec
        self.gluing = gluing
        self.arcs = arcs

    @classmethod
    def from_spec(cls, spec: MarimbaSpec, gluing: str, r: int = 3,
                  l_max: Optional[float] = None) -> "TwistFamily":
        """Collect the `r` shortest geometrically distinct 2-step arcs.

        Without `l_max` the length bound of the arc search grows until
        enough arcs are found.
        """
        if r < 2:
            raise OutOfRange(f"A twist family needs r ≥ 2 arcs, got {r}", r)
        family_spec = _single_curve_spec(spec, gluing)
        surface = build_surface(family_spec)

        bound = l_max if l_max is not None else INITIAL_SEARCH_LENGTH
        while True:
            components = _distinct_components(surface, bound)
            if len(components) >= r:
                break
            if l_max is not None or bound >= MAX_SEARCH_LENGTH:
                raise OutOfRange(f"Found {len(components)} distinct 2-step arcs "
                                 f"up to length {bound:g}, need {r}", len(components))
            bound = min(bound * SEARCH_GROWTH, MAX_SEARCH_LENGTH)

        chosen = components[:r]
        d1 = chosen[0][1].d
        arcs = tuple(TwistArc(arc_class=arc,
                              a=math.sinh(c.l_half1) * math.sinh(c.l_half2),
                              b=math.cosh(c.l_half1) * math.cosh(c.l_half2),
                              d=c.d,
                              delta=c.d - d1,
                              length=c.length)
                     for arc, c in chosen)
        logger.info("Twist family along '%s' with %d arcs (lengths %s)",
                    gluing, r, ", ".join(f"{arc.length:.6g}" for arc in arcs))
        return cls(family_spec, gluing, arcs)

    @property
    def r(self) -> int:
        return len(self.arcs)

    def spec_at(self, theta: float) -> MarimbaSpec:
        """The family spec with the twist of the curve changed by `theta`."""
        gluing = self.spec.gluing(self.gluing)
        return self.spec.with_gluing(replace(gluing, twist=gluing.twist + theta))

    def cosh_lengths(self, theta: float) -> np.ndarray:
        return np.array([arc.cosh_length(theta) for arc in self.arcs])

    def length(self, i: int, theta: float) -> float:
        return two_step_length(self, i, theta)

    def length_derivative(self, i: int, theta: float) -> float:
        """Derivative of the length of arc `i` with respect to the twist."""
        arc = self.arcs[i]
        length = self.length(i, theta)
        return arc.a * math.sinh(arc.d + theta) / math.sinh(length)

    def as_dict(self) -> dict[str, Any]:
        return {"cuff": self.gluing, "spec_hash": self.spec.spec_hash(),
                "arcs": [arc.as_dict() for arc in self.arcs]}


def _distinct_components(surface: Surface, l_max: float) \
        -> list[tuple[ArcClass, TwoStepComponents]]:
    # An arc and its reverse have the same halves and offset.
    result: list[tuple[ArcClass, TwoStepComponents]] = []
    for arc in find_orthoarcs(surface, 2, l_max):
        components = two_step_components(surface, arc.arc_class)
        if any(abs(components.l_half1 - other.l_half2) <= DISTINCT_TOL
               and abs(components.l_half2 - other.l_half1) <= DISTINCT_TOL
               and abs(components.d - other.d) <= DISTINCT_TOL
               or abs(components.l_half1 - other.l_half1) <= DISTINCT_TOL
               and abs(components.l_half2 - other.l_half2) <= DISTINCT_TOL
               and abs(components.d - other.d) <= DISTINCT_TOL
               for _, other in result):
            continue
        result.append((arc.arc_class, components))
    return result


def two_step_length(family: TwistFamily, i: int, theta: float) -> float:
    """Length of arc `i` of the family after twisting by `theta`."""
    if not (0 <= i < family.r):
        raise OutOfRange(f"Arc index {i} is not in 0..{family.r - 1}", i)
    return math.acosh(family.arcs[i].cosh_length(theta))


def twist_variety_residual(family: TwistFamily, x: np.ndarray | list[float]) -> np.ndarray:
    """Residual of cosh-lengths `x` against the twist family.

    The components vanish exactly when `x` are the cosh-lengths of the
    family's arcs at a common twist.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (family.r,):
        raise OutOfRange(f"Expected {family.r} cosh-lengths, got {x.shape}", x.shape)
    a = np.array([arc.a for arc in family.arcs])
    b = np.array([arc.b for arc in family.arcs])
    delta = np.array([arc.delta for arc in family.arcs])
    if np.any(x <= b):
        index = int(np.argmax(x <= b))
        raise OutOfRange(f"Cosh-length {x[index]} of arc {index} is not above {b[index]}",
                         float(x[index]))

    y = (x - b) / (a * np.cosh(delta))
    t2 = np.tanh(delta[1:]) ** 2
    return t2 * y[0] ** 2 - (y[1:] - y[0]) ** 2 - t2
