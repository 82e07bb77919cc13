# sampling.py
#
# Random initial vectors: Liouville-distributed interior states and
# cross-section states.
#
# Date: 2026-09-17

from typing import Union
import math

import numpy as np

from ..hyp2 import PointH2, UnitTangentH2, point_along, dist
from ..errors import RejectionBudgetExceeded, OutOfRange
from ..surface import Surface
from .state import InteriorState, CrossSectionState

__all__ = [
    "make_rng",
    "sample_liouville",
    "sample_cross_section",
]

REJECTION_BUDGET = 10_000

SeedLike = Union[int, np.random.Generator]

_ORIGIN = PointH2(0.0, 1.0)


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Counter-based generator keyed by a 64-bit seed. A generator passed
    in is returned unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed < 0 or seed >= 2**64:
        raise OutOfRange(f"Seed must be a 64-bit unsigned integer, got {seed}", seed)
    return np.random.Generator(np.random.Philox(seed))


def _cell_radius(surface: Surface, cell: int) -> float:
    return max(dist(_ORIGIN, vertex) for vertex in surface.cells[cell].hexagon.vertices)


def sample_liouville(surface: Surface, seed: SeedLike,
                     budget: int = REJECTION_BUDGET) -> InteriorState:
    """Draw a unit tangent vector from the normalized Liouville measure.

    All cells have area π, so the cell is uniform. The base point is drawn
    uniformly by hyperbolic area from the disk around `i` containing the
    cell and rejected until it falls into the cell; the direction is
    uniform.
    """
    rng = make_rng(seed)
    cell = int(rng.integers(len(surface.cells)))
    hexagon = surface.cells[cell].hexagon
    radius = _cell_radius(surface, cell)
    spread = math.cosh(radius) - 1.0

    for _ in range(budget):
        r = math.acosh(1.0 + rng.random() * spread)
        phi = rng.random() * 2.0 * math.pi
        base = point_along(UnitTangentH2(_ORIGIN, phi), r).base
        if hexagon.contains(base):
            direction = rng.random() * 2.0 * math.pi
            return InteriorState(cell, UnitTangentH2(base, direction))

    raise RejectionBudgetExceeded(cell, budget)


def sample_cross_section(surface: Surface, seed: SeedLike,
                         tangency_tol: float = 1e-9) -> CrossSectionState:
    """Draw a cross-section state from the normalized measure with density
    `|sin θ| / (4 ℓ(Γ))`: the curve is chosen proportionally to its length,
    the position uniformly."""
    rng = make_rng(seed)
    gamma = surface.gamma
    if not gamma:
        raise OutOfRange("Surface has no labeled curves")
    lengths = np.array([cuff.length for cuff in gamma])
    index = int(rng.choice(len(gamma), p=lengths / lengths.sum()))
    cuff = gamma[index]
    x = rng.random() * cuff.length

    while True:
        # inverse of the distribution sin θ / 2 on (0, π)
        theta = math.acos(1.0 - 2.0 * rng.random())
        if rng.random() < 0.5:
            theta += math.pi
        if abs(math.sin(theta)) > tangency_tol:
            return CrossSectionState(cuff.id, x, theta)
