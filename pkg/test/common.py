# common.py
#
# Common structures for tests.
#
# Date: 2026-09-24
#

import os
import math

from marimba.surface import MarimbaSpec, Piece, PieceKind, SlotRef, Gluing
from marimba.hyp2 import PointH2, UnitTangentH2
from marimba.flow import InteriorState

SLOW_TESTS = bool(os.environ.get("MARIMBA_SLOW_TESTS"))
"""Long Monte Carlo runs are enabled by `MARIMBA_SLOW_TESTS=1`."""


def genus2_spec(lengths: tuple[float, float, float] = (2.0, 2.0, 2.0),
                twists: tuple[float, float, float] = (0.3, 0.0, 0.7),
                labels: tuple = ("C", "D", None)) -> MarimbaSpec:
    """Two pairs of pants glued along three non-separating curves."""
    pieces = (Piece("P0", PieceKind.PANTS), Piece("P1", PieceKind.PANTS))
    gluings = tuple(Gluing(id=f"g{i}",
                           a=SlotRef("P0", str(i)),
                           b=SlotRef("P1", str(i)),
                           length=lengths[i],
                           twist=twists[i],
                           label=labels[i])
                    for i in range(3))
    return MarimbaSpec(pieces=pieces, gluings=gluings)


def separating_spec(l_sep: float = 2.5) -> MarimbaSpec:
    """Two one-holed tori joined along a labeled separating curve."""
    pieces = (Piece("P0", PieceKind.PANTS), Piece("P1", PieceKind.PANTS))
    gluings = (
        Gluing(id="h0", a=SlotRef("P0", "0"), b=SlotRef("P0", "1"),
               length=1.5, twist=0.2),
        Gluing(id="h1", a=SlotRef("P1", "0"), b=SlotRef("P1", "1"),
               length=1.8, twist=0.4),
        Gluing(id="s", a=SlotRef("P0", "2"), b=SlotRef("P1", "2"),
               length=l_sep, twist=0.0, label="S"),
    )
    return MarimbaSpec(pieces=pieces, gluings=gluings)


def center_state(surface, cell: int = 0, direction: float = 0.7) -> InteriorState:
    """Vector at the center of a cell. Centers of cells are never on a
    cell side."""
    center = surface.cells[cell].hexagon.center
    return InteriorState(cell, UnitTangentH2(center, direction))


def assert_close(case, first: float, second: float, tol: float = 1e-9):
    case.assertLessEqual(abs(first - second), tol * max(1.0, abs(first), abs(second)),
                         f"{first} != {second} within {tol}")
