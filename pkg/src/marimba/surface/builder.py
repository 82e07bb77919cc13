# builder.py
#
# Geometric realization of a marimba spec: hexagon cells in base charts and
# side-pairing isometries.
#
# Date: 2026-09-16

from typing import Optional
from dataclasses import dataclass, replace
import logging
import math

from ..hyp2 import (PointH2, GeodesicH2, UnitTangentH2, Isometry2,
                    point_along, direction_toward, frame_isometry,
                    reflection_across, geodesic_through, dist)
from ..errors import GeometryFailure
from .spec import MarimbaSpec, PieceKind, SlotRef, Gluing
from .hexagon import RightHexagon, pants_hexagon
from .issues import SpecError
from .validate import validate_spec, euler_characteristic, slot_lengths

__all__ = [
    "Cell",
    "HalfSide",
    "Passage",
    "SidePairing",
    "CuffRecord",
    "Surface",
    "build_surface",
]

logger = logging.getLogger(__name__)

LENGTH_TOLERANCE = 1e-9
AREA_TOLERANCE = 1e-8


@dataclass(frozen=True)
class Cell:
    index: int
    piece: str
    sheet: int
    """Sheet of the piece the cell belongs to: 0 for pants, 0 or 1 for the
    two sheets of a double piece."""
    mirrored: bool
    """Back cell of a hexagon pair (mirror image of the front cell)."""
    hexagon: RightHexagon


@dataclass(frozen=True)
class HalfSide:
    """Cuff half-side of a cell, oriented with the cell interior on the
    right."""
    cell: int
    side: int
    gluing: str
    end: str
    """`a` or `b`: which slot of the gluing the half-side belongs to."""
    offset: float
    """Slot coordinate of the start of the half-side."""
    length: float
    start: PointH2
    stop: PointH2

    @property
    def geodesic(self) -> GeodesicH2:
        return geodesic_through(self.start, self.stop)

    def tangent_at(self, local: float) -> UnitTangentH2:
        """Unit tangent along the half-side at local coordinate `local`."""
        origin = UnitTangentH2(self.start, direction_toward(self.start, self.stop))
        return point_along(origin, local)

    def point_at(self, local: float) -> PointH2:
        return self.tangent_at(local).base


@dataclass(frozen=True)
class Passage:
    """Part of a side through which the neighbouring cell is entered."""
    lo: float
    hi: float
    """Local coordinate interval on the source half-side."""
    cell: int
    side: int
    isometry: Isometry2
    """Maps the source cell chart to the target cell chart."""
    shift: float = 0.0
    """The point at local coordinate `x` lands at local coordinate
    `shift - x` of the target half-side."""

    def contains(self, local: float, tol: float = 1e-12) -> bool:
        return self.lo - tol <= local <= self.hi + tol


@dataclass(frozen=True)
class SidePairing:
    cell: int
    side: int
    passages: tuple[Passage, ...]
    half_side: Optional[HalfSide] = None
    """Set for cuff sides, `None` for seams."""

    @property
    def is_cuff(self) -> bool:
        return self.half_side is not None

    def passage_at(self, local: float) -> Passage:
        if len(self.passages) == 1:
            return self.passages[0]
        best = self.passages[0]
        best_gap = math.inf
        for passage in self.passages:
            if passage.contains(local):
                return passage
            gap = min(abs(local - passage.lo), abs(local - passage.hi))
            if gap < best_gap:
                best, best_gap = passage, gap
        return best


class CuffRecord:
    """One glued cuff: the two boundary cycles it is made of."""
    gluing: Gluing
    a_cycle: tuple[HalfSide, ...]
    b_cycle: tuple[HalfSide, ...]

    def __init__(self, gluing: Gluing, a_cycle: tuple[HalfSide, ...],
                 b_cycle: tuple[HalfSide, ...]):
        self.gluing = gluing
        self.a_cycle = a_cycle
        self.b_cycle = b_cycle

    @property
    def id(self) -> str:
        return self.gluing.id

    @property
    def length(self) -> float:
        return self.gluing.length

    @property
    def twist(self) -> float:
        return self.gluing.twist

    @property
    def label(self) -> Optional[str]:
        return self.gluing.label

    def cycle(self, end: str) -> tuple[HalfSide, ...]:
        return self.a_cycle if end == "a" else self.b_cycle

    def measured_length(self, end: str = "a") -> float:
        return sum(dist(h.start, h.stop) for h in self.cycle(end))

    def to_curve(self, end: str, coordinate: float) -> float:
        """Convert a slot coordinate to the coordinate of the curve, which
        follows slot `a`."""
        if end == "a":
            return coordinate % self.length
        return (self.twist - coordinate) % self.length

    def from_curve(self, end: str, x: float) -> float:
        if end == "a":
            return x % self.length
        return (self.twist - x) % self.length

    def locate(self, end: str, coordinate: float) -> tuple[HalfSide, float]:
        """Half-side and local coordinate of a slot coordinate."""
        coordinate = coordinate % self.length
        cycle = self.cycle(end)
        for half in cycle:
            if coordinate < half.offset + half.length:
                return (half, coordinate - half.offset)
        last = cycle[-1]
        return (last, min(coordinate - last.offset, last.length))


class Surface:
    """Closed hyperbolic surface with a labeled multicurve, realized as
    right-angled hexagon cells and side pairings. Immutable after
    construction."""

    spec: MarimbaSpec
    cells: list[Cell]
    pairings: dict[tuple[int, int], SidePairing]
    cuffs: dict[str, CuffRecord]
    half_sides: dict[tuple[int, int], HalfSide]
    chi: int

    def __init__(self, spec: MarimbaSpec, cells: list[Cell],
                 pairings: dict[tuple[int, int], SidePairing],
                 cuffs: dict[str, CuffRecord],
                 half_sides: dict[tuple[int, int], HalfSide],
                 chi: int):
        self.spec = spec
        self.cells = cells
        self.pairings = pairings
        self.cuffs = cuffs
        self.half_sides = half_sides
        self.chi = chi
        self._spec_hash: Optional[str] = None

    @property
    def spec_hash(self) -> str:
        if self._spec_hash is None:
            self._spec_hash = self.spec.spec_hash()
        return self._spec_hash

    @property
    def sheets(self) -> int:
        return self.spec.sheets

    @property
    def cells_per_sheet(self) -> int:
        return len(self.cells) // self.spec.sheets

    @property
    def labels(self) -> list[str]:
        return self.spec.labels

    @property
    def gamma(self) -> list[CuffRecord]:
        return [cuff for cuff in self.cuffs.values() if cuff.label is not None]

    @property
    def gamma_length(self) -> float:
        return sum(cuff.length for cuff in self.gamma)

    def label_length(self, label: str) -> float:
        return sum(cuff.length for cuff in self.gamma if cuff.label == label)

    def area(self) -> float:
        return sum(cell.hexagon.area() for cell in self.cells)

    def is_gamma_side(self, cell: int, side: int) -> bool:
        half = self.half_sides.get((cell, side))
        return half is not None and self.cuffs[half.gluing].label is not None

    def cuff_tangent(self, gluing: str, x: float) -> tuple[HalfSide, float, UnitTangentH2]:
        """Tangent of a cuff at curve coordinate `x`, expressed in the chart
        of the slot `a` cell.

        Returns the half-side, the local coordinate on it and the unit
        tangent pointing in the direction of the curve.
        """
        cuff = self.cuffs[gluing]
        half, local = cuff.locate("a", x)
        return (half, local, half.tangent_at(local))

    def __getstate__(self):
        state = dict(self.__dict__)
        state.pop("_compiled", None)
        return state

    def __repr__(self) -> str:
        return f"Surface(cells={len(self.cells)}, chi={self.chi}, gamma={self.labels})"


# Building
# ----------------------------------------------------------------------

def _cycle_starts(kind: PieceKind, first: int) -> dict[str, tuple[int, int]]:
    """First half-side (cell, side) of each slot's boundary cycle."""
    match kind:
        case PieceKind.PANTS:
            return {"0": (first, 0), "1": (first, 2), "2": (first, 4)}
        case PieceKind.DOUBLE:
            return {"A": (first, 0), "A'": (first, 2),
                    "B": (first, 4), "B'": (first + 2, 4)}


def _seam_partners(kind: PieceKind, first: int) -> list[tuple[int, int, int]]:
    """Seam identifications `(front cell, back cell, side)` of a piece."""
    match kind:
        case PieceKind.PANTS:
            return [(first, first + 1, side) for side in (1, 3, 5)]
        case PieceKind.DOUBLE:
            front = (first, first + 2)
            back = (first + 1, first + 3)
            result: list[tuple[int, int, int]] = []
            for j in (0, 1):
                # the seam between the first two cuffs switches sheets
                result.append((front[j], back[(j + 1) % 2], 1))
                result.append((front[j], back[j], 3))
                result.append((front[j], back[j], 5))
            return result


def _piece_hexagon(kind: PieceKind, name: str,
                   lengths: dict[SlotRef, float]) -> RightHexagon:
    match kind:
        case PieceKind.PANTS:
            return pants_hexagon(lengths[SlotRef(name, "0")],
                                 lengths[SlotRef(name, "1")],
                                 lengths[SlotRef(name, "2")])
        case PieceKind.DOUBLE:
            half = lengths[SlotRef(name, "A")] / 2.0
            return pants_hexagon(half, half, lengths[SlotRef(name, "B")])


def _walk_cycle(cells: list[Cell], seams: dict[tuple[int, int], int],
                start: tuple[int, int]) -> list[tuple[int, int]]:
    cycle: list[tuple[int, int]] = []
    current = start
    side = start[1]
    while True:
        cycle.append(current)
        cell = cells[current[0]]
        seam = (side + 1) % 6 if cell.mirrored else (side - 1) % 6
        current = (seams[(current[0], seam)], side)
        if current == start:
            return cycle
        if len(cycle) > len(cells):
            raise GeometryFailure(f"Boundary cycle starting at {start} does not close")


def _half_side(cell: Cell, side: int) -> tuple[PointH2, PointH2]:
    a, b = cell.hexagon.segment(side)
    # front cells are counter-clockwise: the interior is on the left of the
    # side, so the cuff runs backwards
    if cell.mirrored:
        return (a, b)
    return (b, a)


def _cuff_passages(source: HalfSide, targets: tuple[HalfSide, ...],
                   length: float, twist: float,
                   relabel: Optional[dict[int, int]] = None) -> tuple[Passage, ...]:
    origin = UnitTangentH2(source.start, direction_toward(source.start, source.stop))
    passages: list[Passage] = []
    for target in targets:
        shift = (twist - source.offset - target.offset) % length
        lo = max(0.0, shift - target.length)
        hi = min(source.length, shift)
        if hi < lo:
            continue
        landing = target.tangent_at(shift)
        reversed_landing = UnitTangentH2(landing.base, landing.dir + math.pi)
        isometry = frame_isometry(origin, reversed_landing)
        cell = target.cell if relabel is None else relabel[target.cell]
        passages.append(Passage(lo=lo, hi=hi, cell=cell, side=target.side,
                                isometry=isometry, shift=shift))
    if not passages:
        raise GeometryFailure(f"Half-side ({source.cell}, {source.side}) of gluing '{source.gluing}' has no partner")
    passages.sort(key=lambda passage: passage.lo)
    return tuple(passages)


def _deck_permutation(first: int) -> dict[int, int]:
    """Cell permutation of the sheet exchange of a double piece."""
    return {first + i: first + (i + 2) % 4 for i in range(4)}


def _half_turn(spec: MarimbaSpec, gluing: Gluing,
               firsts: dict[str, int]) -> Optional[dict[int, int]]:
    """Sheet exchange of the pieces on both ends of a gluing of two
    `A`-type slots, `None` for other gluings.

    The sheet exchange of a double piece rotates its slots `A` and `A'` by
    half their length, so rotating both ends of such a gluing maps the
    gluing to itself.
    """
    pieces = (gluing.a.piece, gluing.b.piece)
    if gluing.a.slot not in ("A", "A'") or gluing.b.slot not in ("A", "A'"):
        return None
    if any(spec.piece(name).kind != PieceKind.DOUBLE for name in pieces):
        return None
    deck: dict[int, int] = {}
    for name in pieces:
        deck.update(_deck_permutation(firsts[name]))
    return deck


def _reduced_twist(gluing: Gluing, deck: Optional[dict[int, int]]) \
        -> tuple[float, Optional[dict[int, int]]]:
    """Twist used to compute the passages of a gluing and the cell
    relabeling applied to their targets.

    For a gluing with a half-turn symmetry the twist is reduced modulo half
    the length and an odd number of half-turns becomes the sheet exchange
    of the targets, so that twists differing by half the length give the
    same passages.
    """
    if deck is None:
        return (gluing.twist, None)
    half = gluing.length / 2.0
    reduced = gluing.twist % half
    turns = round((gluing.twist - reduced) / half)
    if turns % 2 == 0:
        return (reduced, None)
    return (reduced, deck)


def build_surface(spec: MarimbaSpec) -> Surface:
    """Build the geometric realization of a spec.

    Raises `SpecError` when the spec does not validate and
    `GeometryFailure` when the constructed geometry misses its tolerances.
    """
    issues = validate_spec(spec)
    if issues:
        raise SpecError(issues)

    lengths = slot_lengths(spec)
    cells: list[Cell] = []
    seams: dict[tuple[int, int], int] = {}
    pairings: dict[tuple[int, int], SidePairing] = {}
    cycle_starts: dict[SlotRef, tuple[int, int]] = {}
    firsts: dict[str, int] = {}

    for piece in spec.pieces:
        first = len(cells)
        firsts[piece.name] = first
        hexagon = _piece_hexagon(piece.kind, piece.name, lengths)
        back = hexagon.mirrored()
        for sheet in range(piece.kind.pants_count):
            cells.append(Cell(len(cells), piece.name, sheet, False, hexagon))
            cells.append(Cell(len(cells), piece.name, sheet, True, back))

        mirror = Isometry2.mirror()
        for front_cell, back_cell, side in _seam_partners(piece.kind, first):
            forward = mirror @ reflection_across(hexagon.sides[side])
            seams[(front_cell, side)] = back_cell
            seams[(back_cell, side)] = front_cell
            pairings[(front_cell, side)] = SidePairing(
                front_cell, side,
                (Passage(-math.inf, math.inf, back_cell, side, forward),))
            pairings[(back_cell, side)] = SidePairing(
                back_cell, side,
                (Passage(-math.inf, math.inf, front_cell, side, forward.inverse()),))

        for slot, start in _cycle_starts(piece.kind, first).items():
            cycle_starts[SlotRef(piece.name, slot)] = start

    # Boundary cycles
    cycles: dict[SlotRef, tuple[HalfSide, ...]] = {}
    ends: dict[SlotRef, tuple[Gluing, str]] = {}
    for gluing in spec.gluings:
        ends[gluing.a] = (gluing, "a")
        ends[gluing.b] = (gluing, "b")

    for slot, start in cycle_starts.items():
        gluing, end = ends[slot]
        halves: list[HalfSide] = []
        offset = 0.0
        for cell_index, side in _walk_cycle(cells, seams, start):
            cell = cells[cell_index]
            p_from, p_to = _half_side(cell, side)
            length = cell.hexagon.lengths[side]
            halves.append(HalfSide(cell_index, side, gluing.id, end, offset,
                                   length, p_from, p_to))
            offset += length
        if abs(offset - gluing.length) > LENGTH_TOLERANCE * max(1.0, gluing.length):
            raise GeometryFailure(f"Slot '{slot}' has length {offset}, expected {gluing.length}",
                                  abs(offset - gluing.length))
        cycles[slot] = tuple(halves)

    cuffs: dict[str, CuffRecord] = {}
    half_sides: dict[tuple[int, int], HalfSide] = {}
    for gluing in spec.gluings:
        record = CuffRecord(gluing, cycles[gluing.a], cycles[gluing.b])
        cuffs[gluing.id] = record
        deck = _half_turn(spec, gluing, firsts)
        twist, relabel = _reduced_twist(gluing, deck)
        derived: list[HalfSide] = []
        for source_cycle, target_cycle in ((record.a_cycle, record.b_cycle),
                                           (record.b_cycle, record.a_cycle)):
            for half in source_cycle:
                half_sides[(half.cell, half.side)] = half
                if deck is not None and cells[half.cell].sheet == 1:
                    derived.append(half)
                    continue
                pairings[(half.cell, half.side)] = SidePairing(
                    half.cell, half.side,
                    _cuff_passages(half, target_cycle, gluing.length,
                                   twist, relabel),
                    half_side=half)

        # Second sheet passages are the sheet exchange of the first sheet
        # ones, exactly.
        for half in derived:
            primary = pairings[(deck[half.cell], half.side)]  # type: ignore
            passages = tuple(replace(passage, cell=deck[passage.cell])  # type: ignore
                             for passage in primary.passages)
            pairings[(half.cell, half.side)] = SidePairing(
                half.cell, half.side, passages, half_side=half)

    chi = euler_characteristic(spec)
    surface = Surface(spec, cells, pairings, cuffs, half_sides, chi)

    area = surface.area()
    expected = 2.0 * math.pi * abs(chi)
    if abs(area - expected) > AREA_TOLERANCE * max(1.0, abs(chi)):
        raise GeometryFailure(f"Total cell area {area} differs from 2π|χ| = {expected}",
                              abs(area - expected))

    logger.info("Built surface: %d cells, χ = %d, Γ = %s",
                len(cells), chi, spec.labels)
    return surface
