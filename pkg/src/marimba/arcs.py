# arcs.py
#
# Orthogeodesic arcs with endpoints on the labeled multicurve.
#
# Arc classes are searched as words of cell side crossings, developed into
# the chart of the start cell. The length of a class is the common
# perpendicular of the developed start and end curves, accepted only when
# the perpendicular follows the cells of the word.
#
# Date: 2026-09-20

from typing import Optional, Any
from dataclasses import dataclass
from collections import deque
import logging

from .hyp2 import (PointH2, GeodesicH2, Isometry2, renormalize, dist,
                   common_perpendicular, fermi_coordinates, geodesic_through,
                   intersection, segment_geodesic_distance)
from .errors import (BudgetExceeded, InvalidRealization, OutOfRange,
                     SharedEndpoint, Crossing, Degenerate)
from .surface import Surface, HalfSide
from .spectra import arc_total_mass

__all__ = [
    "SideCrossing",
    "ArcClass",
    "ArcFoot",
    "OrthoArc",
    "DevelopedSide",
    "DevelopedArc",
    "DEFAULT_BUDGET",
    "develop_arc",
    "orthogeodesic_length",
    "find_orthoarcs",
    "enumerate_arc_classes",
    "reference_arc_classes",
    "orthospectrum_oracle",
    "oracle_coverage",
]

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 200_000
"""Maximal number of words examined by one search."""

REALIZATION_TOL = 1e-9
POSITION_TOL = 1e-6
LENGTH_TOL = 1e-8
TILE_TOL = 1e-6


@dataclass(frozen=True, order=True)
class SideCrossing:
    """Crossing of side `side` of cell `cell` through its passage number
    `passage`."""
    cell: int
    side: int
    passage: int = 0

    def as_list(self) -> list[int]:
        return [self.cell, self.side, self.passage]


@dataclass(frozen=True)
class ArcClass:
    """Combinatorial class of an arc from a Γ half-side to a Γ half-side.

    The word lists the sides crossed in order. For a `k`-step arc exactly
    `k - 1` of them are Γ sides.
    """
    start: tuple[int, int]
    word: tuple[SideCrossing, ...]
    end: tuple[int, int]
    k: int = 1

    @property
    def key(self) -> tuple:
        """Canonical ordering key."""
        return (len(self.word), self.start, self.end,
                tuple((c.cell, c.side, c.passage) for c in self.word))

    def as_dict(self) -> dict[str, Any]:
        return {"k": self.k,
                "start": list(self.start),
                "end": list(self.end),
                "word": [crossing.as_list() for crossing in self.word]}

    def __str__(self) -> str:
        word = " ".join(f"{c.cell}:{c.side}" + (f"/{c.passage}" if c.passage else "")
                        for c in self.word)
        return f"{self.start[0]}:{self.start[1]} [{word}] {self.end[0]}:{self.end[1]}"


@dataclass(frozen=True)
class ArcFoot:
    """End point of an orthogeodesic: curve coordinate `x` on gluing
    `gluing`, approached from the side of slot `end`."""
    gluing: str
    end: str
    x: float

    def as_dict(self) -> dict[str, Any]:
        return {"cuff": self.gluing, "side": self.end, "x": self.x}


@dataclass(frozen=True)
class OrthoArc:
    arc_class: ArcClass
    length: float
    start: ArcFoot
    stop: ArcFoot

    def as_dict(self) -> dict[str, Any]:
        return {"length": self.length,
                "start": self.start.as_dict(),
                "stop": self.stop.as_dict(),
                "class": self.arc_class.as_dict()}


@dataclass(frozen=True)
class DevelopedSide:
    """A crossed side segment in the chart of the start cell."""
    crossing: SideCrossing
    p: PointH2
    q: PointH2
    gamma: bool
    """The side lies on the labeled multicurve."""

    @property
    def line(self) -> GeodesicH2:
        return geodesic_through(self.p, self.q)


@dataclass(frozen=True)
class DevelopedArc:
    arc_class: ArcClass
    start_half: HalfSide
    end_half: HalfSide
    sides: tuple[DevelopedSide, ...]
    end_chart: Isometry2
    """Maps the chart of the end cell to the chart of the start cell."""

    @property
    def start_line(self) -> GeodesicH2:
        return self.start_half.geodesic

    @property
    def end_segment(self) -> tuple[PointH2, PointH2]:
        return (self.end_chart.apply_point(self.end_half.start),
                self.end_chart.apply_point(self.end_half.stop))

    @property
    def end_line(self) -> GeodesicH2:
        return self.end_chart.apply_geodesic(self.end_half.geodesic)


# Developing
# ----------------------------------------------------------------------

def _side_segment(surface: Surface, cell: int, side: int,
                  lo: float, hi: float) -> tuple[PointH2, PointH2]:
    """Segment of a side, in the chart of its cell, covered by a passage."""
    half = surface.half_sides.get((cell, side))
    if half is None:
        return surface.cells[cell].hexagon.segment(side)
    lo = max(lo, 0.0)
    hi = min(hi, half.length)
    return (half.point_at(lo), half.point_at(hi))


def _gamma_half(surface: Surface, ref: tuple[int, int], what: str) -> HalfSide:
    half = surface.half_sides.get(ref)
    if half is None or not surface.is_gamma_side(*ref):
        raise OutOfRange(f"The {what} side {ref} of an arc is not on the labeled multicurve",
                         ref)
    return half


def develop_arc(surface: Surface, arc: ArcClass) -> DevelopedArc:
    """Develop the cells of an arc class into the chart of its start cell.

    Raises `InvalidRealization` when the word is not a chain of adjacent
    cells from the start to the end side.
    """
    start = _gamma_half(surface, arc.start, "start")
    end = _gamma_half(surface, arc.end, "end")

    chart = Isometry2.identity()
    cell = arc.start[0]
    sides: list[DevelopedSide] = []
    for crossing in arc.word:
        if crossing.cell != cell:
            raise InvalidRealization(f"Crossing {crossing} does not leave cell {cell}")
        pairing = surface.pairings.get((crossing.cell, crossing.side))
        if pairing is None or not (0 <= crossing.passage < len(pairing.passages)):
            raise InvalidRealization(f"Cell {cell} has no passage {crossing.passage} "
                                     f"through side {crossing.side}")
        passage = pairing.passages[crossing.passage]
        p, q = _side_segment(surface, crossing.cell, crossing.side,
                             passage.lo, passage.hi)
        sides.append(DevelopedSide(crossing, chart.apply_point(p), chart.apply_point(q),
                                   surface.is_gamma_side(crossing.cell, crossing.side)))
        chart = renormalize(chart @ passage.isometry.inverse())
        cell = passage.cell

    if arc.end[0] != cell:
        raise InvalidRealization(f"Word ends in cell {cell}, not in cell {arc.end[0]}")
    interior = sum(1 for side in sides if side.gamma)
    if interior != arc.k - 1:
        raise InvalidRealization(f"Word crosses the multicurve {interior} times, "
                                 f"a {arc.k}-step arc crosses it {arc.k - 1} times")
    return DevelopedArc(arc, start, end, tuple(sides), chart)


def _on_segment(p: PointH2, q: PointH2, x: PointH2, tol: float = REALIZATION_TOL) -> bool:
    return dist(p, x) + dist(x, q) - dist(p, q) <= tol


def _local(half: HalfSide, point: PointH2) -> float:
    return min(max(dist(half.start, point), 0.0), half.length)


def _foot(surface: Surface, half: HalfSide, point: PointH2) -> ArcFoot:
    cuff = surface.cuffs[half.gluing]
    x = cuff.to_curve(half.end, half.offset + _local(half, point))
    if cuff.length - x < POSITION_TOL:
        x = 0.0
    return ArcFoot(half.gluing, half.end, x)


def _realize(surface: Surface, developed: DevelopedArc) -> OrthoArc:
    start = developed.start_half
    try:
        perpendicular = common_perpendicular(developed.start_line, developed.end_line)
    except (SharedEndpoint, Crossing) as error:
        raise InvalidRealization(f"Start and end curves of {developed.arc_class} "
                                 f"have no common perpendicular: {error}")
    length, foot1, foot2 = perpendicular

    if not _on_segment(start.start, start.stop, foot1):
        raise InvalidRealization(f"Perpendicular of {developed.arc_class} "
                                 "starts outside the start side")
    p, q = developed.end_segment
    if not _on_segment(p, q, foot2):
        raise InvalidRealization(f"Perpendicular of {developed.arc_class} "
                                 "ends outside the end side")

    if developed.sides:
        line = geodesic_through(foot1, foot2)
        previous = 0.0
        for side in developed.sides:
            point = intersection(line, side.line)
            if point is None or not _on_segment(side.p, side.q, point):
                raise InvalidRealization(f"Perpendicular of {developed.arc_class} "
                                         f"misses side {side.crossing}")
            position = dist(foot1, point)
            if position < previous - REALIZATION_TOL or position > length + REALIZATION_TOL:
                raise InvalidRealization(f"Perpendicular of {developed.arc_class} "
                                         f"crosses side {side.crossing} out of order")
            previous = position

    end_point = developed.end_chart.inverse().apply_point(foot2)
    return OrthoArc(developed.arc_class, length,
                    _foot(surface, start, foot1),
                    _foot(surface, developed.end_half, end_point))


def orthogeodesic_length(surface: Surface, arc: ArcClass) -> OrthoArc:
    """Orthogeodesic representative of an arc class.

    Raises `InvalidRealization` when the class has no orthogeodesic with
    the combinatorics of its word.
    """
    try:
        developed = develop_arc(surface, arc)
    except Degenerate as error:
        raise InvalidRealization(f"Developing {arc} failed: {error}")
    return _realize(surface, developed)


# Search
# ----------------------------------------------------------------------

@dataclass
class _Node:
    cell: int
    entry: int
    """Side through which the cell was entered."""
    chart: Isometry2
    word: tuple[SideCrossing, ...]
    crossings: int
    """Γ sides crossed so far."""
    interval: tuple[float, float]
    """Feet on the start curve from which the perpendicular still meets
    every crossed side."""
    tiles: tuple[PointH2, ...]
    """Developed centers of the visited cells."""


class _Search:
    """Word search from every Γ half-side."""

    def __init__(self, surface: Surface, k: int, l_max: float, budget: int,
                 prune: bool = True, max_depth: Optional[int] = None,
                 order: str = "breadth"):
        if k < 1:
            raise OutOfRange(f"Arc step count must be positive, got {k}", k)
        if not (l_max > 0.0):
            raise OutOfRange(f"Length bound must be positive, got {l_max}", l_max)
        if order not in ("breadth", "depth"):
            raise OutOfRange(f"Unknown search order '{order}'", order)
        self.surface = surface
        self.k = k
        self.l_max = l_max
        self.budget = budget
        self.prune = prune
        self.max_depth = max_depth
        self.order = order
        self.words = 0
        self.arcs: list[OrthoArc] = []

    def run(self) -> list[OrthoArc]:
        starts = sorted(ref for ref in self.surface.half_sides
                        if self.surface.is_gamma_side(*ref))
        for ref in starts:
            self._search_from(self.surface.half_sides[ref])
        logger.debug("Arc search examined %d words, %d realized candidates",
                     self.words, len(self.arcs))
        return self.arcs

    def _search_from(self, start: HalfSide):
        line = start.geodesic
        s0, _ = fermi_coordinates(line, start.start)
        s1, _ = fermi_coordinates(line, start.stop)
        center = self.surface.cells[start.cell].hexagon.center
        frontier = deque([_Node(start.cell, start.side, Isometry2.identity(), (), 0,
                                (min(s0, s1), max(s0, s1)), (center,))])
        while frontier:
            node = frontier.popleft() if self.order == "breadth" else frontier.pop()
            self._expand(start, line, node, frontier)

    def _feasible(self, start: HalfSide, line: GeodesicH2, node: _Node,
                  p: PointH2, q: PointH2) -> Optional[tuple[float, float]]:
        """Narrowed foot interval, or `None` when no perpendicular of length
        at most the bound can cross the segment `[p, q]`."""
        if not self.prune:
            return node.interval
        sp, _ = fermi_coordinates(line, p)
        sq, _ = fermi_coordinates(line, q)
        lo = max(node.interval[0], min(sp, sq))
        hi = min(node.interval[1], max(sp, sq))
        if lo > hi + REALIZATION_TOL:
            return None
        bound = segment_geodesic_distance(p, q, line)
        if dist(p, q) > 0.0:
            bound = max(bound, segment_geodesic_distance(start.start, start.stop,
                                                         geodesic_through(p, q)))
        if bound > self.l_max + REALIZATION_TOL:
            return None
        return (lo, hi)

    def _candidate(self, start: HalfSide, node: _Node, side: int):
        arc = ArcClass((start.cell, start.side), node.word, (node.cell, side), self.k)
        try:
            developed = develop_arc(self.surface, arc)
            found = _realize(self.surface, developed)
        except (InvalidRealization, Degenerate):
            return
        if found.length <= self.l_max:
            self.arcs.append(found)

    def _expand(self, start: HalfSide, line: GeodesicH2, node: _Node,
                frontier: deque):
        surface = self.surface
        cell = surface.cells[node.cell]
        for side in range(6):
            if side == node.entry:
                continue
            gamma = surface.is_gamma_side(node.cell, side)
            if gamma and node.crossings == self.k - 1:
                p, q = cell.hexagon.segment(side)
                if self._feasible(start, line, node, node.chart.apply_point(p),
                                  node.chart.apply_point(q)) is not None:
                    self._candidate(start, node, side)
                continue
            if self.max_depth is not None and len(node.word) >= self.max_depth:
                continue

            pairing = surface.pairings[(node.cell, side)]
            for index, passage in enumerate(pairing.passages):
                if passage.hi <= passage.lo:
                    continue
                p, q = _side_segment(surface, node.cell, side, passage.lo, passage.hi)
                p = node.chart.apply_point(p)
                q = node.chart.apply_point(q)
                interval = self._feasible(start, line, node, p, q)
                if interval is None:
                    continue
                try:
                    chart = renormalize(node.chart @ passage.isometry.inverse())
                except Degenerate:
                    continue
                center = chart.apply_point(surface.cells[passage.cell].hexagon.center)
                if any(dist(center, tile) < TILE_TOL for tile in node.tiles):
                    continue

                self.words += 1
                if self.words > self.budget:
                    raise BudgetExceeded(self.budget)
                frontier.append(_Node(passage.cell, passage.side, chart,
                                      node.word + (SideCrossing(node.cell, side, index),),
                                      node.crossings + (1 if gamma else 0),
                                      interval,
                                      node.tiles + (center,)))


def _same_arc(first: OrthoArc, second: OrthoArc, lengths: dict[str, float]) -> bool:
    for a, b in ((first.start, second.start), (first.stop, second.stop)):
        if a.gluing != b.gluing or a.end != b.end:
            return False
        length = lengths[a.gluing]
        delta = abs(a.x - b.x) % length
        if min(delta, length - delta) > POSITION_TOL:
            return False
    return True


def _deduplicate(arcs: list[OrthoArc], lengths: dict[str, float]) -> list[OrthoArc]:
    """Merge candidates realizing the same orthogeodesic. The class with
    the smallest key represents each group."""
    ordered = sorted(arcs, key=lambda arc: arc.length)
    groups: list[list[OrthoArc]] = []
    for arc in ordered:
        for group in reversed(groups):
            head = group[0]
            if arc.length - head.length > LENGTH_TOL * max(1.0, arc.length):
                break
            if _same_arc(head, arc, lengths):
                group.append(arc)
                break
        else:
            groups.append([arc])

    result = [min(group, key=lambda arc: arc.arc_class.key) for group in groups]
    result.sort(key=lambda arc: (arc.length, arc.arc_class.key))
    return result


def _run(surface: Surface, search: _Search) -> list[OrthoArc]:
    search.run()
    lengths = {id: cuff.length for id, cuff in surface.cuffs.items()}
    return _deduplicate(search.arcs, lengths)


def find_orthoarcs(surface: Surface, k: int, l_max: float,
                   budget: int = DEFAULT_BUDGET,
                   order: str = "breadth") -> list[OrthoArc]:
    """All oriented `k`-step orthogeodesics of length at most `l_max`,
    sorted by length.

    The search prunes a word when no perpendicular to the start curve of
    length at most `l_max` can cross all of its sides. Raises
    `BudgetExceeded` when more than `budget` words are examined.
    """
    arcs = _run(surface, _Search(surface, k, l_max, budget, order=order))
    logger.info("Found %d oriented %d-step orthogeodesics of length ≤ %g",
                len(arcs), k, l_max)
    return arcs


def enumerate_arc_classes(surface: Surface, k: int, l_max: float,
                          budget: int = DEFAULT_BUDGET,
                          order: str = "breadth") -> list[ArcClass]:
    """Classes of the `k`-step arcs whose orthogeodesic is not longer than
    `l_max`, each class once."""
    return [arc.arc_class for arc in find_orthoarcs(surface, k, l_max, budget, order)]


def reference_arc_classes(surface: Surface, k: int, l_max: float,
                          max_depth: int,
                          budget: int = DEFAULT_BUDGET) -> list[OrthoArc]:
    """Orthogeodesics from an exhaustive search of all words of at most
    `max_depth` crossings, without length pruning.

    Slow; meant for checking `find_orthoarcs` on small instances.
    """
    if max_depth < 0:
        raise OutOfRange(f"Depth must not be negative, got {max_depth}", max_depth)
    return _run(surface, _Search(surface, k, l_max, budget, prune=False,
                                 max_depth=max_depth))


def orthospectrum_oracle(surface: Surface, k: int, l_max: float,
                         budget: int = DEFAULT_BUDGET) -> list[tuple[float, int]]:
    """Lengths of the oriented `k`-step orthogeodesics up to `l_max` as
    sorted `(length, multiplicity)` pairs."""
    spectrum: list[tuple[float, int]] = []
    for arc in find_orthoarcs(surface, k, l_max, budget):
        if spectrum and arc.length - spectrum[-1][0] <= LENGTH_TOL * max(1.0, arc.length):
            length, count = spectrum[-1]
            spectrum[-1] = (length, count + 1)
        else:
            spectrum.append((arc.length, 1))
    return spectrum


def oracle_coverage(spectrum: list[tuple[float, int]], l_gamma: float) -> float:
    """Share of the return-time distribution carried by the listed 1-step
    arcs. The shares of all oriented 1-step arcs add up to one."""
    return sum(count * arc_total_mass(l_gamma, length) for length, count in spectrum)
