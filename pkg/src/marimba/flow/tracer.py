# tracer.py
#
# Geodesic tracer: develops a geodesic through the hexagon cells of a
# surface and records its crossings with the labeled multicurve.
#
# The geodesic is kept as its two ideal endpoints in homogeneous real
# coordinates, expressed in the chart of the current cell. With `u` the
# backward and `w` the forward endpoint, a point `z` of the geodesic has the
# height `H(z) = |(z u₂ - u₁) / (z w₂ - w₁)|²` and the distance between two
# points is half the logarithm of the ratio of their heights. For a side
# with endpoints `a`, `b` the crossing height is the cross-ratio product
#
#     H = -(u∧a · u∧b) / (w∧a · w∧b)
#
# and the crossing position along the side is read from the dual product
# `-(u∧a · w∧a) / (u∧b · w∧b)`.
#
# Date: 2026-09-18

from typing import Optional, Sequence, Any
import concurrent.futures
import logging
import math
import sys

from ..hyp2 import (UnitTangentH2, geodesic_from_tangent, geodesic_through,
                    normalize_angle)
from ..errors import (TangencyStall, Degenerate, GeometryFailure, OutOfRange,
                      UnknownLabel)
from ..common import KahanSum, worker_count
from ..surface import Surface
from .state import (InteriorState, CrossSectionState, StartState, TraceConfig,
                    CrossingEntry, CrossingLog, TraceDiagnostics)

__all__ = [
    "trace",
    "first_return",
    "reverse",
    "trace_many",
]

logger = logging.getLogger(__name__)

DETERMINANT_FLOOR = 1e-300
PASSAGE_SLACK = 1e-12


class _CompiledSurface:
    """Flat per-cell side tables used by the tracer loop.

    `exits[cell][entry + 1]` lists the candidate exit sides of a cell
    entered through `entry` (-1 for an interior start) with their
    homogeneous endpoints.
    """
    ends: list[tuple[tuple[float, float, float, float], ...]]
    sides: list[tuple[tuple[Any, ...], ...]]
    exits: list[tuple[tuple[tuple[int, float, float, float, float], ...], ...]]

    def __init__(self, surface: Surface):
        self.ends = []
        self.sides = []
        self.exits = []
        for cell in surface.cells:
            cell_ends: list[tuple[float, float, float, float]] = []
            cell_sides: list[tuple[Any, ...]] = []
            for side in range(6):
                pairing = surface.pairings[(cell.index, side)]
                half = pairing.half_side
                if half is None:
                    ends = cell.hexagon.sides[side].homogeneous()
                    s_from = 0.0
                    cuff = None
                else:
                    # cuff sides follow the half-side orientation
                    ends = geodesic_through(half.start, half.stop).homogeneous()
                    s_from = _side_coordinate(ends, half.start.z)
                    cuff = surface.cuffs[half.gluing]
                passages = tuple((p.lo, p.hi, p.cell, p.side,
                                  p.isometry.a, p.isometry.b,
                                  p.isometry.c, p.isometry.d)
                                 for p in pairing.passages)
                if cuff is None:
                    record = (passages, None, None, True, 0.0, 0.0, 0.0, s_from)
                else:
                    record = (passages, cuff.id, cuff.label, half.end == "a",  # type: ignore
                              half.offset, cuff.length, cuff.twist, s_from)  # type: ignore
                cell_ends.append(ends)
                cell_sides.append(record)
            self.ends.append(tuple(cell_ends))
            self.sides.append(tuple(cell_sides))
            self.exits.append(tuple(
                tuple((k,) + cell_ends[k] for k in range(6) if k != entry)
                for entry in range(-1, 6)))


def _compiled(surface: Surface) -> _CompiledSurface:
    compiled = surface.__dict__.get("_compiled")
    if compiled is None:
        compiled = _CompiledSurface(surface)
        surface.__dict__["_compiled"] = compiled
    return compiled


def _side_coordinate(ends: tuple[float, float, float, float], z: complex) -> float:
    a1, a2, b1, b2 = ends
    return math.log(abs((z * a2 - a1) / (z * b2 - b1)))


def _crossing_height(ends: tuple[float, float, float, float],
                     u1: float, u2: float, w1: float, w2: float) -> float:
    a1, a2, b1, b2 = ends
    return -((u1 * a2 - a1 * u2) * (u1 * b2 - b1 * u2)) \
        / ((w1 * a2 - a1 * w2) * (w1 * b2 - b1 * w2))


def _select_passage(passages: tuple[tuple[Any, ...], ...], local: float) -> tuple[Any, ...]:
    if len(passages) == 1:
        return passages[0]
    best = passages[0]
    best_gap = math.inf
    for passage in passages:
        lo, hi = passage[0], passage[1]
        if lo - PASSAGE_SLACK <= local <= hi + PASSAGE_SLACK:
            return passage
        gap = min(abs(local - lo), abs(local - hi))
        if gap < best_gap:
            best, best_gap = passage, gap
    return best


def _endpoints(vector: UnitTangentH2) -> tuple[float, float, float, float]:
    u1, u2, w1, w2 = geodesic_from_tangent(vector).homogeneous()
    if u1 * w2 - u2 * w1 < 0.0:
        u1, u2 = -u1, -u2
    return (u1, u2, w1, w2)


def _initial(surface: Surface, start: StartState, cfg: TraceConfig) \
        -> tuple[int, int, UnitTangentH2]:
    """Cell, entry side (-1 for none) and vector in the cell chart."""
    match start:
        case InteriorState():
            if not 0 <= start.cell < len(surface.cells):
                raise OutOfRange(f"Cell {start.cell} does not exist", start.cell)
            if not surface.cells[start.cell].hexagon.contains(start.vector.base, 1e-9):
                raise OutOfRange(f"Start point {start.vector.base} is not in cell {start.cell}",
                                 start.cell)
            return (start.cell, -1, start.vector)

        case CrossSectionState():
            cuff = surface.cuffs.get(start.cuff)
            if cuff is None or cuff.label is None:
                raise UnknownLabel(start.cuff)
            if not 0.0 <= start.x < cuff.length:
                raise OutOfRange(f"Position {start.x} is outside [0, {cuff.length})", start.x)
            sin_theta = math.sin(start.theta)
            if abs(sin_theta) < cfg.tangency_tol:
                raise TangencyStall(abs(sin_theta), 0.0)

            half, local, tangent = surface.cuff_tangent(start.cuff, start.x)
            vector = UnitTangentH2(tangent.base, tangent.dir + start.theta)
            if sin_theta < 0.0:
                # pointing to the right of the curve, into the slot a cell
                return (half.cell, half.side, vector)
            passage = surface.pairings[(half.cell, half.side)].passage_at(local)
            return (passage.cell, passage.side, passage.isometry.apply_tangent(vector))

        case _:
            raise TypeError(f"Can not trace from {type(start).__name__}")


def trace(surface: Surface, start: StartState, cfg: TraceConfig,
          seed: Optional[int] = None) -> CrossingLog:
    """Trace the geodesic of `start` and record its crossings with the
    labeled curves.

    The trace stops when the traced length reaches `cfg.max_length` or
    after `cfg.max_crossings` crossings. Raises `TangencyStall` for a
    near-tangent crossing and `Degenerate` when the endpoint vectors
    collapse.
    """
    tables = _compiled(surface)
    all_ends = tables.ends
    all_sides = tables.sides
    all_exits = tables.exits

    cell, entry, vector = _initial(surface, start, cfg)
    u1, u2, w1, w2 = _endpoints(vector)
    if entry < 0:
        z = vector.base.z
        h_entry = abs((z * u2 - u1) / (z * w2 - w1)) ** 2
    else:
        h_entry = _crossing_height(all_ends[cell][entry], u1, u2, w1, w2)

    max_length = cfg.max_length
    max_crossings = cfg.max_crossings if cfg.max_crossings is not None else sys.maxsize
    tangency_tol = cfg.tangency_tol
    period = cfg.renorm_period

    clock = KahanSum()
    entries: list[CrossingEntry] = []
    diagnostics = TraceDiagnostics()
    steps = 0
    renormalizations = 0
    min_sin = math.inf
    log = math.log
    sqrt = math.sqrt
    atan2 = math.atan2
    pi = math.pi
    length = max_length

    while True:
        best = math.inf
        exit_side = -1
        for k, a1, a2, b1, b2 in all_exits[cell][entry + 1]:
            den = (w1 * a2 - a1 * w2) * (w1 * b2 - b1 * w2)
            if den == 0.0:
                continue
            h = -((u1 * a2 - a1 * u2) * (u1 * b2 - b1 * u2)) / den
            if h_entry < h < best:
                best = h
                exit_side = k
        if exit_side < 0:
            raise GeometryFailure(f"Geodesic does not leave cell {cell} after {steps} steps")

        dt = 0.5 * log(best / h_entry)
        if clock.total + dt > max_length:
            break
        now = clock.add(dt)

        a1, a2, b1, b2 = all_ends[cell][exit_side]
        passages, gluing, label, on_a, offset, cuff_length, twist, s_from = all_sides[cell][exit_side]
        if gluing is None:
            passage = passages[0]
        else:
            ua = u1 * a2 - a1 * u2
            ub = u1 * b2 - b1 * u2
            wa = w1 * a2 - a1 * w2
            wb = w1 * b2 - b1 * w2
            local = 0.5 * log(-(ua * wa) / (ub * wb)) - s_from
            passage = _select_passage(passages, local)
            if label is not None:
                p = ua / wa
                q = ub / wb
                span = q - p
                sin_theta = 2.0 * sqrt(-p * q) / span
                if abs(sin_theta) < tangency_tol:
                    raise TangencyStall(abs(sin_theta), now)
                if abs(sin_theta) < min_sin:
                    min_sin = abs(sin_theta)
                angle = atan2(sin_theta, (p + q) / span)
                coordinate = offset + local
                if on_a:
                    x = coordinate % cuff_length
                else:
                    x = (twist - coordinate) % cuff_length
                    angle += pi
                entries.append(CrossingEntry(now, gluing, label, x,
                                             normalize_angle(angle)))
                if len(entries) >= max_crossings:
                    length = now
                    steps += 1
                    break

        _, _, cell, entry, ma, mb, mc, md = passage
        u1, u2 = ma * u1 + mb * u2, mc * u1 + md * u2
        w1, w2 = ma * w1 + mb * w2, mc * w1 + md * w2
        steps += 1

        if steps % period == 0:
            nu = sqrt(u1 * u1 + u2 * u2)
            nw = sqrt(w1 * w1 + w2 * w2)
            u1, u2, w1, w2 = u1 / nu, u2 / nu, w1 / nw, w2 / nw
            determinant = u1 * w2 - u2 * w1
            if not determinant > DETERMINANT_FLOOR:
                raise Degenerate(determinant)
            renormalizations += 1

        a1, a2, b1, b2 = all_ends[cell][entry]
        h_entry = -((u1 * a2 - a1 * u2) * (u1 * b2 - b1 * u2)) \
            / ((w1 * a2 - a1 * w2) * (w1 * b2 - b1 * w2))

    diagnostics.steps = steps
    diagnostics.renormalizations = renormalizations
    diagnostics.min_sin_theta = min_sin
    logger.info("Traced length %.6g: %d crossings in %d steps",
                length, len(entries), steps)

    return CrossingLog(start=start,
                       entries=entries,
                       length=length,
                       labels=list(surface.labels),
                       config=cfg,
                       diagnostics=diagnostics,
                       spec_hash=surface.spec_hash,
                       seed=seed)


def first_return(surface: Surface, state: CrossSectionState,
                 tangency_tol: Optional[float] = None) -> tuple[CrossSectionState, float]:
    """Next crossing of the forward ray with the labeled curves and the
    time it takes to get there."""
    cfg = TraceConfig(max_crossings=1) if tangency_tol is None \
        else TraceConfig(max_crossings=1, tangency_tol=tangency_tol)
    log = trace(surface, state, cfg)
    entry = log.entries[0]
    return (entry.state(), entry.time)


def reverse(state: CrossSectionState) -> CrossSectionState:
    """The opposite vector at the same base point."""
    return CrossSectionState(state.cuff, state.x, state.theta + math.pi)


# Parallel traces
# ----------------------------------------------------------------------

_worker_surface: Optional[Surface] = None


def _initialize_worker(surface: Surface):
    global _worker_surface
    _worker_surface = surface


def _trace_job(job: tuple[StartState, TraceConfig, Optional[int]]) -> CrossingLog:
    assert _worker_surface is not None
    start, cfg, seed = job
    return trace(_worker_surface, start, cfg, seed)


def trace_many(surface: Surface, starts: Sequence[StartState], cfg: TraceConfig,
               workers: Optional[int] = None,
               seeds: Optional[Sequence[Optional[int]]] = None) -> list[CrossingLog]:
    """Trace independent geodesics in a process pool. The logs are in the
    order of the starts."""
    if seeds is None:
        seeds = [None] * len(starts)
    jobs = list(zip(starts, [cfg] * len(starts), seeds))
    count = min(worker_count(workers), max(1, len(jobs)))

    if count == 1:
        return [trace(surface, start, job_cfg, seed) for start, job_cfg, seed in jobs]

    logger.debug("Tracing %d geodesics with %d workers", len(jobs), count)
    with concurrent.futures.ProcessPoolExecutor(max_workers=count,
                                                initializer=_initialize_worker,
                                                initargs=(surface,)) as executor:
        return list(executor.map(_trace_job, jobs))
