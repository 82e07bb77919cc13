# spectra.py
#
# Return-gap distributions and orthospectrum recovery.
#
# The `k`-step gaps `t[i + k] - t[i]` of a long melody are distributed like
# a sum of per-arc distributions, one for every oriented `k`-step
# orthogeodesic arc. The per-arc distribution depends only on the length of
# the arc and on the total length of the multicurve, so the arc lengths can
# be peeled off the empirical distribution one after another, shortest
# first.
#
# Date: 2026-09-20

from typing import Optional, Any, TextIO
from dataclasses import dataclass, field
from enum import Enum
import csv
import json
import logging
import math

import numpy as np
from scipy import optimize

from .errors import (OutOfRange, TooFewNotes, MultiLabel, NonNegativeChi,
                     QuadratureNotConverged, NegativeResidual, NoDetection)
from .melody import Melody

__all__ = [
    "EmpiricalCDF",
    "ArcCDFModel",
    "SpectrumEntry",
    "OrthospectrumEstimate",
    "gap_cdf",
    "arc_cdf_values",
    "arc_cdf_model",
    "arc_total_mass",
    "mixture_cdf",
    "peel_orthospectrum",
    "SeparationVerdict",
    "SeparationReport",
    "classify_separating",
    "SideReport",
    "SidesReport",
    "single_note_sides",
    "export_cdf_csv",
    "export_estimate_json",
]

logger = logging.getLogger(__name__)

DEFAULT_GRID_SIZE = 10_000
DEFAULT_GAUSS_NODES = 128
DEFAULT_MIDPOINT_NODES = 8192
QUADRATURE_TOLERANCE = 1e-6
SYNTHETIC_THRESHOLD = 1e-6
TRUSTED_PERCENTILE = 90.0
BLOCK_SIZE = 1 << 20
"""Number of integrand evaluations per vectorized block."""


# Empirical distributions
# ----------------------------------------------------------------------

@dataclass
class EmpiricalCDF:
    grid: np.ndarray
    values: np.ndarray
    n: Optional[int]
    """Number of gaps the values are normalized by, `None` for synthetic
    distributions."""
    k: Optional[int] = None
    samples: Optional[np.ndarray] = None
    """Sorted observed gaps."""

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.grid.shape != self.values.shape:
            raise OutOfRange("Grid and values have different shapes")
        if len(self.grid) < 2 or np.any(np.diff(self.grid) <= 0.0):
            raise OutOfRange("Grid must be strictly increasing with at least two points")

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def noise(self) -> np.ndarray:
        """Pointwise standard deviation of the empirical values."""
        if self.n is None:
            return np.zeros_like(self.values)
        clipped = np.clip(self.values, 0.0, 1.0)
        return np.sqrt(clipped * (1.0 - clipped) / self.n)

    def trusted_max(self) -> float:
        """Upper end of the part of the grid with enough samples."""
        if self.samples is None or len(self.samples) == 0:
            return float(self.grid[-1])
        return min(float(np.percentile(self.samples, TRUSTED_PERCENTILE)),
                   float(self.grid[-1]))

    def sup_distance(self, other: "EmpiricalCDF") -> float:
        if not np.array_equal(self.grid, other.grid):
            raise OutOfRange("Distributions are sampled on different grids")
        return float(np.max(np.abs(self.values - other.values)))


def _default_grid(gaps: np.ndarray) -> np.ndarray:
    return np.linspace(0.0, 3.0 * float(gaps.min()) + 5.0, DEFAULT_GRID_SIZE)


def gap_cdf(m: Melody, k: int = 1, grid: Optional[np.ndarray] = None,
            parity: Optional[str] = None,
            total: Optional[int] = None) -> EmpiricalCDF:
    """Empirical distribution function of the `k`-step gaps of a melody.

    With `parity` set to `even` or `odd` only the gaps starting at even or
    odd note indices are used. `total` overrides the normalization, so
    that distributions of complementary gap subsets add up.
    """
    if k < 1:
        raise OutOfRange(f"Step count must be positive, got {k}", k)
    if len(m) <= k:
        raise TooFewNotes(len(m), k + 1)

    gaps = m.gaps(k)
    match parity:
        case None:
            pass
        case "even":
            gaps = gaps[0::2]
        case "odd":
            gaps = gaps[1::2]
        case _:
            raise OutOfRange(f"Unknown gap parity '{parity}'", parity)
    if len(gaps) == 0:
        raise TooFewNotes(len(m), k + 2)

    samples = np.sort(gaps)
    norm = total if total is not None else len(samples)
    if grid is None:
        grid = _default_grid(samples)
    grid = np.asarray(grid, dtype=np.float64)
    values = np.searchsorted(samples, grid, side="right") / norm
    return EmpiricalCDF(grid=grid, values=values, n=norm, k=k, samples=samples)


# Per-arc model
# ----------------------------------------------------------------------

@dataclass
class ArcCDFModel:
    l_gamma: float
    l_arc: float
    grid: np.ndarray
    values: np.ndarray
    method: str
    nodes: int
    """Quadrature nodes used for the returned values."""
    refinement: float = 0.0
    """Largest change of the values between `nodes / 2` and `nodes`."""


def arc_total_mass(l_gamma: float, l_arc: float) -> float:
    """Limit of the per-arc distribution function for large times."""
    return math.log(1.0 / math.tanh(l_arc / 2.0)) / l_gamma


def _quadrature(method: str, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on `[0, 1]`."""
    match method:
        case "gauss":
            x, w = np.polynomial.legendre.leggauss(nodes)
            return ((x + 1.0) / 2.0, w / 2.0)
        case "midpoint":
            return ((np.arange(nodes) + 0.5) / nodes, np.full(nodes, 1.0 / nodes))
        case _:
            raise OutOfRange(f"Unknown quadrature method '{method}'", method)


def _integrate(l_arc: float, times: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    # Position integral over [0, x_max] after x = x_max (1 - v²), which
    # absorbs the square-root zero at x_max.
    sinh_l = math.sinh(l_arc)
    x_max = np.arccosh(np.sinh(times) / sinh_l)
    result = np.empty(len(times))
    rows = max(1, BLOCK_SIZE // len(v))
    shape = 1.0 - v * v
    for start in range(0, len(times), rows):
        xm = x_max[start:start + rows, None]
        x = xm * shape[None, :]
        cosh_x = np.cosh(x)
        ratio = sinh_l * cosh_x / np.sinh(times[start:start + rows, None])
        root = np.sqrt(np.clip(1.0 - ratio * ratio, 0.0, None))
        integrand = root / (1.0 + (sinh_l * cosh_x) ** 2)
        result[start:start + rows] = (integrand * (2.0 * xm * v[None, :])) @ w
    return result


def arc_cdf_values(l_gamma: float, l_arc: float, grid: np.ndarray,
                   method: str = "gauss", nodes: Optional[int] = None) -> np.ndarray:
    """Per-arc distribution function on a grid, without a convergence
    check."""
    if not (l_gamma > 0.0 and l_arc > 0.0):
        raise OutOfRange(f"Lengths must be positive, got {l_gamma} and {l_arc}")
    if nodes is None:
        nodes = DEFAULT_GAUSS_NODES if method == "gauss" else DEFAULT_MIDPOINT_NODES
    grid = np.asarray(grid, dtype=np.float64)
    values = np.zeros(len(grid))
    inside = grid > l_arc
    if np.any(inside):
        v, w = _quadrature(method, nodes)
        values[inside] = _integrate(l_arc, grid[inside], v, w)
    return values * (math.cosh(l_arc) / l_gamma)


def arc_cdf_model(l_gamma: float, l_arc: float, grid: np.ndarray,
                  method: str = "gauss", nodes: Optional[int] = None,
                  tolerance: float = QUADRATURE_TOLERANCE) -> ArcCDFModel:
    """Distribution function of the first hitting time of the far end of a
    single orthogeodesic arc of length `l_arc`, for cross-section vectors
    of a multicurve of total length `l_gamma`.

    The values are computed with `nodes` and `2 × nodes` quadrature nodes;
    `QuadratureNotConverged` is raised when they differ by more than
    `tolerance`.
    """
    if nodes is None:
        nodes = DEFAULT_GAUSS_NODES if method == "gauss" else DEFAULT_MIDPOINT_NODES
    coarse = arc_cdf_values(l_gamma, l_arc, grid, method, nodes)
    fine = arc_cdf_values(l_gamma, l_arc, grid, method, 2 * nodes)
    refinement = float(np.max(np.abs(fine - coarse))) if len(fine) else 0.0
    if refinement > tolerance:
        raise QuadratureNotConverged(refinement, tolerance)
    if refinement > tolerance / 10.0:
        logger.warning("Quadrature refinement %.3g is close to the tolerance %.3g",
                       refinement, tolerance)
    return ArcCDFModel(l_gamma=l_gamma, l_arc=l_arc,
                       grid=np.asarray(grid, dtype=np.float64), values=fine,
                       method=method, nodes=2 * nodes, refinement=refinement)


def mixture_cdf(l_gamma: float, entries: list[tuple[float, int]],
                grid: np.ndarray) -> EmpiricalCDF:
    """Synthetic distribution function of a multiset of arc lengths given
    as `(length, multiplicity)` pairs."""
    grid = np.asarray(grid, dtype=np.float64)
    values = np.zeros(len(grid))
    for length, multiplicity in entries:
        values += multiplicity * arc_cdf_values(l_gamma, length, grid)
    return EmpiricalCDF(grid=grid, values=values, n=None)


# Peeling
# ----------------------------------------------------------------------

@dataclass
class SpectrumEntry:
    length: float
    multiplicity: int = 1
    confidence: float = math.inf
    """Signal to noise ratio at the first detection."""

    def as_dict(self) -> dict[str, Any]:
        return {"length": self.length,
                "multiplicity": self.multiplicity,
                "confidence": None if math.isinf(self.confidence) else self.confidence}


@dataclass
class OrthospectrumEstimate:
    entries: list[SpectrumEntry]
    k: int
    l_gamma: float
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def lengths(self) -> list[float]:
        return [entry.length for entry in self.entries]

    def as_dict(self) -> dict[str, Any]:
        return {"k": self.k,
                "l_gamma": self.l_gamma,
                "entries": [entry.as_dict() for entry in self.entries],
                "diagnostics": self.diagnostics}


def _refine(grid: np.ndarray, residual: np.ndarray, index: int,
            l_gamma: float, fit_window: int) -> float:
    """Arc length that best explains the residual just after a detection,
    with a free amplitude."""
    step = float(grid[1] - grid[0])
    lo = max(index - 2, 0)
    points = grid[lo:index + fit_window]
    observed = residual[lo:index + fit_window]
    detected = float(grid[index])

    def misfit(length: float) -> float:
        model = arc_cdf_values(l_gamma, length, points)
        norm = float(model @ model)
        if norm == 0.0:
            return float(observed @ observed)
        amplitude = float(observed @ model) / norm
        error = observed - amplitude * model
        return float(error @ error)

    lower = max(detected - 2.0 * step, step * 1e-3)
    if lower >= detected:
        return detected
    result = optimize.minimize_scalar(misfit, bounds=(lower, detected),
                                      method="bounded",
                                      options={"xatol": 1e-12})
    return float(result.x)


def peel_orthospectrum(cdf: EmpiricalCDF, l_gamma: float, k: int = 1,
                       max_entries: int = 10,
                       detect_threshold: Optional[float] = None,
                       fit_window: int = 8) -> OrthospectrumEstimate:
    """Recover the shortest `k`-step orthogeodesic lengths from a gap
    distribution.

    The first grid point of the trusted window where the residual exceeds
    the detection threshold marks an arc; its length is refined against the
    per-arc model and one copy of the model is subtracted. Detections
    within one grid step of an earlier entry increase its multiplicity.
    """
    if cdf.k is not None and cdf.k != k:
        raise OutOfRange(f"Distribution is of {cdf.k}-step gaps, not {k}-step", cdf.k)
    if not l_gamma > 0.0:
        raise OutOfRange(f"Multicurve length must be positive, got {l_gamma}", l_gamma)
    if max_entries < 1:
        raise OutOfRange(f"Entry bound must be positive, got {max_entries}", max_entries)

    grid = cdf.grid
    step = cdf.step
    residual = cdf.values.copy()

    if detect_threshold is not None:
        threshold = np.full(len(grid), float(detect_threshold))
    elif cdf.n is None:
        threshold = np.full(len(grid), SYNTHETIC_THRESHOLD)
    else:
        threshold = np.maximum(5.0 * cdf.noise(), 5.0 / cdf.n)
    noise = threshold / 5.0

    trusted_max = cdf.trusted_max()
    window = grid <= trusted_max
    if trusted_max < grid[-1]:
        logger.debug("Trusted window ends at %.6g", trusted_max)

    entries: list[SpectrumEntry] = []
    iterations = 0
    iteration_limit = 50 * max_entries + 50

    while iterations < iteration_limit:
        iterations += 1
        above = np.flatnonzero(window & (residual > threshold))
        if len(above) == 0:
            break
        index = int(above[0])
        length = _refine(grid, residual, index, l_gamma, fit_window)

        existing = next((entry for entry in entries
                         if abs(entry.length - length) <= step), None)
        if existing is None and len(entries) >= max_entries:
            break

        snr = residual[index] / noise[index] if noise[index] > 0.0 else math.inf
        residual -= arc_cdf_values(l_gamma, length, grid)

        if existing is not None:
            existing.multiplicity += 1
        else:
            entries.append(SpectrumEntry(length=length, confidence=float(snr)))
        logger.debug("Peeled arc of length %.8g (residual at detection %.3g)",
                     length, residual[index])

        negative = window & (residual < -3.0 * noise)
        if np.any(negative):
            at = int(np.flatnonzero(negative)[0])
            raise NegativeResidual(float(grid[at]), float(residual[at]), float(noise[at]))
    else:
        logger.warning("Peeling stopped after %d iterations", iterations)

    if not entries:
        raise NoDetection()

    diagnostics = {
        "iterations": iterations,
        "grid_step": step,
        "trusted_max": trusted_max,
        "max_residual": float(np.max(np.abs(residual[window]))) if np.any(window) else 0.0,
        "samples": cdf.n,
    }
    logger.info("Recovered %d orthospectrum entries", len(entries))
    return OrthospectrumEstimate(entries=entries, k=k, l_gamma=l_gamma,
                                 diagnostics=diagnostics)


# Single-note analysis
# ----------------------------------------------------------------------

class SeparationVerdict(Enum):
    SEPARATING = "separating"
    NONSEPARATING_OR_NONGENERIC = "nonseparating_or_nongeneric"


@dataclass(frozen=True)
class SeparationReport:
    verdict: SeparationVerdict
    m_even: float
    """Shortest gap starting at an even note index."""
    m_odd: float
    difference: float
    threshold: float

    def as_dict(self) -> dict[str, Any]:
        return {"verdict": self.verdict.value, "m_even": self.m_even,
                "m_odd": self.m_odd, "difference": self.difference,
                "threshold": self.threshold}


def _require_single_note(m: Melody):
    labels = set(m.label_set)
    if len(labels) > 1:
        raise MultiLabel(labels)
    if len(m) < 3:
        raise TooFewNotes(len(m), 3)


def classify_separating(m: Melody, threshold: float = 0.01) -> SeparationReport:
    """Decide whether the single curve of a single-note melody separates
    the surface.

    Consecutive crossings of a separating curve alternate between its two
    sides, so the shortest even and odd gaps are the shortest returns to
    the curve within either side. They differ unless the sides have equal
    shortest orthogeodesics.
    """
    _require_single_note(m)
    gaps = m.gaps(1)
    m_even = float(gaps[0::2].min())
    m_odd = float(gaps[1::2].min())
    difference = abs(m_even - m_odd)
    if difference > threshold:
        verdict = SeparationVerdict.SEPARATING
    else:
        verdict = SeparationVerdict.NONSEPARATING_OR_NONGENERIC
    return SeparationReport(verdict, m_even, m_odd, difference, threshold)


@dataclass
class SideReport:
    parity: str
    fraction: float
    """Share of the observed time spent on this side."""
    area: float
    bottom: float
    """Shortest observed return on this side."""
    cdf: EmpiricalCDF
    spectrum: Optional[OrthospectrumEstimate] = None

    def as_dict(self) -> dict[str, Any]:
        return {"parity": self.parity, "fraction": self.fraction,
                "area": self.area, "bottom": self.bottom,
                "spectrum": None if self.spectrum is None else self.spectrum.as_dict()}


@dataclass
class SidesReport:
    area_total: float
    sides: list[SideReport]

    def as_dict(self) -> dict[str, Any]:
        return {"area_total": self.area_total,
                "sides": [side.as_dict() for side in self.sides]}


def single_note_sides(m: Melody, chi: int, area_total: Optional[float] = None,
                      l_gamma: Optional[float] = None,
                      grid: Optional[np.ndarray] = None,
                      max_entries: int = 5) -> SidesReport:
    """Areas and gap distributions of the two sides of a separating
    single-note curve.

    The area of a side is the total area times the share of time spent on
    it. The per-side distributions are normalized by the total number of
    gaps, so each is again a sum of per-arc models; with `l_gamma` given
    they are peeled into per-side orthospectra.
    """
    _require_single_note(m)
    if chi >= 0:
        raise NonNegativeChi(chi)
    if area_total is None:
        area_total = 2.0 * math.pi * abs(chi)

    gaps = m.gaps(1)
    total_time = float(gaps.sum())
    if grid is None:
        grid = _default_grid(gaps)

    sides: list[SideReport] = []
    for parity, selected in (("even", gaps[0::2]), ("odd", gaps[1::2])):
        fraction = float(selected.sum()) / total_time
        cdf = gap_cdf(m, 1, grid, parity=parity, total=len(gaps))
        spectrum = None
        if l_gamma is not None:
            spectrum = peel_orthospectrum(cdf, l_gamma, 1, max_entries=max_entries)
        sides.append(SideReport(parity=parity,
                                fraction=fraction,
                                area=area_total * fraction,
                                bottom=float(selected.min()),
                                cdf=cdf,
                                spectrum=spectrum))
    return SidesReport(area_total=area_total, sides=sides)


# Export
# ----------------------------------------------------------------------

def export_cdf_csv(cdf: EmpiricalCDF | ArcCDFModel, file: TextIO):
    writer = csv.writer(file, lineterminator="\n")
    writer.writerow(["T", "value"])
    for t, value in zip(cdf.grid.tolist(), cdf.values.tolist()):
        writer.writerow([repr(t), repr(value)])


def export_estimate_json(estimate: OrthospectrumEstimate, file: TextIO,
                         extra: Optional[dict[str, Any]] = None):
    record = estimate.as_dict()
    if extra:
        record.update(extra)
    json.dump(record, file, indent=2)
    file.write("\n")
