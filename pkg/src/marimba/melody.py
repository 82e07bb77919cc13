# melody.py
#
# Melodies, motifs and motif frequencies.
#
# A melody is the sequence of (note, time) crossings of a geodesic with the
# labeled multicurve, observed up to a horizon. Frequencies of motifs are
# the statistics from which lengths and spectra are recovered.
#
# Date: 2026-09-19

from typing import Optional, Sequence, Any, Iterable
from dataclasses import dataclass, field
from enum import Enum
import logging
import math

import numpy as np
from scipy import stats

from .errors import (EmptyLog, OutOfRange, UnknownLabel, LabelMismatch,
                     NonNegativeChi)
from .flow import CrossingLog, read_log

__all__ = [
    "Melody",
    "Motif",
    "FrequencyEstimate",
    "LengthEstimate",
    "melody_from_log",
    "read_melody",
    "shift",
    "motif_played_at",
    "motif_frequency",
    "note_frequency",
    "length_from_frequency",
    "expected_note_frequency",
    "expected_return_time",
    "default_battery",
    "IsomelodyVerdict",
    "MotifComparison",
    "IsomelodyReport",
    "isomelody_report",
]

logger = logging.getLogger(__name__)


class Melody:
    """Strictly increasing sequence of note crossings observed on
    `[0, horizon]`."""

    labels: list[str]
    """Note label of each crossing."""
    times: np.ndarray
    horizon: float
    label_set: list[str]
    """Declared note labels, including labels that never sound."""

    def __init__(self, labels: Sequence[str], times: Sequence[float] | np.ndarray,
                 horizon: float, label_set: Optional[Iterable[str]] = None):
        times = np.asarray(times, dtype=np.float64)
        if len(labels) != len(times):
            raise OutOfRange(f"Melody has {len(labels)} labels but {len(times)} times")
        if not (horizon > 0.0 and math.isfinite(horizon)):
            raise OutOfRange(f"Melody horizon must be positive, got {horizon}", horizon)
        if len(times):
            if times[0] < 0.0:
                raise OutOfRange(f"First note time {times[0]} is negative", float(times[0]))
            if np.any(np.diff(times) <= 0.0):
                raise OutOfRange("Note times are not strictly increasing")
            if times[-1] > horizon:
                raise OutOfRange(f"Note at {times[-1]} is past the horizon {horizon}",
                                 float(times[-1]))

        if label_set is None:
            label_set = list(dict.fromkeys(labels))
        else:
            label_set = list(label_set)
        known = set(label_set)
        for label in labels:
            if label not in known:
                raise UnknownLabel(label)

        self.labels = list(labels)
        self.times = times
        self.horizon = float(horizon)
        self.label_set = label_set
        self._codes: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"Melody({len(self)} notes, horizon={self.horizon:.6g}, labels={self.label_set})"

    @property
    def notes(self) -> list[tuple[str, float]]:
        return list(zip(self.labels, self.times.tolist()))

    @property
    def codes(self) -> np.ndarray:
        """Note labels as indices into `label_set`."""
        if self._codes is None:
            index = {label: i for i, label in enumerate(self.label_set)}
            self._codes = np.fromiter((index[label] for label in self.labels),
                                      dtype=np.int64, count=len(self.labels))
        return self._codes

    def code(self, label: str) -> int:
        """Index of a label, `-1` for labels outside the label set."""
        try:
            return self.label_set.index(label)
        except ValueError:
            return -1

    def gaps(self, k: int = 1) -> np.ndarray:
        """The `k`-step gaps `t[i + k] - t[i]`."""
        return self.times[k:] - self.times[:-k]


@dataclass(frozen=True)
class Motif:
    """Labels `η₀ … η_k` played with offsets `t₁ < … < t_k` from the first
    note, each within the closed window `[t_i, t_i + ε]`. A motif with a
    single label is degenerate: it counts the occurrences of the label."""
    labels: tuple[str, ...]
    offsets: tuple[float, ...] = ()
    epsilon: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "offsets", tuple(float(t) for t in self.offsets))
        if len(self.labels) != len(self.offsets) + 1:
            raise OutOfRange(f"Motif with {len(self.labels)} labels needs {len(self.labels) - 1} offsets")
        if self.offsets:
            if self.offsets[0] <= 0.0:
                raise OutOfRange(f"Motif offsets must be positive, got {self.offsets[0]}",
                                 self.offsets[0])
            if any(b <= a for a, b in zip(self.offsets, self.offsets[1:])):
                raise OutOfRange("Motif offsets must be strictly increasing")
            if not (self.epsilon > 0.0):
                raise OutOfRange(f"Motif tolerance must be positive, got {self.epsilon}",
                                 self.epsilon)

    @classmethod
    def note(cls, label: str) -> "Motif":
        return cls((label,))

    @property
    def k(self) -> int:
        return len(self.offsets)

    @property
    def is_degenerate(self) -> bool:
        return not self.offsets

    @property
    def span(self) -> float:
        """Time after the first note needed to observe the whole motif."""
        if self.is_degenerate:
            return 0.0
        return self.offsets[-1] + self.epsilon

    def as_dict(self) -> dict[str, Any]:
        return {"labels": list(self.labels), "offsets": list(self.offsets),
                "epsilon": self.epsilon}

    def __str__(self) -> str:
        if self.is_degenerate:
            return f"[{self.labels[0]}]"
        parts = [self.labels[0]] + [f"{label}@{offset:.4g}"
                                    for label, offset in zip(self.labels[1:], self.offsets)]
        return f"[{' '.join(parts)} ±{self.epsilon:.3g}]"


@dataclass(frozen=True)
class FrequencyEstimate:
    value: float
    """Occurrences per unit time."""
    count: int
    horizon: float
    """Effective observation time."""
    std_error: float

    @classmethod
    def from_count(cls, count: int, horizon: float) -> "FrequencyEstimate":
        # value / sqrt(count), zero when nothing was counted
        return cls(value=count / horizon, count=count, horizon=horizon,
                   std_error=math.sqrt(count) / horizon)

    def as_dict(self) -> dict[str, Any]:
        return {"value": self.value, "count": self.count,
                "horizon": self.horizon, "std_error": self.std_error}


@dataclass(frozen=True)
class LengthEstimate:
    value: float
    error: float
    degenerate: bool = False
    """Set when the note never sounded."""

    def as_dict(self) -> dict[str, Any]:
        return {"value": self.value, "error": self.error,
                "degenerate": self.degenerate}


# Melodies
# ----------------------------------------------------------------------

def melody_from_log(log: CrossingLog) -> Melody:
    if not log.entries:
        raise EmptyLog()
    return Melody(log.notes, log.times, log.length, log.labels)


def read_melody(path: str) -> Melody:
    """Read a melody from a crossing log file."""
    return melody_from_log(read_log(path))


def shift(m: Melody, s: float) -> Melody:
    """Melody seen from time `s` on: notes at `t ≤ s` are dropped and the
    clock restarts at `s`."""
    if not 0.0 <= s < m.horizon:
        raise OutOfRange(f"Shift {s} is outside [0, {m.horizon})", s)
    if s == 0.0:
        return m
    start = int(np.searchsorted(m.times, s, side="right"))
    return Melody(m.labels[start:], m.times[start:] - s, m.horizon - s, m.label_set)


# Motifs
# ----------------------------------------------------------------------

def motif_played_at(m: Melody, motif: Motif, j: int) -> bool:
    """True when the motif is played starting at note `j`."""
    if not 0 <= j < len(m) or m.labels[j] != motif.labels[0]:
        return False
    if j + motif.k >= len(m):
        return False
    t0 = m.times[j]
    for i in range(1, motif.k + 1):
        if m.labels[j + i] != motif.labels[i]:
            return False
        gap = m.times[j + i] - t0
        offset = motif.offsets[i - 1]
        if not offset <= gap <= offset + motif.epsilon:
            return False
    return True


def _occurrences(m: Melody, motif: Motif, limit: float) -> int:
    """Number of notes `j` with `t_j ≤ limit` at which the motif is played."""
    n = int(np.searchsorted(m.times, limit, side="right"))
    n = min(n, len(m) - motif.k)
    if n <= 0:
        return 0

    codes = m.codes
    first = m.code(motif.labels[0])
    if first < 0:
        return 0
    mask = codes[:n] == first
    for i in range(1, motif.k + 1):
        code = m.code(motif.labels[i])
        if code < 0:
            return 0
        mask &= codes[i:n + i] == code
        gap = m.times[i:n + i] - m.times[:n]
        offset = motif.offsets[i - 1]
        mask &= (gap >= offset) & (gap <= offset + motif.epsilon)
    return int(np.count_nonzero(mask))


def motif_frequency(m: Melody, motif: Motif) -> FrequencyEstimate:
    """Occurrences of the motif per unit time.

    Only occurrences whose whole window fits before the horizon are counted
    and the horizon is shortened accordingly.
    """
    horizon = m.horizon - motif.span
    if not horizon > 0.0:
        raise OutOfRange(f"Motif {motif} does not fit into the horizon {m.horizon}",
                         motif.span)
    return FrequencyEstimate.from_count(_occurrences(m, motif, horizon), horizon)


def note_frequency(m: Melody, label: str) -> FrequencyEstimate:
    if label not in m.label_set:
        raise UnknownLabel(label)
    count = int(np.count_nonzero(m.codes == m.code(label)))
    return FrequencyEstimate.from_count(count, m.horizon)


def length_from_frequency(f: FrequencyEstimate, chi: int) -> LengthEstimate:
    """Length of a curve from the frequency of its note: `π² |χ| f`."""
    if chi >= 0:
        raise NonNegativeChi(chi)
    scale = math.pi ** 2 * abs(chi)
    if f.count == 0:
        logger.warning("Note never sounded in time %.6g: length estimate is zero",
                       f.horizon)
    return LengthEstimate(value=scale * f.value,
                          error=scale * f.std_error,
                          degenerate=f.count == 0)


def expected_note_frequency(length: float, chi: int) -> float:
    """Long-run crossing rate of a curve of the given length."""
    if chi >= 0:
        raise NonNegativeChi(chi)
    return length / (math.pi ** 2 * abs(chi))


def expected_return_time(l_gamma: float, chi: int) -> float:
    """Mean time between consecutive crossings of a multicurve of total
    length `l_gamma`."""
    if chi >= 0:
        raise NonNegativeChi(chi)
    if not l_gamma > 0.0:
        raise OutOfRange(f"Multicurve length must be positive, got {l_gamma}", l_gamma)
    return math.pi ** 2 * abs(chi) / l_gamma


# Isomelody
# ----------------------------------------------------------------------

QUANTILES = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


def default_battery(m: Melody) -> list[Motif]:
    """Degenerate motifs of all labels and two-note motifs at the deciles
    of the observed gaps."""
    battery = [Motif.note(label) for label in m.label_set]
    if len(m) < 2:
        return battery
    gaps = m.gaps(1)
    offsets = np.quantile(gaps, QUANTILES)
    epsilon = float(offsets[-1] - offsets[0]) / (len(QUANTILES) - 1)
    if not epsilon > 0.0:
        return battery
    for first in m.label_set:
        for second in m.label_set:
            for offset in offsets:
                battery.append(Motif((first, second), (float(offset),), epsilon))
    return battery


class IsomelodyVerdict(Enum):
    CONSISTENT = "consistent"
    DISTINGUISHED = "distinguished"


@dataclass(frozen=True)
class MotifComparison:
    motif: Motif
    first: FrequencyEstimate
    second: FrequencyEstimate
    z: float

    def as_dict(self) -> dict[str, Any]:
        return {"motif": self.motif.as_dict(),
                "first": self.first.as_dict(),
                "second": self.second.as_dict(),
                "z": self.z}


@dataclass
class IsomelodyReport:
    verdict: IsomelodyVerdict
    alpha: float
    threshold: float
    """Two-sided Bonferroni-adjusted z threshold."""
    comparisons: list[MotifComparison] = field(default_factory=list)
    witness: Optional[MotifComparison] = None
    """The comparison with the largest |z| above the threshold."""

    def as_dict(self) -> dict[str, Any]:
        return {"verdict": self.verdict.value,
                "alpha": self.alpha,
                "threshold": self.threshold,
                "witness": None if self.witness is None else self.witness.as_dict(),
                "comparisons": [c.as_dict() for c in self.comparisons]}

    def table(self) -> str:
        lines = [f"{'motif':<40} {'first':>12} {'second':>12} {'z':>8}"]
        for c in self.comparisons:
            mark = " *" if abs(c.z) > self.threshold else ""
            lines.append(f"{str(c.motif):<40} {c.first.value:>12.6g} "
                         f"{c.second.value:>12.6g} {c.z:>8.3f}{mark}")
        lines.append(f"verdict: {self.verdict.value} (|z| threshold {self.threshold:.3f})")
        return "\n".join(lines)


def _z_score(a: FrequencyEstimate, b: FrequencyEstimate) -> float:
    difference = a.value - b.value
    error = math.hypot(a.std_error, b.std_error)
    if error == 0.0:
        return 0.0 if difference == 0.0 else math.copysign(math.inf, difference)
    return difference / error


def isomelody_report(first: Melody, second: Melody,
                     battery: Optional[Sequence[Motif]] = None,
                     alpha: float = 0.01) -> IsomelodyReport:
    """Compare motif frequencies of two melodies.

    The verdict is `DISTINGUISHED` when some motif frequency differs by
    more than the Bonferroni-adjusted two-sided z threshold at level
    `alpha`, `CONSISTENT` otherwise. The default battery is built from the
    first melody.
    """
    if set(first.label_set) != set(second.label_set):
        raise LabelMismatch(set(first.label_set), set(second.label_set))
    if not 0.0 < alpha < 1.0:
        raise OutOfRange(f"Significance level must be in (0, 1), got {alpha}", alpha)
    motifs = list(battery) if battery is not None else default_battery(first)
    if not motifs:
        raise OutOfRange("Motif battery is empty")

    threshold = float(stats.norm.ppf(1.0 - alpha / (2.0 * len(motifs))))
    comparisons: list[MotifComparison] = []
    for motif in motifs:
        a = motif_frequency(first, motif)
        b = motif_frequency(second, motif)
        comparisons.append(MotifComparison(motif, a, b, _z_score(a, b)))

    witness = max(comparisons, key=lambda c: abs(c.z))
    if abs(witness.z) > threshold:
        verdict = IsomelodyVerdict.DISTINGUISHED
    else:
        verdict = IsomelodyVerdict.CONSISTENT
        witness = None
    logger.info("Compared %d motifs: %s", len(comparisons), verdict.value)
    return IsomelodyReport(verdict=verdict, alpha=alpha, threshold=threshold,
                           comparisons=comparisons, witness=witness)
