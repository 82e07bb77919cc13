# state.py
#
# Flow states, trace configuration and crossing logs.
#
# Date: 2026-09-17

from typing import Optional, Any, Union
from dataclasses import dataclass, field, asdict
import math

import numpy as np

from ..hyp2 import UnitTangentH2, PointH2, normalize_angle, DEFAULT_POLICY
from ..errors import OutOfRange

__all__ = [
    "CrossSectionState",
    "InteriorState",
    "StartState",
    "state_from_dict",
    "TraceConfig",
    "CrossingEntry",
    "TraceDiagnostics",
    "CrossingLog",
]


@dataclass(frozen=True)
class CrossSectionState:
    """Unit tangent vector based on a labeled curve.

    `x` is the arclength coordinate along the curve, `theta` the angle from
    the direction of the curve to the vector. Angles in `(0, π)` point to
    the side of the `b` slot of the curve's gluing.
    """
    cuff: str
    x: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.theta)):
            raise OutOfRange(f"Non-finite cross-section state ({self.x}, {self.theta})")
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    def as_dict(self) -> dict[str, Any]:
        return {"kind": "cross_section", "cuff": self.cuff,
                "x": self.x, "theta": self.theta}


@dataclass(frozen=True)
class InteriorState:
    """Unit tangent vector in the chart of a cell."""
    cell: int
    vector: UnitTangentH2

    def as_dict(self) -> dict[str, Any]:
        return {"kind": "interior", "cell": self.cell,
                "re": self.vector.base.re, "im": self.vector.base.im,
                "dir": self.vector.dir}


StartState = Union[InteriorState, CrossSectionState]


def state_from_dict(record: dict[str, Any]) -> StartState:
    match record.get("kind"):
        case "interior":
            vector = UnitTangentH2(PointH2(float(record["re"]), float(record["im"])),
                                   float(record["dir"]))
            return InteriorState(int(record["cell"]), vector)
        case "cross_section":
            return CrossSectionState(str(record["cuff"]), float(record["x"]),
                                     float(record["theta"]))
        case kind:
            raise OutOfRange(f"Unknown state kind {kind!r}", kind)


@dataclass(frozen=True)
class TraceConfig:
    max_length: float = math.inf
    """Hyperbolic length after which the trace stops."""
    max_crossings: Optional[int] = None
    """Number of recorded crossings after which the trace stops."""
    tangency_tol: float = DEFAULT_POLICY.tangency_tol
    renorm_period: int = 1
    """Number of cell steps between renormalizations of the endpoint
    vectors."""

    def __post_init__(self):
        if not (self.max_length > 0.0):
            raise OutOfRange(f"Trace length must be positive, got {self.max_length}",
                             self.max_length)
        if self.max_crossings is not None and self.max_crossings < 1:
            raise OutOfRange(f"Crossing bound must be positive, got {self.max_crossings}",
                             self.max_crossings)
        if math.isinf(self.max_length) and self.max_crossings is None:
            raise OutOfRange("Trace needs a finite length or a crossing bound")
        if not (self.tangency_tol > 0.0):
            raise OutOfRange(f"Tangency tolerance must be positive, got {self.tangency_tol}",
                             self.tangency_tol)
        if self.renorm_period < 1:
            raise OutOfRange(f"Renormalization period must be positive, got {self.renorm_period}",
                             self.renorm_period)

    def as_dict(self) -> dict[str, Any]:
        result = asdict(self)
        if math.isinf(self.max_length):
            result["max_length"] = None
        return result

    @classmethod
    def from_dict(cls, record: dict[str, Any]) -> "TraceConfig":
        max_length = record.get("max_length")
        return cls(max_length=math.inf if max_length is None else float(max_length),
                   max_crossings=record.get("max_crossings"),
                   tangency_tol=float(record.get("tangency_tol", DEFAULT_POLICY.tangency_tol)),
                   renorm_period=int(record.get("renorm_period", 1)))


@dataclass(frozen=True)
class CrossingEntry:
    time: float
    cuff: str
    """Gluing id of the crossed curve."""
    label: str
    x: float
    theta: float

    def state(self) -> CrossSectionState:
        return CrossSectionState(self.cuff, self.x, self.theta)


@dataclass
class TraceDiagnostics:
    steps: int = 0
    """Number of cell sides crossed."""
    renormalizations: int = 0
    min_sin_theta: float = math.inf
    """Smallest `|sin θ|` seen at a recorded crossing."""

    def as_dict(self) -> dict[str, Any]:
        return {"steps": self.steps,
                "renormalizations": self.renormalizations,
                "min_sin_theta": None if math.isinf(self.min_sin_theta) else self.min_sin_theta}


@dataclass
class CrossingLog:
    """Record of the crossings of a traced geodesic with the labeled
    multicurve."""
    start: StartState
    entries: list[CrossingEntry]
    length: float
    """Total traced length."""
    labels: list[str]
    """Note labels of the traced surface."""
    config: TraceConfig
    diagnostics: TraceDiagnostics = field(default_factory=TraceDiagnostics)
    spec_hash: Optional[str] = None
    seed: Optional[int] = None

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def times(self) -> np.ndarray:
        return np.fromiter((entry.time for entry in self.entries),
                           dtype=np.float64, count=len(self.entries))

    @property
    def notes(self) -> list[str]:
        return [entry.label for entry in self.entries]
