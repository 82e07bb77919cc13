# errors.py
#
# Exceptions raised by the marimba toolkit.
#
# Every error carries the structured values that caused it. The `exit_code`
# class attribute tells the command line tool whether the error is a user
# error (1) or a numerical failure (2).
#
# Date: 2026-09-14

from typing import Any, Optional

__all__ = [
    "MarimbaError",
    "UserError",
    "NumericalError",

    # Geometry
    "SharedEndpoint",
    "Crossing",
    "Degenerate",
    "GeometryFailure",

    # Flow
    "TangencyStall",
    "RejectionBudgetExceeded",

    # Melody
    "EmptyLog",
    "OutOfRange",
    "UnknownLabel",
    "LabelMismatch",
    "NonNegativeChi",

    # Spectra
    "TooFewNotes",
    "MultiLabel",
    "QuadratureNotConverged",
    "NegativeResidual",
    "NoDetection",

    # Arcs
    "BudgetExceeded",
    "InvalidRealization",
    "WrongStepCount",

    # Constructions
    "NotInFamily",
    "CocycleOrderViolation",
    "SheetOutOfRange",
    "OnGamma",

    # Tool
    "UnmappedLabel",
]


class MarimbaError(Exception):
    """Base class of all toolkit errors."""
    exit_code: int = 2

    def details(self) -> dict[str, Any]:
        """Machine-readable description of the error."""
        return {}


class UserError(MarimbaError):
    """Error caused by invalid input."""
    exit_code = 1


class NumericalError(MarimbaError):
    """Error caused by a numerical failure."""
    exit_code = 2


# Geometry
# ----------------------------------------------------------------------

class SharedEndpoint(NumericalError):
    """Two geodesics are asymptotic: they have no common perpendicular."""
    def __init__(self, first: Any, second: Any):
        super().__init__(f"Geodesics {first} and {second} share an ideal endpoint")
        self.first = first
        self.second = second


class Crossing(NumericalError):
    """Two geodesics intersect: they have no common perpendicular."""
    def __init__(self, first: Any, second: Any):
        super().__init__(f"Geodesics {first} and {second} intersect")
        self.first = first
        self.second = second


class Degenerate(NumericalError):
    """Isometry matrix determinant drifted out of the trusted range."""
    determinant: float

    def __init__(self, determinant: float):
        super().__init__(f"Degenerate isometry matrix (|det| = {determinant})")
        self.determinant = determinant

    def details(self) -> dict[str, Any]:
        return {"determinant": self.determinant}


class GeometryFailure(NumericalError):
    """Constructed geometry does not satisfy its invariants."""
    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual

    def details(self) -> dict[str, Any]:
        return {"residual": self.residual}


# Flow
# ----------------------------------------------------------------------

class TangencyStall(NumericalError):
    """The traced geodesic crossed a multicurve component (almost)
    tangentially."""
    def __init__(self, sin_theta: float, time: float):
        super().__init__(f"Near-tangent crossing |sin θ| = {sin_theta:.3g} at t = {time}; re-seed the trace")
        self.sin_theta = sin_theta
        self.time = time

    def details(self) -> dict[str, Any]:
        return {"sin_theta": self.sin_theta, "time": self.time}


class RejectionBudgetExceeded(NumericalError):
    def __init__(self, cell: int, attempts: int):
        super().__init__(f"Rejection sampling in cell {cell} failed after {attempts} attempts")
        self.cell = cell
        self.attempts = attempts

    def details(self) -> dict[str, Any]:
        return {"cell": self.cell, "attempts": self.attempts}


# Melody
# ----------------------------------------------------------------------

class EmptyLog(UserError):
    def __init__(self):
        super().__init__("Crossing log has no entries")


class OutOfRange(UserError):
    def __init__(self, message: str, value: Any = None):
        super().__init__(message)
        self.value = value

    def details(self) -> dict[str, Any]:
        return {"value": self.value}


class UnknownLabel(UserError):
    def __init__(self, label: str):
        super().__init__(f"Unknown note label '{label}'")
        self.label = label

    def details(self) -> dict[str, Any]:
        return {"label": self.label}


class LabelMismatch(UserError):
    def __init__(self, left: set[str], right: set[str]):
        super().__init__(f"Melodies have different label sets: {sorted(left)} and {sorted(right)}")
        self.left = left
        self.right = right

    def details(self) -> dict[str, Any]:
        return {"left": sorted(self.left), "right": sorted(self.right)}


class NonNegativeChi(UserError):
    def __init__(self, chi: int):
        super().__init__(f"Euler characteristic must be negative, got {chi}")
        self.chi = chi


# Spectra
# ----------------------------------------------------------------------

class TooFewNotes(UserError):
    def __init__(self, count: int, required: int):
        super().__init__(f"Melody has {count} notes, more than {required} required")
        self.count = count
        self.required = required


class MultiLabel(UserError):
    def __init__(self, labels: set[str]):
        super().__init__(f"Single-note melody expected, found labels {sorted(labels)}")
        self.labels = labels


class QuadratureNotConverged(NumericalError):
    def __init__(self, difference: float, tolerance: float):
        super().__init__(f"Quadrature did not converge: refinement changed values by {difference:.3g} (tolerance {tolerance:.3g})")
        self.difference = difference
        self.tolerance = tolerance


class NegativeResidual(NumericalError):
    """Peeling produced a residual well below zero: the model does not fit
    the data (wrong Γ length or step count)."""
    def __init__(self, time: float, residual: float, noise: float):
        super().__init__(f"Residual {residual:.4g} below -3×noise ({noise:.3g}) at T = {time:.6g}")
        self.time = time
        self.residual = residual
        self.noise = noise

    def details(self) -> dict[str, Any]:
        return {"time": self.time, "residual": self.residual, "noise": self.noise}


class NoDetection(NumericalError):
    def __init__(self):
        super().__init__("No orthospectrum entry detected in the trusted window")


# Arcs
# ----------------------------------------------------------------------

class BudgetExceeded(NumericalError):
    def __init__(self, budget: int):
        super().__init__(f"Arc enumeration exceeded the budget of {budget} words")
        self.budget = budget


class InvalidRealization(NumericalError):
    """The common perpendicular does not follow the combinatorics of the
    arc class."""
    def __init__(self, message: str):
        super().__init__(message)


class WrongStepCount(UserError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"Expected a {expected}-step arc, got {actual}-step")
        self.expected = expected
        self.actual = actual


# Constructions
# ----------------------------------------------------------------------

class NotInFamily(UserError):
    def __init__(self, message: str = "Spec is not a member of the symmetric family"):
        super().__init__(message)


class CocycleOrderViolation(UserError):
    def __init__(self, label: str, weight: int, modulus: int):
        super().__init__(f"Curve '{label}' has total weight {weight}, not a unit mod {modulus}")
        self.label = label
        self.weight = weight
        self.modulus = modulus

    def details(self) -> dict[str, Any]:
        return {"label": self.label, "weight": self.weight, "modulus": self.modulus}


class SheetOutOfRange(UserError):
    def __init__(self, sheet: int, sheets: int):
        super().__init__(f"Sheet {sheet} is not valid for a {sheets}-sheeted cover")
        self.sheet = sheet
        self.sheets = sheets


class OnGamma(UserError):
    def __init__(self):
        super().__init__("Transport is undefined for vectors based on the multicurve")


# Tool
# ----------------------------------------------------------------------

class UnmappedLabel(UserError):
    def __init__(self, label: str):
        super().__init__(f"Note label '{label}' has no MIDI key")
        self.label = label
