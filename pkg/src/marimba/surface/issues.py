# issues.py
#
# Marimba specification issues.
#
# Date: 2026-09-15


from typing import Self, Optional, Any
from enum import Enum, auto

from ..errors import UserError

__all__ = [
    "SpecIssueType",
    "SpecIssue",
    "SpecError",
]

class SpecIssueType(Enum):
    MALFORMED_FILE = auto()
    UNKNOWN_KEY = auto()
    EMPTY_SPEC = auto()
    DUPLICATE_PIECE = auto()
    DUPLICATE_GLUING = auto()
    UNKNOWN_SLOT = auto()
    SLOT_REUSED = auto()
    UNGLUED_SLOT = auto()
    NON_POSITIVE_LENGTH = auto()
    NON_FINITE_TWIST = auto()
    LENGTH_MISMATCH = auto()
    DUPLICATE_LABEL = auto()
    INVALID_SHEETS = auto()
    DISCONNECTED = auto()

    def __str__(self) -> str:
        match self:
            case self.MALFORMED_FILE:
                return "Malformed spec file"
            case self.UNKNOWN_KEY:
                return "Unknown key"
            case self.EMPTY_SPEC:
                return "Empty spec"
            case self.DUPLICATE_PIECE:
                return "Duplicate piece name"
            case self.DUPLICATE_GLUING:
                return "Duplicate gluing id"
            case self.UNKNOWN_SLOT:
                return "Unknown slot"
            case self.SLOT_REUSED:
                return "Slot used by more than one gluing"
            case self.UNGLUED_SLOT:
                return "Unglued slot"
            case self.NON_POSITIVE_LENGTH:
                return "Non-positive length"
            case self.NON_FINITE_TWIST:
                return "Non-finite twist"
            case self.LENGTH_MISMATCH:
                return "Cuff length mismatch"
            case self.DUPLICATE_LABEL:
                return "Duplicate note label"
            case self.INVALID_SHEETS:
                return "Invalid sheet count"
            case self.DISCONNECTED:
                return "Disconnected surface"


class SpecIssue:
    type: SpecIssueType
    message: str
    subject: Optional[str]
    """Name of the piece, gluing, slot or label the issue is about."""

    def __init__(self, type: SpecIssueType, message: str,
                 subject: Optional[str] = None):
        self.type = type
        self.message = message
        self.subject = subject

    def __str__(self) -> str:
        return f"{self.type}: {self.message}"

    def __repr__(self) -> str:
        return f"SpecIssue({self.type.name}, {self.message!r})"

    def as_dict(self) -> dict[str, Any]:
        return {"type": self.type.name, "message": self.message,
                "subject": self.subject}

    # Convenience initializers so we do not have noise in the source
    @classmethod
    def malformed_file(cls, message: str) -> Self:
        return cls(type=SpecIssueType.MALFORMED_FILE, message=message)

    @classmethod
    def unknown_key(cls, key: str, where: str) -> Self:
        return cls(type=SpecIssueType.UNKNOWN_KEY,
                   message=f"Unknown key '{key}' in {where}",
                   subject=key)

    @classmethod
    def empty_spec(cls) -> Self:
        return cls(type=SpecIssueType.EMPTY_SPEC, message="Spec has no pieces")

    @classmethod
    def duplicate_piece(cls, name: str) -> Self:
        return cls(type=SpecIssueType.DUPLICATE_PIECE,
                   message=f"Piece '{name}' is defined more than once",
                   subject=name)

    @classmethod
    def duplicate_gluing(cls, id: str) -> Self:
        return cls(type=SpecIssueType.DUPLICATE_GLUING,
                   message=f"Gluing '{id}' is defined more than once",
                   subject=id)

    @classmethod
    def unknown_slot(cls, slot: str, gluing: str) -> Self:
        return cls(type=SpecIssueType.UNKNOWN_SLOT,
                   message=f"Gluing '{gluing}' refers to unknown slot '{slot}'",
                   subject=slot)

    @classmethod
    def slot_reused(cls, slot: str) -> Self:
        return cls(type=SpecIssueType.SLOT_REUSED,
                   message=f"Slot '{slot}' appears in more than one gluing",
                   subject=slot)

    @classmethod
    def unglued_slot(cls, slot: str) -> Self:
        return cls(type=SpecIssueType.UNGLUED_SLOT,
                   message=f"Slot '{slot}' is not glued",
                   subject=slot)

    @classmethod
    def non_positive_length(cls, subject: str, length: float) -> Self:
        return cls(type=SpecIssueType.NON_POSITIVE_LENGTH,
                   message=f"Length of '{subject}' must be positive, got {length}",
                   subject=subject)

    @classmethod
    def non_finite_twist(cls, gluing: str) -> Self:
        return cls(type=SpecIssueType.NON_FINITE_TWIST,
                   message=f"Twist of gluing '{gluing}' is not finite",
                   subject=gluing)

    @classmethod
    def length_mismatch(cls, piece: str, first: str, second: str) -> Self:
        return cls(type=SpecIssueType.LENGTH_MISMATCH,
                   message=f"Slots '{first}' and '{second}' of piece '{piece}' must have equal lengths",
                   subject=piece)

    @classmethod
    def duplicate_label(cls, label: str, message: Optional[str] = None) -> Self:
        return cls(type=SpecIssueType.DUPLICATE_LABEL,
                   message=message or f"Note label '{label}' is used more than once",
                   subject=label)

    @classmethod
    def invalid_sheets(cls, sheets: Any) -> Self:
        return cls(type=SpecIssueType.INVALID_SHEETS,
                   message=f"Sheet count must be a positive integer, got {sheets!r}")

    @classmethod
    def disconnected(cls, components: int) -> Self:
        return cls(type=SpecIssueType.DISCONNECTED,
                   message=f"Pieces form {components} connected components")


class SpecError(UserError):
    """Raised when a spec can not be read or built. Carries the list of
    issues found."""
    issues: list[SpecIssue]

    def __init__(self, issues: Optional[list[SpecIssue]] = None,
                 message: Optional[str] = None):
        self.issues = list(issues or [])
        if message is None:
            message = "; ".join(str(issue) for issue in self.issues) \
                        or "Invalid marimba spec"
        super().__init__(message)

    def details(self) -> dict[str, Any]:
        return {"issues": [issue.as_dict() for issue in self.issues]}
