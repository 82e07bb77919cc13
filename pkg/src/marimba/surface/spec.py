# spec.py
#
# Marimba specification: pieces, gluings and note labels.
#
# Date: 2026-09-15

from typing import Optional, Any
from dataclasses import dataclass, replace
from enum import Enum
import hashlib
import math
import tomllib

from .issues import SpecIssue, SpecError

__all__ = [
    "PieceKind",
    "Piece",
    "SlotRef",
    "Gluing",
    "MarimbaSpec",
    "SPEC_HEADER",
    "read_spec",
    "loads_spec",
    "dumps_spec",
    "write_spec",
]


SPEC_HEADER = ("# hyper-marimba spec\n"
               "# cuff origin: seam foot starting the boundary cycle in the"
               " lower-indexed hexagon;\n"
               "# boundary oriented with the interior on the right;"
               " slot a coordinate x meets slot b coordinate (twist - x) mod length\n")


class PieceKind(Enum):
    PANTS = "pants"
    """A pair of pants: three slots `0`, `1`, `2`."""

    DOUBLE = "double"
    """Two-sheeted cover of a pair of pants whose sheets are exchanged
    around the first two cuffs. Slots `A`, `A'` cover the first two cuffs,
    `B`, `B'` are the two lifts of the third cuff."""

    @property
    def slots(self) -> tuple[str, ...]:
        match self:
            case PieceKind.PANTS:
                return ("0", "1", "2")
            case PieceKind.DOUBLE:
                return ("A", "A'", "B", "B'")

    @property
    def pants_count(self) -> int:
        """Number of pairs of pants the piece is made of (its |χ|)."""
        match self:
            case PieceKind.PANTS:
                return 1
            case PieceKind.DOUBLE:
                return 2

    @property
    def cell_count(self) -> int:
        return 2 * self.pants_count


@dataclass(frozen=True)
class Piece:
    name: str
    kind: PieceKind = PieceKind.PANTS


@dataclass(frozen=True, order=True)
class SlotRef:
    """Reference to a boundary slot of a piece, written `piece.slot`."""
    piece: str
    slot: str

    @classmethod
    def parse(cls, text: str) -> "SlotRef":
        piece, sep, slot = str(text).rpartition(".")
        if not sep or not piece or not slot:
            raise ValueError(f"Slot reference '{text}' is not of the form piece.slot")
        return cls(piece, slot)

    def __str__(self) -> str:
        return f"{self.piece}.{self.slot}"


@dataclass(frozen=True)
class Gluing:
    """Identification of two boundary slots along a cuff.

    A point at coordinate `x` of slot `a` is glued to the point at
    coordinate `(twist - x) mod length` of slot `b`. The resulting curve is
    oriented like slot `a`.
    """
    id: str
    a: SlotRef
    b: SlotRef
    length: float
    twist: float = 0.0
    label: Optional[str] = None
    """Note label. Labeled gluings form the multicurve Γ."""


@dataclass(frozen=True)
class MarimbaSpec:
    pieces: tuple[Piece, ...]
    gluings: tuple[Gluing, ...]
    sheets: int = 1
    """Number of sheets when the spec is a cyclic cover. In a cover every
    note label is carried by exactly `sheets` gluings."""
    family: Optional[str] = None
    """Construction tag, for example `symmetric` for the half-twist
    family."""

    @property
    def gamma(self) -> dict[str, str]:
        """Labeled gluings: gluing id → note label."""
        return {g.id: g.label for g in self.gluings if g.label is not None}

    @property
    def labels(self) -> list[str]:
        """Distinct note labels in order of first appearance."""
        result: list[str] = []
        for gluing in self.gluings:
            if gluing.label is not None and gluing.label not in result:
                result.append(gluing.label)
        return result

    def piece(self, name: str) -> Piece:
        for piece in self.pieces:
            if piece.name == name:
                return piece
        raise KeyError(name)

    def gluing(self, id: str) -> Gluing:
        for gluing in self.gluings:
            if gluing.id == id:
                return gluing
        raise KeyError(id)

    def label_length(self, label: str) -> float:
        """Total length of the curves carrying a label."""
        return sum(g.length for g in self.gluings if g.label == label)

    @property
    def gamma_length(self) -> float:
        return sum(g.length for g in self.gluings if g.label is not None)

    def with_gluing(self, gluing: Gluing) -> "MarimbaSpec":
        """Copy of the spec with the gluing of the same id replaced."""
        gluings = tuple(gluing if g.id == gluing.id else g for g in self.gluings)
        return replace(self, gluings=gluings)

    def spec_hash(self) -> str:
        return hashlib.sha256(dumps_spec(self).encode("utf-8")).hexdigest()


# Reading
# ----------------------------------------------------------------------

_TOP_KEYS = {"sheets", "family", "pieces", "gluings"}
_PIECE_KEYS = {"name", "kind"}
_GLUING_KEYS = {"id", "a", "b", "length", "twist", "label"}


def _check_keys(record: dict[str, Any], allowed: set[str], where: str,
                issues: list[SpecIssue]):
    for key in record:
        if key not in allowed:
            issues.append(SpecIssue.unknown_key(key, where))


def _from_document(doc: dict[str, Any]) -> MarimbaSpec:
    issues: list[SpecIssue] = []
    _check_keys(doc, _TOP_KEYS, "spec", issues)

    pieces: list[Piece] = []
    for i, record in enumerate(doc.get("pieces", [])):
        if not isinstance(record, dict):
            issues.append(SpecIssue.malformed_file(f"Piece #{i} is not a table"))
            continue
        _check_keys(record, _PIECE_KEYS, f"piece #{i}", issues)
        try:
            kind = PieceKind(record.get("kind", "pants"))
        except ValueError:
            issues.append(SpecIssue.malformed_file(f"Piece #{i} has unknown kind '{record.get('kind')}'"))
            continue
        if "name" not in record:
            issues.append(SpecIssue.malformed_file(f"Piece #{i} has no name"))
            continue
        pieces.append(Piece(name=str(record["name"]), kind=kind))

    gluings: list[Gluing] = []
    for i, record in enumerate(doc.get("gluings", [])):
        if not isinstance(record, dict):
            issues.append(SpecIssue.malformed_file(f"Gluing #{i} is not a table"))
            continue
        _check_keys(record, _GLUING_KEYS, f"gluing #{i}", issues)
        try:
            label = record.get("label")
            gluings.append(Gluing(id=str(record.get("id", f"g{i}")),
                                  a=SlotRef.parse(record["a"]),
                                  b=SlotRef.parse(record["b"]),
                                  length=float(record["length"]),
                                  twist=float(record.get("twist", 0.0)),
                                  label=None if label is None else str(label)))
        except KeyError as error:
            issues.append(SpecIssue.malformed_file(f"Gluing #{i} is missing '{error.args[0]}'"))
        except (ValueError, TypeError) as error:
            issues.append(SpecIssue.malformed_file(f"Gluing #{i}: {error}"))

    sheets = doc.get("sheets", 1)
    if not isinstance(sheets, int) or isinstance(sheets, bool):
        issues.append(SpecIssue.invalid_sheets(sheets))
        sheets = 1
    family = doc.get("family")

    if issues:
        raise SpecError(issues)

    return MarimbaSpec(pieces=tuple(pieces),
                       gluings=tuple(gluings),
                       sheets=sheets,
                       family=None if family is None else str(family))


def loads_spec(text: str) -> MarimbaSpec:
    """Parse a spec from TOML text. Raises `SpecError`."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as error:
        raise SpecError([SpecIssue.malformed_file(str(error))])
    return _from_document(doc)


def read_spec(path: str) -> MarimbaSpec:
    try:
        with open(path, "rb") as file:
            doc = tomllib.load(file)
    except tomllib.TOMLDecodeError as error:
        raise SpecError([SpecIssue.malformed_file(f"{path}: {error}")])
    except OSError as error:
        raise SpecError([SpecIssue.malformed_file(f"{path}: {error.strerror}")])
    return _from_document(doc)


# Writing
# ----------------------------------------------------------------------
# NOTE: There is no TOML writer in the standard library. The emitter below
# covers exactly the schema above.

def _toml_string(value: str) -> str:
    escaped = value.replace("\\", "\\\\").replace("\"", "\\\"")
    return f"\"{escaped}\""


def _toml_float(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError(f"Can not write non-finite value {value}")
    return repr(float(value))


def dumps_spec(spec: MarimbaSpec) -> str:
    lines: list[str] = [SPEC_HEADER]
    if spec.sheets != 1:
        lines.append(f"sheets = {spec.sheets}")
    if spec.family is not None:
        lines.append(f"family = {_toml_string(spec.family)}")
    if spec.sheets != 1 or spec.family is not None:
        lines.append("")

    for piece in spec.pieces:
        lines.append("[[pieces]]")
        lines.append(f"name = {_toml_string(piece.name)}")
        lines.append(f"kind = {_toml_string(piece.kind.value)}")
        lines.append("")

    for gluing in spec.gluings:
        lines.append("[[gluings]]")
        lines.append(f"id = {_toml_string(gluing.id)}")
        lines.append(f"a = {_toml_string(str(gluing.a))}")
        lines.append(f"b = {_toml_string(str(gluing.b))}")
        lines.append(f"length = {_toml_float(gluing.length)}")
        lines.append(f"twist = {_toml_float(gluing.twist)}")
        if gluing.label is not None:
            lines.append(f"label = {_toml_string(gluing.label)}")
        lines.append("")

    return "\n".join(lines)


def write_spec(spec: MarimbaSpec, path: str):
    with open(path, "w", encoding="utf-8") as file:
        file.write(dumps_spec(spec))
