# validate.py
#
# Structural validation of marimba specs.
#
# Date: 2026-09-15

import math
from collections import Counter

from .spec import MarimbaSpec, PieceKind, SlotRef
from .issues import SpecIssue

__all__ = [
    "validate_spec",
    "euler_characteristic",
    "slot_lengths",
]


def euler_characteristic(spec: MarimbaSpec) -> int:
    """Euler characteristic of the closed surface: minus the number of
    pairs of pants."""
    return -sum(piece.kind.pants_count for piece in spec.pieces)


def slot_lengths(spec: MarimbaSpec) -> dict[SlotRef, float]:
    """Length of the boundary slot as declared by its gluing."""
    result: dict[SlotRef, float] = {}
    for gluing in spec.gluings:
        result[gluing.a] = gluing.length
        result[gluing.b] = gluing.length
    return result


def validate_spec(spec: MarimbaSpec) -> list[SpecIssue]:
    """Check a spec and return a list of issues. Empty list means the spec
    can be built."""
    issues: list[SpecIssue] = []

    if not spec.pieces:
        issues.append(SpecIssue.empty_spec())
        return issues

    if spec.sheets < 1:
        issues.append(SpecIssue.invalid_sheets(spec.sheets))

    names = Counter(piece.name for piece in spec.pieces)
    for name, count in names.items():
        if count > 1:
            issues.append(SpecIssue.duplicate_piece(name))

    ids = Counter(gluing.id for gluing in spec.gluings)
    for id, count in ids.items():
        if count > 1:
            issues.append(SpecIssue.duplicate_gluing(id))

    # Slot coverage
    kinds = {piece.name: piece.kind for piece in spec.pieces}
    slots = [SlotRef(piece.name, slot)
             for piece in spec.pieces for slot in piece.kind.slots]
    used: Counter[SlotRef] = Counter()
    for gluing in spec.gluings:
        for ref in (gluing.a, gluing.b):
            kind = kinds.get(ref.piece)
            if kind is None or ref.slot not in kind.slots:
                issues.append(SpecIssue.unknown_slot(str(ref), gluing.id))
            else:
                used[ref] += 1

    for slot in slots:
        if used[slot] == 0:
            issues.append(SpecIssue.unglued_slot(str(slot)))
        elif used[slot] > 1:
            issues.append(SpecIssue.slot_reused(str(slot)))

    # Lengths and twists
    for gluing in spec.gluings:
        if not math.isfinite(gluing.length) or gluing.length <= 0.0:
            issues.append(SpecIssue.non_positive_length(gluing.id, gluing.length))
        if not math.isfinite(gluing.twist):
            issues.append(SpecIssue.non_finite_twist(gluing.id))

    lengths = slot_lengths(spec)
    for piece in spec.pieces:
        if piece.kind != PieceKind.DOUBLE:
            continue
        for first, second in (("A", "A'"), ("B", "B'")):
            la = lengths.get(SlotRef(piece.name, first))
            lb = lengths.get(SlotRef(piece.name, second))
            if la is None or lb is None:
                continue
            if abs(la - lb) > 1e-12 * max(1.0, la, lb):
                issues.append(SpecIssue.length_mismatch(piece.name, first, second))

    # Labels
    labels = Counter(g.label for g in spec.gluings if g.label is not None)
    for label, count in labels.items():
        if spec.sheets == 1 and count > 1:
            issues.append(SpecIssue.duplicate_label(label))
        elif spec.sheets > 1 and count != spec.sheets:
            issues.append(SpecIssue.duplicate_label(
                label,
                f"Note label '{label}' must label exactly {spec.sheets} gluings of the cover, found {count}"))

    # Connectivity
    components = _count_components(spec)
    if components > 1:
        issues.append(SpecIssue.disconnected(components))

    return issues


def _count_components(spec: MarimbaSpec) -> int:
    neighbours: dict[str, set[str]] = {piece.name: set() for piece in spec.pieces}
    for gluing in spec.gluings:
        if gluing.a.piece in neighbours and gluing.b.piece in neighbours:
            neighbours[gluing.a.piece].add(gluing.b.piece)
            neighbours[gluing.b.piece].add(gluing.a.piece)

    seen: set[str] = set()
    components = 0
    for start in neighbours:
        if start in seen:
            continue
        components += 1
        stack = [start]
        seen.add(start)
        while stack:
            current = stack.pop()
            for other in neighbours[current]:
                if other not in seen:
                    seen.add(other)
                    stack.append(other)
    return components
