# constructions.py
#
# Isomelodic pairs of marimbas: half-twist partners in the symmetric
# family and cyclic covers.
#
# Date: 2026-09-22

from typing import Any
from dataclasses import dataclass, field, replace
import logging
import math

from .errors import (NotInFamily, CocycleOrderViolation, SheetOutOfRange,
                     OnGamma, OutOfRange, UnknownLabel)
from .hyp2 import fermi_coordinates
from .flow import InteriorState, CrossSectionState, StartState
from .surface import (MarimbaSpec, Piece, PieceKind, SlotRef, Gluing, Surface,
                      build_surface)

__all__ = [
    "SYMMETRIC_FAMILY",
    "SymmetricFamilyParams",
    "symmetric_family_marimba",
    "half_twist_partner",
    "is_half_twist_pair",
    "transport_half_twist",
    "deck_involution",
    "check_deck_involution",
    "CoverCocycle",
    "cyclic_cover",
    "cover_piece_name",
    "lift_state",
    "cover_state_projection",
]

logger = logging.getLogger(__name__)

SYMMETRIC_FAMILY = "symmetric"
ALPHA = "alpha"
BETA = "beta"
PIECE = "W"

TWIST_TOL = 1e-12
ON_CURVE_TOL = 1e-9
DECK_TOL = 1e-9


# Symmetric family
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetricFamilyParams:
    l_alpha: float
    l_beta: float
    twist_alpha: float = 0.0
    twist_beta: float = 0.0
    label_alpha: str = ALPHA
    label_beta: str = BETA

    def __post_init__(self):
        for name in ("l_alpha", "l_beta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise OutOfRange(f"{name} must be positive, got {value}", value)
        for name in ("twist_alpha", "twist_beta"):
            if not math.isfinite(getattr(self, name)):
                raise OutOfRange(f"{name} must be finite", getattr(self, name))
        if self.label_alpha == self.label_beta:
            raise OutOfRange("The two curves need distinct note labels", self.label_alpha)


def symmetric_family_marimba(params: SymmetricFamilyParams) -> MarimbaSpec:
    """Genus 2 marimba made of one double piece `W` glued to itself.

    `W` is the double cover of the pants with cuffs `l_alpha / 2`,
    `l_alpha / 2`, `l_beta`. Its two boundary curves over the first two
    cuffs are glued into `alpha`, the two lifts of the third cuff into
    `beta`.
    """
    alpha = Gluing(id=ALPHA, a=SlotRef(PIECE, "A"), b=SlotRef(PIECE, "A'"),
                   length=params.l_alpha, twist=params.twist_alpha,
                   label=params.label_alpha)
    beta = Gluing(id=BETA, a=SlotRef(PIECE, "B"), b=SlotRef(PIECE, "B'"),
                  length=params.l_beta, twist=params.twist_beta,
                  label=params.label_beta)
    return MarimbaSpec(pieces=(Piece(PIECE, PieceKind.DOUBLE),),
                       gluings=(alpha, beta),
                       family=SYMMETRIC_FAMILY)


def _family_gluings(spec: MarimbaSpec) -> tuple[Gluing, Gluing]:
    if spec.family != SYMMETRIC_FAMILY or spec.sheets != 1:
        raise NotInFamily()
    try:
        return (spec.gluing(ALPHA), spec.gluing(BETA))
    except KeyError:
        raise NotInFamily("Symmetric family spec has no 'alpha' and 'beta' gluings")


def half_twist_partner(spec: MarimbaSpec) -> MarimbaSpec:
    """The spec reglued along `alpha` with half of its length as extra
    twist."""
    alpha, _ = _family_gluings(spec)
    return spec.with_gluing(replace(alpha, twist=alpha.twist + alpha.length / 2.0))


def is_half_twist_pair(first: MarimbaSpec, second: MarimbaSpec) -> bool:
    """True when the `alpha` twists differ by half a turn and everything
    else agrees."""
    alpha1, beta1 = _family_gluings(first)
    alpha2, beta2 = _family_gluings(second)
    if first.pieces != second.pieces or beta1 != beta2:
        return False
    if replace(alpha1, twist=0.0) != replace(alpha2, twist=0.0):
        return False
    length = alpha1.length
    turns = (alpha2.twist - alpha1.twist) / (length / 2.0)
    nearest = round(turns)
    return nearest % 2 == 1 and abs(turns - nearest) <= TWIST_TOL * max(1.0, abs(turns))


def _on_gamma(surface: Surface, state: InteriorState) -> bool:
    for side in range(6):
        if not surface.is_gamma_side(state.cell, side):
            continue
        _, u = fermi_coordinates(surface.half_sides[(state.cell, side)].geodesic,
                                 state.vector.base)
        if abs(u) <= ON_CURVE_TOL:
            return True
    return False


def transport_half_twist(spec: MarimbaSpec, partner: MarimbaSpec,
                         start: StartState) -> InteriorState:
    """The vector of the half-twist partner with the same cell
    coordinates as `start`.

    Both surfaces share the cells of `W`; only the passages across `alpha`
    differ. Raises `NotInFamily` unless `partner` is a half-twist partner
    of `spec` and `OnGamma` for vectors based on the multicurve.
    """
    if not is_half_twist_pair(spec, partner):
        raise NotInFamily("Specs are not half-twist partners")
    if isinstance(start, CrossSectionState):
        raise OnGamma()
    surface = build_surface(spec)
    if not (0 <= start.cell < len(surface.cells)):
        raise OutOfRange(f"Cell {start.cell} is not a cell of the surface", start.cell)
    if _on_gamma(surface, start):
        raise OnGamma()
    return InteriorState(start.cell, start.vector)


def deck_involution(surface: Surface) -> dict[int, int]:
    """Cell permutation exchanging the two sheets of every double piece.
    Cells of pants pieces are fixed."""
    permutation: dict[int, int] = {}
    first = 0
    for piece in surface.spec.pieces:
        count = piece.kind.cell_count
        for i in range(count):
            if piece.kind == PieceKind.DOUBLE:
                permutation[first + i] = first + (i + 2) % 4
            else:
                permutation[first + i] = first + i
        first += count
    if all(piece.kind != PieceKind.DOUBLE for piece in surface.spec.pieces):
        raise NotInFamily("Surface has no double piece")
    return permutation


def _same_bound(x: float, y: float) -> bool:
    return x == y or abs(x - y) <= DECK_TOL


def check_deck_involution(surface: Surface) -> list[str]:
    """Differences between the side pairings and their images under the
    sheet exchange. An empty list means the exchange is an isometry of
    the cell structure."""
    permutation = deck_involution(surface)
    problems: list[str] = []
    for (cell, side), pairing in sorted(surface.pairings.items()):
        image = surface.pairings.get((permutation[cell], side))
        where = f"side {side} of cells {cell} → {permutation[cell]}"
        if image is None:
            problems.append(f"{where}: image side is not paired")
            continue
        if pairing.is_cuff != image.is_cuff:
            problems.append(f"{where}: cuff side maps to a seam")
            continue
        if pairing.half_side is not None and image.half_side is not None \
                and pairing.half_side.gluing != image.half_side.gluing:
            problems.append(f"{where}: gluing '{pairing.half_side.gluing}' maps to "
                            f"'{image.half_side.gluing}'")
        if len(pairing.passages) != len(image.passages):
            problems.append(f"{where}: {len(pairing.passages)} passages map to "
                            f"{len(image.passages)}")
            continue
        for passage, other in zip(pairing.passages, image.passages):
            if permutation[passage.cell] != other.cell or passage.side != other.side:
                problems.append(f"{where}: passage into ({passage.cell}, {passage.side}) "
                                f"maps to ({other.cell}, {other.side})")
            elif not (_same_bound(passage.lo, other.lo) and _same_bound(passage.hi, other.hi)):
                problems.append(f"{where}: passage interval [{passage.lo}, {passage.hi}] "
                                f"maps to [{other.lo}, {other.hi}]")
            elif not passage.isometry.is_close(other.isometry, DECK_TOL):
                problems.append(f"{where}: passage isometries differ")
    return problems


# Cyclic covers
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CoverCocycle:
    """Homomorphism to ℤ/n given by one weight per gluing. Crossing a
    gluing from slot `a` to slot `b` moves `weight` sheets forward."""
    modulus: int
    weights: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.modulus < 1:
            raise OutOfRange(f"Cover modulus must be positive, got {self.modulus}",
                             self.modulus)

    @classmethod
    def parse(cls, modulus: int, text: str) -> "CoverCocycle":
        """Parse weights written as `gluing=weight` pairs separated by
        commas."""
        weights: dict[str, int] = {}
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            gluing, sep, weight = item.partition("=")
            if not sep:
                raise OutOfRange(f"Weight '{item}' is not of the form gluing=weight", item)
            try:
                weights[gluing.strip()] = int(weight)
            except ValueError:
                raise OutOfRange(f"Weight '{weight}' of gluing '{gluing}' is not an integer",
                                 weight)
        return cls(modulus=modulus, weights=weights)

    def weight(self, gluing: str) -> int:
        return self.weights.get(gluing, 0) % self.modulus

    def as_dict(self) -> dict[str, Any]:
        return {"modulus": self.modulus, "weights": dict(self.weights)}


def cover_piece_name(name: str, sheet: int) -> str:
    return f"{name}#{sheet}"


def cyclic_cover(spec: MarimbaSpec, cocycle: CoverCocycle) -> MarimbaSpec:
    """The `n`-sheeted cyclic cover given by a cocycle.

    Sheet `j` holds a copy of every piece. The copy of a gluing on sheet
    `j` joins slot `a` of sheet `j` to slot `b` of sheet `j + weight`.
    Every labeled curve lifts to `n` disjoint curves of the base length,
    all carrying its label, not to one curve of `n` times the length. A
    note of the cover is therefore played at the base rate on each sheet;
    only the total length of the label grows `n` times.

    Raises `CocycleOrderViolation` when the weight of a labeled curve is
    not a unit modulo `n`.
    """
    if spec.sheets != 1:
        raise OutOfRange("Can not take a cover of a cover", spec.sheets)
    ids = {gluing.id for gluing in spec.gluings}
    for id in cocycle.weights:
        if id not in ids:
            raise OutOfRange(f"Cocycle weight given for unknown gluing '{id}'", id)

    n = cocycle.modulus
    for gluing in spec.gluings:
        if gluing.label is None:
            continue
        weight = cocycle.weight(gluing.id)
        if math.gcd(weight, n) != 1:
            raise CocycleOrderViolation(gluing.label, weight, n)

    pieces = tuple(Piece(cover_piece_name(piece.name, j), piece.kind)
                   for j in range(n) for piece in spec.pieces)
    gluings: list[Gluing] = []
    for j in range(n):
        for gluing in spec.gluings:
            target = (j + cocycle.weight(gluing.id)) % n
            gluings.append(replace(
                gluing,
                id=cover_piece_name(gluing.id, j),
                a=SlotRef(cover_piece_name(gluing.a.piece, j), gluing.a.slot),
                b=SlotRef(cover_piece_name(gluing.b.piece, target), gluing.b.slot)))

    logger.info("Built %d-sheeted cover: %d pieces, %d gluings",
                n, len(pieces), len(gluings))
    return MarimbaSpec(pieces=pieces, gluings=tuple(gluings), sheets=n)


def _cells_per_sheet(spec: MarimbaSpec) -> int:
    return sum(piece.kind.cell_count for piece in spec.pieces) // spec.sheets


def lift_state(cover: MarimbaSpec, state: StartState, sheet: int) -> StartState:
    """Lift a state of the base surface to a sheet of its cover.

    Sheets are taken modulo the number of sheets. Raises
    `SheetOutOfRange` for negative sheets.
    """
    n = cover.sheets
    if sheet < 0:
        raise SheetOutOfRange(sheet, n)
    sheet = sheet % n
    match state:
        case InteriorState(cell=cell, vector=vector):
            per_sheet = _cells_per_sheet(cover)
            if not (0 <= cell < per_sheet):
                raise OutOfRange(f"Cell {cell} is not a cell of the base surface", cell)
            return InteriorState(sheet * per_sheet + cell, vector)
        case CrossSectionState(cuff=cuff, x=x, theta=theta):
            lifted = cover_piece_name(cuff, sheet)
            if all(gluing.id != lifted for gluing in cover.gluings):
                raise UnknownLabel(cuff)
            return CrossSectionState(lifted, x, theta)
        case _:
            raise TypeError(f"Can not lift {type(state).__name__}")


def cover_state_projection(cover: MarimbaSpec, state: StartState) -> tuple[StartState, int]:
    """Project a state of a cover to the base surface. Returns the base
    state and the sheet it came from."""
    match state:
        case InteriorState(cell=cell, vector=vector):
            sheet, base = divmod(cell, _cells_per_sheet(cover))
            return (InteriorState(base, vector), sheet)
        case CrossSectionState(cuff=cuff, x=x, theta=theta):
            base, sep, sheet = cuff.rpartition("#")
            if not sep or not sheet.isdigit():
                raise OutOfRange(f"Curve '{cuff}' is not a lifted curve", cuff)
            return (CrossSectionState(base, x, theta), int(sheet))
        case _:
            raise TypeError(f"Can not project {type(state).__name__}")
