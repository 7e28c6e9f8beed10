"""Formal contexts, derivation operators and concept lattices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal

from .errors import CheckFailure, UnknownIdentifier, ValidationError
from .lattice import Lattice, is_distributive
from .valuation import Valuation


@dataclass(frozen=True)
class FormalContext:
    objects: tuple[str, ...]
    attributes: tuple[str, ...]
    incidence: frozenset

    def __init__(self, objects: Iterable, attributes: Iterable, incidence: Iterable):
        objects = tuple(str(g) for g in objects)
        attributes = tuple(str(m) for m in attributes)
        pairs = frozenset((str(g), str(m)) for g, m in incidence)
        if len(set(objects)) != len(objects) or len(set(attributes)) != len(attributes):
            raise ValidationError("duplicate object or attribute identifiers")
        gs, ms = set(objects), set(attributes)
        for g, m in pairs:
            if g not in gs:
                raise UnknownIdentifier(f"incidence references unknown object {g!r}")
            if m not in ms:
                raise UnknownIdentifier(f"incidence references unknown attribute {m!r}")
        object.__setattr__(self, "objects", objects)
        object.__setattr__(self, "attributes", attributes)
        object.__setattr__(self, "incidence", pairs)
        # bitmask rows: attributes of each object, objects of each attribute
        object.__setattr__(self, "_rows", tuple(
            sum(1 << k for k, m in enumerate(attributes) if (g, m) in pairs) for g in objects))
        object.__setattr__(self, "_cols", tuple(
            sum(1 << k for k, g in enumerate(objects) if (g, m) in pairs) for m in attributes))

    def _mask(self, side: str, items: Iterable[str]) -> int:
        names = self.objects if side == "objects" else self.attributes
        pos = {x: k for k, x in enumerate(names)}
        mask = 0
        for x in items:
            x = str(x)
            if x not in pos:
                raise UnknownIdentifier(f"unknown {side[:-1]} {x!r}")
            mask |= 1 << pos[x]
        return mask

    def _unmask(self, side: str, mask: int) -> frozenset:
        names = self.objects if side == "objects" else self.attributes
        return frozenset(x for k, x in enumerate(names) if mask >> k & 1)

    def intent_mask(self, extent_mask: int) -> int:
        out = (1 << len(self.attributes)) - 1
        for k, row in enumerate(self._rows):
            if extent_mask >> k & 1:
                out &= row
        return out

    def extent_mask(self, intent_mask: int) -> int:
        out = (1 << len(self.objects)) - 1
        for k, col in enumerate(self._cols):
            if intent_mask >> k & 1:
                out &= col
        return out

    def to_json(self) -> dict:
        return {"objects": list(self.objects), "attributes": list(self.attributes),
                "incidence": sorted([g, m] for g, m in self.incidence)}


@dataclass(frozen=True)
class FormalConcept:
    extent: frozenset
    intent: frozenset


@dataclass(frozen=True)
class ConceptLattice:
    """Concepts in enumeration order, the extent lattice and its labels."""

    concepts: tuple[FormalConcept, ...]
    lattice: Lattice
    extents: dict  # lattice element -> extent

    def __iter__(self):
        return iter((self.concepts, self.lattice))


def derive(ctx: FormalContext, side: Literal["objects", "attributes"], S: Iterable[str]) -> frozenset:
    """``X'`` (common attributes of objects ``X``) or ``Y'`` (common objects of attributes ``Y``)."""
    if side == "objects":
        return ctx._unmask("attributes", ctx.intent_mask(ctx._mask("objects", S)))
    if side == "attributes":
        return ctx._unmask("objects", ctx.extent_mask(ctx._mask("attributes", S)))
    raise ValueError(f"side must be 'objects' or 'attributes', not {side!r}")


def concept_closure(ctx: FormalContext, X: Iterable[str]) -> frozenset:
    """``X''``."""
    return ctx._unmask("objects", _close(ctx, ctx._mask("objects", X)))


def _close(ctx: FormalContext, mask: int) -> int:
    return ctx.extent_mask(ctx.intent_mask(mask))


def extent_label(ctx: FormalContext, extent: Iterable[str]) -> str:
    ext = set(extent)
    return "{" + ",".join(g for g in ctx.objects if g in ext) + "}"


def next_closure_extents(ctx: FormalContext) -> list[int]:
    """All closed object sets as bitmasks, in lectic order."""
    n = len(ctx.objects)
    A = _close(ctx, 0)
    out = [A]
    full = (1 << n) - 1
    while A != full:
        for i in range(n - 1, -1, -1):
            bit = 1 << i
            if A & bit:
                continue
            low = bit - 1
            B = _close(ctx, (A & low) | bit)
            if B & low == A & low:
                A = B
                out.append(A)
                break
        else:
            break
    return out


def enumerate_concepts(ctx: FormalContext) -> ConceptLattice:
    masks = next_closure_extents(ctx)
    concepts = tuple(
        FormalConcept(ctx._unmask("objects", m), ctx._unmask("attributes", ctx.intent_mask(m))) for m in masks)
    labels = [extent_label(ctx, c.extent) for c in concepts]
    by_label = dict(zip(labels, masks))
    L = Lattice.from_order(labels, lambda a, b: by_label[a] & ~by_label[b] == 0)
    return ConceptLattice(concepts, L, {lab: c.extent for lab, c in zip(labels, concepts)})


def counting_valuation(cl: ConceptLattice) -> tuple[Valuation, bool]:
    """Extent size as a function on the extent lattice, and whether it is modular.

    Only modularity is reported: monotonicity is automatic, and the bottom
    extent may be nonempty, in which case ``mu(bottom) > 0``. When ``mu`` is
    modular the lattice must be distributive; that is checked here and a
    failure raises :class:`CheckFailure`.
    """
    L = cl.lattice
    size = {lab: len(ext) for lab, ext in cl.extents.items()}
    mu = Valuation(L, {lab: float(k) for lab, k in size.items()})
    els = L.elements
    is_val = all(size[a] + size[b] == size[L.meet(a, b)] + size[L.join(a, b)]
                 for i, a in enumerate(els) for b in els[i + 1:])
    if is_val and not is_distributive(cl.lattice):
        raise CheckFailure("counting valuation is modular on a non-distributive concept lattice")
    return mu, is_val


def lattice_as_context(L: Lattice) -> FormalContext:
    """Context with ``l1 I l2`` iff ``l1 <= l2``; its concept lattice is isomorphic to ``L``."""
    return FormalContext(L.elements, L.elements,
                         [(a, b) for a in L.elements for b in L.elements if L.le(a, b)])
