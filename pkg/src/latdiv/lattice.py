"""Finite lattices given by their Hasse diagram.

A :class:`Lattice` is built from a list of opaque string identifiers and a list of
``(lower, upper)`` pairs. The order relation, meet and join are precomputed as
dense tables at construction, so every later query is a lookup. Sizes are
expected to stay in the low hundreds.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    NotALattice,
    NotAPartialOrder,
    NotDistributive,
    NotMaximalChain,
    UnknownElement,
    ValidationError,
)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _transitive_closure(rel: np.ndarray) -> np.ndarray:
    leq = rel.copy()
    for k in range(len(leq)):
        leq |= leq[:, k, None] & leq[None, k, :]
    return leq


def _cover_matrix(leq: np.ndarray) -> np.ndarray:
    lt = leq & ~np.eye(len(leq), dtype=bool)
    between = (lt.astype(np.int32) @ lt.astype(np.int32)) > 0
    return lt & ~between


class Lattice:
    """Immutable finite lattice.

    ``leq[i, j]`` is true iff ``elements[i] <= elements[j]``; ``meet_table`` and
    ``join_table`` hold element indices. Covers are stored irredundantly even
    when the input listed transitive pairs.
    """

    __slots__ = ("elements", "index", "leq", "meet_table", "join_table", "covers",
                 "bottom", "top", "_lower", "_upper")

    def __init__(self, elements: Iterable[str], covers: Iterable[Sequence[str]]):
        elements = tuple(str(e) for e in elements)
        if not elements:
            raise ValidationError("a lattice needs at least one element")
        index = {e: i for i, e in enumerate(elements)}
        if len(index) != len(elements):
            raise ValidationError("duplicate element identifiers")
        n = len(elements)
        rel = np.eye(n, dtype=bool)
        for pair in covers:
            lo, hi = (str(x) for x in pair)
            for e in (lo, hi):
                if e not in index:
                    raise UnknownElement(f"cover references unknown element {e!r}")
            if lo == hi:
                raise NotAPartialOrder(f"self-cover on {lo!r}")
            rel[index[lo], index[hi]] = True
        self._init_from_order(elements, index, _transitive_closure(rel))

    @classmethod
    def from_order(cls, elements: Sequence[str], leq: Callable[[str, str], bool]) -> "Lattice":
        """Build from an order predicate instead of a cover list."""
        elements = tuple(str(e) for e in elements)
        covers = [(a, b) for a in elements for b in elements if a != b and leq(a, b)]
        return cls(elements, covers)

    def _init_from_order(self, elements, index, leq):
        n = len(elements)
        off = leq & leq.T & ~np.eye(n, dtype=bool)
        if off.any():
            i, j = map(int, np.argwhere(off)[0])
            raise NotAPartialOrder(f"cycle through {elements[i]!r} and {elements[j]!r}")
        down_size = leq.sum(axis=0)
        meet = np.empty((n, n), dtype=np.int64)
        join = np.empty((n, n), dtype=np.int64)
        for a in range(n):
            for table, rel, size in ((meet, leq, down_size), (join, leq.T, leq.sum(axis=1))):
                # common bounds x of (a, b): rel[x, a] & rel[x, b]
                common = rel[:, a, None] & rel
                count = common.sum(axis=0)
                best = common & (size[:, None] == count[None, :])
                hits = best.sum(axis=0)
                if (hits != 1).any():
                    b = int(np.flatnonzero(hits != 1)[0])
                    what = "meet" if table is meet else "join"
                    raise NotALattice(f"no unique {what} for {elements[a]!r}, {elements[b]!r}")
                table[a] = best.argmax(axis=0)
        cov = _cover_matrix(leq)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "leq", _readonly(leq))
        object.__setattr__(self, "meet_table", _readonly(meet))
        object.__setattr__(self, "join_table", _readonly(join))
        object.__setattr__(self, "covers", tuple(
            (elements[i], elements[j]) for i, j in zip(*np.nonzero(cov))))
        object.__setattr__(self, "bottom", elements[int(np.argmin(leq.sum(axis=0)))])
        object.__setattr__(self, "top", elements[int(np.argmax(leq.sum(axis=0)))])
        object.__setattr__(self, "_lower", {e: tuple(sorted(elements[i] for i in np.flatnonzero(cov[:, k])))
                                            for k, e in enumerate(elements)})
        object.__setattr__(self, "_upper", {e: tuple(sorted(elements[i] for i in np.flatnonzero(cov[k, :])))
                                            for k, e in enumerate(elements)})

    def __setattr__(self, name, value):
        raise AttributeError("Lattice is immutable")

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x) -> bool:
        return x in self.index

    def __repr__(self) -> str:
        return f"Lattice({len(self)} elements, {len(self.covers)} covers)"

    def _i(self, x: str) -> int:
        try:
            return self.index[x]
        except KeyError:
            raise UnknownElement(f"unknown element {x!r}") from None

    def le(self, a: str, b: str) -> bool:
        return bool(self.leq[self._i(a), self._i(b)])

    def meet(self, a: str, b: str) -> str:
        return self.elements[self.meet_table[self._i(a), self._i(b)]]

    def join(self, a: str, b: str) -> str:
        return self.elements[self.join_table[self._i(a), self._i(b)]]

    def lower_covers(self, x: str) -> tuple[str, ...]:
        self._i(x)
        return self._lower[x]

    def upper_covers(self, x: str) -> tuple[str, ...]:
        self._i(x)
        return self._upper[x]

    def below(self, x: str) -> list[str]:
        """All elements ``<= x``."""
        return [self.elements[i] for i in np.flatnonzero(self.leq[:, self._i(x)])]

    def to_json(self) -> dict:
        return {"elements": list(self.elements), "covers": [list(c) for c in self.covers]}


@dataclass(frozen=True)
class IrreducibleElement:
    element: str
    lower_cover: str


@dataclass(frozen=True)
class ChainDecomposition:
    chain: tuple[str, ...]
    irreducible_sequence: tuple[str, ...] = ()
    lower_covers: tuple[str, ...] = ()


@dataclass(frozen=True)
class BirkhoffDecomposition:
    """Irreducible poset of a distributive lattice and the downset representation.

    ``downsets`` maps every lattice element ``m`` to ``{g in J | g <= m}``.
    """

    irreducibles: tuple[str, ...]
    order: tuple[tuple[str, str], ...]
    downsets: dict
    isomorphic: bool


def build_lattice(elements: Iterable[str], covers: Iterable[Sequence[str]]) -> Lattice:
    return Lattice(elements, covers)


def meet_join(L: Lattice, a: str, b: str) -> tuple[str, str]:
    return L.meet(a, b), L.join(a, b)


def distributivity_witness(L: Lattice) -> tuple[str, str, str] | None:
    """First triple violating ``a∧(b∨c) = (a∧b)∨(a∧c)``, or None."""
    M, J = L.meet_table, L.join_table
    for a in range(len(L)):
        lhs = M[a][J]
        rhs = J[M[a][:, None], M[a][None, :]]
        bad = np.argwhere(lhs != rhs)
        if len(bad):
            b, c = map(int, bad[0])
            return L.elements[a], L.elements[b], L.elements[c]
    return None


def is_distributive(L: Lattice) -> bool:
    return distributivity_witness(L) is None


def is_modular_lattice(L: Lattice) -> bool:
    """Check ``a <= c  =>  (a∨b)∧c = a∨(b∧c)`` on all triples."""
    M, J, leq = L.meet_table, L.join_table, L.leq
    for a in range(len(L)):
        lhs = M[J[a][:, None], np.arange(len(L))[None, :]]  # (a∨b)∧c indexed [b, c]
        rhs = J[a][M]                                       # a∨(b∧c) indexed [b, c]
        if ((lhs != rhs) & leq[a][None, :]).any():
            return False
    return True


def join_irreducibles(L: Lattice) -> list[IrreducibleElement]:
    out = []
    for e in sorted(L.elements):
        lower = L.lower_covers(e)
        if len(lower) == 1:
            out.append(IrreducibleElement(e, lower[0]))
    return out


def poset_downsets(points: Sequence[str], less: set[tuple[str, str]]) -> list[frozenset]:
    """Enumerate the downsets of a finite poset given by its strict order pairs."""
    preds = {p: {a for a, b in less if b == p} for p in points}
    seen = {frozenset()}
    frontier = [frozenset()]
    while frontier:
        nxt = []
        for d in frontier:
            for p in points:
                if p not in d and preds[p] <= d:
                    e = d | {p}
                    if e not in seen:
                        seen.add(e)
                        nxt.append(e)
        frontier = nxt
    return sorted(seen, key=lambda s: (len(s), sorted(s)))


def downset_label(d: Iterable[str]) -> str:
    return "{" + ",".join(sorted(d)) + "}"


def downset_lattice(points: Sequence[str], less: Iterable[tuple[str, str]]) -> Lattice:
    """Lattice of downsets of a poset, ordered by inclusion (always distributive).

    ``less`` may be any generating set of strict relations; it is closed
    transitively first. Elements are labelled ``"{a,b}"``.
    """
    points = list(points)
    idx = {p: i for i, p in enumerate(points)}
    rel = np.eye(len(points), dtype=bool)
    for a, b in less:
        rel[idx[a], idx[b]] = True
    closed = _transitive_closure(rel)
    if (closed & closed.T & ~np.eye(len(points), dtype=bool)).any():
        raise NotAPartialOrder("poset relation has a cycle")
    strict = {(points[i], points[j]) for i, j in zip(*np.nonzero(closed)) if i != j}
    downs = poset_downsets(points, strict)
    labels = [downset_label(d) for d in downs]
    covers = [(labels[i], labels[j]) for i, a in enumerate(downs) for j, b in enumerate(downs)
              if len(b) == len(a) + 1 and a < b]
    return Lattice(labels, covers)


def birkhoff_decompose(L: Lattice) -> BirkhoffDecomposition:
    """Irreducible poset of ``L`` and a check that its downsets rebuild ``L``."""
    if not is_distributive(L):
        raise NotDistributive("Birkhoff representation needs a distributive lattice")
    J = [j.element for j in join_irreducibles(L)]
    less = {(a, b) for a in J for b in J if a != b and L.le(a, b)}
    order = tuple(sorted((a, b) for a, b in less
                         if not any((a, c) in less and (c, b) in less for c in J)))
    rep = {m: frozenset(g for g in J if L.le(g, m)) for m in L.elements}
    all_downs = set(poset_downsets(J, less))
    isomorphic = (
        len(set(rep.values())) == len(L)
        and set(rep.values()) == all_downs
        and all(L.le(a, b) == (rep[a] <= rep[b]) for a in L.elements for b in L.elements)
    )
    return BirkhoffDecomposition(tuple(J), order, rep, isomorphic)


def maximal_chains(L: Lattice) -> list[ChainDecomposition]:
    """All maximal bottom-to-top chains, in lexicographic order of identifiers."""
    out: list[ChainDecomposition] = []

    def walk(path: list[str]) -> None:
        ups = L.upper_covers(path[-1])
        if not ups:
            out.append(ChainDecomposition(tuple(path)))
            return
        for u in ups:
            path.append(u)
            walk(path)
            path.pop()

    walk([L.bottom])
    return out


def is_maximal_chain(L: Lattice, chain: Sequence[str]) -> bool:
    if not chain or chain[0] != L.bottom or chain[-1] != L.top:
        return False
    return all(b in L.upper_covers(a) for a, b in zip(chain, chain[1:]))


def chain_irreducible_sequence(L: Lattice, chain: Sequence[str]) -> ChainDecomposition:
    """Irreducibles ``j_i`` with ``m_{i+1} = m_i ∨ j_i`` and ``m_i ∧ j_i = j_i⁻``.

    Each step of a maximal chain adds exactly one irreducible to the downset
    ``{g in J | g <= m}``; that irreducible is ``j_i``.
    """
    chain = tuple(chain)
    for x in chain:
        L._i(x)
    if not is_maximal_chain(L, chain):
        raise NotMaximalChain(f"{chain!r} is not a maximal chain")
    if not is_distributive(L):
        raise NotDistributive("chain/irreducible correspondence needs a distributive lattice")
    irr = {j.element: j.lower_cover for j in join_irreducibles(L)}
    js, lows = [], []
    for lo, hi in zip(chain, chain[1:]):
        gained = [g for g in irr if L.le(g, hi) and not L.le(g, lo)]
        if len(gained) != 1:
            raise NotDistributive(f"step {lo!r} -> {hi!r} adds {len(gained)} irreducibles")
        j = gained[0]
        assert L.join(lo, j) == hi and L.meet(lo, j) == irr[j]
        js.append(j)
        lows.append(irr[j])
    return ChainDecomposition(chain, tuple(js), tuple(lows))


def sublattices_containing(L: Lattice, required: Sequence[str] = (), limit: int = 10):
    """Yield every subset of ``L`` closed under meet and join that contains ``required``."""
    if len(L) > limit:
        from .errors import TooLarge
        raise TooLarge(f"sublattice enumeration capped at {limit} elements, got {len(L)}")
    req = {L._i(x) for x in required}
    rest = [i for i in range(len(L)) if i not in req]
    M, J = L.meet_table, L.join_table
    for r in range(len(rest) + 1):
        for extra in combinations(rest, r):
            s = sorted(req | set(extra))
            if not s:
                continue
            sub = np.array(s)
            member = np.zeros(len(L), dtype=bool)
            member[sub] = True
            if member[M[np.ix_(sub, sub)]].all() and member[J[np.ix_(sub, sub)]].all():
                yield [L.elements[i] for i in s]


def induced_lattice(L: Lattice, subset: Sequence[str]) -> Lattice:
    """Sub-poset of ``L`` on ``subset`` (must itself be a lattice)."""
    return Lattice.from_order(subset, L.le)


# Small named lattices used in examples, tests and the CLI.

def chain_lattice(r: int) -> Lattice:
    names = [f"c{i}" for i in range(r + 1)]
    return Lattice(names, list(zip(names, names[1:])))


def boolean_lattice(k: int) -> Lattice:
    atoms = [chr(ord("a") + i) for i in range(k)]
    return downset_lattice(atoms, [])


def divisor_lattice(n: int) -> Lattice:
    divs = [d for d in range(1, n + 1) if n % d == 0]
    return Lattice.from_order([str(d) for d in divs], lambda a, b: int(b) % int(a) == 0)


def diamond_m3() -> Lattice:
    return Lattice(["0", "a", "b", "c", "1"],
                   [("0", "a"), ("0", "b"), ("0", "c"), ("a", "1"), ("b", "1"), ("c", "1")])


def pentagon_n5() -> Lattice:
    return Lattice(["0", "a", "b", "c", "1"],
                   [("0", "a"), ("a", "c"), ("c", "1"), ("0", "b"), ("b", "1")])
