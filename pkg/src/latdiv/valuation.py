"""Valuations on finite lattices and their information divergence.

The divergence of ``mu`` from ``nu`` on a distributive lattice sums, over the
join-irreducibles ``j``, the one-point term ``dnu * f(dmu / dnu)`` with
``f(x) = x ln x - (x - 1)`` and ``dmu = mu(j) - mu(j⁻)``. Any maximal chain gives
the same value, which is what makes the chain formula usable on non-distributive
lattices too.

Infinite values are written as ``math.inf``. Conventions: ``0 ln 0 = 0``, a term
with both increments zero or both infinite contributes nothing, and a term with
one side infinite and the other finite contributes ``+inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import (
    CheckFailure,
    InvalidValuation,
    MissingValue,
    NotDistributive,
    NotMaximalChain,
    NotSuperModular,
)
from .lattice import (
    Lattice,
    induced_lattice,
    is_distributive,
    is_maximal_chain,
    is_modular_lattice,
    join_irreducibles,
    maximal_chains,
    sublattices_containing,
)

REL_TOL = 1e-9
INCREMENT_RTOL = 1e-12

inf = math.inf


@dataclass(frozen=True)
class Valuation:
    lattice: Lattice
    values: Mapping[str, float]

    def __getitem__(self, x: str) -> float:
        return self.values[x]

    def scaled(self, t: float) -> "Valuation":
        return Valuation(self.lattice, {k: (0.0 if t == 0 else t * v) for k, v in self.values.items()})


@dataclass(frozen=True)
class Violation:
    law: str
    elements: tuple[str, ...]
    detail: str = ""


@dataclass(frozen=True)
class DivergenceResult:
    value: float
    domination_ok: bool
    contributions: dict = field(default_factory=dict)


def _close(a: float, b: float, tol: float = REL_TOL) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol * (1.0 + max(abs(a), abs(b)))


def _values_on(L: Lattice, values: Mapping[str, float]) -> dict[str, float]:
    out = {}
    for e in L.elements:
        if e not in values:
            raise MissingValue(f"no value for element {e!r}")
        v = float(values[e])
        if math.isnan(v):
            raise MissingValue(f"value for {e!r} is NaN")
        out[e] = v
    return out


def check_valuation(L: Lattice, values: Mapping[str, float], tol: float = REL_TOL) -> Violation | None:
    """First violated valuation law (strictness, monotonicity, modularity), or None."""
    mu = _values_on(L, values)
    if mu[L.bottom] != 0:
        return Violation("strictness", (L.bottom,), f"value at bottom is {mu[L.bottom]!r}")
    for e, v in mu.items():
        if v < 0:
            return Violation("nonnegativity", (e,), f"value {v!r}")
    for lo, hi in L.covers:
        if mu[lo] > mu[hi] and not _close(mu[lo], mu[hi], tol):
            return Violation("monotonicity", (lo, hi), f"{mu[lo]!r} > {mu[hi]!r}")
    els = L.elements
    for i, a in enumerate(els):
        for b in els[i + 1:]:
            lhs = mu[a] + mu[b]
            rhs = mu[L.meet(a, b)] + mu[L.join(a, b)]
            if not _close(lhs, rhs, tol):
                return Violation("modularity", (a, b), f"{lhs!r} != {rhs!r}")
    return None


def validate_valuation(L: Lattice, values: Mapping[str, float]) -> Valuation | Violation:
    """Return a :class:`Valuation` if all laws hold, else the first :class:`Violation`."""
    bad = check_valuation(L, values)
    if bad is not None:
        return bad
    return Valuation(L, _values_on(L, values))


def as_valuation(L: Lattice, mu) -> Valuation:
    """Coerce a mapping or Valuation to a checked Valuation on ``L``."""
    values = mu.values if isinstance(mu, Valuation) else mu
    v = validate_valuation(L, values)
    if isinstance(v, Violation):
        raise InvalidValuation(f"{v.law} violated at {v.elements}: {v.detail}", v)
    return v


def divergence_term(dmu: float, dnu: float) -> float:
    """One-point term ``dnu * f(dmu/dnu) = dmu ln(dmu/dnu) - dmu + dnu``."""
    if math.isinf(dmu) or math.isinf(dnu):
        return 0.0 if dmu == dnu else inf
    if dmu == 0.0:
        return dnu
    if dnu == 0.0:
        return inf
    return dmu * math.log(dmu / dnu) - dmu + dnu


def _increment(hi: float, lo: float) -> float:
    if math.isinf(hi):
        return inf
    d = hi - lo
    # rounding in modular sums leaves increments of a few ulps either side of 0
    return d if d > INCREMENT_RTOL * max(abs(hi), abs(lo)) else 0.0


def increments(L: Lattice, mu) -> dict[str, float]:
    """``mu(j) - mu(j⁻)`` for every join-irreducible ``j``."""
    values = mu.values if isinstance(mu, Valuation) else mu
    return {j.element: _increment(values[j.element], values[j.lower_cover]) for j in join_irreducibles(L)}


def lattice_divergence(L: Lattice, mu, nu) -> DivergenceResult:
    if not is_distributive(L):
        raise NotDistributive("the irreducible-sum formula needs a distributive lattice")
    mu, nu = as_valuation(L, mu), as_valuation(L, nu)
    dmu, dnu = increments(L, mu), increments(L, nu)
    contrib = {j: divergence_term(dmu[j], dnu[j]) for j in dmu}
    dominated = all(not (dnu[j] == 0 and dmu[j] > 0) for j in dmu)
    terms = list(contrib.values())
    value = inf if any(math.isinf(t) for t in terms) else math.fsum(terms)
    return DivergenceResult(value, dominated, contrib)


def chain_divergence(L: Lattice, mu, nu, chain: Sequence[str]) -> float:
    """Divergence of the restrictions of ``mu`` and ``nu`` to a maximal chain."""
    if not is_maximal_chain(L, tuple(chain)):
        raise NotMaximalChain(f"{tuple(chain)!r} is not a maximal chain")
    return _chain_sum(mu, nu, chain)


def _chain_sum(mu, nu, chain: Sequence[str]) -> float:
    m = mu.values if isinstance(mu, Valuation) else mu
    n = nu.values if isinstance(nu, Valuation) else nu
    terms = [divergence_term(_increment(m[b], m[a]), _increment(n[b], n[a])) for a, b in zip(chain, chain[1:])]
    return inf if any(math.isinf(t) for t in terms) else math.fsum(terms)


def divergence_via_sublattice_sup(L: Lattice, mu, nu, sublattices=None, limit: int = 10) -> float:
    """Supremum over sublattices containing the bottom of the restricted divergence.

    Each restricted divergence is evaluated on one maximal chain of the
    sublattice. Without an explicit ``sublattices`` list every candidate is
    enumerated, which is only allowed for ``len(L) <= limit``.
    """
    if sublattices is None:
        sublattices = sublattices_containing(L, [L.bottom], limit=limit)
    best = 0.0
    for sub in sublattices:
        K = induced_lattice(L, sub)
        best = max(best, _chain_sum(mu, nu, maximal_chains(K)[0].chain))
    return best


def _check_supermodular(L: Lattice, mu: Mapping[str, float], tol: float = REL_TOL) -> None:
    if mu[L.bottom] != 0:
        raise NotSuperModular(f"value at bottom is {mu[L.bottom]!r}")
    for lo, hi in L.covers:
        if mu[lo] > mu[hi] and not _close(mu[lo], mu[hi], tol):
            raise NotSuperModular(f"not monotone on {lo!r} < {hi!r}")
    els = L.elements
    for i, a in enumerate(els):
        for b in els[i + 1:]:
            lhs = mu[a] + mu[b]
            rhs = mu[L.meet(a, b)] + mu[L.join(a, b)]
            if lhs > rhs and not _close(lhs, rhs, tol):
                raise NotSuperModular(f"super-modularity fails on {a!r}, {b!r}")


def cocl(L: Lattice, mu, x: str) -> str:
    """Smallest ``y <= x`` with ``mu(y) = mu(x)``."""
    values = _values_on(L, mu.values if isinstance(mu, Valuation) else mu)
    _check_supermodular(L, values)
    return _cocl(L, values, x)


def _cocl(L: Lattice, values: Mapping[str, float], x: str) -> str:
    y = x
    for z in L.below(x):
        if _close(values[z], values[x]):
            y = L.meet(y, z)
    return y


def co_closed_lattice(L: Lattice, mu) -> Lattice:
    """Lattice of fixed points of :func:`cocl` under the induced order."""
    values = _values_on(L, mu.values if isinstance(mu, Valuation) else mu)
    _check_supermodular(L, values)
    fixed = [x for x in L.elements if _cocl(L, values, x) == x]
    K = induced_lattice(L, fixed)
    if check_valuation(L, values) is None and not is_modular_lattice(K):
        raise CheckFailure("co-closed lattice of a valuation is not modular")
    return K
