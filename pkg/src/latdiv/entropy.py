"""Entropy of variable subsets and the functional dependence lattice.

Entropies are in nats. A variable set ``S`` determines ``T`` when
``H(S ∪ T) = H(S)`` to within :data:`DETERMINED_TOL`.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CheckFailure, TooManyVariables, UnknownVariable, ValidationError
from .lattice import Lattice

DETERMINED_TOL = 1e-9
MAX_VARIABLES = 12


@dataclass(frozen=True)
class JointDistribution:
    variables: tuple[str, ...]
    outcomes: tuple[tuple[tuple, float], ...]

    def __init__(self, variables: Sequence, outcomes: Iterable[tuple[Sequence, float]]):
        variables = tuple(str(v) for v in variables)
        if len(set(variables)) != len(variables):
            raise ValidationError("duplicate variable names")
        merged: dict[tuple, float] = defaultdict(float)
        for values, p in outcomes:
            values = tuple(values)
            if len(values) != len(variables):
                raise ValidationError(f"outcome {values!r} has wrong arity")
            if p < 0:
                raise ValidationError(f"negative probability {p!r}")
            merged[values] += float(p)
        total = math.fsum(merged.values())
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "outcomes", tuple(merged.items()))

    def positions(self, S: Iterable[str]) -> tuple[int, ...]:
        pos = {v: i for i, v in enumerate(self.variables)}
        out = []
        for v in S:
            if v not in pos:
                raise UnknownVariable(f"unknown variable {v!r}")
            out.append(pos[v])
        return tuple(sorted(set(out)))

    def to_json(self) -> dict:
        return {"variables": list(self.variables),
                "outcomes": [{"values": list(v), "p": p} for v, p in self.outcomes]}


def _entropy_of_positions(joint: JointDistribution, pos: Sequence[int]) -> float:
    if not pos:
        return 0.0
    marg: dict[tuple, float] = defaultdict(float)
    for values, p in joint.outcomes:
        marg[tuple(values[i] for i in pos)] += p
    h = math.fsum(-p * math.log(p) for p in marg.values() if p > 0)
    return max(h, 0.0)


def subset_entropy(joint: JointDistribution, S: Iterable[str]) -> float:
    return _entropy_of_positions(joint, joint.positions(S))


def entropy_table(joint: JointDistribution) -> np.ndarray:
    """``H`` of every subset, indexed by bitmask over ``joint.variables``."""
    n = len(joint.variables)
    if n > MAX_VARIABLES:
        raise TooManyVariables(f"{n} variables, at most {MAX_VARIABLES} supported")
    return np.array([_entropy_of_positions(joint, [i for i in range(n) if s >> i & 1]) for s in range(1 << n)])


@dataclass(frozen=True)
class ShannonReport:
    strictness: float
    worst_monotonicity_slack: float
    worst_submodularity_slack: float
    ok: bool
    witness: tuple = ()


def shannon_check(joint: JointDistribution, tol: float = DETERMINED_TOL) -> ShannonReport:
    """Check strictness, monotonicity and submodularity over all subset pairs.

    Slacks are ``H(T) - H(S)`` for ``S ⊆ T`` and
    ``H(S) + H(T) - H(S∩T) - H(S∪T)``; both should be nonnegative.
    """
    H = entropy_table(joint)
    n = len(joint.variables)
    idx = np.arange(1 << n)
    worst_mono, worst_sub = math.inf, math.inf
    witness: tuple = ()
    for s in range(1 << n):
        supersets = idx[(idx & s) == s]
        mono = H[supersets] - H[s]
        sub = H[s] + H - H[idx & s] - H[idx | s]
        k = int(np.argmin(sub))
        if sub[k] < worst_sub:
            worst_sub = float(sub[k])
            if worst_sub < -tol:
                witness = ("submodularity", s, int(idx[k]))
        m = float(mono.min())
        if m < worst_mono:
            worst_mono = m
            if m < -tol:
                witness = ("monotonicity", s, int(supersets[int(np.argmin(mono))]))
    ok = H[0] == 0.0 and worst_mono >= -tol and worst_sub >= -tol
    return ShannonReport(float(H[0]), worst_mono, worst_sub, ok, witness)


def _closure_mask(H: np.ndarray, n: int, s: int, tol: float) -> int:
    while True:
        grown = s
        for i in range(n):
            bit = 1 << i
            if not s & bit and abs(H[s | bit] - H[s]) <= tol:
                grown |= bit
        if grown == s:
            return s
        s = grown


def functional_closure(joint: JointDistribution, S: Iterable[str], tol: float = DETERMINED_TOL) -> frozenset:
    """Variables determined by ``S``: all ``Z`` with ``H(S ∪ {Z}) = H(S)``."""
    H = entropy_table(joint)
    pos = joint.positions(S)
    s = _closure_mask(H, len(joint.variables), sum(1 << i for i in pos), tol)
    return frozenset(v for i, v in enumerate(joint.variables) if s >> i & 1)


@dataclass(frozen=True)
class DependencyLattice:
    lattice: Lattice
    closed_sets: dict  # lattice element -> frozenset of variables
    entropy: dict      # lattice element -> H


def _label(variables: Sequence[str], mask: int) -> str:
    return "{" + ",".join(v for i, v in enumerate(variables) if mask >> i & 1) + "}"


def dependency_lattice(joint: JointDistribution, tol: float = DETERMINED_TOL) -> DependencyLattice:
    """Closed variable sets ordered by inclusion, with entropy restricted to them.

    Meet is intersection and join is the closure of the union. The restricted
    entropy is checked to be strict, monotone and submodular with respect to
    these operations.
    """
    H = entropy_table(joint)
    n = len(joint.variables)
    closed = sorted({_closure_mask(H, n, s, tol) for s in range(1 << n)}, key=lambda m: (bin(m).count("1"), m))
    labels = [_label(joint.variables, m) for m in closed]
    mask_of = dict(zip(labels, closed))
    L = Lattice.from_order(labels, lambda a, b: mask_of[a] & ~mask_of[b] == 0)
    h = {lab: float(H[m]) for lab, m in mask_of.items()}
    if abs(h[L.bottom]) > tol:
        # constants (zero-entropy variables) land in the bottom closed set
        raise CheckFailure("entropy of the bottom closed set is not zero")
    for lo, hi in L.covers:
        if h[lo] > h[hi] + tol:
            raise CheckFailure(f"entropy not monotone on {lo} < {hi}")
    for a in labels:
        for b in labels:
            if h[a] + h[b] < h[L.meet(a, b)] + h[L.join(a, b)] - tol:
                raise CheckFailure(f"entropy not submodular on {a}, {b}")
    return DependencyLattice(L, {lab: frozenset(v for i, v in enumerate(joint.variables) if m >> i & 1)
                                 for lab, m in mask_of.items()}, h)
