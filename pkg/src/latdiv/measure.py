"""Information projections on partitions and Radon-Nikodym approximation.

Measures live on a finite ground set ``{0, ..., N-1}``. Projecting ``mu`` onto a
partition ``P`` relative to ``nu`` gives the density ``f_P`` that is constant on
each block, equal to ``mu(block) / nu(block)``, and the measure ``f_P * nu``.
Along a refinement sequence these densities form the approximations whose
convergence :func:`rn_approximate` reports on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    ConstraintViolation,
    DominationFailure,
    GroundSetMismatch,
    InvalidPartition,
    NotARefinement,
    ValidationError,
)
from .valuation import divergence_term

TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Atomic measure on ``{0, ..., n-1}``; ``cells`` optionally gives interval geometry."""

    weights: np.ndarray
    cells: np.ndarray | None = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if not np.all(np.isfinite(w)) or (w < 0).any():
            raise ValidationError("measure weights must be finite and nonnegative")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        if self.cells is not None:
            c = np.array(self.cells, dtype=float).reshape(-1, 2)
            if len(c) != len(w):
                raise ValidationError("one cell per atom required")
            c.flags.writeable = False
            object.__setattr__(self, "cells", c)

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def total(self) -> float:
        return math.fsum(self.weights)

    def __call__(self, A) -> float:
        return math.fsum(self.weights[np.asarray(list(A), dtype=int)])

    def to_json(self) -> dict:
        out = {"n": self.n, "weights": self.weights.tolist()}
        if self.cells is not None:
            out["cells"] = self.cells.tolist()
        return out


class Partition:
    """Disjoint blocks of atom indices covering ``{0, ..., n-1}``."""

    __slots__ = ("blocks", "labels")

    def __init__(self, blocks: Sequence[Sequence[int]], n: int | None = None):
        blocks = tuple(tuple(sorted(int(i) for i in b)) for b in blocks)
        if any(len(b) == 0 for b in blocks):
            raise InvalidPartition("empty block")
        flat = [i for b in blocks for i in b]
        n = len(flat) if n is None else n
        if sorted(flat) != list(range(n)):
            raise InvalidPartition("blocks must be disjoint and cover the ground set")
        labels = np.empty(n, dtype=np.int64)
        for k, b in enumerate(blocks):
            labels[list(b)] = k
        labels.flags.writeable = False
        self.blocks = blocks
        self.labels = labels

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        labels = np.asarray(labels)
        keys = list(dict.fromkeys(labels.tolist()))
        return cls([np.flatnonzero(labels == k).tolist() for k in keys], len(labels))

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls([[i] for i in range(n)], n)

    @property
    def n(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.blocks)

    def refines(self, coarser: "Partition") -> bool:
        if coarser.n != self.n:
            return False
        return all(len(set(coarser.labels[list(b)].tolist())) == 1 for b in self.blocks)

    def split_by(self, A) -> "Partition":
        """Coarsest common refinement with ``{A, complement of A}``."""
        inside = np.zeros(self.n, dtype=bool)
        inside[np.asarray(list(A), dtype=int)] = True
        return Partition.from_labels(2 * self.labels + inside)

    def separates(self, A) -> bool:
        inside = np.zeros(self.n, dtype=bool)
        inside[np.asarray(list(A), dtype=int)] = True
        return all(len(set(inside[list(b)].tolist())) == 1 for b in self.blocks)

    def to_json(self) -> list:
        return [list(b) for b in self.blocks]


@dataclass(frozen=True)
class RefinementSequence:
    levels: tuple[Partition, ...]

    def __post_init__(self):
        levels = tuple(self.levels)
        if not levels:
            raise ValidationError("refinement sequence needs at least one level")
        for i, (a, b) in enumerate(zip(levels, levels[1:]), start=1):
            if not b.refines(a):
                raise NotARefinement(f"level {i + 1} does not refine level {i}")
        object.__setattr__(self, "levels", levels)

    def __len__(self) -> int:
        return len(self.levels)

    def __getitem__(self, k: int) -> Partition:
        return self.levels[k]

    @property
    def n(self) -> int:
        return self.levels[0].n

    def to_json(self) -> dict:
        return {"levels": [p.to_json() for p in self.levels]}


def dyadic_partition(depth: int, level: int) -> Partition:
    """``2**level`` blocks of consecutive atoms on a ground set of ``2**depth`` atoms."""
    return Partition.from_labels(np.arange(1 << depth) >> (depth - level))


def dyadic_refinement(depth: int, first: int = 1) -> RefinementSequence:
    return RefinementSequence(tuple(dyadic_partition(depth, j) for j in range(first, depth + 1)))


def dyadic_cells(depth: int) -> np.ndarray:
    edges = np.arange((1 << depth) + 1) / (1 << depth)
    return np.stack([edges[:-1], edges[1:]], axis=1)


def _same_ground(*measures: DiscreteMeasure) -> int:
    ns = {m.n for m in measures}
    if len(ns) != 1:
        raise GroundSetMismatch(f"ground set sizes differ: {sorted(ns)}")
    return ns.pop()


def divergence_terms(mu: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """Elementwise ``mu ln(mu/nu) - mu + nu`` with the zero conventions."""
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    out = np.array(nu, dtype=float, copy=True)
    pos = mu > 0
    both = pos & (nu > 0)
    out[pos & (nu == 0)] = np.inf
    out[both] = mu[both] * np.log(mu[both] / nu[both]) - mu[both] + nu[both]
    return out


def _fsum(a: np.ndarray) -> float:
    if np.isinf(a).any():
        return math.inf
    return math.fsum(a.tolist())


def kl_divergence(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    _same_ground(mu, nu)
    return _fsum(divergence_terms(mu.weights, nu.weights))


def scalar_divergence(k: float, ell: float) -> float:
    """``D(k || l) = k ln(k/l) - k + l`` for nonnegative scalars."""
    if k < 0 or ell < 0:
        raise ValidationError("scalar divergence needs nonnegative arguments")
    return divergence_term(float(k), float(ell))


def gamma(x: float) -> float:
    """``x - 1 - ln x``; ``+inf`` at 0."""
    if x <= 0:
        return math.inf
    return x - 1.0 - math.log(x)


def restrict(mu: DiscreteMeasure, P: Partition) -> DiscreteMeasure:
    """Block masses of ``mu`` on ``P``."""
    if P.n != mu.n:
        raise InvalidPartition(f"partition is on {P.n} atoms, measure on {mu.n}")
    return DiscreteMeasure(np.bincount(P.labels, weights=mu.weights, minlength=len(P)))


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    density: np.ndarray          # per atom, constant on blocks
    block_density: np.ndarray    # per block
    projected: DiscreteMeasure   # density * nu
    restricted_divergence: float


def projection_density(mu: DiscreteMeasure, nu: DiscreteMeasure, P: Partition) -> ProjectionResult:
    _same_ground(mu, nu)
    mb, nb = restrict(mu, P).weights, restrict(nu, P).weights
    if ((nb == 0) & (mb > 0)).any():
        k = int(np.flatnonzero((nb == 0) & (mb > 0))[0])
        raise DominationFailure(f"block {list(P.blocks[k])} has nu-mass 0 but mu-mass {mb[k]!r}")
    fb = np.ones(len(P))
    pos = nb > 0
    fb[pos] = mb[pos] / nb[pos]
    dens = fb[P.labels]
    projected = DiscreteMeasure(dens * nu.weights)
    d_restricted = _fsum(divergence_terms(mb, nb))
    d_projected = kl_divergence(projected, nu)
    if not math.isclose(d_restricted, d_projected, rel_tol=1e-9, abs_tol=1e-12):
        raise AssertionError(f"projection divergence {d_projected!r} != restricted {d_restricted!r}")
    return ProjectionResult(dens, fb, projected, d_restricted)


def pythagorean_gap(theta: DiscreteMeasure, mu: DiscreteMeasure, nu: DiscreteMeasure, P: Partition) -> float:
    """``D(theta||nu) - D(theta||mu_P) - D(mu_P||nu)`` for ``theta`` agreeing with ``mu`` on ``P``."""
    _same_ground(theta, mu, nu)
    tb, mb = restrict(theta, P).weights, restrict(mu, P).weights
    if not np.allclose(tb, mb, rtol=1e-9, atol=1e-12):
        raise ConstraintViolation("theta does not match mu on every block")
    proj = projection_density(mu, nu, P).projected
    return kl_divergence(theta, nu) - kl_divergence(theta, proj) - kl_divergence(proj, nu)


def measure_join_meet(measures: Sequence[DiscreteMeasure]) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """Least upper and greatest lower bound of atomic measures (per-atom max and min)."""
    if not measures:
        raise ValidationError("need at least one measure")
    _same_ground(*measures)
    W = np.stack([m.weights for m in measures])
    return DiscreteMeasure(W.max(axis=0)), DiscreteMeasure(W.min(axis=0))


@dataclass(frozen=True)
class InequalityCheck:
    """``lhs <= rhs`` at level pair ``(m, n)`` (levels numbered from 1)."""

    name: str
    m: int
    n: int
    lhs: float
    rhs: float
    tol: float = TOL

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs

    @property
    def passed(self) -> bool:
        if math.isinf(self.rhs) and self.rhs > 0:
            return True
        return self.residual <= self.tol * (1.0 + abs(self.rhs))


@dataclass
class ConvergenceReport:
    """Per-level diagnostics of a refinement run.

    Level numbers start at 1. ``l1[m-1, n-1]`` is ``||f_m - f_n||`` in
    ``L1(nu)``; envelope integrals are taken from each level to the last.
    """

    reference_divergence: float
    total_mass: float
    restricted: list[float]
    gaps: list[float]
    l1: np.ndarray
    ymax_integral: list[float]
    ymin_integral: list[float]
    checks: list[InequalityCheck]
    setwise: dict = field(default_factory=dict)
    setwise_target: dict = field(default_factory=dict)
    augmented_l1: dict = field(default_factory=dict)
    blended: list[float] = field(default_factory=list)

    @property
    def levels(self) -> int:
        return len(self.restricted)

    @property
    def gaps_nonincreasing(self) -> bool:
        return all(b <= a + TOL * (1 + abs(a)) for a, b in zip(self.gaps, self.gaps[1:]))

    @property
    def violations(self) -> list[InequalityCheck]:
        return [c for c in self.checks if not c.passed]

    @property
    def ok(self) -> bool:
        return self.gaps_nonincreasing and not self.violations

    def level_residual(self, level: int) -> float:
        """Worst residual over checks that start at ``level``."""
        res = [c.residual for c in self.checks if c.m == level]
        return max(res) if res else 0.0

    def rows(self) -> list[dict]:
        final = self.levels - 1
        return [
            {
                "level": k + 1,
                "D_restricted": self.restricted[k],
                "gap": self.gaps[k],
                "l1_to_final": float(self.l1[k, final]),
                "ymax_integral": self.ymax_integral[k],
                "ymin_integral": self.ymin_integral[k],
                "residual": self.level_residual(k + 1),
            }
            for k in range(self.levels)
        ]


def exhausting_sets(n: int) -> list[np.ndarray]:
    """Growing prefixes ``{0..2**i - 1}`` used for the blended seminorm."""
    sizes = []
    s = 1
    while s < n:
        sizes.append(s)
        s *= 2
    sizes.append(n)
    return [np.arange(k) for k in sizes]


def blended_distance(f: np.ndarray, g: np.ndarray, nu: DiscreteMeasure) -> float:
    """``sum_i 2**-i d_i / (1 + d_i)`` with ``d_i`` the L1(nu) distance on the i-th exhausting set."""
    diff = np.abs(f - g) * nu.weights
    total = 0.0
    for i, E in enumerate(exhausting_sets(nu.n), start=1):
        d = math.fsum(diff[E].tolist())
        total += 2.0 ** -i * d / (1.0 + d)
    return total


def rn_approximate(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    R: RefinementSequence,
    test_sets: Sequence[Sequence[int]] = (),
    reference_divergence: float | None = None,
    tol: float = TOL,
) -> tuple[np.ndarray, ConvergenceReport]:
    """Project ``mu`` onto every level of ``R`` and collect convergence diagnostics.

    ``reference_divergence`` is the full ``D(mu||nu)`` the gaps are measured
    against; by default it is the divergence at ground-set resolution. Pass the
    closed-form value when the ground set discretises a continuum.

    Checks recorded for every pair of levels ``m < n``:

    * ``||mu_n - mu_m||_1**2 <= 2 |mu| D(mu_n||mu_m)``
    * ``D(k || int Y^max dnu) <= D(mu_n||mu_m)`` and the ``Y^min`` analogue
    * ``D(mu|F_m || (join of mu_m..mu_n)|F_m) <= D(mu_n||mu_m)`` and the meet analogue
    """
    _same_ground(mu, nu)
    if R.n != mu.n:
        raise InvalidPartition(f"refinement is on {R.n} atoms, measure on {mu.n}")
    d_full = kl_divergence(mu, nu)
    if math.isinf(d_full):
        raise DominationFailure("D(mu||nu) is infinite at the finest resolution")
    ref = d_full if reference_divergence is None else float(reference_divergence)

    projs = [projection_density(mu, nu, P) for P in R.levels]
    F = np.stack([p.density for p in projs])
    Mw = F * nu.weights
    L = len(projs)
    k = mu.total
    restricted = [p.restricted_divergence for p in projs]
    gaps = [ref - d for d in restricted]
    l1 = np.array([[math.fsum((np.abs(F[a] - F[b]) * nu.weights).tolist()) for b in range(L)] for a in range(L)])

    def kl(a, b):
        return _fsum(divergence_terms(Mw[a], Mw[b]))

    checks: list[InequalityCheck] = []
    for m in range(L):
        for n in range(m + 1, L):
            d_nm = kl(n, m)
            tv = math.fsum(np.abs(Mw[n] - Mw[m]).tolist())
            checks.append(InequalityCheck("pinsker", m + 1, n + 1, tv * tv, 2 * k * d_nm, tol))
            ymax, ymin = F[m:n + 1].max(axis=0), F[m:n + 1].min(axis=0)
            checks.append(InequalityCheck("envelope_max", m + 1, n + 1,
                                          scalar_divergence(k, math.fsum((ymax * nu.weights).tolist())), d_nm, tol))
            checks.append(InequalityCheck("envelope_min", m + 1, n + 1,
                                          scalar_divergence(k, math.fsum((ymin * nu.weights).tolist())), d_nm, tol))
            Pm = R.levels[m]
            target = np.bincount(Pm.labels, weights=Mw[n], minlength=len(Pm))
            for name, env in (("blockwise_join", ymax), ("blockwise_meet", ymin)):
                bound = np.bincount(Pm.labels, weights=env * nu.weights, minlength=len(Pm))
                checks.append(InequalityCheck(name, m + 1, n + 1, _fsum(divergence_terms(target, bound)), d_nm, tol))

    last = L - 1
    ymax_int = [math.fsum((F[j:].max(axis=0) * nu.weights).tolist()) for j in range(L)]
    ymin_int = [math.fsum((F[j:].min(axis=0) * nu.weights).tolist()) for j in range(L)]

    setwise, target, augmented = {}, {}, {}
    for t, A in enumerate(test_sets):
        idx = np.asarray(list(A), dtype=int)
        target[t] = mu(idx)
        setwise[t] = [math.fsum(Mw[j][idx].tolist()) for j in range(L)]
        aug = [projection_density(mu, nu, P.split_by(idx)).density for P in R.levels]
        augmented[t] = [math.fsum((np.abs(aug[j] - F[j]) * nu.weights).tolist()) for j in range(L)]

    blended = [blended_distance(F[j], F[last], nu) for j in range(L)]
    report = ConvergenceReport(ref, k, restricted, gaps, l1, ymax_int, ymin_int, checks,
                               setwise, target, augmented, blended)
    return F[last].copy(), report
