"""Seeded random instances for property checks, the acceptance suite and the CLI."""

from __future__ import annotations

from itertools import product

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .concepts import FormalContext, enumerate_concepts
from .entropy import JointDistribution
from .lattice import Lattice, downset_lattice, join_irreducibles
from .measure import DiscreteMeasure, Partition, RefinementSequence


def random_poset(rng: np.random.Generator, k: int, p: float = 0.35) -> tuple[list[str], list[tuple[str, str]]]:
    """``k`` points with relations only from lower to higher index (so acyclic)."""
    pts = [f"p{i}" for i in range(k)]
    rel = [(pts[i], pts[j]) for i in range(k) for j in range(i + 1, k) if rng.random() < p]
    return pts, rel


def random_distributive_lattice(rng: np.random.Generator, max_points: int = 6) -> Lattice:
    pts, rel = random_poset(rng, int(rng.integers(1, max_points + 1)))
    return downset_lattice(pts, rel)


def random_context(rng: np.random.Generator, n_obj: int, n_attr: int, p: float = 0.5) -> FormalContext:
    objs = [f"g{i}" for i in range(n_obj)]
    attrs = [f"m{i}" for i in range(n_attr)]
    inc = [(g, m) for g in objs for m in attrs if rng.random() < p]
    return FormalContext(objs, attrs, inc)


def random_lattice(rng: np.random.Generator, max_size: int = 12, max_irreducibles: int = 6) -> Lattice:
    """Concept lattice of a small random context; need not be distributive."""
    while True:
        ctx = random_context(rng, int(rng.integers(2, 5)), int(rng.integers(2, 5)), float(rng.uniform(0.3, 0.7)))
        L = enumerate_concepts(ctx).lattice
        if 2 <= len(L) <= max_size and len(join_irreducibles(L)) <= max_irreducibles:
            return L


def irreducible_weights_valuation(L: Lattice, w: dict[str, float]) -> dict[str, float]:
    """Valuation on a distributive lattice from nonnegative weights on irreducibles."""
    irr = [j.element for j in join_irreducibles(L)]
    return {m: float(sum(w[j] for j in irr if L.le(j, m))) for m in L.elements}


def random_distributive_valuation_pair(rng: np.random.Generator, L: Lattice, zero_p: float = 0.2):
    """``(mu, nu)`` with ``nu``'s increments dominating ``mu``'s zero pattern."""
    irr = [j.element for j in join_irreducibles(L)]
    wn = {j: float(rng.exponential()) * (rng.random() >= zero_p) for j in irr}
    wm = {j: (float(rng.exponential()) * (rng.random() >= zero_p) if wn[j] > 0 else 0.0) for j in irr}
    return irreducible_weights_valuation(L, wm), irreducible_weights_valuation(L, wn)


def _modular_constraints(L: Lattice) -> np.ndarray:
    """Rows ``e_a + e_b - e_{a∧b} - e_{a∨b}`` plus ``e_bottom``."""
    n = len(L)
    idx = L.index
    rows = []
    r = np.zeros(n)
    r[idx[L.bottom]] = 1
    rows.append(r)
    els = L.elements
    for i, a in enumerate(els):
        for b in els[i + 1:]:
            r = np.zeros(n)
            r[idx[a]] += 1
            r[idx[b]] += 1
            r[idx[L.meet(a, b)]] -= 1
            r[idx[L.join(a, b)]] -= 1
            if r.any():
                rows.append(r)
    return np.array(rows)


def valuation_rays(L: Lattice, rng: np.random.Generator, tries: int = 8) -> list[np.ndarray]:
    """Extreme rays of the valuation cone found by LPs with random objectives.

    The cone is cut out by ``v(bottom) = 0``, modularity on all pairs and
    monotonicity on covers; each LP maximises a random objective over the
    slice ``sum(v) = 1``.
    """
    n = len(L)
    idx = L.index
    A_eq = np.vstack([_modular_constraints(L), np.ones(n)])
    b_eq = np.zeros(len(A_eq))
    b_eq[-1] = 1.0
    A_ub = np.zeros((len(L.covers), n))
    for k, (lo, hi) in enumerate(L.covers):
        A_ub[k, idx[lo]] = 1
        A_ub[k, idx[hi]] = -1
    rays = []
    for _ in range(tries):
        res = linprog(-rng.exponential(size=n), A_ub=A_ub if len(A_ub) else None,
                      b_ub=np.zeros(len(A_ub)) if len(A_ub) else None, A_eq=A_eq, b_eq=b_eq,
                      bounds=[(0, None)] * n, method="highs")
        if res.status == 0:
            rays.append(res.x)
    return rays


def _onto_valuations(L: Lattice, v: np.ndarray) -> dict[str, float]:
    """Orthogonal projection onto the modular subspace, removing LP round-off."""
    basis = null_space(_modular_constraints(L))
    w = basis @ (basis.T @ v)
    w[np.abs(w) < 1e-13] = 0.0
    w[L.index[L.bottom]] = 0.0
    return {e: float(w[L.index[e]]) for e in L.elements}


def random_valuation_pair(rng: np.random.Generator, L: Lattice):
    """``(mu, nu)``: nonnegative combinations of extreme valuations of ``L``.

    ``nu`` uses every ray found, with positive weights, so its increments
    vanish only where all valuations' increments do.
    """
    rays = valuation_rays(L, rng)
    if not rays:
        zero = {e: 0.0 for e in L.elements}
        return zero, dict(zero)
    R = np.stack(rays)
    wm = rng.exponential(size=len(R)) * (rng.random(len(R)) >= 0.3)
    wn = rng.exponential(size=len(R)) + 0.05
    scale = float(rng.uniform(0.5, 5.0))
    return _onto_valuations(L, scale * wm @ R), _onto_valuations(L, scale * wn @ R)


def random_joint(rng: np.random.Generator, n_vars: int, alpha: float = 1.0, sparsity: float = 0.3) -> JointDistribution:
    """Dirichlet-sampled joint on ``n_vars`` binary variables, some outcomes zeroed."""
    outcomes = list(product((0, 1), repeat=n_vars))
    p = rng.dirichlet(np.full(len(outcomes), alpha))
    p = p * (rng.random(len(outcomes)) >= sparsity)
    if p.sum() == 0:
        p[rng.integers(len(p))] = 1.0
    p = p / p.sum()
    return JointDistribution([f"X{i}" for i in range(n_vars)], [(o, float(q)) for o, q in zip(outcomes, p) if q > 0])


def random_partition_refining(rng: np.random.Generator, P: Partition, split_p: float = 0.5) -> Partition:
    labels = np.array(P.labels)
    new = labels * 2 + (rng.random(len(labels)) < split_p)
    return Partition.from_labels(new)


def random_refinement(rng: np.random.Generator, n: int, levels: int) -> RefinementSequence:
    """Nested partitions from one block towards singletons; the last level is the finest."""
    P = Partition([list(range(n))], n)
    out = [P]
    for _ in range(levels - 1):
        P = random_partition_refining(rng, P)
        out.append(P)
    return RefinementSequence(tuple(out))


def random_measure(rng: np.random.Generator, n: int, zero_p: float = 0.15, support=None) -> DiscreteMeasure:
    w = rng.exponential(size=n) * (rng.random(n) >= zero_p)
    if support is not None:
        w = w * support
    return DiscreteMeasure(w)


def random_measure_pair(rng: np.random.Generator, n: int) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """``(mu, nu)`` with ``mu`` absolutely continuous w.r.t. ``nu``."""
    nu = random_measure(rng, n)
    if not nu.weights.any():
        nu = DiscreteMeasure(np.ones(n))
    mu = random_measure(rng, n, support=(nu.weights > 0))
    if not mu.weights.any():
        mu = DiscreteMeasure(nu.weights * rng.uniform(0.5, 2.0))
    return mu, nu


def random_matching_measure(rng: np.random.Generator, mu: DiscreteMeasure, nu: DiscreteMeasure, P: Partition) -> DiscreteMeasure:
    """Random ``theta`` with ``theta(block) = mu(block)``, supported where ``nu > 0``."""
    theta = np.zeros(mu.n)
    for b in P.blocks:
        b = np.array(b)
        mass = float(mu.weights[b].sum())
        if mass == 0:
            continue
        support = b[nu.weights[b] > 0]
        w = rng.exponential(size=len(support)) * (rng.random(len(support)) >= 0.2)
        if not w.any():
            w[rng.integers(len(w))] = 1.0
        theta[support] = mass * w / w.sum()
    return DiscreteMeasure(theta)


def linear_density_measures(depth: int) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """``rho(x) = 2x`` against Lebesgue measure on ``2**depth`` dyadic cells of ``[0, 1]``."""
    from .measure import dyadic_cells

    n = 1 << depth
    i = np.arange(n, dtype=float)
    cells = dyadic_cells(depth)
    mu = DiscreteMeasure((2 * i + 1) / float(n * n), cells)
    nu = DiscreteMeasure(np.full(n, 1.0 / n), cells)
    return mu, nu
