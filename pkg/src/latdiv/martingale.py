"""Density martingales along a refinement and their maximal inequalities.

All expectations are exact finite sums over atoms; nothing is sampled. Levels
are numbered from 1 like the refinement they come from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import NotNormalized, ValidationError
from .measure import (
    DiscreteMeasure,
    RefinementSequence,
    divergence_terms,
    gamma,
    projection_density,
)

TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MartingalePath:
    """Per-atom values ``X_1..X_n`` (rows) under base probability weights ``q``."""

    values: np.ndarray
    q: np.ndarray
    refinement: RefinementSequence

    def __post_init__(self):
        X = np.array(self.values, dtype=float)
        q = np.array(self.q, dtype=float).reshape(-1)
        if X.ndim != 2 or X.shape[1] != len(q) or X.shape[0] != len(self.refinement):
            raise ValidationError("values must have one row per level and one column per atom")
        if (X < 0).any() or (q < 0).any():
            raise ValidationError("martingale values and base weights must be nonnegative")
        if abs(math.fsum(q.tolist()) - 1.0) > 1e-12:
            raise ValidationError("base measure must be a probability")
        X.flags.writeable = False
        q.flags.writeable = False
        object.__setattr__(self, "values", X)
        object.__setattr__(self, "q", q)

    @property
    def levels(self) -> int:
        return self.values.shape[0]

    def expectation(self, x: np.ndarray) -> float:
        return math.fsum((self.q * x).tolist())

    def martingale_residual(self) -> float:
        """Largest ``|E_Q[X_{j+1} | level-j block] - X_j|`` over blocks with positive mass."""
        worst = 0.0
        for j in range(self.levels - 1):
            lab = self.refinement[j].labels
            qb = np.bincount(lab, weights=self.q)
            xb = np.bincount(lab, weights=self.q * self.values[j + 1])
            pos = qb > 0
            cond = np.zeros_like(qb)
            cond[pos] = xb[pos] / qb[pos]
            dev = np.abs(cond[lab] - self.values[j])[pos[lab]]
            if len(dev):
                worst = max(worst, float(dev.max()))
        return worst


def conditional_path(q: np.ndarray, terminal: np.ndarray, R: RefinementSequence) -> MartingalePath:
    """Martingale obtained by conditioning ``terminal`` on every level of ``R``."""
    q = np.asarray(q, dtype=float)
    rows = []
    for P in R.levels:
        qb = np.bincount(P.labels, weights=q)
        xb = np.bincount(P.labels, weights=q * terminal)
        avg = np.ones_like(qb)
        avg[qb > 0] = xb[qb > 0] / qb[qb > 0]
        rows.append(avg[P.labels])
    return MartingalePath(np.stack(rows), q, R)


def density_martingale(mu: DiscreteMeasure, nu: DiscreteMeasure, R: RefinementSequence) -> MartingalePath:
    """``X_j = dP_j/dQ`` with ``P_j = mu_j/|mu|`` and ``Q = nu/|nu|``."""
    k, ell = mu.total, nu.total
    if ell <= 0 or k <= 0:
        raise ValidationError("both measures need positive total mass")
    X = np.stack([projection_density(mu, nu, P).density for P in R.levels]) * (ell / k)
    path = MartingalePath(X, nu.weights / ell, R)
    res = path.martingale_residual()
    if res > 1e-12 * (1.0 + float(X.max())):
        raise AssertionError(f"projection densities are not a martingale (residual {res!r})")
    return path


def random_martingale(rng: np.random.Generator, R: RefinementSequence, zero_fraction: float = 0.2) -> MartingalePath:
    """Random base probability, random terminal density with ``E_Q[X_n] = 1``, conditioned down."""
    n = R.n
    q = rng.dirichlet(np.ones(n))
    x = rng.exponential(size=n) * (rng.random(n) >= zero_fraction)
    if not x.any():
        x[rng.integers(n)] = 1.0
    x = x / float(q @ x)
    return conditional_path(q, x, R)


@dataclass(frozen=True)
class DoobRow:
    """One inequality at one ``lam``. ``residual <= 0`` means it holds."""

    check: str
    lam: float
    lhs: float
    rhs: float
    direction: str  # "<=" or ">="
    tol: float = TOL

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs if self.direction == "<=" else self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol * (1.0 + abs(self.rhs))


def doob_check(path: MartingalePath, lambdas: Iterable[float], tol: float = TOL) -> list[DoobRow]:
    """Maximal and minimal inequalities at every ``lam``.

    ``maximal``: ``lam Q(X^max >= lam) <= E[X_n; X^max >= lam]``.
    ``minimal``: ``lam Q(X^min >= lam) >= E[X_n; X^min >= lam]``, in exactly
    this form. On ``{X^min >= lam}`` every ``X_j``, ``X_n`` included, is at
    least ``lam``, so the right side dominates and this row usually fails.
    ``minimal_lower``: ``lam Q(X^min <= lam) >= E[X_n; X^min <= lam]``, the
    inequality that holds for nonnegative martingales.
    """
    X = path.values
    xn = X[-1]
    xmax, xmin = X.max(axis=0), X.min(axis=0)
    rows = []
    for lam in lambdas:
        lam = float(lam)
        for check, event, direction in (
            ("maximal", xmax >= lam, "<="),
            ("minimal", xmin >= lam, ">="),
            ("minimal_lower", xmin <= lam, ">="),
        ):
            lhs = lam * path.expectation(event.astype(float))
            rhs = path.expectation(xn * event)
            rows.append(DoobRow(check, lam, lhs, rhs, direction, tol))
    return rows


def gamma_bound_sides(path: MartingalePath, m: int, n: int, tol: float = TOL) -> tuple[float, float, float]:
    """``(gamma(E[X^max_{m,n}]), gamma(E[X^min_{m,n}]), D(P_n||P_m))``; levels are 1-based."""
    if not 1 <= m <= n <= path.levels:
        raise ValidationError(f"need 1 <= m <= n <= {path.levels}, got m={m}, n={n}")
    X = path.values
    if abs(path.expectation(X[n - 1]) - 1.0) > tol:
        raise NotNormalized(f"E_Q[X_{n}] = {path.expectation(X[n - 1])!r}, not 1")
    seg = X[m - 1:n]
    d = divergence_terms(path.q * X[n - 1], path.q * X[m - 1])
    D = math.inf if np.isinf(d).any() else math.fsum(d.tolist())
    return gamma(path.expectation(seg.max(axis=0))), gamma(path.expectation(seg.min(axis=0))), D


def gamma_bound_check(path: MartingalePath, m: int, n: int, tol: float = TOL) -> tuple[float, float]:
    """Residuals ``gamma(E[X^max_{m,n}]) - D(P_n||P_m)`` and the ``X^min`` analogue.

    Both must be ``<= 0`` (up to ``tol``).
    """
    g_max, g_min, D = gamma_bound_sides(path, m, n, tol)
    return g_max - D, g_min - D


def gamma_rows(path: MartingalePath, tol: float = TOL) -> list[tuple[int, int, float, float, float]]:
    """``(m, n, gamma_max, gamma_min, D)`` for every level pair ``m <= n``."""
    return [(m, n, *gamma_bound_sides(path, m, n, tol))
            for m in range(1, path.levels + 1) for n in range(m, path.levels + 1)]


def doob_lambda_grid() -> Sequence[float]:
    return (0.5, 1.0, 2.0, 4.0)
