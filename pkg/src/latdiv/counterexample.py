"""Densities with infinite divergence whose running-average maximum is not integrable.

Everything is on ``(0, 1]`` against Lebesgue measure. For a density ``rho``
with cumulative mass ``M(x)``, coarsening ``[0, t]`` into one cell gives

    rho_t(x) = M(t)/t on (0, t),   rho(x) on [t, 1],

and the pointwise supremum over ``t`` is ``rho_max(x) = M(x)/x`` exactly when
the running average ``M(x)/x`` is nonincreasing, i.e. ``rho(x) <= M(x)/x``.
Every decreasing density qualifies; so does :data:`CANONICAL`, which is not
decreasing on ``(1/e, 1]``. Densities meeting this condition are called
admissible below. Fubini turns
``int_0^1 rho_max`` into ``int_0^1 rho(s) ln(1/s) ds``, which is infinite
exactly when the divergence from Lebesgue measure is.

:data:`CANONICAL` is ``rho(x) = 1/(x (1 - ln x)**2)`` with ``M(x) = 1/(1 - ln x)``:
mass 1, infinite divergence, and ``int_delta^1 rho_max = ln(1 - ln delta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, interpolate, optimize

from .errors import NotDecreasing, OutOfDomain, QuadratureFailure, ValidationError

QUAD_RTOL = 1e-8


@dataclass(frozen=True)
class DensitySpec:
    """Density on ``(0, 1]`` with its cumulative mass.

    ``rho_max_integral(delta)`` and ``log_moment(delta)``, when given, are closed
    forms for ``int_delta^1 M(x)/x dx`` and ``int_delta^1 rho(s) ln(1/s) ds``.
    """

    name: str
    rho: Callable[[float], float]
    cumulative: Callable[[float], float]
    rho_max_integral: Callable[[float], float] | None = None
    log_moment: Callable[[float], float] | None = None
    knots: tuple[float, ...] = ()  # kinks of rho; quadrature splits there

    @property
    def mass(self) -> float:
        return self.cumulative(1.0)


def _canonical_rho(x):
    return 1.0 / (x * (1.0 - np.log(x)) ** 2)


CANONICAL = DensitySpec(
    "canonical",
    _canonical_rho,
    lambda x: 1.0 / (1.0 - math.log(x)) if x > 0 else 0.0,
    rho_max_integral=lambda d: math.log1p(-math.log(d)),
    # u = ln(1/s): int_0^U u/(1+u)^2 du
    log_moment=lambda d: math.log1p(-math.log(d)) + 1.0 / (1.0 - math.log(d)) - 1.0,
)

UNIFORM = DensitySpec(
    "uniform",
    lambda x: 1.0 + 0.0 * np.asarray(x, dtype=float),
    lambda x: float(x),
    rho_max_integral=lambda d: 1.0 - d,
    log_moment=lambda d: 1.0 - d + d * math.log(d),
)

LINEAR = DensitySpec(
    "linear",
    lambda x: 2.0 * np.asarray(x, dtype=float),
    lambda x: float(x) ** 2,
    rho_max_integral=lambda d: 0.5 * (1.0 - d * d),
    log_moment=lambda d: 0.5 - d * d * (0.5 - math.log(d)),
)

BUILTIN = {s.name: s for s in (CANONICAL, UNIFORM, LINEAR)}


def tabulated_density(name: str, x: Sequence[float], M: Sequence[float]) -> DensitySpec:
    """Density from tabulated cumulative mass via a monotone cubic interpolant.

    ``M`` is taken as 0 at 0; tabulation should reach ``x = 1``.
    """
    x = np.asarray(x, dtype=float)
    M = np.asarray(M, dtype=float)
    if x.ndim != 1 or len(x) != len(M) or len(x) < 2:
        raise ValidationError("need matching x and M arrays with at least two points")
    if x[0] > 0:
        x, M = np.concatenate([[0.0], x]), np.concatenate([[0.0], M])
    if (np.diff(x) <= 0).any() or (np.diff(M) < 0).any():
        raise ValidationError("x must be increasing and M nondecreasing")
    cum = interpolate.PchipInterpolator(x, M, extrapolate=False)
    dens = cum.derivative()
    return DensitySpec(name, lambda t: dens(t), lambda t: float(cum(t)), knots=tuple(float(k) for k in x[1:-1]))


def check_decreasing(spec: DensitySpec, grid: Sequence[float] | None = None) -> bool:
    g = np.geomspace(1e-9, 1.0, 400) if grid is None else np.sort(np.asarray(grid, dtype=float))
    r = np.asarray([spec.rho(t) for t in g], dtype=float)
    return bool((np.diff(r) <= 1e-12 * np.maximum(1.0, np.abs(r[:-1]))).all())


def check_admissible(spec: DensitySpec, grid: Sequence[float] | None = None) -> bool:
    """Whether the running average ``M(x)/x`` is nonincreasing on the grid."""
    g = np.geomspace(1e-9, 1.0, 400) if grid is None else np.sort(np.asarray(grid, dtype=float))
    avg = np.array([spec.cumulative(float(t)) / float(t) for t in g])
    return bool((np.diff(avg) <= 1e-12 * np.maximum(1.0, np.abs(avg[:-1]))).all())


def _require_admissible(spec: DensitySpec, grid=None) -> None:
    if not check_admissible(spec, grid):
        raise NotDecreasing(f"running average of density {spec.name!r} increases somewhere on (0, 1]")


@dataclass(frozen=True)
class TailCheck:
    epsilon: float
    violations: tuple[float, ...]


def tail_lemma_check(spec: DensitySpec, grid: Sequence[float], require_admissible: bool = True) -> TailCheck:
    """Largest grid threshold below which ``rho(x) <= 1/x`` everywhere on the grid.

    ``violations`` lists grid points where ``rho(x) > 1/x``.
    """
    g = np.sort(np.asarray(grid, dtype=float))
    if (g <= 0).any() or (g > 1).any():
        raise OutOfDomain("grid must lie in (0, 1]")
    if require_admissible:
        _require_admissible(spec, g)
    bad = np.array([float(spec.rho(t)) * t > 1.0 for t in g])
    eps = float(g[np.argmax(bad)]) if bad.any() else float(g[-1])
    if bad.any():
        below = g[g < eps]
        eps = float(below[-1]) if len(below) else 0.0
    return TailCheck(eps, tuple(float(t) for t in g[bad]))


def rho_max(spec: DensitySpec, x: float) -> float:
    """Running average ``M(x)/x``."""
    if not 0 < x <= 1:
        raise OutOfDomain(f"x = {x!r} outside (0, 1]")
    return spec.cumulative(x) / x


def rho_t(spec: DensitySpec, t: float, x):
    """Density of the measure restricted to the algebra that merges ``(0, t)``."""
    x = np.asarray(x, dtype=float)
    return np.where(x < t, spec.cumulative(t) / t, spec.rho(np.maximum(x, t)))


def _log_quad(f: Callable[[float], float], delta: float, knots: Sequence[float] = ()) -> float:
    """``int_delta^1 f(x) dx`` after substituting ``u = ln(1/x)``, split at ``knots``."""
    U = math.log(1.0 / delta)
    cuts = sorted({0.0, U, *(math.log(1.0 / k) for k in knots if delta < k < 1.0)})
    val = err = 0.0
    for a, b in zip(cuts, cuts[1:]):
        v, e = integrate.quad(lambda u: f(math.exp(-u)) * math.exp(-u), a, b,
                              epsabs=0.0, epsrel=QUAD_RTOL, limit=500)
        val, err = val + v, err + e
    if err > 10 * QUAD_RTOL * max(abs(val), 1e-300):
        raise QuadratureFailure(f"quadrature error {err!r} exceeds tolerance for value {val!r}")
    return val


def rho_max_integral(spec: DensitySpec, delta: float, closed_form: bool = True) -> float:
    """``int_delta^1 rho_max(x) dx``."""
    if not 0 < delta < 1:
        raise OutOfDomain(f"delta = {delta!r} outside (0, 1)")
    if closed_form and spec.rho_max_integral is not None:
        return spec.rho_max_integral(delta)
    return _log_quad(lambda x: spec.cumulative(x) / x, delta, spec.knots)


@dataclass(frozen=True)
class FubiniCheck:
    lhs: float
    rhs: float
    relative_gap: float


def fubini_identity_check(spec: DensitySpec, delta: float, closed_form: bool = True) -> FubiniCheck:
    """Compare both sides of the truncated Fubini identity.

    ``lhs = int_delta^1 rho_max``;
    ``rhs = M(delta) ln(1/delta) + int_delta^1 rho(s) ln(1/s) ds``
    (the first term is the mass below ``delta``, which sees every ``x`` in
    ``[delta, 1]``). Closed forms are used where the density supplies them, quadrature
    otherwise; pass ``closed_form=False`` to force quadrature on both sides.
    """
    if not 0 < delta < 1:
        raise OutOfDomain(f"delta = {delta!r} outside (0, 1)")
    lhs = rho_max_integral(spec, delta, closed_form)
    if closed_form and spec.log_moment is not None:
        moment = spec.log_moment(delta)
    else:
        moment = _log_quad(lambda s: float(spec.rho(s)) * math.log(1.0 / s), delta, spec.knots)
    rhs = spec.cumulative(delta) * math.log(1.0 / delta) + moment
    return FubiniCheck(lhs, rhs, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))


def _monotone_breaks(spec: DensitySpec, lo: float) -> np.ndarray:
    """Approximate turning points of ``rho`` on ``[lo, 1]``."""
    g = np.geomspace(lo, 1.0, 4000)
    d = np.sign(np.diff(np.asarray(spec.rho(g), dtype=float)))
    return g[1:-1][d[1:] * d[:-1] < 0]


def _piece(spec: DensitySpec, a: float, b: float, c: float, breaks: np.ndarray = np.empty(0)) -> float:
    """``int_a^b max(rho(x), c) dx`` for ``rho`` monotone between ``breaks``."""
    M = spec.cumulative
    cuts = [a, *breaks[(breaks > a) & (breaks < b)].tolist(), b]
    total = 0.0
    for s, e in zip(cuts[:-1], cuts[1:]):
        hs, he = float(spec.rho(s)) - c, float(spec.rho(e)) - c
        if hs <= 0 and he <= 0:
            total += c * (e - s)
        elif hs >= 0 and he >= 0:
            total += M(e) - M(s)
        else:
            r = optimize.brentq(lambda x: float(spec.rho(x)) - c, s, e, xtol=1e-15, rtol=1e-15)
            total += (M(r) - M(s) + c * (e - r)) if hs > 0 else (c * (r - s) + M(e) - M(r))
    return total


@dataclass(frozen=True)
class BlowupRow:
    delta: float
    N: int
    integral_sup: float
    integral_full: float
    closed_form_value: float | None

    @property
    def rel_gap(self) -> float | None:
        if self.closed_form_value is None:
            return None
        return abs(self.integral_sup - self.closed_form_value) / abs(self.closed_form_value)


def t_sequence(deltas: Sequence[float], N: int) -> np.ndarray:
    """``N`` geometric points from 1 down to ``min(deltas)``, with every delta inserted."""
    lo = min(deltas)
    ts = np.geomspace(1.0, lo, N) if N > 1 else np.array([1.0])
    return np.array(sorted(set(ts.tolist()) | {float(d) for d in deltas}, reverse=True))


def blowup_demo(spec: DensitySpec, deltas: Sequence[float], N: int = 40000) -> list[BlowupRow]:
    """Integral of ``max_{n <= N(delta)} rho_{t_n}`` as the cutoff ``delta`` shrinks.

    The coarsenings ``t_1 > t_2 > ...`` form one fixed decreasing sequence,
    geometric from 1 down to the smallest cutoff with every cutoff included.
    The row for ``delta`` uses the prefix ``t_n >= delta``. On
    ``[t_k, t_{k-1})`` the maximum is ``max(rho(x), max_{j<k} M(t_j)/t_j)`` and on
    ``(0, t_K)`` it is the merged-cell value ``M(t_K)/t_K``, so each piece
    integrates exactly through ``M``.

    ``integral_sup`` covers ``[delta, 1]`` and tends to ``int_delta^1 rho_max``
    as the sequence gets denser; ``integral_full`` adds the mass ``M(delta)`` on
    ``(0, delta)``. Both are nondecreasing along the rows because each row
    maximises over a superset of the previous row's functions.
    """
    deltas = sorted((float(d) for d in deltas), reverse=True)
    if not deltas or deltas[-1] <= 0 or deltas[0] > 1:
        raise OutOfDomain("cutoffs must lie in (0, 1]")
    _require_admissible(spec, np.geomspace(deltas[-1], 1.0, 400))
    M = spec.cumulative
    if N <= 1:
        # a single coarsening at t = 1: one merged cell carrying the whole mass
        return [BlowupRow(d, 1, M(1.0) * (1.0 - d), M(1.0),
                          spec.rho_max_integral(d) if spec.rho_max_integral and d < 1 else None)
                for d in deltas]
    ts = t_sequence(deltas, N)
    breaks = _monotone_breaks(spec, float(ts[-1]))
    level = np.maximum.accumulate([M(float(t)) / float(t) for t in ts[:-1]])
    pieces = np.array([_piece(spec, float(a), float(b), float(c), breaks)
                       for b, a, c in zip(ts[:-1], ts[1:], level)])
    upto = np.concatenate([[0.0], np.cumsum(pieces)])
    where = {float(t): k for k, t in enumerate(ts)}
    rows = []
    for d in deltas:
        k = where[d]
        sup = float(upto[k])
        closed = spec.rho_max_integral(d) if spec.rho_max_integral is not None and d < 1 else None
        rows.append(BlowupRow(d, k + 1, sup, sup + M(d), closed))
    return rows


def log_cutoffs(first_exp: int = 2, last_exp: int = 8) -> list[float]:
    """``10**-first_exp, ..., 10**-last_exp``."""
    return [10.0 ** -k for k in range(first_exp, last_exp + 1)]
