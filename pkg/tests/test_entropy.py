import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latdiv.entropy import (
    JointDistribution,
    dependency_lattice,
    entropy_table,
    functional_closure,
    shannon_check,
    subset_entropy,
)
from latdiv.errors import TooManyVariables, UnknownVariable, ValidationError
from latdiv.generators import random_joint

seeds = st.integers(0, 2**32 - 1)
LN2 = 0.6931471805599453

XOR = JointDistribution(["X", "Y", "Z"], [((x, y, x ^ y), 0.25) for x in (0, 1) for y in (0, 1)])
INDEP = JointDistribution(["X", "Y"], [((x, y), 0.25) for x in (0, 1) for y in (0, 1)])
COPY = JointDistribution(["X", "Y"], [((0, 0), 0.5), ((1, 1), 0.5)])


def subsets(xs):
    return [frozenset(c) for r in range(len(xs) + 1) for c in combinations(xs, r)]


def oracle_entropy(joint, S):
    """Marginal entropy via a dense probability array."""
    n = len(joint.variables)
    p = np.zeros((2,) * n)
    for values, q in joint.outcomes:
        p[tuple(values)] += q
    keep = [i for i, v in enumerate(joint.variables) if v in S]
    drop = tuple(i for i in range(n) if i not in keep)
    m = p.sum(axis=drop).ravel() if drop else p.ravel()
    m = m[m > 0]
    return float(-(m * np.log(m)).sum())


def oracle_closure(joint, S):
    """Union of every T with H(S ∪ T) = H(S)."""
    hs = oracle_entropy(joint, S)
    out = set(S)
    for T in subsets(joint.variables):
        if abs(oracle_entropy(joint, set(S) | T) - hs) <= 1e-9:
            out |= T
    return frozenset(out)


class TestSubsetEntropy:
    def test_empty(self):
        assert subset_entropy(XOR, []) == 0.0

    def test_fair_bit(self):
        assert subset_entropy(INDEP, ["X"]) == pytest.approx(LN2, rel=1e-15)

    def test_two_bits(self):
        assert subset_entropy(INDEP, ["X", "Y"]) == pytest.approx(2 * LN2, rel=1e-15)

    def test_unknown(self):
        with pytest.raises(UnknownVariable):
            subset_entropy(XOR, ["W"])

    def test_bad_distribution(self):
        with pytest.raises(ValidationError):
            JointDistribution(["X"], [((0,), 0.4), ((1,), 0.4)])

    @given(seeds)
    def test_matches_oracle(self, seed):
        joint = random_joint(np.random.default_rng(seed), 3)
        for S in subsets(joint.variables):
            assert subset_entropy(joint, S) == pytest.approx(oracle_entropy(joint, S), abs=1e-12)


class TestShannon:
    def test_deterministic(self):
        j = JointDistribution(["X", "Y"], [((0, 1), 1.0)])
        r = shannon_check(j)
        assert r.ok and r.worst_monotonicity_slack == 0.0 and r.worst_submodularity_slack == 0.0
        assert not entropy_table(j).any()

    def test_independent_tight_submodularity(self):
        H = entropy_table(INDEP)
        assert H[1] + H[2] - H[0] - H[3] == pytest.approx(0.0, abs=1e-15)

    def test_copy_tight_monotonicity(self):
        assert subset_entropy(COPY, ["X"]) == pytest.approx(subset_entropy(COPY, ["X", "Y"]), abs=1e-15)
        assert shannon_check(COPY).worst_monotonicity_slack == pytest.approx(0.0, abs=1e-15)

    def test_too_many(self):
        j = JointDistribution([f"V{i}" for i in range(13)], [((0,) * 13, 1.0)])
        with pytest.raises(TooManyVariables):
            shannon_check(j)

    @given(seeds, st.integers(1, 4))
    def test_random_joints_pass(self, seed, n):
        assert shannon_check(random_joint(np.random.default_rng(seed), n)).ok


class TestClosure:
    def test_all(self):
        assert functional_closure(XOR, ["X", "Y", "Z"]) == {"X", "Y", "Z"}

    def test_xor_pair(self):
        assert functional_closure(XOR, ["X", "Y"]) == {"X", "Y", "Z"}

    def test_xor_single(self):
        assert functional_closure(XOR, ["Z"]) == {"Z"}

    @given(seeds, st.integers(1, 4))
    def test_closure_operator_and_oracle(self, seed, n):
        joint = random_joint(np.random.default_rng(seed), n, sparsity=0.5)
        for S in subsets(joint.variables):
            c = functional_closure(joint, S)
            assert S <= c and functional_closure(joint, c) == c
            assert c == oracle_closure(joint, S)
            for T in subsets(joint.variables):
                if S <= T:
                    assert c <= functional_closure(joint, T)


class TestDependencyLattice:
    def test_independent_bits(self):
        d = dependency_lattice(INDEP)
        assert len(d.lattice) == 4 and len(d.lattice.covers) == 4

    def test_copy(self):
        d = dependency_lattice(COPY)
        assert d.lattice.elements == ("{}", "{X,Y}")

    def test_xor(self):
        d = dependency_lattice(XOR)
        L = d.lattice
        assert set(L.lower_covers(L.top)) == {"{X}", "{Y}", "{Z}"}
        assert L.join("{X}", "{Y}") == "{X,Y,Z}"
        assert d.entropy["{X,Y,Z}"] == pytest.approx(2 * LN2, rel=1e-15)

    @given(seeds, st.integers(1, 4))
    def test_strictly_monotone(self, seed, n):
        d = dependency_lattice(random_joint(np.random.default_rng(seed), n, sparsity=0.5))
        L, h = d.lattice, d.entropy
        assert h[L.bottom] == pytest.approx(0.0, abs=1e-12)
        for a in L.elements:
            for b in L.elements:
                if a != b and L.le(a, b):
                    assert h[a] < h[b] - 1e-12
                assert L.meet(a, b) in L.elements
                assert d.closed_sets[L.meet(a, b)] == d.closed_sets[a] & d.closed_sets[b]
