import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latdiv.errors import InvalidValuation, MissingValue, NotDistributive, NotMaximalChain, NotSuperModular, TooLarge
from latdiv.generators import (
    random_distributive_lattice,
    random_distributive_valuation_pair,
    random_lattice,
    random_valuation_pair,
)
from latdiv.lattice import (
    birkhoff_decompose,
    boolean_lattice,
    build_lattice,
    chain_lattice,
    is_modular_lattice,
    maximal_chains,
    pentagon_n5,
)
from latdiv.valuation import (
    Valuation,
    Violation,
    chain_divergence,
    check_valuation,
    co_closed_lattice,
    cocl,
    divergence_term,
    divergence_via_sublattice_sup,
    lattice_divergence,
    validate_valuation,
)

seeds = st.integers(0, 2**32 - 1)
F2 = 0.3862943611198906  # 2 ln 2 - 1, mpmath at 30 digits

B2 = build_lattice(["bot", "p", "q", "top"], [("bot", "p"), ("bot", "q"), ("p", "top"), ("q", "top")])


def atom_weights(L, values):
    """Recover irreducible masses by least squares on the downset embedding."""
    b = birkhoff_decompose(L)
    irr = list(b.irreducibles)
    A = np.array([[1.0 if j in b.downsets[m] else 0.0 for j in irr] for m in L.elements])
    y = np.array([values[m] for m in L.elements])
    w, *_ = np.linalg.lstsq(A, y, rcond=None)
    return np.clip(w, 0.0, None)


def powerset_kl(wm, wn):
    """Unnormalised KL over atoms, straight from the formula."""
    total = 0.0
    for a, b in zip(wm, wn):
        if a <= 1e-14:
            total += b
        elif b <= 1e-14:
            return math.inf
        else:
            total += a * math.log(a / b) - a + b
    return total


class TestValidate:
    def test_all_zero(self):
        v = validate_valuation(B2, dict.fromkeys(B2.elements, 0.0))
        assert isinstance(v, Valuation)

    def test_strictness(self):
        bad = validate_valuation(B2, {"bot": 1.0, "p": 1.0, "q": 1.0, "top": 1.0})
        assert isinstance(bad, Violation) and bad.law == "strictness" and bad.elements == ("bot",)

    def test_modularity_witness(self):
        bad = check_valuation(B2, {"bot": 0.0, "p": 1.0, "q": 1.0, "top": 3.0})
        assert bad.law == "modularity" and set(bad.elements) == {"p", "q"}

    def test_monotonicity(self):
        L = chain_lattice(2)
        assert check_valuation(L, {"c0": 0.0, "c1": 2.0, "c2": 1.0}).law == "monotonicity"

    def test_missing(self):
        with pytest.raises(MissingValue):
            validate_valuation(B2, {"bot": 0.0})

    def test_counting_on_distributive_extents(self):
        from latdiv.concepts import FormalContext, counting_valuation, enumerate_concepts

        cl = enumerate_concepts(FormalContext("12", "ab", [("1", "a"), ("2", "b")]))
        mu, modular = counting_valuation(cl)
        assert modular and isinstance(validate_valuation(cl.lattice, mu.values), Valuation)


class TestCoclosure:
    def test_strictly_monotone(self):
        mu = {"bot": 0.0, "p": 1.0, "q": 2.0, "top": 3.0}
        assert all(cocl(B2, mu, x) == x for x in B2.elements)
        assert co_closed_lattice(B2, mu).elements == B2.elements

    def test_flat_step(self):
        L = build_lattice(["bot", "a", "b"], [("bot", "a"), ("a", "b")])
        mu = {"bot": 0.0, "a": 1.0, "b": 1.0}
        assert cocl(L, mu, "b") == "a"
        assert cocl(L, mu, "bot") == "bot"
        assert co_closed_lattice(L, mu).elements == ("bot", "a")

    def test_b2_collapsed_atom(self):
        # mu(p) = mu(top) forces mu(q) = 0: q and top collapse onto bot and p
        mu = {"bot": 0.0, "p": 1.0, "q": 0.0, "top": 1.0}
        assert cocl(B2, mu, "top") == "p"
        assert cocl(B2, mu, "q") == "bot"
        K = co_closed_lattice(B2, mu)
        assert K.elements == ("bot", "p") and is_modular_lattice(K)

    def test_not_supermodular(self):
        with pytest.raises(NotSuperModular):
            cocl(B2, {"bot": 0.0, "p": 1.0, "q": 1.0, "top": 1.5}, "top")

    @given(seeds)
    def test_co_closed_is_modular(self, seed):
        rng = np.random.default_rng(seed)
        L = random_lattice(rng)
        mu, _ = random_valuation_pair(rng, L)
        assert is_modular_lattice(co_closed_lattice(L, mu))


class TestLatticeDivergence:
    def test_equal(self):
        mu = {"bot": 0.0, "p": 1.0, "q": 2.0, "top": 3.0}
        assert lattice_divergence(B2, mu, mu).value == 0.0

    def test_one_irreducible(self):
        L = chain_lattice(1)
        r = lattice_divergence(L, {"c0": 0.0, "c1": 2.0}, {"c0": 0.0, "c1": 1.0})
        assert r.value == pytest.approx(F2, rel=1e-15) and r.domination_ok

    def test_domination_failure(self):
        L = chain_lattice(1)
        r = lattice_divergence(L, {"c0": 0.0, "c1": 1.0}, {"c0": 0.0, "c1": 0.0})
        assert r.value == math.inf and not r.domination_ok

    def test_conventions(self):
        assert divergence_term(0.0, 0.0) == 0.0
        assert divergence_term(0.0, 2.5) == 2.5
        assert divergence_term(math.inf, math.inf) == 0.0
        assert divergence_term(math.inf, 1.0) == math.inf
        assert divergence_term(1.0, math.inf) == math.inf

    def test_infinite_values_matching(self):
        L = chain_lattice(2)
        mu = {"c0": 0.0, "c1": 1.0, "c2": math.inf}
        nu = {"c0": 0.0, "c1": 2.0, "c2": math.inf}
        assert lattice_divergence(L, mu, nu).value == pytest.approx(1.0 - math.log(2.0), rel=1e-15)

    def test_requires_distributive(self):
        L = pentagon_n5()
        z = dict.fromkeys(L.elements, 0.0)
        with pytest.raises(NotDistributive):
            lattice_divergence(L, z, z)

    def test_rejects_invalid(self):
        with pytest.raises(InvalidValuation):
            lattice_divergence(B2, {"bot": 0.0, "p": 1.0, "q": 1.0, "top": 5.0}, dict.fromkeys(B2.elements, 0.0))

    @given(seeds)
    def test_gibbs(self, seed):
        rng = np.random.default_rng(seed)
        L = random_distributive_lattice(rng)
        mu, nu = random_distributive_valuation_pair(rng, L)
        D = lattice_divergence(L, mu, nu).value
        assert D >= 0
        assert lattice_divergence(L, mu, mu).value == 0.0
        if all(mu[e] == nu[e] for e in L.elements):
            assert D == 0.0

    @given(seeds, st.sampled_from([0.0, 0.5, 1.0, 3.0]))
    def test_homogeneity(self, seed, t):
        rng = np.random.default_rng(seed)
        L = random_distributive_lattice(rng)
        mu, nu = random_distributive_valuation_pair(rng, L, zero_p=0.0)
        D = lattice_divergence(L, mu, nu).value
        Dt = lattice_divergence(L, {k: t * v for k, v in mu.items()}, {k: t * v for k, v in nu.items()}).value
        assert abs(Dt - t * D) <= 1e-12 * max(1.0, abs(t * D))

    @given(seeds)
    def test_matches_powerset_embedding(self, seed):
        rng = np.random.default_rng(seed)
        L = random_distributive_lattice(rng)
        mu, nu = random_distributive_valuation_pair(rng, L)
        D = lattice_divergence(L, mu, nu).value
        oracle = powerset_kl(atom_weights(L, mu), atom_weights(L, nu))
        if math.isinf(oracle):
            assert math.isinf(D)
        else:
            assert abs(D - oracle) <= 1e-9 * (1 + oracle)


class TestChainDivergence:
    def test_single_chain(self):
        L = chain_lattice(3)
        mu = {"c0": 0.0, "c1": 1.0, "c2": 1.5, "c3": 4.0}
        nu = {"c0": 0.0, "c1": 0.5, "c2": 2.5, "c3": 3.0}
        assert chain_divergence(L, mu, nu, ["c0", "c1", "c2", "c3"]) == lattice_divergence(L, mu, nu).value

    def test_b2_both_chains(self):
        mu = {"bot": 0.0, "p": 0.7, "q": 1.9, "top": 2.6}
        nu = {"bot": 0.0, "p": 1.3, "q": 0.4, "top": 1.7}
        a = chain_divergence(B2, mu, nu, ["bot", "p", "top"])
        b = chain_divergence(B2, mu, nu, ["bot", "q", "top"])
        assert a == pytest.approx(b, rel=1e-12)

    def test_pentagon_chains_agree(self, rng):
        L = pentagon_n5()
        mu, nu = random_valuation_pair(rng, L)
        vals = [chain_divergence(L, mu, nu, c.chain) for c in maximal_chains(L)]
        assert len(vals) == 2 and max(vals) - min(vals) <= 1e-9 * (1 + max(vals))

    def test_rejects_non_maximal(self):
        z = dict.fromkeys(B2.elements, 0.0)
        with pytest.raises(NotMaximalChain):
            chain_divergence(B2, z, z, ["bot", "top"])

    @given(seeds)
    def test_invariance_any_lattice(self, seed):
        rng = np.random.default_rng(seed)
        L = random_lattice(rng) if seed % 2 else random_distributive_lattice(rng)
        mu, nu = random_valuation_pair(rng, L)
        vals = [chain_divergence(L, mu, nu, c.chain) for c in maximal_chains(L)]
        if any(math.isinf(v) for v in vals):
            assert all(math.isinf(v) for v in vals)
        else:
            assert max(vals) - min(vals) <= 1e-9 * (1 + max(vals))


class TestSublatticeSupremum:
    def test_trivial(self):
        L = build_lattice(["x"], [])
        assert divergence_via_sublattice_sup(L, {"x": 0.0}, {"x": 0.0}) == 0.0

    def test_b2(self):
        mu = {"bot": 0.0, "p": 1.0, "q": 2.0, "top": 3.0}
        nu = {"bot": 0.0, "p": 2.0, "q": 1.0, "top": 3.0}
        assert divergence_via_sublattice_sup(B2, mu, nu) == pytest.approx(
            lattice_divergence(B2, mu, nu).value, rel=1e-12)

    def test_chain_attains_at_full_chain(self):
        L = chain_lattice(3)
        mu = {"c0": 0.0, "c1": 1.0, "c2": 1.5, "c3": 4.0}
        nu = {"c0": 0.0, "c1": 0.5, "c2": 2.5, "c3": 3.0}
        full = chain_divergence(L, mu, nu, L.elements)
        assert divergence_via_sublattice_sup(L, mu, nu) == pytest.approx(full, rel=1e-12)
        coarse = chain_divergence(chain_lattice(1), {"c0": 0.0, "c1": 4.0}, {"c0": 0.0, "c1": 3.0}, ["c0", "c1"])
        assert coarse < full

    def test_too_large(self):
        L = boolean_lattice(4)
        z = dict.fromkeys(L.elements, 0.0)
        with pytest.raises(TooLarge):
            divergence_via_sublattice_sup(L, z, z)

    @given(seeds)
    def test_matches_lattice_formula(self, seed):
        rng = np.random.default_rng(seed)
        L = random_distributive_lattice(rng, max_points=3)
        mu, nu = random_distributive_valuation_pair(rng, L, zero_p=0.0)
        D = lattice_divergence(L, mu, nu).value
        assert divergence_via_sublattice_sup(L, mu, nu) == pytest.approx(D, rel=1e-9, abs=1e-12)
