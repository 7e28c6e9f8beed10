from itertools import combinations
from math import gcd

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from latdiv.errors import NotALattice, NotAPartialOrder, NotDistributive, NotMaximalChain, UnknownElement
from latdiv.generators import random_distributive_lattice, random_lattice, random_poset
from latdiv.lattice import (
    Lattice,
    birkhoff_decompose,
    boolean_lattice,
    build_lattice,
    chain_irreducible_sequence,
    chain_lattice,
    diamond_m3,
    divisor_lattice,
    downset_lattice,
    is_distributive,
    is_maximal_chain,
    join_irreducibles,
    maximal_chains,
    meet_join,
    pentagon_n5,
)

seeds = st.integers(0, 2**32 - 1)

B2 = build_lattice(["bot", "p", "q", "top"], [("bot", "p"), ("bot", "q"), ("p", "top"), ("q", "top")])


def cover_graph(L: Lattice) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(L.elements)
    g.add_edges_from(L.covers)
    return g


def brute_downsets(points, less):
    """All downsets by scanning every subset."""
    out = []
    for r in range(len(points) + 1):
        for sub in combinations(points, r):
            s = set(sub)
            if all(a in s for a, b in less if b in s):
                out.append(frozenset(s))
    return out


def brute_downset_graph(points, less) -> nx.DiGraph:
    ds = brute_downsets(points, less)
    g = nx.DiGraph()
    g.add_nodes_from(range(len(ds)))
    for i, a in enumerate(ds):
        for j, b in enumerate(ds):
            if a < b and len(b - a) == 1:
                g.add_edge(i, j)
    return g


class TestConstruction:
    def test_singleton(self):
        L = build_lattice(["x"], [])
        assert L.bottom == L.top == "x"

    def test_b2(self):
        assert (B2.bottom, B2.top) == ("bot", "top")
        assert len(B2) == 4

    def test_pentagon_is_a_lattice(self):
        L = pentagon_n5()
        # brute-force: every pair has a unique greatest common lower bound
        for a in L.elements:
            for b in L.elements:
                lower = [x for x in L.elements if L.le(x, a) and L.le(x, b)]
                greatest = [x for x in lower if all(L.le(y, x) for y in lower)]
                assert greatest == [L.meet(a, b)]

    def test_cycle_rejected(self):
        with pytest.raises(NotAPartialOrder):
            build_lattice(["a", "b"], [("a", "b"), ("b", "a")])

    def test_two_maximal_elements_rejected(self):
        with pytest.raises(NotALattice):
            build_lattice(["0", "a", "b"], [("0", "a"), ("0", "b")])

    def test_missing_join_rejected(self):
        # a, b have two incomparable upper bounds c, d
        with pytest.raises(NotALattice):
            build_lattice(["0", "a", "b", "c", "d", "1"],
                          [("0", "a"), ("0", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"),
                           ("c", "1"), ("d", "1")])

    def test_redundant_cover_removed(self):
        L = build_lattice(["0", "a", "1"], [("0", "a"), ("a", "1"), ("0", "1")])
        assert sorted(L.covers) == [("0", "a"), ("a", "1")]

    def test_unknown_cover_element(self):
        with pytest.raises(UnknownElement):
            build_lattice(["0"], [("0", "z")])


class TestMeetJoin:
    def test_complementary_atoms(self):
        assert meet_join(B2, "p", "q") == ("bot", "top")

    def test_divisors_of_12(self):
        L = divisor_lattice(12)
        assert meet_join(L, "4", "6") == ("2", "12")
        for a in L.elements:
            for b in L.elements:
                x, y = int(a), int(b)
                assert meet_join(L, a, b) == (str(gcd(x, y)), str(x * y // gcd(x, y)))

    def test_unknown_element(self):
        with pytest.raises(UnknownElement):
            meet_join(B2, "p", "nope")

    @given(seeds)
    def test_lattice_axioms(self, seed):
        L = random_lattice(np.random.default_rng(seed))
        for a in L.elements:
            assert meet_join(L, a, a) == (a, a)
            for b in L.elements:
                m, j = meet_join(L, a, b)
                assert (m, j) == meet_join(L, b, a)
                assert L.meet(a, L.join(a, b)) == a
                assert L.join(a, L.meet(a, b)) == a
                assert L.le(m, a) and L.le(m, b) and L.le(a, j) and L.le(b, j)


class TestDistributivity:
    def test_examples(self):
        assert is_distributive(B2)
        assert not is_distributive(diamond_m3())
        assert not is_distributive(pentagon_n5())

    @given(seeds)
    def test_agrees_with_forbidden_sublattices(self, seed):
        L = random_lattice(np.random.default_rng(seed), max_size=8)
        m3, n5 = cover_graph(diamond_m3()), cover_graph(pentagon_n5())
        found = False
        for sub in combinations(L.elements, 5):
            s = set(sub)
            if not all(L.meet(a, b) in s and L.join(a, b) in s for a in sub for b in sub):
                continue
            g = nx.DiGraph()
            g.add_nodes_from(sub)
            g.add_edges_from((a, b) for a in sub for b in sub if a != b and L.le(a, b)
                             and not any(c not in (a, b) and L.le(a, c) and L.le(c, b) for c in sub))
            if nx.is_isomorphic(g, m3) or nx.is_isomorphic(g, n5):
                found = True
                break
        assert is_distributive(L) == (not found)


class TestIrreducibles:
    def test_chain(self):
        L = build_lattice(["bot", "a", "top"], [("bot", "a"), ("a", "top")])
        assert [(j.element, j.lower_cover) for j in join_irreducibles(L)] == [("a", "bot"), ("top", "a")]

    def test_b2(self):
        assert [(j.element, j.lower_cover) for j in join_irreducibles(B2)] == [("p", "bot"), ("q", "bot")]

    def test_divisors_of_12(self):
        got = {j.element: j.lower_cover for j in join_irreducibles(divisor_lattice(12))}
        assert got == {"2": "1", "3": "1", "4": "2"}


class TestBirkhoff:
    def test_b2(self):
        b = birkhoff_decompose(B2)
        assert b.irreducibles == ("p", "q") and b.order == () and b.isomorphic
        assert len(b.downsets) == 4

    def test_chain(self):
        b = birkhoff_decompose(chain_lattice(4))
        assert b.irreducibles == ("c1", "c2", "c3", "c4")
        assert b.order == (("c1", "c2"), ("c2", "c3"), ("c3", "c4"))

    def test_divisors_of_12(self):
        b = birkhoff_decompose(divisor_lattice(12))
        assert set(b.irreducibles) == {"2", "3", "4"}
        assert b.order == (("2", "4"),)
        assert len(set(b.downsets.values())) == 6 and b.isomorphic

    def test_rejects_non_distributive(self):
        with pytest.raises(NotDistributive):
            birkhoff_decompose(pentagon_n5())

    @given(seeds)
    def test_round_trip_against_brute_force(self, seed):
        L = random_distributive_lattice(np.random.default_rng(seed), max_points=6)
        b = birkhoff_decompose(L)
        assert b.isomorphic
        assert nx.is_isomorphic(cover_graph(L), brute_downset_graph(b.irreducibles, set(b.order)))

    def test_downset_lattice_matches_brute_force(self):
        pts, rel = random_poset(np.random.default_rng(5), 6)
        L = downset_lattice(pts, rel)
        assert len(L) == len(brute_downsets(pts, set(rel)))


class TestChains:
    def test_counts(self):
        assert len(maximal_chains(chain_lattice(3))) == 1
        assert [c.chain for c in maximal_chains(B2)] == [("bot", "p", "top"), ("bot", "q", "top")]
        assert len(maximal_chains(boolean_lattice(3))) == 6

    def test_b2_sequence(self):
        d = chain_irreducible_sequence(B2, ["bot", "p", "top"])
        assert d.irreducible_sequence == ("p", "q")

    def test_chain_lattice_sequence(self):
        L = build_lattice(["bot", "a", "top"], [("bot", "a"), ("a", "top")])
        assert chain_irreducible_sequence(L, ["bot", "a", "top"]).irreducible_sequence == ("a", "top")

    def test_divisors_of_12_sequence(self):
        L = divisor_lattice(12)
        d = chain_irreducible_sequence(L, ["1", "2", "4", "12"])
        assert d.irreducible_sequence == ("2", "4", "3")
        assert d.lower_covers == ("1", "2", "1")

    def test_rejects_non_maximal(self):
        with pytest.raises(NotMaximalChain):
            chain_irreducible_sequence(B2, ["bot", "top"])
        assert not is_maximal_chain(B2, ["bot", "top"])

    def test_rejects_non_distributive(self):
        L = pentagon_n5()
        with pytest.raises(NotDistributive):
            chain_irreducible_sequence(L, maximal_chains(L)[0].chain)

    @given(seeds)
    def test_rank_and_permutation(self, seed):
        L = random_distributive_lattice(np.random.default_rng(seed))
        irr = sorted(j.element for j in join_irreducibles(L))
        lower = {j.element: j.lower_cover for j in join_irreducibles(L)}
        for c in maximal_chains(L):
            d = chain_irreducible_sequence(L, c.chain)
            assert len(c.chain) - 1 == len(irr)
            assert sorted(d.irreducible_sequence) == irr
            for m0, m1, j in zip(d.chain, d.chain[1:], d.irreducible_sequence):
                assert L.join(m0, j) == m1
                assert L.meet(m0, j) == lower[j]

    def test_deterministic_order(self):
        chains = [c.chain for c in maximal_chains(boolean_lattice(3))]
        assert chains == sorted(chains)
