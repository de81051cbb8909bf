from __future__ import annotations

import itertools
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from forcing_lab.godel import direct_modelcheck, parse_fo, product_check, term_at, term_index, val
from forcing_lab.hf import EMPTY, hf
from forcing_lab.measure import DyadicUnion, semimetric
from forcing_lab.names import forces
from forcing_lab.poset import enumerate_posets
from forcing_lab.prikry.engine import PrikryCond, prikry_leq, prikry_leq_star
from forcing_lab.prikry.handles import SetHandle, diag_member, diagonal_intersection
from forcing_lab.trees.combinatorics import delta_system
from forcing_lab.trees.namba import NambaTree, namba_prune, successor_sizes

from corpus import formula_family, name_pool
from oracles import grid_measure

POSETS = enumerate_posets(4)

dyadic = st.integers(0, 64).map(lambda n: Fraction(n, 64))


@st.composite
def unions(draw):
    pieces = draw(st.lists(st.tuples(dyadic, dyadic), max_size=4))
    return DyadicUnion.of((min(a, b), max(a, b)) for a, b in pieces)


@st.composite
def handles(draw):
    cut = draw(st.integers(0, 6))
    period = draw(st.integers(1, 4))
    low = draw(st.frozensets(st.integers(0, max(cut - 1, 0)), max_size=cut))
    res = draw(st.frozensets(st.integers(0, period - 1)))
    return SetHandle(cut, frozenset(x for x in low if x < cut), period, res)._normal()


stems = st.lists(st.integers(0, 8), max_size=3, unique=True).map(lambda xs: tuple(sorted(xs)))


class TestMeasureIdentities:
    @given(unions(), unions())
    def test_additivity(self, K, C):
        assert K.union(C).measure + K.intersect(C).measure == K.measure + C.measure

    @given(unions(), unions())
    def test_symmetric_difference(self, K, C):
        assert semimetric(K, C) == K.union(C).measure - K.intersect(C).measure

    @given(unions())
    def test_grid(self, K):
        assert K.measure == grid_measure(K.intervals)


class TestForcing:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, len(POSETS) - 1), st.data())
    def test_persistence(self, k, data):
        P = POSETS[k]
        pool = name_pool(P)
        phis = formula_family(pool)
        phi = data.draw(st.sampled_from(phis))
        elems = sorted(P.finite_universe)
        p = data.draw(st.sampled_from(elems))
        if forces(P, p, phi, pool):
            assert all(forces(P, q, phi, pool) for q in elems if P.leq(q, p))


class TestHandles:
    @given(handles(), handles())
    def test_algebra(self, a, b):
        for x in range(40):
            assert (x in a & b) == (x in a and x in b)
            assert (x in a | b) == (x in a or x in b)
            assert (x in ~a) == (x not in a)

    @given(handles(), handles())
    def test_subset_pointwise(self, a, b):
        window = max(a.cut, b.cut) + a.period * b.period + 1
        pointwise = all(x in b for x in range(window) if x in a)
        assert a.subset(b) == pointwise

    @given(st.dictionaries(stems, handles(), max_size=5))
    def test_diagonal(self, family):
        D = diagonal_intersection(family)
        for alpha in range(30):
            assert (alpha in D) == diag_member(family, alpha)

    @given(stems, stems, handles(), handles())
    def test_star_implies_leq(self, s, t, A, B):
        p, q = PrikryCond(s, A), PrikryCond(t, B)
        if prikry_leq_star(p, q):
            assert prikry_leq(p, q)


class TestGodel:
    @given(st.integers(0, 10**6))
    def test_term_roundtrip(self, j):
        assert term_index(term_at(j)) == j

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from(["(in v0 v1)", "(ex v2 (and (in v2 v0) (in v2 v1)))", "(not (eq v0 v1))",
                            "(all v2 (or (not (in v2 v0)) (in v2 v1)))"]),
           st.sets(st.integers(0, 7), min_size=1, max_size=3))
    def test_val_shape_and_agreement(self, text, picks):
        pool = [EMPTY, hf(EMPTY)]
        pool += [hf(*c) for c in itertools.combinations(pool, 2)] + [hf(hf(EMPTY))]
        pool += [hf(EMPTY, hf(hf(EMPTY))), hf(hf(EMPTY), hf(hf(EMPTY))), hf(hf(EMPTY, hf(EMPTY))), hf(pool[2])]
        x = hf(*(pool[i] for i in picks))
        phi = parse_fo(text)
        got = val(phi, x, 2)
        assert got <= product_check(x, 2)
        assert got == direct_modelcheck(phi, x, 2)


class TestCombinatorics:
    @given(st.lists(st.frozensets(st.integers(0, 9), min_size=2, max_size=2), min_size=9, max_size=9, unique=True))
    def test_sunflower(self, fam):
        sf = delta_system(fam, 3)
        assert sf.verify() and set(sf.petals) <= set(fam)

    @given(st.integers(2, 4), st.sets(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=12))
    def test_prune(self, lam, leaves):
        leaves = {w for w in leaves if max(w) < lam} or {(0, 0)}
        P = namba_prune(NambaTree.from_leaves(leaves, lam))
        assert successor_sizes(P) <= {1, lam}
