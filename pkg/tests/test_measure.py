from __future__ import annotations

import random
from fractions import Fraction

import pytest

from forcing_lab.errors import ForcingLabError, Verdict
from forcing_lab.measure import (
    AmoebaNotion,
    DyadicUnion,
    RandomNotion,
    avoid_null_dense,
    cover_family,
    identity_battery,
    limsup_cover,
    measure,
    perturb,
    random_compatible,
    random_union,
    semimetric,
    theta,
    theta_inverse,
)
from forcing_lab.poset import build_generic

from oracles import grid_cells, grid_measure

F = Fraction
U = DyadicUnion.of


class TestMeasure:
    def test_empty(self):
        assert measure(U([])) == 0

    def test_overlap_canonicalized(self):
        K = U([(0, F(1, 2)), (F(1, 4), F(3, 4))])
        assert K.intervals == ((0, F(3, 4)),)
        assert measure(K) == grid_measure([(0, F(1, 2)), (F(1, 4), F(3, 4))]) == F(3, 4)

    def test_disjoint(self):
        assert measure(U([(0, 1), (2, 3)])) == 2

    def test_against_grid(self):
        rng = random.Random(3)
        for _ in range(200):
            K = random_union(rng)
            assert K.measure == grid_measure(K.intervals)

    def test_bad_interval(self):
        with pytest.raises(ForcingLabError):
            U([(1, 0)])
        with pytest.raises(ForcingLabError):
            DyadicUnion.from_json([["x", 1]])


class TestSemimetric:
    def test_zero_and_empty(self):
        K = U([(0, F(1, 2))])
        assert semimetric(K, K) == 0
        assert semimetric(K, U([])) == K.measure

    def test_explicit(self):
        assert semimetric(U([(0, F(1, 2))]), U([(F(1, 4), F(3, 4))])) == F(1, 2)

    def test_against_grid(self):
        rng = random.Random(5)
        for _ in range(200):
            K, C = random_union(rng), random_union(rng)
            den = 64
            want = F(len(grid_cells(K.intervals, den) ^ grid_cells(C.intervals, den)), den)
            assert semimetric(K, C) == want


class TestCompatibility:
    def test_same(self):
        K = U([(0, F(1, 2))])
        v, w = random_compatible(K, K)
        assert v is Verdict.YES and w == K

    def test_touching(self):
        assert random_compatible(U([(0, F(1, 2))]), U([(F(1, 2), 1)]))[0] is Verdict.NO

    def test_ccc_instance(self):
        K0, eps = U([(0, 1)]), F(1, 4)
        rng = random.Random(9)
        for _ in range(100):
            K, C = perturb(K0, eps, rng), perturb(K0, eps, rng)
            assert semimetric(K, K0) < eps and semimetric(C, K0) < eps
            v, w = random_compatible(K, C)
            assert v is Verdict.YES
            assert w.measure >= K0.measure - 2 * eps


class TestAvoidNull:
    def test_refine_subtracts(self):
        N = RandomNotion()
        # U_0 and U_1 take at least half of K, so U_2 is the one removed
        covers = [U([(0, 1)]), U([(0, F(1, 2))]), U([(0, F(1, 8))])]
        K = avoid_null_dense(N, covers).refine(U([(0, 1)]))
        assert K == U([(F(1, 8), 1)]) and K.measure == F(7, 8)

    def test_disjoint_covers(self):
        N = RandomNotion()
        K0 = U([(0, F(1, 2))])
        assert avoid_null_dense(N, [U([(F(3, 4), 1)])]).refine(K0) == K0

    def test_insufficient(self):
        N = RandomNotion()
        with pytest.raises(ForcingLabError) as e:
            avoid_null_dense(N, [U([(-1, 2)])]).refine(U([(0, 1)]))
        assert e.value.code == "INSUFFICIENT_COVER"

    def test_amoeba_keeps_measure_above_one(self):
        N = AmoebaNotion()
        cert = build_generic(N, [N.random_dense(random.Random(i)) for i in range(20)])
        assert cert.last.measure > 1


class TestLimsup:
    def test_pairing(self):
        assert theta(0, 0) == 0
        assert all(theta(*theta_inverse(n)) == n for n in range(500))
        assert all(theta(p, q) > p for p in range(10) for q in range(1, 10))

    def test_empty(self):
        assert limsup_cover([]).W == ()

    def test_single_point(self):
        covers = [U([(-F(1, 2 ** (theta(p, 0) + 1)), F(1, 2 ** (theta(p, 0) + 1)))]) for p in range(3)]
        # each cover has measure exactly the bound, so shrink them a little
        covers = [U([(a / 2, b / 2) for a, b in c.intervals]) for c in covers]
        res = limsup_cover(covers, [F(0)], horizon=theta(2, 2))
        for n, w in enumerate(res.W):
            assert res.measure(n) < F(1, 2**n)
        hits = [n for n, w in enumerate(res.W) if any(a < 0 < b for a, b in w)]
        assert hits == res.hits[F(0)] and len(set(hits)) >= 2

    def test_tail_bound(self):
        pts = [F(1, 3), F(2, 3)]
        res = limsup_cover(cover_family(pts, 5), pts)
        mus = [res.measure(n) for n in range(len(res.W))]
        for m in range(len(mus)):
            assert sum(mus[m:]) < F(2, 2**m)

    def test_precondition(self):
        with pytest.raises(ForcingLabError) as e:
            limsup_cover([U([(0, 1)])])
        assert e.value.code == "PRECONDITION_MEASURE"


def test_identity_battery():
    stats = identity_battery(300, seed=2)
    assert stats["failures"] == {"additivity": 0, "symmetric_difference": 0, "ccc_witness": 0}
