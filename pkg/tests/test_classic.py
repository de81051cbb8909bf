from __future__ import annotations

import random
from fractions import Fraction

import pytest

from forcing_lab.classic import (
    CohenCond,
    CohenNotion,
    CollapseCond,
    CollapseNotion,
    CoverCond,
    CoverNotion,
    IntervalCond,
    IntervalNotion,
    cohen_bits_dense,
    cohen_real,
    collapse_onto,
    cover_stabilization,
    decided_prefix,
    interval_dq,
    interval_enclosure,
    interval_width,
    rowsplit_dense,
)
from forcing_lab.errors import ForcingLabError
from forcing_lab.notions import NOTIONS, make_notion, parse_dense, random_dense_family
from forcing_lab.poset import build_generic

F = Fraction


class TestOrders:
    def test_cohen(self):
        N = CohenNotion()
        p = CohenCond.of({(0, 0): 1, (0, 1): 0})
        assert N.leq(p, p)
        assert N.leq(p, CohenCond.of({(0, 0): 1}))
        assert not N.leq(CohenCond.of({(0, 0): 1}), p)

    def test_interval(self):
        N = IntervalNotion()
        assert N.leq(IntervalCond(F(0), F(1, 2)), IntervalCond(F(0), F(1)))
        assert not N.leq(IntervalCond(F(1, 4), F(3, 4)), IntervalCond(F(0), F(1, 2)))
        with pytest.raises(ForcingLabError):
            IntervalCond(F(1), F(1))

    def test_cover_clauses(self):
        N = CoverNotion()
        p = CoverCond.of(1, {1: {3}})
        assert N.leq(p, p)
        assert N.leq(CoverCond.of(2, {1: {3}}), p)
        # clause g(n) >= f(n) fails
        assert not N.leq(CoverCond.of(2, {}), p)

    def test_cover_capacity_at_zero(self):
        with pytest.raises(ForcingLabError) as e:
            CoverCond.of(1, {0: {5}})
        assert e.value.code == "INVALID_CONDITION"

    def test_collapse(self):
        N = CollapseNotion()
        assert N.leq(CollapseCond.of({0: 1, 1: 2}), CollapseCond.of({0: 1}))
        assert not N.leq(CollapseCond.of({0: 2}), CollapseCond.of({0: 1}))


class TestDenseSets:
    def test_dq(self):
        q = interval_dq(F(0)).refine(IntervalCond(F(-1), F(1)))
        assert q in (IntervalCond(F(0), F(1)), IntervalCond(F(-1), F(0)))
        assert q.s <= 0 or q.r >= 0

    def test_rowsplit_from_empty(self):
        p = rowsplit_dense(0, 1).refine(CohenCond.of({}))
        d = p.as_dict()
        assert any(d.get((0, n)) is not None and d.get((1, n)) is not None and d[(0, n)] != d[(1, n)] for (_, n) in d)

    def test_collapse_onto(self):
        p = CollapseCond.of({0: 3})
        q = collapse_onto(5).refine(p)
        assert CollapseNotion().leq(q, p)
        assert 5 in q.as_dict().values()

    def test_width(self):
        q = interval_width(F(1, 8)).refine(IntervalCond(F(0), F(1)))
        assert q.s - q.r <= F(1, 8)

    def test_cover_overflow(self):
        N = CoverNotion()
        D = N.cover_dense({1: 4})
        p = CoverCond.of(0, {1: {3}})  # capacity at n=1 is 1
        q = D.refine(p)
        assert q.k == 2 and D.member(q)
        with pytest.raises(ForcingLabError) as e:
            N.cover_dense({1: 4}, strict=True).refine(p)
        assert e.value.code == "NOT_EXTENDABLE"


class TestGenericObjects:
    def test_cohen_partial_sum(self):
        p = CohenCond.of({(0, 1): 1, (0, 2): 0, (0, 3): 1})
        # oracle: sum of bit_n / 2^n
        assert cohen_real(p, 0, 3) == sum(F(b, 2**n) for n, b in ((1, 1), (2, 0), (3, 1))) == F(5, 8)

    def test_undecided_bits(self):
        p = CohenCond.of({(0, 1): 1})
        assert decided_prefix(p, 0) == 1
        with pytest.raises(ForcingLabError) as e:
            cohen_real(p, 0, 2)
        assert e.value.code == "UNDECIDED_BITS"

    def test_interval_enclosure(self):
        chain = [IntervalCond(F(0), F(1)), IntervalCond(F(1, 4), F(1, 2))]
        assert interval_enclosure(chain) == (max(c.r for c in chain), min(c.s for c in chain)) == (F(1, 4), F(1, 2))

    def test_empty_slalom(self):
        N = CoverNotion()
        cert = build_generic(N, [])
        assert N.generic_object(cert)["phi"] == {}

    def test_distinct_reals(self):
        N = CohenNotion(rows=(0, 1))
        cert = build_generic(N, [rowsplit_dense(0, 1), cohen_bits_dense(0, 4), cohen_bits_dense(1, 4)])
        assert cohen_real(cert.last, 0, 4) != cohen_real(cert.last, 1, 4)

    def test_cover_stabilization(self):
        N = CoverNotion()
        cert = build_generic(N, [N.cover_dense({2: 1, 3: 2})])
        k = cover_stabilization(cert, "cover:2=1,3=2")
        assert k == cert.met["cover:2=1,3=2"].k


class TestRegistry:
    def test_six_notions(self):
        assert sorted(NOTIONS) == ["amoeba", "cohen", "collapse", "cover", "interval", "random"]

    def test_unknown(self):
        with pytest.raises(ForcingLabError) as e:
            make_notion("nope")
        assert e.value.code == "CONFIG_PARSE"

    @pytest.mark.parametrize("spec", ["", "dom", "rowsplit:0", "rowsplit:0,0", "rowsplit:0,9", "zzz:1"])
    def test_malformed_dense(self, spec):
        with pytest.raises(ForcingLabError) as e:
            parse_dense(make_notion("cohen"), spec)
        assert e.value.code == "CONFIG_PARSE"

    @pytest.mark.parametrize("name", sorted(NOTIONS))
    def test_random_family_met(self, name):
        N = make_notion(name)
        denses = random_dense_family(N, 30, seed=11)
        cert = build_generic(N, denses)
        assert all(d.member(cert.met[d.id]) for d in denses)
        rng = random.Random(0)
        q = N.sample_extension(cert.last, rng)
        assert N.leq(q, cert.last)
