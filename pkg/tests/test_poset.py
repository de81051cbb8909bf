from __future__ import annotations

from fractions import Fraction

import pytest

from forcing_lab.classic import CohenCond, CohenNotion, IntervalNotion, cohen_dom_dense, interval_dq
from forcing_lab.errors import ForcingLabError, Verdict
from forcing_lab.poset import (
    DenseSet,
    FinitePoset,
    antichain_check,
    atom_generics,
    build_generic,
    dense_dp,
    enumerate_posets,
    is_filter,
    meets_all_dense,
    minimal_elements,
    parse_poset,
)

from oracles import compatible_partial_functions, minimal_by_scan


def two_atoms():
    return FinitePoset(["1", "a", "b"], [("a", "1"), ("b", "1")])


def diamond():
    return parse_poset("a <= 1\nb <= 1\nd <= a\nd <= b\n")


class TestIsFilter:
    def test_top_alone(self):
        P = two_atoms()
        assert is_filter(["1"], P)

    def test_incompatible_pair(self):
        assert not is_filter(["1", "a", "b"], two_atoms())

    def test_chain(self):
        P = FinitePoset(["1", "c", "d"], [("c", "1"), ("d", "c")])
        F = ["1", "c", "d"]
        assert is_filter(F, P)
        # oracle: every pair has a common lower bound inside F
        assert all(any(P.leq(r, p) and P.leq(r, q) for r in F) for p in F for q in F)

    def test_not_upward_closed(self):
        P = FinitePoset(["1", "c"], [("c", "1")])
        assert not is_filter(["c"], P)

    def test_infinite_needs_universe(self):
        with pytest.raises(ForcingLabError) as e:
            is_filter([CohenCond.of({})], CohenNotion())
        assert e.value.code == "UNIVERSE_REQUIRED"


class TestBuildGeneric:
    def test_cohen_domains(self):
        N = CohenNotion()
        denses = [cohen_dom_dense(0, n) for n in range(3)]
        cert = build_generic(N, denses)
        assert len(cert.chain) == 4
        assert {n for (_, n) in cert.last.as_dict()} >= {0, 1, 2}
        for d in denses:
            assert cert.last.get(0, int(d.id.split(",")[1])) is not None

    def test_empty_enumeration(self):
        P = diamond()
        cert = build_generic(P, [], start="a")
        assert cert.chain == ("a",)
        assert set(cert.filter) == {"1", "a"}

    def test_interval_dq(self):
        cert = build_generic(IntervalNotion(), [interval_dq(Fraction(0))])
        p = cert.last
        assert p.s <= 0 or p.r >= 0

    def test_refiner_violation(self):
        bad = DenseSet("bad", lambda p: False, lambda p: p)
        with pytest.raises(ForcingLabError) as e:
            build_generic(two_atoms(), [bad])
        assert e.value.code == "REFINER_VIOLATION"

    def test_budget(self):
        with pytest.raises(ForcingLabError) as e:
            build_generic(two_atoms(), [dense_dp(two_atoms(), "a")] * 3, budget=2)
        assert e.value.code == "SCALE_EXCEEDED"

    def test_chain_decreasing_and_met(self):
        P = diamond()
        denses = [dense_dp(P, x) for x in ("a", "b", "d")]
        cert = build_generic(P, denses)
        assert all(P.leq(q, p) for p, q in zip(cert.chain, cert.chain[1:]))
        assert all(d.member(cert.met[d.id]) for d in denses)
        assert meets_all_dense(P, cert)


class TestAntichain:
    def test_singleton(self):
        assert antichain_check(two_atoms(), ["a"])[0] is Verdict.YES

    def test_contradictory_cohen(self):
        N = CohenNotion()
        v, _ = antichain_check(N, [CohenCond.of({(0, 0): 0}), CohenCond.of({(0, 0): 1})])
        assert v is Verdict.YES

    def test_compatible_cohen_witness(self):
        N = CohenNotion(rows=(0, 1))
        p, q = CohenCond.of({(0, 0): 0}), CohenCond.of({(1, 1): 1})
        v, w = antichain_check(N, [p, q])
        assert v is Verdict.NO
        assert compatible_partial_functions(p.as_dict(), q.as_dict())
        assert w[2].as_dict() == {**p.as_dict(), **q.as_dict()}


class TestDenseDp:
    def test_members(self):
        P = two_atoms()
        D = dense_dp(P, "a")
        assert D.member("a")  # below p
        assert D.member("b")  # incompatible with p

    def test_refine_common_extension(self):
        P = FinitePoset(["1", "a", "b", "c"], [("c", "a"), ("c", "b"), ("a", "1"), ("b", "1")])
        D = dense_dp(P, "a")
        r = D.refine("b")
        common = [x for x in P.finite_universe if P.leq(x, "a") and P.leq(x, "b")]
        assert r in common and r == "c"


class TestAtomGenerics:
    def test_chain(self):
        P = FinitePoset(["1", "c"], [("c", "1")])
        gens = atom_generics(P)
        assert [set(g.filter) for g in gens] == [{"1", "c"}]

    def test_two_atoms(self):
        gens = atom_generics(two_atoms())
        assert sorted(tuple(sorted(g.filter)) for g in gens) == [("1", "a"), ("1", "b")]
        assert minimal_elements(two_atoms()) == minimal_by_scan(["1", "a", "b"], two_atoms().leq)

    def test_diamond(self):
        gens = atom_generics(diamond())
        assert [set(g.filter) for g in gens] == [{"1", "a", "b", "d"}]

    def test_generics_meet_every_dense_set(self):
        for P in enumerate_posets(4):
            for g in atom_generics(P):
                assert meets_all_dense(P, g)


class TestEnumeration:
    def test_counts(self):
        # posets with a top on n points correspond to posets on n-1 points: 1, 1, 2, 5, 16, 63
        sizes = [len(P.finite_universe) for P in enumerate_posets(6)]
        assert [sizes.count(n) for n in range(1, 7)] == [1, 1, 2, 5, 16, 63]

    def test_parse_errors(self):
        with pytest.raises(ForcingLabError) as e:
            parse_poset("a <= \n")
        assert e.value.code == "CONFIG_PARSE"
        with pytest.raises(ForcingLabError):
            parse_poset("a <= b\nb <= a\n")
        with pytest.raises(ForcingLabError):
            FinitePoset(["a", "b"])  # two maximal elements
