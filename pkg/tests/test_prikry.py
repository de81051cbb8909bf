from __future__ import annotations

import itertools

import pytest

from forcing_lab.errors import ForcingLabError
from forcing_lab.prikry.engine import (
    CoordinateStatement,
    Decision,
    PrikryCond,
    RawStatement,
    coordinate_in,
    constant_statement,
    decision_chain,
    dense_reduce,
    homogeneous_subset,
    is_homogeneous,
    mathias_check,
    prikry_decide,
    prikry_leq,
    prikry_leq_star,
    validate,
)
from forcing_lab.prikry.handles import (
    EMPTY_SET,
    KAPPA,
    Answer,
    MeasureOracle,
    PointwiseSet,
    SetHandle,
    diag_member,
    diagonal_intersection,
    parse_handle,
    parse_seq,
    subset,
)

from oracles import homogeneous_brute, mathias_m

H = parse_handle
EVENS = SetHandle.mod(2, 0)
ODDS = SetHandle.mod(2, 1)


class TestHandles:
    @pytest.mark.parametrize("text", ["[2,inf)", "[1,4]", "{1,3,8}", "evens", "mod(3,1) | {0}", "~[0,5]", "kappa", "empty"])
    def test_text_roundtrip(self, text):
        h = H(text)
        assert H(h.text()) == h

    def test_algebra_pointwise(self):
        a, b = H("mod(3,1) | [0,4]"), H("evens & [2,inf)")
        for x in range(60):
            assert (x in a & b) == (x in a and x in b)
            assert (x in a | b) == (x in a or x in b)
            assert (x in a - b) == (x in a and x not in b)
            assert (x in ~a) == (x not in a)

    def test_normal_form(self):
        assert H("mod(4,0) | mod(4,2)") == EVENS
        assert H("evens | odds") == KAPPA
        assert H("[3,inf) & [0,2]") == EMPTY_SET

    def test_predicates(self):
        assert H("[0,9]").bounded and not H("[0,9]").cofinite
        assert H("~{1,2}").cofinite
        assert H("[3,inf)").min() == 3
        assert H("{1,5}").max() == 5 and H("evens").max() is None

    def test_subset(self):
        assert subset(H("[5,inf)"), H("[2,inf)"))
        assert not subset(EVENS, H("[1,inf)"))
        assert EVENS.eventually_subset(H("[1,inf)"))
        with pytest.raises(ForcingLabError) as e:
            subset(PointwiseSet(lambda x: x > 3), KAPPA)
        assert e.value.code == "SUBSET_UNDECIDABLE"

    def test_parse_errors(self):
        for bad in ("[1,", "mod(0,1)", "evens &", "@"):
            with pytest.raises(ForcingLabError) as e:
                H(bad)
            assert e.value.code == "CONFIG_PARSE"
        with pytest.raises(ForcingLabError) as e:
            parse_seq("<3,1>")
        assert e.value.code == "INVALID_CONDITION"


class TestDiagonal:
    def index(self, top=6):
        return [()] + [s for r in (1, 2) for s in itertools.combinations(range(top), r)]

    def test_above_max_gives_everything(self):
        fam = {s: (SetHandle.final(max(s) + 1) if s else KAPPA) for s in self.index()}
        assert diagonal_intersection(fam) == KAPPA
        assert all(diag_member(fam, a) for a in range(20))

    def test_above_max_plus_one_gives_zero(self):
        fam = {s: (SetHandle.final(max(s) + 2) if s else KAPPA) for s in self.index()}
        D = diagonal_intersection(fam)
        got = [a for a in range(30) if diag_member(fam, a)]
        # indices only reach max 5, so everything past 6 survives too
        assert got == [a for a in range(30) if a in D]
        assert [a for a in range(7) if a in D] == [0]

    def test_measure_one_and_extension(self):
        O = MeasureOracle({"evens": "IN"})
        fam = {s: (EVENS & SetHandle.final(max(s) + 1) if s else EVENS) for s in self.index(4)}
        D = diagonal_intersection(fam)
        assert O.require(D)
        for s, A in fam.items():
            if s:
                assert prikry_leq(PrikryCond(s, D.above(max(s))), PrikryCond(s, A))
        assert O.audit() == []


class TestOrders:
    def test_reflexive(self):
        p = PrikryCond((1,), H("[2,inf)"))
        assert prikry_leq(p, p) and prikry_leq_star(p, p)

    def test_example(self):
        assert prikry_leq(PrikryCond((1, 3), H("[5,inf)")), PrikryCond((1,), H("[2,inf)")))

    def test_new_point_outside(self):
        assert not prikry_leq(PrikryCond((1, 3), H("[5,inf)")), PrikryCond((1,), H("[4,inf)")))

    def test_star_implies_leq(self):
        handles = [H(t) for t in ("[2,inf)", "[4,inf)", "evens & [2,inf)", "[3,inf) & ~{6}", "mod(3,0) & [3,inf)")]
        stems = [(), (0,), (1,), (0, 1)]
        for s, t in itertools.product(stems, repeat=2):
            for A, B in itertools.product(handles, repeat=2):
                p, q = PrikryCond(s, A), PrikryCond(t, B)
                if prikry_leq_star(p, q):
                    assert prikry_leq(p, q)

    def test_validate(self):
        O = MeasureOracle()
        with pytest.raises(ForcingLabError):
            validate(PrikryCond((3,), H("[2,inf)")), O)
        with pytest.raises(ForcingLabError):
            validate(PrikryCond((), H("[0,5]")), O)


class TestOracle:
    def test_defaults(self):
        O = MeasureOracle()
        assert O.decide(H("[7,inf)")) is Answer.IN
        assert O.decide(H("[0,7]")) is Answer.OUT
        assert O.decide(EVENS) is Answer.UNDECIDED
        with pytest.raises(ForcingLabError) as e:
            O.require(EVENS)
        assert e.value.code == "ORACLE_UNDECIDED"

    def test_generated_filter(self):
        O = MeasureOracle({"evens": "IN"})
        assert O.decide(ODDS) is Answer.OUT
        assert O.decide(H("evens & [10,inf)")) is Answer.IN
        assert O.decide(H("mod(4,0)")) is Answer.UNDECIDED
        assert O.audit() == []

    def test_audit_finds_contradiction(self):
        O = MeasureOracle({"evens": "IN", "odds": "IN"})
        assert O.audit()

    def test_bad_answer(self):
        with pytest.raises(ForcingLabError):
            MeasureOracle({"evens": "MAYBE"})


class TestReduce:
    def test_whole_poset(self):
        red = dense_reduce(lambda q: True, [(), (0,), (1,)], MeasureOracle(), lambda u: [KAPPA])
        assert red.A_star == KAPPA and red.ok

    def test_long_stems(self):
        idx = [()] + [(a,) for a in range(5)]
        red = dense_reduce(lambda q: len(q.s) >= 1, idx, MeasureOracle(), lambda u: [KAPPA])
        assert red.ok
        assert [(u, e) for u, e, _ in red.audit if not e] == [((), False)]


class TestDecide:
    def test_constant(self):
        p = PrikryCond((), KAPPA)
        r = prikry_decide(p, constant_statement("FORCES"), MeasureOracle())
        assert r.cond == p and r.decision is Decision.FORCES

    def test_parity_needs_table(self):
        p = PrikryCond((), KAPPA)
        with pytest.raises(ForcingLabError) as e:
            prikry_decide(p, coordinate_in(0, EVENS), MeasureOracle())
        assert e.value.code == "ORACLE_UNDECIDED"

    def test_parity_with_table(self):
        O = MeasureOracle({"evens": "IN"})
        p = PrikryCond((), KAPPA)
        r = prikry_decide(p, coordinate_in(0, EVENS), O)
        assert r.decision is Decision.FORCES and prikry_leq_star(r.cond, p)
        assert all(x % 2 == 0 for x in r.cond.A.elements(40))
        assert r.descent[-1]["to"] == "<>"
        assert O.audit() == []

    def test_stem_only_statement(self):
        p = PrikryCond((2,), H("[3,inf)"))
        phi = CoordinateStatement(1, lambda t: t[0] == 2)
        r = prikry_decide(p, phi, MeasureOracle())
        assert r.decision is phi(PrikryCond((2,), KAPPA)) is Decision.FORCES
        assert r.cond == p and r.descent == []

    def test_second_coordinate(self):
        O = MeasureOracle({"odds": "IN"})
        p = PrikryCond((0,), H("[1,inf)"))
        r = prikry_decide(p, coordinate_in(1, ODDS), O)
        assert r.decision is Decision.FORCES
        assert O.audit() == []

    def test_persistence_violation(self):
        with pytest.raises(ForcingLabError) as e:
            prikry_decide(PrikryCond((), KAPPA), RawStatement(_flip), MeasureOracle({"evens": "IN"}))
        assert e.value.code == "ORACLE_INCONSISTENT" and len(e.value.details["pair"]) == 2


def _flip(q):
    # FORCES on (<>, B) with B inside the evens, FORCES_NOT on every longer stem
    if q.s:
        return "FORCES_NOT"
    return "FORCES" if q.A.eventually_subset(EVENS) else "NEITHER"


class TestChain:
    def test_empty(self):
        p = PrikryCond((), KAPPA)
        S, chain = decision_chain(p, 0, lambda a: constant_statement("FORCES"), MeasureOracle())
        assert S == [] and chain == [p]

    def test_evens(self):
        p = PrikryCond((), KAPPA)
        S, chain = decision_chain(
            p, 4, lambda a: constant_statement("FORCES" if a % 2 == 0 else "FORCES_NOT"), MeasureOracle()
        )
        assert S == [0, 2] and len(chain) == 5
        assert all(prikry_leq_star(b, a) for a, b in zip(chain, chain[1:]))

    def test_inconsistent(self):
        with pytest.raises(ForcingLabError) as e:
            decision_chain(PrikryCond((), KAPPA), 2, lambda a: RawStatement(_flip), MeasureOracle({"evens": "IN"}))
        assert e.value.code == "ORACLE_INCONSISTENT"


class TestMathias:
    def test_examples(self):
        C = [2, 4, 6, 8, 10, 12]
        fam = [H("[3,inf)"), KAPPA]
        v = mathias_check(C, fam)
        assert [x.m for x in v] == [1, 0]
        odd = [1, 3, 5, 7]
        w = mathias_check(odd, [EVENS])[0]
        assert not w.ok and w.last_violation == 3

    def test_against_scan(self):
        C = [0, 3, 4, 7, 8, 11, 12, 16]
        for text in ("evens", "[5,inf)", "mod(4,0) | mod(4,3)", "~{7}", "odds"):
            A = H(text)
            got = mathias_check(C, [A])[0].m
            assert got == mathias_m(C, A, len(C) - 1)

    def test_increasing(self):
        with pytest.raises(ForcingLabError):
            mathias_check([3, 1], [KAPPA])


class TestHomogeneous:
    def test_constant(self):
        B = homogeneous_subset(lambda t: 0, range(10), 2, 4)
        assert len(B) == 4 and is_homogeneous(lambda t: 0, B, 2)

    def test_ramsey_triangle(self):
        def f(t):
            return 0 if len(t) == 1 else (t[0] * 7 + t[1] * 3) % 2

        B = homogeneous_subset(f, range(6), 2, 3, colors=2)
        assert is_homogeneous(f, B, 2)
        assert homogeneous_brute(f, range(6), 2, 3) is not None

    def test_all_two_colorings_of_k6(self):
        edges = list(itertools.combinations(range(6), 2))
        for mask in range(0, 1 << 15, 97):
            col = {e: (mask >> i) & 1 for i, e in enumerate(edges)}

            def f(t, col=col):
                return 0 if len(t) == 1 else col[t]

            assert is_homogeneous(f, homogeneous_subset(f, range(6), 2, 3, colors=2), 2)

    def test_parity(self):
        B = homogeneous_subset(lambda t: t[0] % 2, range(10), 1, 5)
        assert B == (0, 2, 4, 6, 8)

    def test_too_small(self):
        with pytest.raises(ForcingLabError) as e:
            homogeneous_subset(lambda t: t[0] % 2, range(4), 1, 3)
        assert e.value.code == "FAMILY_TOO_SMALL" and e.value.details["bound"] == 7
