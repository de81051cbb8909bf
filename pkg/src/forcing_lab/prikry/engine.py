"""Prikry conditions, both orders, dense-set reduction and the direct-extension decision procedure."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

from ..errors import ForcingLabError
from ..poset import DenseSet, ForcingNotion
from .handles import (
    KAPPA,
    Answer,
    MeasureOracle,
    SetHandle,
    diagonal_intersection,
    seq_max,
    subset,
)


@dataclass(frozen=True)
class PrikryCond:
    s: tuple
    A: SetHandle

    def text(self) -> str:
        return f"(<{','.join(map(str, self.s))}>, {self.A.text()})"

    def to_json(self) -> dict:
        return {"s": list(self.s), "A": self.A.text()}


def validate(p: PrikryCond, oracle: MeasureOracle) -> PrikryCond:
    s, A = p.s, p.A
    if any(x < 0 for x in s) or any(b <= a for a, b in zip(s, s[1:])):
        raise ForcingLabError("INVALID_CONDITION", f"stem {s} is not strictly increasing")
    lo = A.min()
    if lo is None:
        raise ForcingLabError("INVALID_CONDITION", "measure-one part is empty")
    if s and lo <= max(s):
        raise ForcingLabError("INVALID_CONDITION", f"max(s)={max(s)} is not below min(A)={lo}")
    if not oracle.require(A, "measure-one part"):
        raise ForcingLabError("INVALID_CONDITION", f"{A} is not in the measure")
    return p


def prikry_leq(p: PrikryCond, q: PrikryCond) -> bool:
    """p <= q: p's stem end-extends q's, p.A ⊆ q.A, and the new points lie in q.A."""
    if p.s[: len(q.s)] != q.s:
        return False
    if not subset(p.A, q.A):
        return False
    return all(x in q.A for x in p.s[len(q.s):])


def prikry_leq_star(p: PrikryCond, q: PrikryCond) -> bool:
    return p.s == q.s and subset(p.A, q.A)


def common_extension(p: PrikryCond, q: PrikryCond) -> PrikryCond:
    """Two conditions with one stem meet in (s, A ∩ B)."""
    if p.s != q.s:
        raise ForcingLabError("INVALID_CONDITION", "stems differ")
    return PrikryCond(p.s, p.A & q.A)


class PrikryNotion(ForcingNotion):
    name = "prikry"

    def __init__(self, oracle: MeasureOracle | None = None):
        self.oracle = oracle or MeasureOracle()

    @property
    def top(self) -> PrikryCond:
        return PrikryCond((), KAPPA)

    def leq(self, p, q) -> bool:
        return prikry_leq(p, q)

    def encode(self, p) -> bytes:
        return p.text().encode()

    def is_condition(self, p) -> bool:
        try:
            validate(p, self.oracle)
        except ForcingLabError:
            return False
        return True

    def to_json(self, p):
        return p.to_json()


def d_n_alpha(n: int, alpha: int) -> DenseSet:
    """Conditions with stem longer than n and max of the stem above alpha."""

    def member(p: PrikryCond) -> bool:
        return len(p.s) > n and max(p.s) > alpha

    def refine(p: PrikryCond) -> PrikryCond:
        if member(p):
            return p
        need = max(n + 1 - len(p.s), 1)
        floor = max(alpha, seq_max(p.s) if p.s else -1)
        new = p.A.nth_above(floor, need)
        # any points of A we skip are simply dropped; s⌢new stays inside A
        s = p.s + tuple(new)
        return PrikryCond(s, p.A.above(s[-1]))

    return DenseSet(f"D[{n},{alpha}]", member, refine)


# --- statements -------------------------------------------------------------


class Decision(str, Enum):
    FORCES = "FORCES"
    FORCES_NOT = "FORCES_NOT"
    NEITHER = "NEITHER"

    @property
    def decided(self) -> bool:
        return self is not Decision.NEITHER


@dataclass(frozen=True)
class CoordinateStatement:
    """A statement about the first k points of the generic sequence.

    ``pred`` receives the k-tuple (C(0),...,C(k-1)); its truth may depend only
    on the exact values below ``cut`` and on residues modulo ``period`` above
    it.  Forcing is then exact: a condition forces the statement iff every
    increasing completion of its stem from its measure-one part satisfies it,
    and a bounded window of completions realizes every type.
    """

    k: int
    pred: Callable[[tuple], bool]
    period: int = 1
    cut: int = 0
    label: str = "phi"

    def __call__(self, p: PrikryCond) -> Decision:
        need = self.k - len(p.s)
        if need <= 0:
            return Decision.FORCES if self.pred(p.s[: self.k]) else Decision.FORCES_NOT
        start = (max(p.s) + 1) if p.s else 0
        L = math.lcm(self.period, p.A.period)
        top = max(self.cut, p.A.cut, start) + need * L
        pool = [x for x in range(start, top) if x in p.A]
        seen = set()
        for t in itertools.combinations(pool, need):
            seen.add(bool(self.pred(p.s + t)))
            if len(seen) == 2:
                return Decision.NEITHER
        if not seen:
            raise ForcingLabError("INVALID_CONDITION", f"{p.text()} has no completion")
        return Decision.FORCES if seen == {True} else Decision.FORCES_NOT


@dataclass(frozen=True)
class RawStatement:
    """An arbitrary decision function on conditions, with a declared profile."""

    fn: Callable[[PrikryCond], Decision]
    period: int = 1
    cut: int = 0
    label: str = "raw"

    def __call__(self, p: PrikryCond) -> Decision:
        return Decision(self.fn(p))


def constant_statement(decision: Decision | str) -> CoordinateStatement:
    d = Decision(decision)
    if d is Decision.NEITHER:
        raise ForcingLabError("CONFIG_PARSE", "a constant statement must be decided")
    return CoordinateStatement(0, lambda t: d is Decision.FORCES, label=f"const:{d.value}")


def coordinate_in(i: int, X: SetHandle, label: str | None = None) -> CoordinateStatement:
    return CoordinateStatement(i + 1, lambda t: t[i] in X, X.period, X.cut, label or f"C({i}) in {X.text()}")


class PersistenceLog:
    """Wraps a statement and rejects answers that are not persistent downward."""

    def __init__(self, phi):
        self.phi = phi
        self.entries: list[tuple[PrikryCond, Decision]] = []
        self.cache: dict[PrikryCond, Decision] = {}

    def __call__(self, p: PrikryCond) -> Decision:
        if p in self.cache:
            return self.cache[p]
        d = self.phi(p)
        for q, e in self.entries:
            if e.decided and d != e and prikry_leq(p, q):
                self._fail(q, e, p, d)
            if d.decided and e != d and prikry_leq(q, p):
                self._fail(p, d, q, e)
        self.entries.append((p, d))
        self.cache[p] = d
        return d

    @staticmethod
    def _fail(upper, du, lower, dl):
        raise ForcingLabError(
            "ORACLE_INCONSISTENT",
            f"{upper.text()} gives {du.value} but its extension {lower.text()} gives {dl.value}",
            pair=[upper.to_json(), lower.to_json()],
        )


# --- diagonal reduction -----------------------------------------------------


@dataclass(frozen=True)
class PrikryCaps:
    max_len: int = 3  # longest extension t of the stem examined
    window: int | None = None  # probe bound; derived from the profile by default


@dataclass
class Reduction:
    A_star: SetHandle
    chosen: dict  # index sequence -> A_u
    audit: list  # (u, exists, reduced_in_D)

    @property
    def ok(self) -> bool:
        return all(e == r for _, e, r in self.audit)


def dense_reduce(
    in_D: Callable[[PrikryCond], bool],
    index: Iterable[tuple],
    oracle: MeasureOracle,
    candidates: Callable[[tuple], Sequence[SetHandle]],
) -> Reduction:
    """Pick A_u with (u, A_u) in D where a candidate works, else the whole line; intersect diagonally.

    ``candidates(u)`` lists the measure-one sets tried for index u.
    """
    chosen = {}
    found = {}
    for u in index:
        pick = None
        for B in candidates(u):
            B = B.above(seq_max(u))
            if B.min() is None or not oracle.require(B, "candidate"):
                continue
            if in_D(PrikryCond(u, B)):
                pick = B
                break
        chosen[u] = pick if pick is not None else KAPPA
        found[u] = pick is not None
    A_star = diagonal_intersection(chosen)
    if not oracle.require(A_star, "diagonal intersection"):
        raise ForcingLabError("ORACLE_INCONSISTENT", f"diagonal intersection {A_star} of measure-one sets is OUT")
    audit = [(u, found[u], in_D(PrikryCond(u, A_star.above(seq_max(u))))) for u in chosen]
    return Reduction(A_star, chosen, audit)


# --- the decision procedure -------------------------------------------------


@dataclass
class DecideResult:
    cond: PrikryCond
    decision: Decision
    A_star: SetHandle | None = None
    parts: dict = field(default_factory=dict)  # t -> (index i, A*_t)
    descent: list = field(default_factory=list)
    reduction_audit: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "condition": self.cond.to_json(),
            "decision": self.decision.value,
            "A_star": self.A_star.text() if self.A_star is not None else None,
            "parts": {_seq_text(t): [i, h.text()] for t, (i, h) in sorted(self.parts.items())},
            "descent": self.descent,
            "reduction_audit": [[_seq_text(u), e, r] for u, e, r in self.reduction_audit],
        }


def _seq_text(t: tuple) -> str:
    return "<" + ",".join(map(str, t)) + ">"


def _profile(phi, A: SetHandle, s: tuple) -> tuple[int, int]:
    period = math.lcm(getattr(phi, "period", 1), A.period)
    cut = max(getattr(phi, "cut", 0), A.cut, (max(s) + 1) if s else 0)
    return cut, period


def _fit(pred: Callable[[int], bool], cut: int, period: int, what: str) -> SetHandle:
    """Sample pred on [0, cut+2*period), extend periodically, and check the second block agrees."""
    for x in range(cut, cut + period):
        if pred(x) != pred(x + period):
            raise ForcingLabError("WINDOW_NONPERIODIC", f"{what} is not periodic past {cut} with period {period}")
    return SetHandle.build(cut, period, pred)


def prikry_decide(
    p: PrikryCond,
    phi,
    oracle: MeasureOracle,
    caps: PrikryCaps = PrikryCaps(),
) -> DecideResult:
    """A direct extension (s, B) of p deciding phi.

    The diagonal-reduction proof is executed literally: reduce the dense set of
    deciding conditions to a single A*, split A* above each t into the
    FORCES / FORCES_NOT / NEITHER parts, keep the part in the measure, and
    intersect diagonally.  A deciding extension of the resulting (s, A**) is
    then walked down one point at a time to the stem, each step checked.
    """
    validate(p, oracle)
    decide = PersistenceLog(phi)
    first = decide(p)
    if first.decided:
        return DecideResult(p, first)
    s, A = p.s, p.A
    A = A.above(seq_max(s))
    cut, period = _profile(phi, A, s)
    window = caps.window or cut + (caps.max_len + 1) * period
    # the filter generated by the oracle is exactly the sets eventually containing its base,
    # so trying the base (cut past every profile boundary) decides existence of a B
    base_cands = [oracle.base, *oracle.in_handles()]

    def candidates(u: tuple) -> list[SetHandle]:
        deep = max(cut, (max(u) + 1) if u else 0)
        return [A & h for h in base_cands] + [(A & h).above(deep - 1) for h in base_cands]

    def exts(src: SetHandle, length: int) -> list[tuple]:
        pool = [x for x in range(window) if x in src]
        return [t for r in range(length + 1) for t in itertools.combinations(pool, r)]

    index = [s + t for t in exts(A, caps.max_len)]
    red = dense_reduce(lambda q: decide(q).decided, index, oracle, candidates)
    if not red.ok:
        u = next(u for u, e, r in red.audit if e != r)
        raise ForcingLabError("ORACLE_INCONSISTENT", f"reduction fails at {_seq_text(u)}")
    A_star = red.A_star & A

    # partition above each t
    parts: dict[tuple, tuple[int, SetHandle]] = {}
    order = (Decision.FORCES, Decision.FORCES_NOT, Decision.NEITHER)
    for t in exts(A_star, caps.max_len - 1):
        above = A_star.above(seq_max(t))

        def cls(alpha: int, t=t, above=above) -> int:
            if alpha not in above:
                return -1
            return order.index(decide(PrikryCond(s + t + (alpha,), A_star.above(alpha))))

        c2, p2 = _profile(phi, A_star, s + t)
        c2 = max(c2, window)
        pieces = [_fit(lambda a, i=i: cls(a) == i, c2, p2, f"part {i} above {_seq_text(t)}") for i in range(3)]
        verdicts = [oracle.decide(h) for h in pieces]
        ins = [i for i, v in enumerate(verdicts) if v is Answer.IN]
        if not ins:
            undecided = [pieces[i].text() for i, v in enumerate(verdicts) if v is Answer.UNDECIDED]
            raise ForcingLabError(
                "ORACLE_UNDECIDED",
                f"no part above {_seq_text(t)} is decided by the measure; table one of {undecided}",
                handles=undecided,
            )
        if len(ins) > 1:
            raise ForcingLabError("ORACLE_INCONSISTENT", f"two disjoint parts above {_seq_text(t)} are both IN")
        parts[t] = (ins[0], pieces[ins[0]])

    A2 = A_star & diagonal_intersection({t: h for t, (_, h) in parts.items()})
    if not oracle.require(A2, "A**"):
        raise ForcingLabError("ORACLE_INCONSISTENT", f"A** = {A2} is OUT")
    result_cond = PrikryCond(s, A2)
    final = decide(result_cond)

    # a deciding extension of (s, A**) of least positive length, walked down to the stem
    start = None
    for t in exts(A2, caps.max_len):
        if t and decide(PrikryCond(s + t, A2.above(max(t)))).decided:
            start = t
            break
    if start is None and not final.decided:
        raise ForcingLabError("SCALE_EXCEEDED", f"no deciding extension within length {caps.max_len} and window {window}")
    descent = []
    if start is not None:
        t = start
        d = decide(PrikryCond(s + t, A2.above(max(t))))
        while t:
            u = t[:-1]
            i, _ = parts[u]
            if order[i] is not d:
                raise ForcingLabError(
                    "ORACLE_INCONSISTENT",
                    f"{_seq_text(s + t)} gives {d.value} but the measure-one part above {_seq_text(u)} is {order[i].value}",
                )
            shorter = PrikryCond(s + u, A2.above(seq_max(u)))
            got = decide(shorter)
            descent.append({"from": _seq_text(s + t), "to": _seq_text(s + u), "decision": got.value})
            if got is not d:
                raise ForcingLabError(
                    "ORACLE_INCONSISTENT",
                    f"every one-point extension of {shorter.text()} gives {d.value}, but it gives {got.value}",
                )
            t = u
        if final is not d:
            raise ForcingLabError("ORACLE_INCONSISTENT", f"descent ends with {d.value} but (s, A**) gives {final.value}")
    return DecideResult(result_cond, final, A_star, parts, descent, red.audit)


def decision_chain(
    p: PrikryCond,
    lam: int,
    name_oracle: Callable[[int], object],
    oracle: MeasureOracle,
    caps: PrikryCaps = PrikryCaps(),
) -> tuple[list[int], list[PrikryCond]]:
    """Direct extensions p_0 >=* p_1 >=* ... >=* p_lam, step a+1 deciding "a in the name".

    Returns the set forced into the name by p_lam and the chain.
    """
    chain = [p]
    decisions: list[Decision] = []
    for a in range(lam):
        r = prikry_decide(chain[-1], name_oracle(a), oracle, caps)
        if not prikry_leq_star(r.cond, chain[-1]):
            raise AssertionError("decision step is not a direct extension")
        chain.append(r.cond)
        decisions.append(r.decision)
    last = chain[-1]
    for a, d in enumerate(decisions):
        now = Decision(name_oracle(a)(last))
        if now is not d:
            raise ForcingLabError(
                "ORACLE_INCONSISTENT",
                f"{chain[a + 1].text()} gives {d.value} for {a}, its extension {last.text()} gives {now.value}",
                pair=[chain[a + 1].to_json(), last.to_json()],
            )
    return [a for a, d in enumerate(decisions) if d is Decision.FORCES], chain


# --- Mathias sequences and homogeneous sets ---------------------------------


@dataclass(frozen=True)
class MathiasVerdict:
    handle: str
    m: int | None  # least m with C(n) in A for all n >= m, when within the horizon
    last_violation: int | None

    @property
    def ok(self) -> bool:
        return self.m is not None

    def to_json(self) -> dict:
        return {"handle": self.handle, "m": self.m, "last_violation": self.last_violation,
                "verdict": "PASS" if self.ok else "FAIL"}


def mathias_check(C: Sequence[int], family: Sequence, horizon: int | None = None) -> list[MathiasVerdict]:
    if any(b <= a for a, b in zip(C, C[1:])):
        raise ForcingLabError("INVALID_CONDITION", "C must be increasing")
    # m = len(C) would make the tail vacuous, so it never counts
    horizon = len(C) - 1 if horizon is None else min(horizon, len(C) - 1)
    out = []
    for A in family:
        last = next((n for n in range(len(C) - 1, -1, -1) if C[n] not in A), None)
        m = 0 if last is None else last + 1
        label = A.text() if hasattr(A, "text") else repr(A)
        out.append(MathiasVerdict(label, m if m <= horizon else None, last))
    return out


def ramsey_bound(n: int, target: int, colors: int) -> int | str:
    """An upper bound for sets homogeneous on every [B]^m, m <= n, via nested Erdos-Rado bounds."""

    def single(m: int, k: int) -> int | str:
        if m == 1:
            return colors * (k - 1) + 1
        inner = single(m - 1, k)
        if isinstance(inner, str) or inner ** (m - 1) > 64:
            return f"{colors}^({inner}^{m - 1})"
        return colors ** (inner ** (m - 1))

    size: int | str = target
    for m in range(1, n + 1):
        if isinstance(size, str):
            return f"R_{m}({size})"
        size = single(m, size)
    return size


def homogeneous_subset(
    f: Callable[[tuple], int], A: Iterable[int], n: int, target: int, colors: int = 3
) -> tuple[int, ...]:
    """B ⊆ A of size target with f constant on [B]^m for each 1 <= m <= n (backtracking search)."""
    if colors > 3:
        raise ForcingLabError("CONFIG_PARSE", "at most three colors")
    A = sorted(set(A))

    def extend(B: list[int], rest: list[int], seen: dict) -> tuple | None:
        if len(B) == target:
            return tuple(B)
        for j, x in enumerate(rest):
            if len(B) + len(rest) - j < target:
                return None
            new = dict(seen)
            ok = True
            for m in range(1, min(n, len(B) + 1) + 1):
                for sub in itertools.combinations(B, m - 1):
                    c = f(tuple(sub) + (x,))
                    if new.setdefault(m, c) != c:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                got = extend(B + [x], rest[j + 1:], new)
                if got is not None:
                    return got
        return None

    found = extend([], A, {})
    if found is None:
        bound = ramsey_bound(n, target, colors)
        raise ForcingLabError(
            "FAMILY_TOO_SMALL", f"no homogeneous {target}-set in {len(A)} points; {bound} points suffice", bound=bound
        )
    return found


def is_homogeneous(f: Callable[[tuple], int], B: Sequence[int], n: int) -> bool:
    B = sorted(B)
    for m in range(1, n + 1):
        if len({f(c) for c in itertools.combinations(B, m)}) > 1:
            return False
    return True
