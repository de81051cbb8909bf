"""Cohen (partial functions and rational intervals), collapse and covering forcing.

Uncountable index sets are replaced by finite label sets; only the
combinatorics of conditions, dense sets and generic objects is modelled.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .errors import ForcingLabError, Verdict
from .poset import DenseSet, FilterCertificate, ForcingNotion


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ForcingLabError("CONFIG_PARSE", f"not a rational: {text!r}") from exc


def frac_json(x: Fraction) -> list[int]:
    return [x.numerator, x.denominator]


# --- Fn(Index x N, 2) -----------------------------------------------------


@dataclass(frozen=True)
class CohenCond:
    """Finite partial function (row, n) -> bit, stored as sorted triples."""

    items: tuple = ()

    @classmethod
    def of(cls, mapping: dict) -> "CohenCond":
        for (_, n), b in mapping.items():
            if b not in (0, 1) or n < 0:
                raise ForcingLabError("INVALID_CONDITION", f"bad Cohen entry {(n, b)}")
        return cls(tuple(sorted(((r, n, b) for (r, n), b in mapping.items()), key=_cohen_key)))

    def as_dict(self) -> dict:
        return {(r, n): b for r, n, b in self.items}

    def get(self, row, n):
        for r, m, b in self.items:
            if r == row and m == n:
                return b
        return None


def _cohen_key(t):
    return (str(t[0]), t[1])


class CohenNotion(ForcingNotion):
    def __init__(self, rows: Sequence = (0,), name: str = "cohen"):
        self.name = name
        self.rows = tuple(rows)

    @property
    def top(self) -> CohenCond:
        return CohenCond()

    def is_condition(self, p) -> bool:
        return isinstance(p, CohenCond) and all(r in self.rows for r, _, _ in p.items)

    def leq(self, p: CohenCond, q: CohenCond) -> bool:
        return set(q.items) <= set(p.items)

    def encode(self, p: CohenCond) -> bytes:
        return json.dumps([[str(r), n, b] for r, n, b in p.items]).encode()

    def to_json(self, p: CohenCond) -> Any:
        return [[r, n, b] for r, n, b in p.items]

    def compatible(self, p, q, budget=256, seed=0):
        dp = p.as_dict()
        for key, b in q.as_dict().items():
            if dp.get(key, b) != b:
                return Verdict.NO, None
        return Verdict.YES, CohenCond.of({**dp, **q.as_dict()})

    def sample_extension(self, p: CohenCond, rng: random.Random) -> CohenCond:
        d = p.as_dict()
        row = rng.choice(self.rows)
        n = rng.randrange(0, 2 + max((m for r, m in d if r == row), default=0))
        d.setdefault((row, n), rng.randrange(2))
        return CohenCond.of(d)

    # dense sets
    def dense(self, kind: str, args: Sequence[str]) -> DenseSet:
        if kind == "dom":
            row, n = self._row(args[0]), int(args[1])
            return cohen_dom_dense(row, n)
        if kind == "bits":
            row, m = self._row(args[0]), int(args[1])
            return cohen_bits_dense(row, m)
        if kind == "rowsplit":
            xi, zeta = self._row(args[0]), self._row(args[1])
            if xi == zeta:
                raise ForcingLabError("CONFIG_PARSE", "rowsplit needs two distinct rows")
            return rowsplit_dense(xi, zeta)
        raise ForcingLabError("CONFIG_PARSE", f"unknown Cohen dense kind {kind!r}")

    def _row(self, text):
        for r in self.rows:
            if str(r) == str(text).strip():
                return r
        raise ForcingLabError("CONFIG_PARSE", f"unknown row {text!r}")

    def random_dense(self, rng: random.Random) -> DenseSet:
        kind = rng.choice(["dom", "bits", "rowsplit"] if len(self.rows) > 1 else ["dom", "bits"])
        if kind == "rowsplit":
            xi, zeta = rng.sample(self.rows, 2)
            return rowsplit_dense(xi, zeta)
        row = rng.choice(self.rows)
        return cohen_dom_dense(row, rng.randrange(20)) if kind == "dom" else cohen_bits_dense(row, rng.randrange(1, 12))

    def generic_object(self, cert: FilterCertificate, precision: int) -> dict:
        return {row: cohen_real(cert.last, row, precision) for row in self.rows}


def cohen_dom_dense(row, n: int) -> DenseSet:
    def member(p: CohenCond) -> bool:
        return p.get(row, n) is not None

    def refine(p: CohenCond) -> CohenCond:
        return p if member(p) else CohenCond.of({**p.as_dict(), (row, n): 0})

    return DenseSet(f"dom:{row},{n}", member, refine)


def cohen_bits_dense(row, m: int) -> DenseSet:
    """Bits 1..m of ``row`` are decided."""

    def member(p: CohenCond) -> bool:
        return all(p.get(row, n) is not None for n in range(1, m + 1))

    def refine(p: CohenCond) -> CohenCond:
        d = p.as_dict()
        for n in range(1, m + 1):
            d.setdefault((row, n), 0)
        return CohenCond.of(d)

    return DenseSet(f"bits:{row},{m}", member, refine)


def rowsplit_dense(xi, zeta) -> DenseSet:
    """{p : p(xi, n) != p(zeta, n) for some n >= 1}.

    The refiner also fills the bits below the split with 0 so that the split
    shows up in the decided prefix of both rows.
    """

    def member(p: CohenCond) -> bool:
        d = p.as_dict()
        return any(
            d.get((xi, n)) is not None and d.get((zeta, n)) is not None and d[(xi, n)] != d[(zeta, n)]
            for r, n in d
            if n >= 1
        )

    def refine(p: CohenCond) -> CohenCond:
        if member(p):
            return p
        d = p.as_dict()
        n = 1
        while (xi, n) in d and (zeta, n) in d:
            n += 1
        a, b = d.get((xi, n)), d.get((zeta, n))
        if a is None and b is None:
            a, b = 0, 1
        elif a is None:
            a = 1 - b
        else:
            b = 1 - a
        d[(xi, n)], d[(zeta, n)] = a, b
        for m in range(1, n):
            d.setdefault((xi, m), 0)
            d.setdefault((zeta, m), 0)
        return CohenCond.of(d)

    return DenseSet(f"rowsplit:{xi},{zeta}", member, refine)


def decided_prefix(p: CohenCond, row) -> int:
    """Largest m with bits 1..m of ``row`` all decided."""
    m = 0
    while p.get(row, m + 1) is not None:
        m += 1
    return m


def cohen_real(p: CohenCond, row, precision: int) -> Fraction:
    """Partial sum of bit(n)/2^n over n = 1..precision."""
    have = decided_prefix(p, row)
    if precision > have:
        raise ForcingLabError(
            "UNDECIDED_BITS", f"row {row}: {have} bits decided, {precision} requested", decided=have
        )
    return sum((Fraction(1, 2**n) for n in range(1, precision + 1) if p.get(row, n) == 1), Fraction(0))


# --- intervals --------------------------------------------------------------


@dataclass(frozen=True)
class IntervalCond:
    r: Fraction
    s: Fraction

    def __post_init__(self):
        if not self.r < self.s:
            raise ForcingLabError("INVALID_CONDITION", f"empty interval ({self.r},{self.s})")


class IntervalNotion(ForcingNotion):
    """Open rational intervals inside a fixed ambient interval, ordered by inclusion."""

    def __init__(self, lo: Fraction = Fraction(-1), hi: Fraction = Fraction(1), name: str = "interval"):
        self.name = name
        self.ambient = IntervalCond(Fraction(lo), Fraction(hi))

    @property
    def top(self) -> IntervalCond:
        return self.ambient

    def is_condition(self, p) -> bool:
        return isinstance(p, IntervalCond) and self.leq(p, self.ambient)

    def leq(self, p: IntervalCond, q: IntervalCond) -> bool:
        return q.r <= p.r and p.s <= q.s

    def encode(self, p: IntervalCond) -> bytes:
        return f"({p.r},{p.s})".encode()

    def to_json(self, p: IntervalCond) -> Any:
        return [frac_json(p.r), frac_json(p.s)]

    def compatible(self, p, q, budget=256, seed=0):
        r, s = max(p.r, q.r), min(p.s, q.s)
        if r < s:
            return Verdict.YES, IntervalCond(r, s)
        return Verdict.NO, None

    def sample_extension(self, p: IntervalCond, rng: random.Random) -> IntervalCond:
        w = p.s - p.r
        a = p.r + w * Fraction(rng.randrange(0, 4), 8)
        b = p.s - w * Fraction(rng.randrange(0, 4), 8)
        return IntervalCond(a, b)

    def dense(self, kind: str, args: Sequence[str]) -> DenseSet:
        if kind == "dq":
            return interval_dq(parse_fraction(args[0]))
        if kind == "width":
            return interval_width(parse_fraction(args[0]))
        raise ForcingLabError("CONFIG_PARSE", f"unknown interval dense kind {kind!r}")

    def random_dense(self, rng: random.Random) -> DenseSet:
        if rng.random() < 0.5:
            lo, hi = self.ambient.r, self.ambient.s
            return interval_dq(lo + (hi - lo) * Fraction(rng.randrange(1, 64), 64))
        return interval_width(Fraction(1, rng.randrange(1, 1000)))

    def generic_object(self, cert: FilterCertificate, precision: int = 0) -> tuple[Fraction, Fraction]:
        return interval_enclosure(cert.chain)


def interval_dq(q: Fraction) -> DenseSet:
    """D_q: intervals lying entirely left or right of q."""

    def member(p: IntervalCond) -> bool:
        return p.s <= q or q <= p.r

    def refine(p: IntervalCond) -> IntervalCond:
        if member(p):
            return p
        # q is interior; keep the wider side
        return IntervalCond(q, p.s) if p.s - q >= q - p.r else IntervalCond(p.r, q)

    return DenseSet(f"dq:{q}", member, refine)


def interval_width(eps: Fraction) -> DenseSet:
    def member(p: IntervalCond) -> bool:
        return p.s - p.r <= eps

    def refine(p: IntervalCond) -> IntervalCond:
        if member(p):
            return p
        mid = (p.r + p.s) / 2
        return IntervalCond(mid - eps / 2, mid + eps / 2)

    return DenseSet(f"width:{eps}", member, refine)


def interval_enclosure(chain: Iterable[IntervalCond]) -> tuple[Fraction, Fraction]:
    """[sup r, inf s] over the chain."""
    chain = list(chain)
    return max(c.r for c in chain), min(c.s for c in chain)


# --- collapse -------------------------------------------------------------


@dataclass(frozen=True)
class CollapseCond:
    items: tuple = ()  # sorted (n, label)

    @classmethod
    def of(cls, mapping: dict) -> "CollapseCond":
        return cls(tuple(sorted(mapping.items())))

    def as_dict(self) -> dict:
        return dict(self.items)


class CollapseNotion(ForcingNotion):
    """Finite partial maps N -> labels(0..bound-1), reverse inclusion."""

    def __init__(self, bound: int = 8, name: str = "collapse"):
        self.name = name
        self.bound = bound

    @property
    def top(self) -> CollapseCond:
        return CollapseCond()

    def is_condition(self, p) -> bool:
        return isinstance(p, CollapseCond) and all(0 <= v < self.bound for _, v in p.items)

    def leq(self, p, q) -> bool:
        return set(q.items) <= set(p.items)

    def encode(self, p) -> bytes:
        return json.dumps(p.items).encode()

    def to_json(self, p) -> Any:
        return [list(t) for t in p.items]

    def compatible(self, p, q, budget=256, seed=0):
        dp = p.as_dict()
        for n, v in q.items:
            if dp.get(n, v) != v:
                return Verdict.NO, None
        return Verdict.YES, CollapseCond.of({**dp, **q.as_dict()})

    def sample_extension(self, p, rng):
        d = p.as_dict()
        d.setdefault(rng.randrange(0, len(d) + 3), rng.randrange(self.bound))
        return CollapseCond.of(d)

    def dense(self, kind: str, args: Sequence[str]) -> DenseSet:
        if kind == "onto":
            beta = int(args[0])
            if not 0 <= beta < self.bound:
                raise ForcingLabError("CONFIG_PARSE", f"label {beta} outside 0..{self.bound - 1}")
            return collapse_onto(beta)
        if kind == "dom":
            return collapse_dom(int(args[0]))
        raise ForcingLabError("CONFIG_PARSE", f"unknown collapse dense kind {kind!r}")

    def random_dense(self, rng):
        if rng.random() < 0.5:
            return collapse_onto(rng.randrange(self.bound))
        return collapse_dom(rng.randrange(30))

    def generic_object(self, cert: FilterCertificate, precision: int = 0) -> dict:
        out: dict = {}
        for c in cert.chain:
            out.update(c.as_dict())
        return dict(sorted(out.items()))


def collapse_onto(beta: int) -> DenseSet:
    def member(p):
        return beta in p.as_dict().values()

    def refine(p):
        if member(p):
            return p
        d = p.as_dict()
        n = 0
        while n in d:
            n += 1
        d[n] = beta
        return CollapseCond.of(d)

    return DenseSet(f"onto:{beta}", member, refine)


def collapse_dom(n: int) -> DenseSet:
    def member(p):
        return n in p.as_dict()

    def refine(p):
        return p if member(p) else CollapseCond.of({**p.as_dict(), n: 0})

    return DenseSet(f"cdom:{n}", member, refine)


# --- covering forcing -----------------------------------------------------


@dataclass(frozen=True)
class CoverCond:
    """(k, f) with f of finite support; f(n) is empty off the support."""

    k: int
    f: tuple = ()  # sorted (n, frozenset)

    def __post_init__(self):
        if self.k < 0:
            raise ForcingLabError("INVALID_CONDITION", "k must be >= 0")
        for n, s in self.f:
            if len(s) > n:
                raise ForcingLabError("INVALID_CONDITION", f"|f({n})| = {len(s)} > {n}")
            if not s:
                raise ForcingLabError("INVALID_CONDITION", "empty values are implicit")

    @classmethod
    def of(cls, k: int, mapping: dict) -> "CoverCond":
        return cls(k, tuple(sorted((n, frozenset(s)) for n, s in mapping.items() if s)))

    def at(self, n: int) -> frozenset:
        for m, s in self.f:
            if m == n:
                return s
        return frozenset()

    def as_dict(self) -> dict:
        return dict(self.f)

    @property
    def bound(self) -> int:
        return max((len(s) for _, s in self.f), default=0)


class CoverNotion(ForcingNotion):
    """The covering forcing.  ``max_bound`` optionally caps |f(n)| for every condition."""

    def __init__(self, max_bound: int | None = None, name: str = "cover"):
        self.name = name
        self.max_bound = max_bound

    @property
    def top(self) -> CoverCond:
        return CoverCond(0)

    def is_condition(self, p) -> bool:
        return isinstance(p, CoverCond) and (self.max_bound is None or p.bound <= self.max_bound)

    def leq(self, p: CoverCond, q: CoverCond) -> bool:
        if p.k < q.k:
            return False
        support = {n for n, _ in p.f} | {n for n, _ in q.f}
        for n in support:
            g, f = p.at(n), q.at(n)
            if not g >= f:
                return False
            if n < q.k and g != f:
                return False
        return True

    def encode(self, p: CoverCond) -> bytes:
        return json.dumps([p.k, [[n, sorted(s)] for n, s in p.f]]).encode()

    def to_json(self, p: CoverCond) -> Any:
        return {"k": p.k, "f": {str(n): sorted(s) for n, s in p.f}}

    def capacity(self, n: int) -> int:
        return n if self.max_bound is None else min(n, self.max_bound)

    def compatible(self, p, q, budget=256, seed=0):
        hi, lo = (p, q) if p.k >= q.k else (q, p)
        k = hi.k
        support = {n for n, _ in p.f} | {n for n, _ in q.f}
        merged = {}
        for n in support:
            a, b = hi.at(n), lo.at(n)
            if n < lo.k and a != b:
                return Verdict.NO, None
            if n < k and not a >= b:
                return Verdict.NO, None
            merged[n] = a | b
            if len(merged[n]) > self.capacity(n):
                return Verdict.NO, None
        return Verdict.YES, CoverCond.of(k, merged)

    def sample_extension(self, p: CoverCond, rng):
        d = {n: set(s) for n, s in p.f}
        if rng.random() < 0.3:
            return CoverCond.of(p.k + 1, d)
        n = rng.randrange(p.k, p.k + 6)
        if len(d.get(n, ())) < self.capacity(n):
            d.setdefault(n, set()).add(rng.randrange(10))
        return CoverCond.of(p.k, d)

    def dense(self, kind: str, args: Sequence[str]) -> DenseSet:
        if kind in ("cover", "cover!"):
            alpha = {}
            for item in args:
                try:
                    n, v = item.split("=")
                    alpha[int(n)] = int(v)
                except ValueError as exc:
                    raise ForcingLabError("CONFIG_PARSE", f"bad cover target item {item!r}") from exc
            return self.cover_dense(alpha, strict=kind == "cover!")
        raise ForcingLabError("CONFIG_PARSE", f"unknown cover dense kind {kind!r}")

    def cover_dense(self, alpha: dict[int, int], strict: bool = False) -> DenseSet:
        """D_alpha = {(k, f) : alpha(n) in f(n) for every n >= k in supp(alpha)}.

        The refiner adds alpha(n) where the capacity allows and otherwise moves
        k past n.  With ``strict`` it may only enlarge f and raises
        NOT_EXTENDABLE instead.
        """
        alpha = dict(sorted(alpha.items()))

        def member(p: CoverCond) -> bool:
            return all(v in p.at(n) for n, v in alpha.items() if n >= p.k)

        def refine(p: CoverCond) -> CoverCond:
            k = p.k
            d = {n: set(s) for n, s in p.f}
            for n, v in alpha.items():
                if n < k or v in d.get(n, ()):
                    continue
                if len(d.get(n, ())) < self.capacity(n):
                    d.setdefault(n, set()).add(v)
                elif strict:
                    raise ForcingLabError(
                        "NOT_EXTENDABLE", f"alpha({n})={v} overflows capacity {self.capacity(n)} at n={n}"
                    )
                else:
                    k = n + 1
            return CoverCond.of(k, d)

        label = ",".join(f"{n}={v}" for n, v in alpha.items())
        return DenseSet(("cover!:" if strict else "cover:") + label, member, refine)

    def random_dense(self, rng):
        alpha = {n: rng.randrange(10) for n in rng.sample(range(12), rng.randrange(1, 6))}
        return self.cover_dense(alpha)

    def generic_object(self, cert: FilterCertificate, precision: int = 0) -> dict:
        """The slalom Phi read off the last condition; values below k are final."""
        last = cert.last
        return {
            "k": last.k,
            "phi": {n: sorted(s) for n, s in last.f},
            "stable_below": last.k,
        }


def cover_stabilization(cert: FilterCertificate, dense_id: str) -> int:
    """Point from which the target behind ``dense_id`` is covered: the witness's k."""
    return cert.met[dense_id].k
