"""Symbolic subsets of the ordinal line and a partial normal-measure oracle.

The line is modelled by the naturals, and a handle is an eventually periodic
set: an explicit finite part below ``cut`` and, from ``cut`` on, membership by
residue modulo ``period``.  Boolean combinations, final segments and
diagonal intersections of finitely many handles stay inside this class, and
inclusion between two handles is decidable.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Mapping

from ..errors import ForcingLabError


@dataclass(frozen=True)
class SetHandle:
    cut: int
    low: frozenset
    period: int
    residues: frozenset

    # construction -----------------------------------------------------------

    @staticmethod
    def build(cut: int, period: int, pred: Callable[[int], bool]) -> "SetHandle":
        low = frozenset(x for x in range(cut) if pred(x))
        res = frozenset(x % period for x in range(cut, cut + period) if pred(x))
        return SetHandle(cut, low, period, res)._normal()

    @staticmethod
    def interval(a: int, b: int) -> "SetHandle":
        return SetHandle.build(max(b + 1, 0), 1, lambda x: a <= x <= b)

    @staticmethod
    def final(a: int) -> "SetHandle":
        return SetHandle(max(a, 0), frozenset(), 1, frozenset({0}))._normal()

    @staticmethod
    def finite(xs: Iterable[int]) -> "SetHandle":
        xs = frozenset(xs)
        return SetHandle.build(max(xs, default=-1) + 1, 1, xs.__contains__)

    @staticmethod
    def mod(p: int, r: int) -> "SetHandle":
        if p < 1:
            raise ForcingLabError("CONFIG_PARSE", f"modulus must be positive, got {p}")
        return SetHandle(0, frozenset(), p, frozenset({r % p}))._normal()

    def _normal(self) -> "SetHandle":
        period, res = self.period, self.residues
        for d in range(1, period + 1):
            if period % d == 0 and all((r in res) == ((r + d) % period in res) for r in range(period)):
                res = frozenset(r for r in range(d) if r in res)
                period = d
                break
        cut, low = self.cut, set(self.low)
        while cut > 0 and ((cut - 1) in low) == (((cut - 1) % period) in res):
            cut -= 1
            low.discard(cut)
        return SetHandle(cut, frozenset(low), period, res)

    # queries ----------------------------------------------------------------

    def __contains__(self, x: int) -> bool:
        if x < 0:
            return False
        return x in self.low if x < self.cut else (x % self.period) in self.residues

    @property
    def bounded(self) -> bool:
        return not self.residues

    @property
    def cofinite(self) -> bool:
        return len(self.residues) == self.period

    @property
    def empty(self) -> bool:
        return not self.low and not self.residues

    def min(self) -> int | None:
        if self.low:
            return min(self.low)
        if not self.residues:
            return None
        return next(x for x in range(self.cut, self.cut + self.period) if x in self)

    def max(self) -> int | None:
        """None for unbounded sets and for the empty set."""
        if self.residues:
            return None
        return max(self.low, default=None)

    def elements(self, upto: int) -> list[int]:
        return [x for x in range(upto) if x in self]

    def nth_above(self, floor: int, count: int) -> list[int]:
        """The first ``count`` members strictly above ``floor``."""
        if self.bounded and len([x for x in self.low if x > floor]) < count:
            raise ForcingLabError("NOT_EXTENDABLE", f"{self} has fewer than {count} points above {floor}")
        out, x = [], floor + 1
        while len(out) < count:
            if x in self:
                out.append(x)
            x += 1
        return out

    # algebra ----------------------------------------------------------------

    def _combine(self, other: "SetHandle", op) -> "SetHandle":
        cut = max(self.cut, other.cut)
        period = math.lcm(self.period, other.period)
        return SetHandle.build(cut, period, lambda x: op(x in self, x in other))

    def __and__(self, other: "SetHandle") -> "SetHandle":
        return self._combine(_require(other), lambda a, b: a and b)

    def __or__(self, other: "SetHandle") -> "SetHandle":
        return self._combine(_require(other), lambda a, b: a or b)

    def __sub__(self, other: "SetHandle") -> "SetHandle":
        return self._combine(_require(other), lambda a, b: a and not b)

    def __invert__(self) -> "SetHandle":
        return SetHandle.build(self.cut, self.period, lambda x: x not in self)

    def above(self, m: int | None) -> "SetHandle":
        """self minus (m+1); m=None stands for max of the empty sequence."""
        return self if m is None else self & SetHandle.final(m + 1)

    def subset(self, other: "SetHandle") -> bool:
        other = _require(other)
        cut = max(self.cut, other.cut)
        period = math.lcm(self.period, other.period)
        return all(x in other for x in range(cut + period) if x in self)

    def eventually_subset(self, other: "SetHandle") -> bool:
        cut = max(self.cut, other.cut)
        period = math.lcm(self.period, other.period)
        return all(x in other for x in range(cut, cut + period) if x in self)

    # text -------------------------------------------------------------------

    def text(self) -> str:
        parts = []
        run: list[int] = []
        for x in sorted(self.low) + [None]:
            if run and (x is None or x != run[-1] + 1):
                parts.append(f"[{run[0]},{run[-1]}]")
                run = []
            if x is not None:
                run.append(x)
        if self.residues:
            tail = f"[{self.cut},inf)"
            if not self.cofinite:
                mods = " | ".join(f"mod({self.period},{r})" for r in sorted(self.residues))
                tail += f" & ({mods})"
            parts.append(tail)
        if not parts:
            return "empty"
        if parts == ["[0,inf)"]:
            return "kappa"
        return " | ".join(parts)

    __str__ = text

    def __repr__(self) -> str:
        return f"SetHandle({self.text()!r})"


KAPPA = SetHandle.final(0)
EMPTY_SET = SetHandle.finite(())


class PointwiseSet:
    """A set known only through a membership test; inclusion is not decidable."""

    def __init__(self, pred: Callable[[int], bool], label: str = "pointwise"):
        self.pred = pred
        self.label = label

    def __contains__(self, x: int) -> bool:
        return bool(self.pred(x))

    def text(self) -> str:
        return self.label

    def subset(self, other) -> bool:
        raise ForcingLabError("SUBSET_UNDECIDABLE", f"{self.label} lies outside the handle algebra")


def _require(h) -> SetHandle:
    if not isinstance(h, SetHandle):
        raise ForcingLabError("SUBSET_UNDECIDABLE", f"{getattr(h, 'text', lambda: h)()} lies outside the handle algebra")
    return h


def subset(a, b) -> bool:
    """Decide a ⊆ b, raising SUBSET_UNDECIDABLE off the algebra."""
    return _require(a).subset(_require(b))


def seq_max(s: tuple) -> int | None:
    return max(s) if s else None


def diagonal_intersection(family: Mapping[tuple, SetHandle]) -> SetHandle:
    """Handle for {a : for every indexed s with max(s) < a, a in A_s}."""
    out = KAPPA
    for s, A in family.items():
        m = seq_max(s)
        piece = _require(A) if m is None else (A | SetHandle.interval(0, m))
        out = out & piece
    return out


def diag_member(family: Mapping[tuple, object], alpha: int) -> bool:
    """Pointwise definition, for cross-checking the handle."""
    for s, A in family.items():
        m = seq_max(s)
        if (m is None or m < alpha) and alpha not in A:
            return False
    return True


# --- infix grammar ------------------------------------------------------------

_TOKEN = re.compile(r"\s*(inf|kappa|empty|evens|odds|mod|diag|\d+|[\[\](),&|~{}<>:;])")


def _tokenize(text: str) -> list[str]:
    out, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ForcingLabError("CONFIG_PARSE", f"unexpected character at {pos} in {text!r}")
        out.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, want: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (want is not None and tok != want):
            raise ForcingLabError("CONFIG_PARSE", f"expected {want or 'token'} in {self.text!r}, got {tok!r}")
        self.i += 1
        return tok

    def num(self) -> int:
        tok = self.take()
        if not tok.isdigit():
            raise ForcingLabError("CONFIG_PARSE", f"expected a number in {self.text!r}, got {tok!r}")
        return int(tok)

    def expr(self) -> SetHandle:
        h = self.term()
        while self.peek() == "|":
            self.take()
            h = h | self.term()
        return h

    def term(self) -> SetHandle:
        h = self.factor()
        while self.peek() == "&":
            self.take()
            h = h & self.factor()
        return h

    def factor(self) -> SetHandle:
        tok = self.peek()
        if tok == "~":
            self.take()
            return ~self.factor()
        if tok == "(":
            self.take()
            h = self.expr()
            self.take(")")
            return h
        if tok == "[":
            self.take()
            a = self.num()
            self.take(",")
            if self.peek() == "inf":
                self.take()
                self.take(")")
                return SetHandle.final(a)
            b = self.num()
            self.take("]")
            return SetHandle.interval(a, b)
        if tok == "{":
            self.take()
            xs = []
            while self.peek() != "}":
                xs.append(self.num())
                if self.peek() == ",":
                    self.take()
            self.take("}")
            return SetHandle.finite(xs)
        if tok in ("kappa", "empty", "evens", "odds"):
            self.take()
            return {"kappa": KAPPA, "empty": EMPTY_SET, "evens": SetHandle.mod(2, 0), "odds": SetHandle.mod(2, 1)}[tok]
        if tok == "mod":
            self.take()
            self.take("(")
            p = self.num()
            self.take(",")
            r = self.num()
            self.take(")")
            return SetHandle.mod(p, r)
        if tok == "diag":
            self.take()
            self.take("(")
            family = {}
            while True:
                s = self.seq()
                self.take(":")
                family[s] = self.expr()
                if self.peek() == ";":
                    self.take()
                    continue
                break
            self.take(")")
            return diagonal_intersection(family)
        raise ForcingLabError("CONFIG_PARSE", f"unexpected {tok!r} in {self.text!r}")

    def seq(self) -> tuple:
        self.take("<")
        xs = []
        while self.peek() != ">":
            xs.append(self.num())
            if self.peek() == ",":
                self.take()
        self.take(">")
        return tuple(xs)


def parse_handle(text: str) -> SetHandle:
    """``[a,b]``, ``[a,inf)``, ``{1,2}``, ``evens``, ``mod(p,r)``, ``kappa``, ``&``, ``|``, ``~``,
    and ``diag(<s>: expr; <t>: expr)``."""
    p = _Parser(text)
    h = p.expr()
    if p.peek() is not None:
        raise ForcingLabError("CONFIG_PARSE", f"trailing input {p.peek()!r} in {text!r}")
    return h


def parse_seq(text: str) -> tuple:
    p = _Parser(text)
    s = p.seq()
    if p.peek() is not None:
        raise ForcingLabError("CONFIG_PARSE", f"trailing input in {text!r}")
    if any(b <= a for a, b in zip(s, s[1:])):
        raise ForcingLabError("INVALID_CONDITION", f"{text} is not strictly increasing")
    return s


# --- the oracle ---------------------------------------------------------------


class Answer(str, Enum):
    IN = "IN"
    OUT = "OUT"
    UNDECIDED = "UNDECIDED"


@dataclass
class MeasureOracle:
    """Partial normal measure: final segments IN, bounded sets OUT, the rest via a table.

    Table entries generate the filter: a handle is IN when it eventually
    contains the intersection of the IN entries and the complements of the
    OUT entries, and OUT when its complement is.  Every answer is logged.
    """

    table: dict = field(default_factory=dict)
    log: list = field(default_factory=list)

    def __post_init__(self):
        parsed = {}
        for expr, ans in self.table.items():
            h = parse_handle(expr) if isinstance(expr, str) else expr
            try:
                parsed[h] = Answer(ans)
            except ValueError:
                raise ForcingLabError("CONFIG_PARSE", f"table answer {ans!r} for {expr!r} is not IN or OUT") from None
            if parsed[h] is Answer.UNDECIDED:
                raise ForcingLabError("CONFIG_PARSE", f"table answer for {expr!r} must be IN or OUT")
        self.table = parsed
        base = KAPPA
        for h, ans in parsed.items():
            base = base & (h if ans is Answer.IN else ~h)
            self.log.append((h, ans, "table"))
        self.base = base

    @classmethod
    def from_json(cls, source: str | Path | Mapping) -> "MeasureOracle":
        if isinstance(source, Mapping):
            return cls(dict(source))
        path = Path(source)
        if not path.exists():
            raise ForcingLabError("FILE_NOT_FOUND", str(path))
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ForcingLabError("CONFIG_PARSE", f"{path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ForcingLabError("CONFIG_PARSE", f"{path}: decision table must be a JSON object")
        return cls(data)

    def in_handles(self) -> list[SetHandle]:
        return [h for h, a in self.table.items() if a is Answer.IN]

    def _answer(self, h) -> Answer:
        if not isinstance(h, SetHandle):
            return Answer.UNDECIDED
        if h.cofinite:
            return Answer.IN
        if h.bounded:
            return Answer.OUT
        if self.base.eventually_subset(h):
            return Answer.IN
        if (self.base & h).bounded:
            return Answer.OUT
        return Answer.UNDECIDED

    def decide(self, h) -> Answer:
        ans = self._answer(h)
        self.log.append((h, ans, "query"))
        return ans

    def require(self, h, what: str = "set") -> bool:
        """True for IN, False for OUT; ORACLE_UNDECIDED otherwise."""
        ans = self.decide(h)
        if ans is Answer.UNDECIDED:
            text = h.text() if hasattr(h, "text") else repr(h)
            raise ForcingLabError("ORACLE_UNDECIDED", f"{what} {text} needs a decision table entry", handle=text)
        return ans is Answer.IN

    def audit(self) -> list[str]:
        """Filter-axiom violations among logged answers; empty when the log is consistent."""
        ins = {h for h, a, _ in self.log if a is Answer.IN and isinstance(h, SetHandle)}
        outs = {h for h, a, _ in self.log if a is Answer.OUT and isinstance(h, SetHandle)}
        bad = []
        for h in sorted(ins, key=SetHandle.text):
            if h.bounded:
                bad.append(f"bounded set {h} answered IN")
            if ~h in ins:
                bad.append(f"{h} and its complement both IN")
            if h in outs:
                bad.append(f"{h} answered both IN and OUT")
            for k in outs:
                if h.subset(k):
                    bad.append(f"{k} is OUT but contains {h}, which is IN")
        for h in sorted(outs, key=SetHandle.text):
            if h.cofinite:
                bad.append(f"final segment {h} answered OUT")
        ordered = sorted(ins, key=SetHandle.text)
        for i, a in enumerate(ordered):
            for b in ordered[i + 1:]:
                if (a & b).bounded:
                    bad.append(f"{a} and {b} are IN but meet in a bounded set")
        return bad
