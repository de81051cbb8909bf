"""Hereditarily finite sets in canonical extensional form.

An :class:`HF` is a frozenset whose members are again :class:`HF` values, so
equality is extensional and hashing is structural.  The canonical text form is
the brace syntax ``{{},{{}}}`` with members sorted by their own canonical text.

Ordered pairs are Kuratowski pairs ``(u, v) = {{u}, {u, v}}`` and n-tuples nest
to the left: ``(u, v, w) = ((u, v), w)``.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, product as _product
from typing import Iterable, Iterator


class HF(frozenset):
    __slots__ = ("_text",)

    def __new__(cls, members: Iterable["HF"] = ()):
        self = super().__new__(cls, members)
        self._text = None
        return self

    @property
    def text(self) -> str:
        if self._text is None:
            self._text = "{" + ",".join(sorted(m.text for m in self)) + "}"
        return self._text

    def __repr__(self) -> str:
        return self.text

    __str__ = __repr__

    def encode(self) -> bytes:
        return self.text.encode("ascii")

    def sort_key(self):
        return (len(self.text), self.text)


EMPTY = HF()


def hf(*members: HF) -> HF:
    return HF(members)


def singleton(u: HF) -> HF:
    return HF((u,))


def pair(u: HF, v: HF) -> HF:
    return HF((singleton(u), HF((u, v))))


def tup(*items: HF) -> HF:
    """Left-nested tuple; a 1-tuple is the item itself."""
    if not items:
        raise ValueError("empty tuple has no HF encoding")
    acc = items[0]
    for item in items[1:]:
        acc = pair(acc, item)
    return acc


def unpair(x: HF) -> tuple[HF, HF] | None:
    """Inverse of :func:`pair`, or ``None`` if ``x`` is not a Kuratowski pair."""
    if len(x) == 1:
        (only,) = x
        if len(only) == 1:
            (u,) = only
            return u, u
        return None
    if len(x) != 2:
        return None
    a, b = sorted(x, key=len)
    if len(a) != 1 or len(b) != 2:
        return None
    (u,) = a
    if u not in b:
        return None
    (v,) = b - {u}
    return u, v


def untuple(x: HF, n: int) -> tuple[HF, ...] | None:
    """Split a left-nested n-tuple, or ``None`` if ``x`` does not parse as one."""
    if n == 1:
        return (x,)
    parts: list[HF] = []
    acc = x
    for _ in range(n - 1):
        pv = unpair(acc)
        if pv is None:
            return None
        acc, last = pv
        parts.append(last)
    parts.append(acc)
    return tuple(reversed(parts))


def untriple(x: HF) -> tuple[HF, HF, HF] | None:
    return untuple(x, 3)  # type: ignore[return-value]


def ordinal(n: int) -> HF:
    """Von Neumann numeral n = {0, ..., n-1}."""
    acc: list[HF] = []
    cur = EMPTY
    for _ in range(n):
        acc.append(cur)
        cur = HF(acc)
    return cur


def rank(x: HF) -> int:
    return _rank(x)


@lru_cache(maxsize=None)
def _rank(x: HF) -> int:
    return max((_rank(m) + 1 for m in x), default=0)


def union(x: HF) -> HF:
    return HF(m for y in x for m in y)


def cartesian(x: HF, y: HF) -> HF:
    return HF(pair(u, v) for u in x for v in y)


def power(x: HF, n: int) -> HF:
    """x^n as left-nested n-tuples (x^1 = x)."""
    if n < 1:
        raise ValueError("power needs n >= 1")
    acc = x
    for _ in range(n - 1):
        acc = cartesian(acc, x)
    return acc


def tuples(x: HF, n: int) -> Iterator[tuple[HF, ...]]:
    return _product(sorted(x, key=HF.sort_key), repeat=n)


def powerset(x: HF) -> HF:
    members = sorted(x, key=HF.sort_key)
    return HF(HF(c) for r in range(len(members) + 1) for c in combinations(members, r))


def rank_segment(r: int) -> HF:
    """V_r: all HF sets of rank < r."""
    acc = EMPTY
    for _ in range(r):
        acc = powerset(acc)
    return acc


def parse(text: str) -> HF:
    """Parse brace syntax, e.g. ``{{},{{}}}``.  Whitespace is ignored."""
    s = "".join(text.split())
    pos = 0

    def node() -> HF:
        nonlocal pos
        if pos >= len(s) or s[pos] != "{":
            raise ValueError(f"expected '{{' at {pos} in {text!r}")
        pos += 1
        members: list[HF] = []
        if pos < len(s) and s[pos] == "}":
            pos += 1
            return EMPTY
        while True:
            members.append(node())
            if pos < len(s) and s[pos] == ",":
                pos += 1
                continue
            if pos < len(s) and s[pos] == "}":
                pos += 1
                return HF(members)
            raise ValueError(f"expected ',' or '}}' at {pos} in {text!r}")

    out = node()
    if pos != len(s):
        raise ValueError(f"trailing input at {pos} in {text!r}")
    return out
