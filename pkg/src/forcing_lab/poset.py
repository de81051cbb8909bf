"""Forcing notions, dense sets, filters and the generic-filter builder.

Conditions are arbitrary immutable Python values; each notion supplies its own
order and a canonical byte encoding, and condition identity is decided by the
encoding.  Dense sets carry a constructive ``refine`` so that building a filter
that meets a countable (here: finite, registered) family is a plain loop.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

from .errors import ForcingLabError, Verdict
from .hf import HF, ordinal

Condition = Any


class ForcingNotion:
    """Base class: a partial order with a largest element.

    Subclasses implement ``top``, ``leq`` and ``encode``; they may override
    ``compatible`` with an exact decision procedure.  The default compatibility
    test is exhaustive on finite notions and a budgeted random search otherwise.
    """

    name: str = "notion"
    finite_universe: tuple | None = None

    @property
    def top(self) -> Condition:
        raise NotImplementedError

    def leq(self, p: Condition, q: Condition) -> bool:
        raise NotImplementedError

    def encode(self, p: Condition) -> bytes:
        return repr(p).encode()

    def is_condition(self, p: Condition) -> bool:
        return True

    def sample_extension(self, p: Condition, rng: random.Random) -> Condition:
        return p

    def to_json(self, p: Condition) -> Any:
        return self.encode(p).decode()

    def to_hf(self, p: Condition) -> HF:
        """HF stand-in for a condition, used by check names of conditions."""
        if self.finite_universe is not None:
            ordered = sorted(self.finite_universe, key=self.encode)
            for i, q in enumerate(ordered):
                if self.same(p, q):
                    return ordinal(i)
        raise ForcingLabError("NOT_FINITE", f"{self.name} has no finite universe")

    def same(self, p: Condition, q: Condition) -> bool:
        return self.encode(p) == self.encode(q)

    def compatible(
        self, p: Condition, q: Condition, budget: int = 256, seed: int = 0
    ) -> tuple[Verdict, Condition | None]:
        if self.leq(p, q):
            return Verdict.YES, p
        if self.leq(q, p):
            return Verdict.YES, q
        if self.finite_universe is not None:
            lower = [r for r in self.finite_universe if self.leq(r, p) and self.leq(r, q)]
            if not lower:
                return Verdict.NO, None
            return Verdict.YES, _pick_maximal(self, lower)
        rng = random.Random(seed)
        for start, other in itertools.islice(itertools.cycle([(p, q), (q, p)]), budget):
            r = start
            for _ in range(4):
                r = self.sample_extension(r, rng)
                if self.leq(r, other):
                    return Verdict.YES, r
        return Verdict.UNKNOWN, None


def _pick_maximal(notion: ForcingNotion, conds: Sequence[Condition]) -> Condition:
    maximal = [
        r for r in conds if not any(notion.leq(r, s) and not notion.same(r, s) for s in conds)
    ]
    return min(maximal, key=notion.encode)


@dataclass(frozen=True)
class DenseSet:
    """A dense set given by a membership test and a constructive refiner."""

    id: str
    member: Callable[[Condition], bool]
    refine: Callable[[Condition], Condition]


@dataclass(frozen=True)
class FilterCertificate:
    """Finite witness for a filter: a decreasing chain plus the dense sets met.

    The filter is the upward closure of the chain; ``filter`` lists the
    registered conditions in it (the whole cone for finite notions, the chain
    itself otherwise) and ``contains`` decides membership for any condition.
    """

    notion: ForcingNotion
    chain: tuple
    met: dict = field(default_factory=dict)
    filter: tuple = ()

    def contains(self, p: Condition) -> bool:
        return self.notion.leq(self.chain[-1], p)

    @property
    def last(self) -> Condition:
        return self.chain[-1]


def upward_closure(notion: ForcingNotion, chain: Sequence[Condition]) -> tuple:
    if notion.finite_universe is not None:
        bottom = chain[-1]
        return tuple(
            sorted(
                (q for q in notion.finite_universe if notion.leq(bottom, q)), key=notion.encode
            )
        )
    seen: dict[bytes, Condition] = {}
    for c in chain:
        seen.setdefault(notion.encode(c), c)
    return tuple(seen.values())


def build_generic(
    notion: ForcingNotion,
    denses: Sequence[DenseSet],
    start: Condition | None = None,
    budget: int | None = None,
) -> FilterCertificate:
    """Meet each dense set in turn, starting below ``start`` (default: top)."""
    if start is None:
        start = notion.top
    if budget is not None and len(denses) > budget:
        raise ForcingLabError("SCALE_EXCEEDED", f"{len(denses)} dense sets exceed budget {budget}")
    chain = [start]
    met: dict[str, Condition] = {}
    for d in denses:
        p = chain[-1]
        q = d.refine(p)
        if not notion.leq(q, p):
            raise ForcingLabError("REFINER_VIOLATION", f"{d.id}: refine output is not below input")
        if not d.member(q):
            raise ForcingLabError("REFINER_VIOLATION", f"{d.id}: refine output is not a member")
        chain.append(q)
        met[d.id] = q
    return FilterCertificate(notion, tuple(chain), met, upward_closure(notion, chain))


def is_filter(
    conds: Iterable[Condition],
    notion: ForcingNotion,
    universe: Sequence[Condition] | None = None,
) -> bool:
    """Upward closed (within the universe) and pairwise compatible.

    A pair whose compatibility cannot be settled within budget counts as a
    failure to certify, so the answer is False.
    """
    F = list(conds)
    if universe is None:
        universe = notion.finite_universe
    if universe is None:
        raise ForcingLabError("UNIVERSE_REQUIRED", f"{notion.name} is infinite; pass a universe")
    keys = {notion.encode(p) for p in F}
    for p in F:
        for q in universe:
            if notion.leq(p, q) and notion.encode(q) not in keys:
                return False
    for p, q in itertools.combinations(F, 2):
        verdict, _ = notion.compatible(p, q)
        if verdict is not Verdict.YES:
            return False
    return True


def antichain_check(
    notion: ForcingNotion, conds: Iterable[Condition], budget: int = 256
) -> tuple[Verdict, tuple | None]:
    """YES if pairwise incompatible; NO with a (p, q, common extension) witness."""
    A = sorted(conds, key=notion.encode)
    unknown = False
    for p, q in itertools.combinations(A, 2):
        verdict, w = notion.compatible(p, q, budget=budget)
        if verdict is Verdict.YES:
            return Verdict.NO, (p, q, w)
        if verdict is Verdict.UNKNOWN:
            unknown = True
    return (Verdict.UNKNOWN if unknown else Verdict.YES), None


def dense_dp(notion: ForcingNotion, p: Condition) -> DenseSet:
    """D_p = {q : q <= p or q is incompatible with p}."""

    def member(q: Condition) -> bool:
        if notion.leq(q, p):
            return True
        return notion.compatible(q, p)[0] is Verdict.NO

    def refine(r: Condition) -> Condition:
        verdict, w = notion.compatible(r, p)
        if verdict is Verdict.YES:
            return w
        if verdict is Verdict.NO:
            return r
        raise ForcingLabError("UNKNOWN", "compatibility search exhausted its budget")

    return DenseSet(f"D_p[{notion.encode(p).decode(errors='replace')}]", member, refine)


def minimal_elements(notion: ForcingNotion) -> list:
    U = _require_finite(notion)
    return sorted(
        (m for m in U if not any(notion.leq(q, m) and not notion.same(q, m) for q in U)),
        key=notion.encode,
    )


def atom_generics(notion: ForcingNotion) -> list[FilterCertificate]:
    """The cone above each minimal element; on a finite poset these are the generics."""
    out = []
    top = notion.top
    for m in minimal_elements(notion):
        chain = (top,) if notion.same(m, top) else (top, m)
        out.append(FilterCertificate(notion, chain, {}, upward_closure(notion, chain)))
    return out


def atom_generic(notion: ForcingNotion, m: Condition) -> FilterCertificate:
    top = notion.top
    chain = (top,) if notion.same(m, top) else (top, m)
    return FilterCertificate(notion, chain, {}, upward_closure(notion, chain))


def meets_all_dense(notion: ForcingNotion, cert: FilterCertificate, max_size: int = 12) -> bool:
    """Exhaustive check that the filter meets every dense subset of a finite poset."""
    U = list(_require_finite(notion))
    if len(U) > max_size:
        raise ForcingLabError("SCALE_EXCEEDED", f"{len(U)} conditions > {max_size}")
    below = {i: [j for j, r in enumerate(U) if notion.leq(r, p)] for i, p in enumerate(U)}
    inside = {i for i, p in enumerate(U) if cert.contains(p)}
    for mask in range(1, 1 << len(U)):
        if all(any(mask >> j & 1 for j in below[i]) for i in range(len(U))):
            if not any(mask >> j & 1 for j in inside):
                return False
    return True


def _require_finite(notion: ForcingNotion) -> tuple:
    if notion.finite_universe is None:
        raise ForcingLabError("NOT_FINITE", f"{notion.name} has no finite universe")
    return notion.finite_universe


class FinitePoset(ForcingNotion):
    """A finite forcing notion on string labels.

    ``relations`` are pairs ``(q, p)`` meaning ``q <= p``; the reflexive
    transitive closure is taken and antisymmetry plus a unique top are checked.
    """

    def __init__(self, elements: Iterable[str], relations: Iterable[tuple[str, str]] = (),
                 name: str = "finite"):
        self.name = name
        elems = list(dict.fromkeys(elements))
        for q, p in relations:
            for x in (q, p):
                if x not in elems:
                    elems.append(x)
        up = {x: {x} for x in elems}
        for q, p in relations:
            up[q].add(p)
        changed = True
        while changed:
            changed = False
            for x in elems:
                extra = set().union(*(up[y] for y in up[x])) - up[x]
                if extra:
                    up[x] |= extra
                    changed = True
        for x in elems:
            for y in up[x]:
                if y != x and x in up[y]:
                    raise ForcingLabError("CONFIG_PARSE", f"cycle between {x} and {y}")
        self._up = {x: frozenset(v) for x, v in up.items()}
        tops = [x for x in elems if all(x in self._up[y] for y in elems)]
        if len(tops) != 1:
            raise ForcingLabError("CONFIG_PARSE", "poset needs a unique largest element")
        self._top = tops[0]
        self.finite_universe = tuple(sorted(elems))
        self._down = {x: frozenset(y for y in elems if x in self._up[y]) for x in elems}

    @property
    def top(self) -> str:
        return self._top

    def leq(self, p: str, q: str) -> bool:
        return q in self._up[p]

    def encode(self, p: str) -> bytes:
        return p.encode()

    def is_condition(self, p) -> bool:
        return p in self._up

    def to_json(self, p: str) -> str:
        return p

    def sample_extension(self, p: str, rng: random.Random) -> str:
        return rng.choice(sorted(self._down[p]))

    def down(self, p: str) -> frozenset:
        return self._down[p]

    def up(self, p: str) -> frozenset:
        return self._up[p]

    def edges(self) -> list[tuple[str, str]]:
        """Covering pairs (q, p) with q < p and nothing strictly between."""
        out = []
        for q in self.finite_universe:
            for p in self._up[q] - {q}:
                if not any(r not in (p, q) and p in self._up[r] for r in self._up[q]):
                    out.append((q, p))
        return sorted(out)

    def automorphisms(self) -> list[dict[str, str]]:
        """All order automorphisms, by brute force over label permutations."""
        U = self.finite_universe
        out = []
        for perm in itertools.permutations(U):
            pi = dict(zip(U, perm))
            if all((pi[y] in self._up[pi[x]]) == (y in self._up[x]) for x in U for y in U):
                out.append(pi)
        return out

    def __repr__(self) -> str:
        return f"FinitePoset({self.name}: " + ", ".join(f"{q}<={p}" for q, p in self.edges()) + ")"


def parse_poset(text: str, name: str = "finite") -> FinitePoset:
    """Read ``q <= p`` lines (``#`` comments, bare labels declare isolated elements)."""
    elements: list[str] = []
    relations: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "<=" in line:
            q, p = (s.strip() for s in line.split("<=", 1))
            if not q or not p or " " in q or " " in p:
                raise ForcingLabError("CONFIG_PARSE", f"line {lineno}: bad edge {raw!r}")
            relations.append((q, p))
        elif " " not in line:
            elements.append(line)
        else:
            raise ForcingLabError("CONFIG_PARSE", f"line {lineno}: cannot parse {raw!r}")
    return FinitePoset(elements, relations, name=name)


_LABELS = "1abcdefghijklmnopqrstuvwxyz"


def enumerate_posets(max_size: int) -> list[FinitePoset]:
    """All posets with a top element and at most ``max_size`` elements, up to isomorphism.

    Each poset of size n arises from one of size n-1 by adding a new minimal
    element below a nonempty up-closed set; isomorphic copies are removed by a
    canonical form minimised over permutations of the non-top elements.
    """
    classes: dict[int, list[frozenset]] = {1: [frozenset({(0, 0)})]}
    for n in range(2, max_size + 1):
        seen: set = set()
        found: list[frozenset] = []
        for rel in classes[n - 1]:
            m = n - 1
            ups = _upsets(rel, m)
            for U in ups:
                new = set(rel) | {(m, m)} | {(m, u) for u in U}
                key = _canonical(new, n)
                if key not in seen:
                    seen.add(key)
                    found.append(frozenset(key))
        classes[n] = found
    out = []
    for n in range(1, max_size + 1):
        for k, rel in enumerate(classes[n]):
            labels = _LABELS[:n]
            pairs = [(labels[i], labels[j]) for i, j in rel]
            out.append(FinitePoset(labels, pairs, name=f"P{n}_{k}"))
    return out


def _upsets(rel: frozenset, m: int) -> list[frozenset]:
    out = []
    for mask in range(1, 1 << m):
        U = {i for i in range(m) if mask >> i & 1}
        if 0 in U and all(j in U for (i, j) in rel if i in U):
            out.append(frozenset(U))
    return out


def _canonical(rel: set, n: int) -> tuple:
    best = None
    for perm in itertools.permutations(range(1, n)):
        relabel = (0,) + perm
        key = tuple(sorted((relabel[i], relabel[j]) for i, j in rel))
        if best is None or key < best:
            best = key
    return best
