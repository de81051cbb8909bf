"""Perfect subtrees of 2^<w truncated at a finite depth, and the fusion lemma.

A :class:`PerfectTree` holds every node of length <= ``depth``.  Leaves at the
truncation depth may carry a promise flag saying that the tree continues
perfectly above them; perfectness is only ever verified up to ``depth``.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

from ..errors import ForcingLabError
from ..poset import DenseSet, FilterCertificate, ForcingNotion

Node = tuple


def node_text(u: Node) -> str:
    return "".join(map(str, u)) or "-"


def parse_node(text: str) -> Node:
    text = text.strip()
    if text == "-":
        return ()
    if not text.isdigit():
        raise ForcingLabError("CONFIG_PARSE", f"bad node {text!r}")
    return tuple(int(c) for c in text)


@dataclass(frozen=True)
class PerfectTree:
    nodes: frozenset
    depth: int
    promise: frozenset = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.promise is None:
            object.__setattr__(self, "promise", frozenset(u for u in self.nodes if len(u) == self.depth))
        if () not in self.nodes:
            raise ForcingLabError("INVALID_CONDITION", "tree must contain the root")
        for u in self.nodes:
            if len(u) > self.depth or any(b not in (0, 1) for b in u):
                raise ForcingLabError("INVALID_CONDITION", f"bad node {node_text(u)}")
            if u and u[:-1] not in self.nodes:
                raise ForcingLabError("INVALID_CONDITION", f"not downward closed at {node_text(u)}")

    @classmethod
    def full(cls, depth: int) -> "PerfectTree":
        return cls(frozenset(u for n in range(depth + 1) for u in product((0, 1), repeat=n)), depth)

    @classmethod
    def from_leaves(cls, leaves: Iterable[Node], depth: int) -> "PerfectTree":
        return cls(frozenset(u[:i] for u in leaves for i in range(len(u) + 1)), depth)

    def children(self, u: Node) -> list[Node]:
        return [u + (b,) for b in (0, 1) if u + (b,) in self.nodes]

    def is_splitting(self, u: Node) -> bool:
        return len(self.children(u)) == 2

    def check_perfect(self) -> list[str]:
        """Problems with the perfectness invariant on the truncation (empty if fine)."""
        problems = []
        for u in sorted(self.nodes):
            if len(u) < self.depth and not self.children(u):
                problems.append(f"dead end at {node_text(u)}")
        for u in self.nodes:
            if not self._splits_or_promised(u):
                problems.append(f"no split or promise above {node_text(u)}")
        return sorted(problems)

    def _splits_or_promised(self, u: Node) -> bool:
        stack = [u]
        while stack:
            v = stack.pop()
            if self.is_splitting(v) or v in self.promise:
                return True
            stack.extend(self.children(v))
        return False

    def text(self) -> str:
        lines = [f"# depth {self.depth}"]
        all_leaves = self.promise == frozenset(u for u in self.nodes if len(u) == self.depth)
        for u in sorted(self.nodes, key=lambda v: (len(v), v)):
            mark = "*" if (u in self.promise and not all_leaves) else ""
            lines.append(node_text(u) + mark)
        return "\n".join(lines) + "\n"


def parse_tree(text: str) -> PerfectTree:
    """One node per line (``-`` is the root); ``# depth N`` sets the truncation; ``*`` marks promises."""
    depth = None
    nodes, promised = set(), set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "depth":
                depth = int(parts[1])
            continue
        star = line.endswith("*")
        u = parse_node(line.rstrip("*"))
        nodes.add(u)
        if star:
            promised.add(u)
    if depth is None:
        depth = max((len(u) for u in nodes), default=0)
    return PerfectTree(frozenset(nodes), depth, frozenset(promised) if promised else None)


def stem(T: PerfectTree) -> Node:
    u: Node = ()
    while True:
        ch = T.children(u)
        if len(ch) != 1:
            return u
        u = ch[0]


def lev(T: PerfectTree, n: int) -> frozenset:
    return frozenset(u for u in T.nodes if len(u) == n)


def below(T: PerfectTree, k: int) -> frozenset:
    """T_{<k}."""
    return frozenset(u for u in T.nodes if len(u) < k)


def restrict(T: PerfectTree, t: Node) -> PerfectTree:
    """T_t = nodes comparable with t."""
    if t not in T.nodes:
        raise ForcingLabError("NODE_NOT_IN_TREE", f"{node_text(t)} not in tree")
    keep = frozenset(u for u in T.nodes if t[: len(u)] == u or u[: len(t)] == t)
    return PerfectTree(keep, T.depth, frozenset(u for u in T.promise if u in keep))


def leq_k(U: PerfectTree, T: PerfectTree, k: int) -> bool:
    return U.nodes <= T.nodes and below(U, k) == below(T, k)


def _incomparable_pair_above(T: PerfectTree, t: Node, limit: int) -> tuple[Node, Node] | None:
    """u, v > t in T with len < limit and neither extending the other."""
    frontier = [t]
    while frontier:
        u = frontier.pop()
        if len(u) + 1 >= limit:
            continue
        ch = T.children(u)
        if len(ch) == 2:
            return ch[0], ch[1]
        frontier.extend(ch)
    return None


def splits_below(T: PerfectTree, lo: int, hi: int) -> tuple[Node, ...] | None:
    """First node of length <= lo without two incomparable extensions of length < hi, if any."""
    for u in sorted(T.nodes, key=lambda v: (len(v), v)):
        if len(u) <= lo and _incomparable_pair_above(T, u, hi) is None:
            return u
    return None


@dataclass(frozen=True)
class FusionResult:
    tree: PerfectTree
    ks: tuple
    verified_depth: int


def check_fusion(seq: Sequence[PerfectTree], ks: Sequence[int]) -> None:
    """Raise FUSION_PRECONDITION(n, t) at the first violated hypothesis."""
    if len(seq) != len(ks) or not seq:
        raise ForcingLabError("FUSION_PRECONDITION", "need one k per tree", n=None, t=None)
    for a, b in zip(ks, ks[1:]):
        if not a < b:
            raise ForcingLabError("FUSION_PRECONDITION", f"ks not increasing at {a},{b}", n=None, t=None)
    if ks[-1] > seq[0].depth:
        raise ForcingLabError("FUSION_PRECONDITION", "k beyond truncation depth", n=len(ks) - 1, t=None)
    for n in range(len(seq) - 1):
        cur, nxt = seq[n], seq[n + 1]
        if not leq_k(nxt, cur, ks[n]):
            raise ForcingLabError(
                "FUSION_PRECONDITION", f"T({n + 1}) is not <=_{ks[n]} T({n})", n=n, t=None
            )
        for t in sorted(lev(cur, ks[n])):
            if _incomparable_pair_above(nxt, t, ks[n + 1]) is None:
                raise ForcingLabError(
                    "FUSION_PRECONDITION",
                    f"no split above {node_text(t)} below level {ks[n + 1]} in T({n + 1})",
                    n=n,
                    t=node_text(t),
                )


def fuse(seq: Sequence[PerfectTree], ks: Sequence[int]) -> FusionResult:
    """Intersect a fusion sequence and verify the result against every stage."""
    check_fusion(seq, ks)
    nodes = frozenset.intersection(*(T.nodes for T in seq))
    promise = frozenset.intersection(*(T.promise for T in seq))
    out = PerfectTree(nodes, seq[0].depth, promise)
    for n, T in enumerate(seq):
        if not leq_k(out, T, ks[n]):
            raise AssertionError(f"fusion output not <=_{ks[n]} T({n})")
    lo = ks[-2] if len(ks) > 1 else -1
    bad = splits_below(out, lo, ks[-1]) if len(ks) > 1 else None
    if bad is not None:
        raise AssertionError(f"fusion output does not split above {node_text(bad)}")
    return FusionResult(out, tuple(ks), ks[-1])


# --- generators used by tests and the CLI --------------------------------


def first_split(T: PerfectTree, t: Node) -> Node | None:
    """Shallowest splitting node of T above (or at) t."""
    frontier = [t]
    while frontier:
        nxt = []
        for u in sorted(frontier):
            if T.is_splitting(u):
                return u
            nxt.extend(T.children(u))
        frontier = nxt
    return None


def random_perfect_subtree(T: PerfectTree, t: Node, rng: random.Random) -> frozenset:
    """Nodes of a subtree of T_t that keeps the first split above t.

    Above that split a splitting node may drop one child, but never two
    levels in a row, so every branch keeps splitting.
    """
    u = first_split(T, t)
    if u is None:
        raise ForcingLabError("FUSION_PRECONDITION", f"no split above {node_text(t)}", n=None, t=node_text(t))
    keep = {u[:i] for i in range(len(u) + 1)}
    stack = [(v, True) for v in T.children(u)]
    while stack:
        v, parent_split = stack.pop()
        keep.add(v)
        ch = T.children(v)
        if len(ch) == 2 and parent_split and rng.random() < 0.4:
            ch = [rng.choice(ch)]
        stack.extend((c, len(ch) == 2) for c in ch)
    return frozenset(keep)


def random_fusion_sequence(rng: random.Random, depth: int = 8, stages: int = 3) -> tuple[list[PerfectTree], list[int]]:
    """A valid fusion sequence starting from the full tree, with its ks.

    Stops early when the next k would pass the truncation depth.
    """
    seq = [PerfectTree.full(depth)]
    ks = [rng.randrange(0, 2)]
    while len(seq) < stages:
        cur, k = seq[-1], ks[-1]
        level = sorted(lev(cur, k))
        splits = [first_split(cur, t) for t in level]
        if any(u is None for u in splits):
            break
        need = max([k + 1] + [len(u) + 2 for u in splits])
        k_next = need + rng.randrange(0, 2)
        if k_next > depth:
            break
        nodes = set(below(cur, k))
        for t in level:
            nodes |= random_perfect_subtree(cur, t, rng)
        seq.append(PerfectTree(frozenset(nodes), depth, frozenset(u for u in cur.promise if u in nodes)))
        ks.append(k_next)
    return seq, ks


# --- Sacks forcing as a notion -------------------------------------------


class SacksNotion(ForcingNotion):
    """Perfect trees of a fixed truncation depth, ordered by inclusion."""

    def __init__(self, depth: int = 8, name: str = "sacks"):
        self.name = name
        self.depth = depth

    @property
    def top(self) -> PerfectTree:
        return PerfectTree.full(self.depth)

    def is_condition(self, T) -> bool:
        return isinstance(T, PerfectTree) and T.depth == self.depth and not T.check_perfect()

    def leq(self, U: PerfectTree, T: PerfectTree) -> bool:
        return U.nodes <= T.nodes

    def encode(self, T: PerfectTree) -> bytes:
        return json.dumps(sorted(node_text(u) for u in T.nodes)).encode()

    def to_json(self, T: PerfectTree):
        return sorted(node_text(u) for u in T.nodes if len(u) == T.depth)

    def sample_extension(self, T: PerfectTree, rng: random.Random) -> PerfectTree:
        leaves = sorted(lev(T, T.depth))
        return restrict(T, rng.choice(leaves)[: rng.randrange(0, T.depth)]) if leaves else T

    def dense(self, kind: str, args: Sequence[str]) -> DenseSet:
        if kind == "stemlen":
            return stem_length_dense(int(args[0]))
        raise ForcingLabError("CONFIG_PARSE", f"unknown Sacks dense kind {kind!r}")

    def random_dense(self, rng: random.Random) -> DenseSet:
        return stem_length_dense(rng.randrange(0, self.depth))

    def generic_object(self, cert: FilterCertificate, precision: int = 0) -> Node:
        return sacks_real(cert)


def stem_length_dense(n: int) -> DenseSet:
    """Trees whose stem has length >= n; refine goes to the leftmost branch at the stem."""

    def member(T: PerfectTree) -> bool:
        return len(stem(T)) >= n

    def refine(T: PerfectTree) -> PerfectTree:
        while len(stem(T)) < n:
            s = stem(T)
            ch = T.children(s)
            if not ch:
                raise ForcingLabError("SCALE_EXCEEDED", f"stem length {n} beyond truncation")
            T = restrict(T, ch[0])
        return T

    return DenseSet(f"stemlen:{n}", member, refine)


def sacks_real(cert: FilterCertificate) -> Node:
    """Union of the stems along the chain; stems of a chain are pairwise comparable."""
    best: Node = ()
    for T in cert.chain:
        s = stem(T)
        if best[: len(s)] != s[: len(best)]:
            raise ForcingLabError("INVALID_CONDITION", "incompatible stems in one filter")
        if len(s) > len(best):
            best = s
    return best
