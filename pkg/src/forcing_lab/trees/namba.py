"""Namba trees over a finite alphabet, the Lev* recursion, pruning, and the game G_x.

The alphabet ``range(lam)`` stands in for omega_2, and player I's pruning sets
are limited to ``cap < lam`` elements, which keeps "strictly fewer than the
branching" as the only combinatorial fact used.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..errors import ForcingLabError

Node = tuple


def ntext(u: Node) -> str:
    return "".join(map(str, u)) or "-"


@dataclass(frozen=True)
class NambaTree:
    nodes: frozenset
    lam: int

    def __post_init__(self):
        if () not in self.nodes:
            raise ForcingLabError("INVALID_CONDITION", "tree must contain the root")
        for u in self.nodes:
            if u and u[:-1] not in self.nodes:
                raise ForcingLabError("INVALID_CONDITION", f"not closed under initial segments at {ntext(u)}")
            if any(not 0 <= a < self.lam for a in u):
                raise ForcingLabError("INVALID_CONDITION", f"letter outside alphabet at {ntext(u)}")

    @classmethod
    def from_leaves(cls, leaves: Iterable[Sequence[int]], lam: int) -> "NambaTree":
        return cls(frozenset(tuple(w[:i]) for w in leaves for i in range(len(w) + 1)), lam)

    @classmethod
    def full(cls, lam: int, depth: int, stem: Node = ()) -> "NambaTree":
        words = [stem + w for w in itertools.product(range(lam), repeat=depth)]
        return cls.from_leaves(words, lam)

    def suc(self, s: Node) -> list[Node]:
        return [s + (a,) for a in range(self.lam) if s + (a,) in self.nodes]

    def restrict(self, t: Node) -> "NambaTree":
        if t not in self.nodes:
            raise ForcingLabError("NODE_NOT_IN_TREE", f"{ntext(t)} not in tree")
        n = len(t)
        return NambaTree(frozenset(u for u in self.nodes if u[:n] == t or t[: len(u)] == u), self.lam)

    @property
    def depth(self) -> int:
        return max(len(u) for u in self.nodes)


def parse_namba(text: str, lam: int) -> NambaTree:
    nodes = set()
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "-":
            nodes.add(())
        elif line.isdigit():
            nodes.add(tuple(int(c) for c in line))
        else:
            raise ForcingLabError("CONFIG_PARSE", f"bad node {line!r}")
    return NambaTree(frozenset(nodes) | {()}, lam)


def namba_stem(T: NambaTree) -> Node:
    s: Node = ()
    while len(T.suc(s)) == 1:
        s = T.suc(s)[0]
    return s


def split_above(T: NambaTree, s: Node) -> Node:
    """Minimal s' >= s with more than one successor."""
    u = s
    while True:
        ch = T.suc(u)
        if len(ch) > 1:
            return u
        if not ch:
            raise ForcingLabError("NO_SPLIT_ABOVE", f"no splitting node above {ntext(s)} in the truncation")
        u = ch[0]


def suc_star(T: NambaTree, s: Node) -> list[Node]:
    return T.suc(split_above(T, s))


def lev_star(T: NambaTree, n: int) -> list[Node]:
    level = T.suc(split_above(T, ()))  # successors of the stem
    for _ in range(n):
        level = sorted(v for s in level for v in suc_star(T, s))
    return sorted(level)


def namba_prune(T: NambaTree) -> NambaTree:
    """Keep only the smallest successor at nodes whose successor count is strictly between 1 and lam."""
    keep = {()}
    stack = [()]
    while stack:
        s = stack.pop()
        ch = T.suc(s)
        if 1 < len(ch) < T.lam:
            ch = ch[:1]
        for c in ch:
            keep.add(c)
            stack.append(c)
    return NambaTree(frozenset(keep), T.lam)


def successor_sizes(T: NambaTree) -> set[int]:
    """Successor counts of the nodes that have successors."""
    return {len(T.suc(s)) for s in T.nodes if T.suc(s)}


def refine_step(T: NambaTree, n: int, choose) -> NambaTree:
    """One step of the Lev* refinement.

    For each s in Lev*_n(T), ``choose(s, T_s)`` returns a node f(s) >= s in T;
    the new tree keeps, above s, only the cone of f(s).
    """
    level = lev_star(T, n)
    keep = set()
    for s in level:
        f = choose(s, T.restrict(s))
        if f[: len(s)] != s or f not in T.nodes:
            raise ForcingLabError("NODE_NOT_IN_TREE", f"f({ntext(s)}) = {ntext(f)} is not above it")
        keep |= {u for u in T.nodes if u[: len(f)] == f or f[: len(u)] == u}
    level_set = set(level)
    for u in T.nodes:
        if not any(u[: len(s)] == s for s in level_set):
            keep.add(u)
    return NambaTree(frozenset(keep), T.lam)


# --- the game ---------------------------------------------------------------


@dataclass(frozen=True)
class GameResult:
    winner: str  # "I" or "II"
    strategy: dict  # position text -> move
    caps: dict


def _options(T: NambaTree, history: tuple) -> list[Node]:
    return lev_star(T, 0) if not history else suc_star(T, history[-1])


def _check_caps(T: NambaTree, depth: int, cap: int) -> None:
    if not 0 <= cap < T.lam:
        raise ForcingLabError("CONFIG_PARSE", f"pruning cap {cap} must be below |alphabet| = {T.lam}")
    if depth > 6 or T.lam > 8:
        raise ForcingLabError("SCALE_EXCEEDED", f"depth {depth}, alphabet {T.lam} beyond the solver's caps")


def solve_open_game(T: NambaTree, table: dict, x: Sequence[int], depth: int, cap: int) -> GameResult:
    """Backward induction.  Round n: I removes at most ``cap`` options, II picks one of the rest.

    II survives round n when table[s_n] == x[n]; II wins by surviving ``depth``
    rounds.  A node missing from the table counts as undecided, which loses for II.
    """
    _check_caps(T, depth, cap)
    memo: dict[tuple, list[Node]] = {}

    def good(history: tuple) -> list[Node]:
        # options where II survives this round and wins from there
        if history not in memo:
            n = len(history)
            out = []
            for s in _options(T, history):
                if table.get(s) != x[n]:
                    continue
                if n + 1 == depth or len(good(history + (s,))) > cap:
                    out.append(s)
            memo[history] = out
        return memo[history]

    winner = "II" if len(good(())) > cap else "I"
    strategy: dict = {}

    def key(history: tuple) -> str:
        return "/".join(ntext(s) for s in history) or "start"

    def record(history: tuple) -> None:
        # II lists its winning replies in order and plays the first one not removed;
        # I removes exactly the winning replies, which fit under the cap
        g = good(history)
        strategy[key(history)] = [ntext(s) for s in g]
        n = len(history)
        if n + 1 >= depth:
            return
        if winner == "II":
            nxt = g
        else:
            nxt = [s for s in _options(T, history) if s not in g and table.get(s) == x[n]]
        for s in nxt:
            record(history + (s,))

    record(())
    return GameResult(winner, strategy, {"depth": depth, "cap": cap, "lam": T.lam})


def minimax_winner(T: NambaTree, table: dict, x: Sequence[int], depth: int, cap: int) -> str:
    """Full game-tree search over every removal set of size <= cap."""
    _check_caps(T, depth, cap)

    def ii_wins(history: tuple) -> bool:
        n = len(history)
        if n == depth:
            return True
        opts = _options(T, history)
        removals = itertools.chain.from_iterable(itertools.combinations(opts, r) for r in range(cap + 1))
        for a in removals:
            rest = [s for s in opts if s not in a]
            if not any(table.get(s) == x[n] and ii_wins(history + (s,)) for s in rest):
                return False  # this removal beats every reply
        return True

    return "II" if ii_wins(()) else "I"


def validate_strategy(T: NambaTree, table: dict, x: Sequence[int], result: GameResult) -> bool:
    """Play the winner's strategy against every opposing line at the caps."""
    depth, cap = result.caps["depth"], result.caps["cap"]

    def key(h):
        return "/".join(ntext(s) for s in h) or "start"

    def play_ii(history: tuple) -> bool:
        n = len(history)
        if n == depth:
            return True
        opts = _options(T, history)
        plan = result.strategy.get(key(history))
        if plan is None:
            return False
        for r in range(cap + 1):
            for a in itertools.combinations(opts, r):
                removed = {ntext(s) for s in a}
                reply = next((p for p in plan if p not in removed), None)
                if reply is None:
                    return False
                s = next(o for o in opts if ntext(o) == reply)
                if table.get(s) != x[n] or not play_ii(history + (s,)):
                    return False
        return True

    def play_i(history: tuple) -> bool:
        n = len(history)
        if n == depth:
            return False
        opts = _options(T, history)
        removal = result.strategy.get(key(history))
        if removal is None or len(removal) > cap:
            return False
        for s in opts:
            if ntext(s) in removal:
                continue
            if table.get(s) == x[n] and not play_i(history + (s,)):
                return False
        return True

    return play_ii(()) if result.winner == "II" else play_i(())
