"""The dense-sequence dichotomy for level products of small perfect trees.

For trees T_0..T_{d-1} (truncated, ``height`` levels each) and a set C of
levels, a coloring K of the union over m in C of Lev_m(T_0) x ... x Lev_m(T_{d-1})
satisfies one of two horns:

1. for every n there is an n-dense sequence whose product is colored 0;
2. some same-level tuple t has, for every n, an n-dense sequence above t
   whose product is colored 1.

An n-dense sequence is A_0..A_{d-1} inside one level m in C with m >= n such
that every node of Lev_n(T_i) has an extension in A_i.  Here n ranges over
0..max(C); beyond that no level of C is available.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

from ..errors import ForcingLabError
from .sacks import PerfectTree, lev, node_text

MAX_DIM = 2
MAX_HEIGHT = 4


def _comparable(u, v) -> bool:
    n = min(len(u), len(v))
    return u[:n] == v[:n]


def _levels_above(T: PerfectTree, t, n: int) -> list:
    """Lev_n of T_t."""
    return sorted(u for u in lev(T, n) if _comparable(u, t))


def _choices(T: PerfectTree, t, n: int, m: int) -> Iterator[tuple]:
    """Minimal n-dense sets at level m in T_t: one level-m extension per level-n node."""
    base = _levels_above(T, t, n)
    tops = _levels_above(T, t, m)
    options = [[u for u in tops if u[: len(s)] == s] for s in base]
    if any(not o for o in options):
        return
    for pick in product(*options):
        yield tuple(sorted(set(pick)))


@dataclass(frozen=True)
class HLVerdict:
    horn: int | None  # 1, 2, or None if neither holds
    both: bool
    witness: dict

    @property
    def holds(self) -> bool:
        return self.horn is not None


def _validate(trees: Sequence[PerfectTree], C: Sequence[int]) -> tuple[int, list[int]]:
    if not 1 <= len(trees) <= MAX_DIM:
        raise ForcingLabError("SCALE_EXCEEDED", f"dimension {len(trees)} outside 1..{MAX_DIM}")
    height = trees[0].depth + 1
    if any(T.depth + 1 != height for T in trees) or height > MAX_HEIGHT:
        raise ForcingLabError("SCALE_EXCEEDED", f"trees must share a height <= {MAX_HEIGHT}")
    levels = sorted(set(C))
    if not levels or levels[0] < 0 or levels[-1] >= height:
        raise ForcingLabError("CONFIG_PARSE", f"C must be a nonempty set of levels below {height}")
    return height, levels


def product_tuples(trees: Sequence[PerfectTree], C: Sequence[int]) -> list[tuple]:
    """All tuples of the level product over C, in a fixed order."""
    return [t for m in sorted(set(C)) for t in product(*(sorted(lev(T, m)) for T in trees))]


def _dense_search(trees, roots, n, levels, coloring, color):
    for m in levels:
        if m < n:
            continue
        per_tree = [list(_choices(T, r, n, m)) for T, r in zip(trees, roots)]
        for A in product(*per_tree):
            if all(coloring[t] == color for t in product(*A)):
                return m, A
    return None


def hl_check(trees: Sequence[PerfectTree], C: Sequence[int], coloring: dict) -> HLVerdict:
    """Decide which horn holds, with witnesses, by direct search."""
    height, levels = _validate(trees, C)
    top = levels[-1]
    roots = [()] * len(trees)
    horn1 = {}
    for n in range(top + 1):
        found = _dense_search(trees, roots, n, levels, coloring, 0)
        if found is None:
            horn1 = None
            break
        horn1[n] = found
    horn2 = None
    for L in range(height):
        for tt in product(*(sorted(lev(T, L)) for T in trees)):
            seqs = {}
            for n in range(top + 1):
                found = _dense_search(trees, tt, n, levels, coloring, 1)
                if found is None:
                    break
                seqs[n] = found
            else:
                horn2 = (tt, seqs)
                break
        if horn2 is not None:
            break

    def show(found):
        m, A = found
        return {"m": m, "A": [[node_text(u) for u in Ai] for Ai in A]}

    if horn1 is not None:
        witness = {"dense": {n: show(f) for n, f in horn1.items()}}
        return HLVerdict(1, horn2 is not None, witness)
    if horn2 is not None:
        tt, seqs = horn2
        return HLVerdict(2, False, {"t": [node_text(u) for u in tt], "dense": {n: show(f) for n, f in seqs.items()}})
    return HLVerdict(None, False, {})


class HLSweep:
    """Bitmask form of the dichotomy for sweeping every coloring of one instance.

    A coloring is an int whose bit j is the color of ``tuples[j]``.
    """

    def __init__(self, trees: Sequence[PerfectTree], C: Sequence[int]):
        height, levels = _validate(trees, C)
        self.tuples = product_tuples(trees, C)
        index = {t: j for j, t in enumerate(self.tuples)}
        top = levels[-1]

        def masks(roots, n):
            out = set()
            for m in levels:
                if m < n:
                    continue
                per_tree = [list(_choices(T, r, n, m)) for T, r in zip(trees, roots)]
                for A in product(*per_tree):
                    mask = 0
                    for t in product(*A):
                        mask |= 1 << index[t]
                    out.add(mask)
            return _minimal(out)

        roots = tuple(() for _ in trees)
        self.horn1 = [masks(roots, n) for n in range(top + 1)]
        self.horn2 = []
        for L in range(height):
            for tt in product(*(sorted(lev(T, L)) for T in trees)):
                self.horn2.append([masks(tt, n) for n in range(top + 1)])
        self.size = len(self.tuples)

    def verdict(self, c: int) -> tuple[bool, bool]:
        h1 = all(any(c & m == 0 for m in ms) for ms in self.horn1)
        h2 = any(all(any(m & c == m for m in ms) for ms in per_n) for per_n in self.horn2)
        return h1, h2

    def coloring(self, c: int) -> dict:
        return {t: (c >> j) & 1 for j, t in enumerate(self.tuples)}


def _minimal(masks: set[int]) -> list[int]:
    ordered = sorted(masks, key=lambda m: (bin(m).count("1"), m))
    keep: list[int] = []
    for m in ordered:
        if not any(k & m == k for k in keep):
            keep.append(m)
    return keep


def sweep(trees: Sequence[PerfectTree], C: Sequence[int], colorings: Iterator[int] | None = None) -> dict:
    """Count verdicts over all colorings (or the given ones)."""
    S = HLSweep(trees, C)
    stats = {"instances": 0, "horn1": 0, "horn2_only": 0, "both": 0, "neither": 0}
    for c in colorings if colorings is not None else range(1 << S.size):
        h1, h2 = S.verdict(c)
        stats["instances"] += 1
        if h1 and h2:
            stats["both"] += 1
        if h1:
            stats["horn1"] += 1
        elif h2:
            stats["horn2_only"] += 1
        else:
            stats["neither"] += 1
    return stats
