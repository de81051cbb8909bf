"""Sunflower extraction, coordinate-flip translations and tree codes of finite closed sets."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Sequence

from ..errors import ForcingLabError

# --- delta systems ----------------------------------------------------------


@dataclass(frozen=True)
class Sunflower:
    core: frozenset
    petals: tuple  # the subfamily

    def verify(self) -> bool:
        return all(a & b == self.core for a, b in combinations(self.petals, 2))


def sunflower_bound(n: int, k: int) -> int:
    """Families of n-sets larger than this contain a k-sunflower."""
    return math.factorial(n) * (k - 1) ** n


def delta_system(family: Iterable[Iterable], target: int) -> Sunflower:
    """A subfamily of ``target`` sets with a common pairwise intersection.

    The family is first cut down to its most common set size.  Extraction
    follows the two cases of the classical argument: a large pairwise
    disjoint subfamily gives an empty core; otherwise some element of the
    union of a maximal disjoint subfamily lies in many sets, and we recurse
    on the sets containing it.  If that fails the search is exhaustive.
    """
    sets = sorted({frozenset(x) for x in family}, key=lambda s: (len(s), sorted(map(repr, s))))
    if target <= 1:
        if not sets:
            raise ForcingLabError("FAMILY_TOO_SMALL", "empty family", bound=0)
        return Sunflower(sets[0] if target == 1 else frozenset(), tuple(sets[:target]))
    sizes = Counter(len(s) for s in sets)
    if not sizes:
        raise ForcingLabError("FAMILY_TOO_SMALL", "empty family", bound=0)
    n = max(sizes, key=lambda m: (sizes[m], -m))
    same = [s for s in sets if len(s) == n]
    found = _extract(same, target)
    if found is None:
        found = _exhaustive(same, target)
    if found is None:
        bound = sunflower_bound(n, target)
        raise ForcingLabError(
            "FAMILY_TOO_SMALL",
            f"{len(same)} sets of size {n} with no {target}-sunflower; {bound} suffice for a guarantee",
            bound=bound,
        )
    core, petals = found
    return Sunflower(frozenset(core), tuple(petals))


def _extract(sets: list[frozenset], k: int):
    if len(sets) < k:
        return None
    disjoint: list[frozenset] = []
    used: set = set()
    for s in sets:
        if not (s & used):
            disjoint.append(s)
            used |= s
    if len(disjoint) >= k:
        return frozenset(), disjoint[:k]
    counts = Counter(x for s in sets for x in s if x in used)
    if not counts:
        return None
    a = min(counts, key=lambda x: (-counts[x], repr(x)))
    got = _extract([s - {a} for s in sets if a in s], k)
    if got is None:
        return None
    core, petals = got
    return core | {a}, [p | {a} for p in petals]


def _exhaustive(sets: list[frozenset], k: int, cap: int = 200_000):
    if math.comb(len(sets), k) > cap:
        return None
    for combo in combinations(sets, k):
        core = combo[0] & combo[1]
        if all(a & b == core for a, b in combinations(combo, 2)):
            return core, list(combo)
    return None


def has_sunflower(family: Sequence[Iterable], k: int) -> bool:
    """Brute force: does some k-subfamily form a sunflower?"""
    sets = list({frozenset(x) for x in family})
    for combo in combinations(sets, k):
        core = combo[0] & combo[1]
        if all(a & b == core for a, b in combinations(combo, 2)):
            return True
    return False


# --- translations and tree codes -------------------------------------------

Word = tuple


def translate(u: Iterable[int], alpha: Word) -> Word:
    """Flip the coordinates of alpha listed in u."""
    flip = set(u)
    return tuple(1 - b if i in flip else b for i, b in enumerate(alpha))


def tree_code(F: Iterable[Word], depth: int) -> frozenset:
    """T_F: nodes of length <= depth whose cone meets F (words of length depth)."""
    F = list(F)
    for w in F:
        if len(w) != depth:
            raise ForcingLabError("CONFIG_PARSE", f"word {w} is not of length {depth}")
    return frozenset(w[:i] for w in F for i in range(depth + 1))


def nowhere_dense(F: Iterable[Word], depth: int) -> bool:
    """Every node of length < depth has an extension of length depth outside F."""
    F = set(F)
    code = tree_code(F, depth)
    # only nodes inside T_F can fail; their off-F extensions exist iff some child-cone is not full
    for s in sorted(code, key=len):
        if len(s) < depth and all(s + tail in F for tail in product((0, 1), repeat=depth - len(s))):
            return False
    return True


@dataclass(frozen=True)
class TranslationCover:
    k: int
    F_new: frozenset
    nowhere_dense: bool
    witnesses: dict  # word of F0 -> u with T_u(word) in F_new


def cover_by_translations(F0: Iterable[Word], k: int, F: Iterable[Word], depth: int) -> TranslationCover:
    """Extend (k, F) to (k, F') with F0 covered by the translates T_u(F'), u within {0..k}.

    F' adds to F every T_u(beta), beta in F0, whose first k coordinates lie in T_F.
    """
    F0, F = frozenset(F0), frozenset(F)
    if not F:
        raise ForcingLabError("INVALID_CONDITION", "F must be nonempty")
    for name, S in (("F0", F0), ("F", F)):
        if not nowhere_dense(S, depth):
            raise ForcingLabError("NOT_NOWHERE_DENSE", f"{name} is not nowhere dense at depth {depth}")
    if k > depth:
        raise ForcingLabError("SCALE_EXCEEDED", f"k={k} beyond depth {depth}")
    code = tree_code(F, depth)
    coords = list(range(min(k + 1, depth)))
    subsets = [frozenset(c) for r in range(len(coords) + 1) for c in combinations(coords, r)]
    added = {translate(u, b) for b in F0 for u in subsets if translate(u, b)[:k] in code}
    F_new = F | added
    witnesses = {}
    for b in sorted(F0):
        for u in subsets:
            if translate(u, b) in F_new:
                witnesses[b] = tuple(sorted(u))
                break
        else:
            raise AssertionError(f"{b} is not covered by a translate of F'")
    return TranslationCover(k, F_new, nowhere_dense(F_new, depth), witnesses)
