"""Exact measure arithmetic on finite unions of closed rational intervals.

Conditions of random and amoeba forcing are taken from the countable family
of finite interval unions.  Covers (the sets being avoided or the basic sets
of the limsup construction) are read as open sets: their endpoints never
count as members.
"""

from __future__ import annotations

import bisect
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

from .errors import ForcingLabError, Verdict
from .poset import DenseSet, FilterCertificate, ForcingNotion

Interval = tuple[Fraction, Fraction]


def _canon(intervals: Iterable[Interval]) -> tuple[Interval, ...]:
    items = sorted((_as_frac(a), _as_frac(b)) for a, b in intervals)
    out: list[list[Fraction]] = []
    for a, b in items:
        if a > b:
            raise ForcingLabError("CONFIG_PARSE", f"interval [{a},{b}] has a > b")
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return tuple((a, b) for a, b in out)


def _as_frac(x) -> Fraction:
    return x if type(x) is Fraction else Fraction(x)


@dataclass(frozen=True)
class DyadicUnion:
    """Sorted disjoint closed intervals; touching intervals are merged."""

    intervals: tuple = ()

    @classmethod
    def of(cls, intervals: Iterable[Sequence]) -> "DyadicUnion":
        return cls(_canon((a, b) for a, b in intervals))

    @classmethod
    def from_json(cls, data: Any) -> "DyadicUnion":
        try:
            return cls.of((_frac(a), _frac(b)) for a, b in data)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ForcingLabError("CONFIG_PARSE", f"bad interval union {data!r}") from exc

    def to_json(self) -> list:
        return [[[a.numerator, a.denominator], [b.numerator, b.denominator]] for a, b in self.intervals]

    @property
    def measure(self) -> Fraction:
        return sum((b - a for a, b in self.intervals), Fraction(0))

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def union(self, other: "DyadicUnion") -> "DyadicUnion":
        return DyadicUnion.of(self.intervals + other.intervals)

    def intersect(self, other: "DyadicUnion") -> "DyadicUnion":
        A, B = self.intervals, other.intervals
        if len(B) > len(A):
            A, B = B, A
        if len(B) <= 2:
            # few probes: locate each by bisection instead of a full sweep
            out = []
            for c, d in B:
                i = max(bisect.bisect_left(A, (c,)) - 1, 0)
                while i < len(A) and A[i][0] <= d:
                    lo, hi = max(A[i][0], c), min(A[i][1], d)
                    if lo <= hi:
                        out.append((lo, hi))
                    i += 1
            return DyadicUnion(tuple(out))
        out = []
        i = j = 0
        while i < len(A) and j < len(B):
            lo, hi = max(A[i][0], B[j][0]), min(A[i][1], B[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if A[i][1] < B[j][1]:
                i += 1
            else:
                j += 1
        return DyadicUnion.of(out)

    def minus_open(self, cover: "DyadicUnion") -> "DyadicUnion":
        """self minus the interior of ``cover``; the result is closed."""
        out = []
        for a, b in self.intervals:
            pieces = [(a, b)]
            for c, d in cover.intervals:
                nxt = []
                for x, y in pieces:
                    if d <= x or y <= c or c == d:
                        nxt.append((x, y))
                        continue
                    if x <= c:
                        nxt.append((x, c))
                    if d <= y:
                        nxt.append((d, y))
                pieces = nxt
            out.extend(pieces)
        return DyadicUnion.of(out)

    def regular(self) -> "DyadicUnion":
        """Drop degenerate (single-point) components."""
        return DyadicUnion(tuple((a, b) for a, b in self.intervals if a < b))

    def contains_closed(self, x: Fraction) -> bool:
        return any(a <= x <= b for a, b in self.intervals)

    def contains_open(self, x: Fraction) -> bool:
        return any(a < x < b for a, b in self.intervals)

    def subset_of(self, other: "DyadicUnion") -> bool:
        return all(any(c <= a and b <= d for c, d in other.intervals) for a, b in self.intervals)

    def __repr__(self) -> str:
        return "U(" + ",".join(f"[{a},{b}]" for a, b in self.intervals) + ")"


EMPTY_UNION = DyadicUnion()


def _frac(x) -> Fraction:
    if isinstance(x, (list, tuple)):
        num, den = x
        return Fraction(int(num), int(den))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"not a rational: {x!r}")


def measure(U: DyadicUnion) -> Fraction:
    return U.measure


def semimetric(K: DyadicUnion, C: DyadicUnion) -> Fraction:
    """mu(K symmetric-difference C), computed from the two set differences."""
    return K.minus_open(C).measure + C.minus_open(K).measure


# --- random and amoeba forcing -------------------------------------------


class MeasureNotion(ForcingNotion):
    """Interval unions inside an ambient interval with measure above ``floor``."""

    floor: Fraction = Fraction(0)

    def __init__(self, ambient: Interval, name: str):
        self.name = name
        self.ambient = DyadicUnion.of([ambient])

    @property
    def top(self) -> DyadicUnion:
        return self.ambient

    def is_condition(self, K) -> bool:
        return isinstance(K, DyadicUnion) and K.subset_of(self.ambient) and K.measure > self.floor

    def leq(self, K: DyadicUnion, C: DyadicUnion) -> bool:
        return K.subset_of(C)

    def encode(self, K: DyadicUnion) -> bytes:
        return json.dumps(K.to_json()).encode()

    def to_json(self, K: DyadicUnion) -> Any:
        return K.to_json()

    def compatible(self, K, C, budget=256, seed=0):
        w = K.intersect(C).regular()
        if w.measure > self.floor:
            return Verdict.YES, w
        return Verdict.NO, None

    def sample_extension(self, K: DyadicUnion, rng: random.Random) -> DyadicUnion:
        # shave a small piece off one component, keeping the measure above the floor
        slack = K.measure - self.floor
        a, b = rng.choice(K.intervals)
        cut = min(b - a, slack) * Fraction(rng.randrange(1, 4), 8)
        return DyadicUnion.of([(x, y) for x, y in K.intervals if (x, y) != (a, b)] + [(a, b - cut)]).regular()

    def dense(self, kind: str, args: Sequence[str]) -> DenseSet:
        if kind == "avoid":
            try:
                data = json.loads(args[0])
            except (IndexError, json.JSONDecodeError) as exc:
                raise ForcingLabError("CONFIG_PARSE", "avoid needs a JSON list of unions") from exc
            return avoid_null_dense(self, [DyadicUnion.from_json(u) for u in data])
        if kind == "point":
            return avoid_null_dense(self, point_covers(Fraction(args[0]), 200))
        raise ForcingLabError("CONFIG_PARSE", f"unknown {self.name} dense kind {kind!r}")

    def random_dense(self, rng: random.Random) -> DenseSet:
        lo, hi = self.ambient.intervals[0]
        x = lo + (hi - lo) * Fraction(rng.randrange(0, 257), 256)
        return avoid_null_dense(self, point_covers(x, 200), ident=f"point:{x}")

    def threshold(self, K: DyadicUnion) -> Fraction:
        raise NotImplementedError

    def generic_object(self, cert: FilterCertificate, precision: int = 0) -> DyadicUnion:
        return cert.last


class RandomNotion(MeasureNotion):
    floor = Fraction(0)

    def __init__(self, ambient: Interval = (Fraction(0), Fraction(1)), name: str = "random"):
        super().__init__(ambient, name)

    def threshold(self, K):
        return K.measure / 2


class AmoebaNotion(MeasureNotion):
    floor = Fraction(1)

    def __init__(self, ambient: Interval = (Fraction(0), Fraction(2)), name: str = "amoeba"):
        super().__init__(ambient, name)

    def threshold(self, K):
        return K.measure - 1


def random_compatible(K: DyadicUnion, C: DyadicUnion) -> tuple[Verdict, DyadicUnion | None]:
    w = K.intersect(C).regular()
    return (Verdict.YES, w) if w.measure > 0 else (Verdict.NO, None)


def point_covers(x: Fraction, count: int) -> list[DyadicUnion]:
    """Open intervals around x of measure 1/2^(n+2), n < count."""
    return [DyadicUnion.of([(x - Fraction(1, 2 ** (n + 3)), x + Fraction(1, 2 ** (n + 3)))]) for n in range(count)]


def avoid_null_dense(notion: MeasureNotion, covers: Sequence[DyadicUnion], ident: str | None = None) -> DenseSet:
    """{K : K misses some U_n}; refine removes the first U_n that takes less than the threshold."""

    def member(K: DyadicUnion) -> bool:
        return any(K.intersect(U).measure == 0 for U in covers)

    def refine(K: DyadicUnion) -> DyadicUnion:
        if member(K):
            return K
        limit = notion.threshold(K)
        for U in covers:
            if K.intersect(U).measure < limit:
                return K.minus_open(U).regular()
        raise ForcingLabError("INSUFFICIENT_COVER", f"no cover takes less than {limit} from {K}")

    return DenseSet(ident or f"avoid:{len(covers)}", member, refine)


# --- limsup covers ----------------------------------------------------------


def theta(p: int, q: int) -> int:
    """Cantor-style pairing with theta(0,0) = 0 and theta(p,q) > p otherwise."""
    return (p + q) * (p + q + 1) // 2 + p


def theta_inverse(n: int) -> tuple[int, int]:
    s = 0
    while (s + 1) * (s + 2) // 2 <= n:
        s += 1
    p = n - s * (s + 1) // 2
    return p, s - p


@dataclass(frozen=True)
class LimsupCover:
    W: tuple  # W[n] is a tuple of open intervals (a, b)
    hits: dict  # sample -> list of n with sample in W[n]
    cuts: dict  # p -> list of cut points l_{p,q}

    def measure(self, n: int) -> Fraction:
        return DyadicUnion.of(self.W[n]).measure


def limsup_cover(
    covers: Sequence[DyadicUnion],
    samples: Sequence[Fraction] = (),
    horizon: int | None = None,
    pairing: Callable[[int, int], int] = theta,
    unpairing: Callable[[int], tuple[int, int]] = theta_inverse,
) -> LimsupCover:
    if not covers:
        return LimsupCover((), {x: [] for x in samples}, {})
    slices: dict[tuple[int, int], list[Interval]] = {}
    cuts: dict[int, list[int]] = {}
    for p, U in enumerate(covers):
        bound = Fraction(1, 2 ** pairing(p, 0))
        if not U.measure < bound:
            raise ForcingLabError(
                "PRECONDITION_MEASURE", f"cover {p} has measure {U.measure}, needs < {bound}"
            )
        I = list(U.intervals)
        tail = [sum((b - a for a, b in I[l:]), Fraction(0)) for l in range(len(I) + 1)]
        ls = [0]
        q = 0
        while ls[-1] < len(I):
            q += 1
            target = Fraction(1, 2 ** pairing(p, q))
            l = ls[-1]
            while tail[l] >= target:
                l += 1
            ls.append(l)
            slices[(p, q - 1)] = I[ls[-2] : l]
        cuts[p] = ls
    top = max((pairing(p, q) for p, q in slices), default=0)
    horizon = top if horizon is None else horizon
    W: list[tuple] = []
    for n in range(horizon + 1):
        p, q = unpairing(n)
        V = slices.get((p, q), [])
        if not V:
            W.append(())
            continue
        mu = sum((b - a for a, b in V), Fraction(0))
        slack = Fraction(1, 2**n) - mu
        delta = slack / (4 * len(V))
        W.append(tuple((a - delta, b + delta) for a, b in V))
    hits = {x: [n for n, w in enumerate(W) if any(a < x < b for a, b in w)] for x in samples}
    return LimsupCover(tuple(W), hits, cuts)


# --- generators ---------------------------------------------------------------


def random_union(rng: random.Random, lo: Fraction = Fraction(0), hi: Fraction = Fraction(1),
                 pieces: int = 4, grain: int = 6) -> DyadicUnion:
    """A union of up to ``pieces`` intervals with endpoints on the 1/2^grain grid of [lo, hi]."""
    steps = 2**grain
    out = []
    for _ in range(rng.randint(1, pieces)):
        a, b = sorted(rng.sample(range(steps + 1), 2))
        out.append((lo + (hi - lo) * Fraction(a, steps), lo + (hi - lo) * Fraction(b, steps)))
    return DyadicUnion.of(out)


def perturb(K: DyadicUnion, eps: Fraction, rng: random.Random, ambient: Interval = (Fraction(0), Fraction(1))) -> DyadicUnion:
    """A union C with semimetric(K, C) < eps: shave one end and add a short piece elsewhere."""
    budget = eps * Fraction(rng.randrange(1, 8), 16)
    a, b = rng.choice(K.intervals)
    cut = min(b - a, budget)
    C = DyadicUnion.of([(x, y) for x, y in K.intervals if (x, y) != (a, b)] + [(a, b - cut)])
    lo, hi = ambient
    start = lo + (hi - lo - budget) * Fraction(rng.randrange(0, 65), 64)
    return C.union(DyadicUnion.of([(start, start + budget)]))


def identity_battery(count: int, seed: int) -> dict:
    """Check the measure identities and the compatibility witness on ``count`` random instances."""
    rng = random.Random(seed)
    fails = {"additivity": 0, "symmetric_difference": 0, "ccc_witness": 0}
    for _ in range(count):
        K, C = random_union(rng), random_union(rng)
        inter = K.intersect(C).measure
        if K.union(C).measure + inter != K.measure + C.measure:
            fails["additivity"] += 1
        if semimetric(K, C) != K.measure + C.measure - 2 * inter:
            fails["symmetric_difference"] += 1
        K0 = random_union(rng)
        if K0.measure == 0:
            K0 = DyadicUnion.of([(0, 1)])
        eps = K0.measure * Fraction(rng.randrange(1, 16), 32)  # 2 eps < mu(K0)
        A, B = perturb(K0, eps, rng), perturb(K0, eps, rng)
        if not (semimetric(A, K0) < eps and semimetric(B, K0) < eps):
            raise AssertionError("perturbation left the eps-ball")
        verdict, w = random_compatible(A, B)
        if verdict is not Verdict.YES or w.measure < K0.measure - 2 * eps:
            fails["ccc_witness"] += 1
    return {"instances": count, "failures": fails}


def cover_family(points: Sequence[Fraction], count: int) -> list[DyadicUnion]:
    """``count`` open covers of the given points, cover p of measure below 1/2^theta(p,0).

    Each point gets one interval per cover, spaced so the pieces stay disjoint.
    """
    pts = sorted(set(points))
    gap = min((b - a for a, b in zip(pts, pts[1:])), default=Fraction(1))
    out = []
    for p in range(count):
        bound = Fraction(1, 2 ** theta(p, 0))
        r = min(bound / (4 * len(pts)), gap / 4)
        out.append(DyadicUnion.of([(x - r, x + r) for x in pts]))
    return out
