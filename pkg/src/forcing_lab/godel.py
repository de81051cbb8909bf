"""The eight Gödel operations on HF sets, Val by composition, and Gödel terms.

Tuples are left-nested Kuratowski pairs, as in :mod:`forcing_lab.hf`.  The
relation-style operations act on the members that parse as pairs or triples
and ignore the rest.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

from .errors import ForcingLabError
from .hf import EMPTY, HF, pair, parse, power, rank_segment, tup, unpair, untuple
from .names import All, And, Eq, Ex, In, Not, Or, Var, parse_formula

# --- the eight operations ---------------------------------------------------


def f1(x: HF, y: HF) -> HF:
    return HF((x, y))


def f2(x: HF) -> HF:
    return HF(pair(u, v) for u in x for v in x if u in v)


def f3(x: HF, y: HF) -> HF:
    return HF(x - y)


def f4(x: HF, y: HF) -> HF:
    return HF(pair(u, v) for u in x for v in y)


def f5(x: HF) -> HF:
    return HF(m for y in x for m in y)


def f6(x: HF) -> HF:
    return HF(pv[0] for pv in map(unpair, x) if pv is not None)


def _triples(x: HF):
    return (t for t in (untuple(m, 3) for m in x) if t is not None)


def f7(x: HF) -> HF:
    return HF(tup(u, w, v) for u, v, w in _triples(x))


def f8(x: HF, y: HF | None = None) -> HF:
    # the second argument never matters; terms apply this operation to one value
    return HF(tup(v, u, w) for u, v, w in _triples(x))


UNARY = {2: f2, 5: f5, 6: f6, 7: f7, 8: f8}
BINARY = {1: f1, 3: f3, 4: f4}

# --- derived operations, two ways --------------------------------------------


def intersect(x: HF, y: HF) -> HF:
    return f3(x, f3(x, y))


def inverse(x: HF) -> HF:
    """{(z, y) : (y, z) in x}: tag each pair with a dummy third coordinate, swap, project."""
    return f6(f8(f4(x, f1(x, x))))


def range_(x: HF) -> HF:
    return f6(inverse(x))


dom = f6


def intersect_direct(x: HF, y: HF) -> HF:
    return HF(x & y)


def inverse_direct(x: HF) -> HF:
    return HF(pair(v, u) for u, v in filter(None, map(unpair, x)))


def range_direct(x: HF) -> HF:
    return HF(v for _, v in filter(None, map(unpair, x)))


def dom_direct(x: HF) -> HF:
    return HF(u for u, _ in filter(None, map(unpair, x)))


# --- coordinate selection ----------------------------------------------------


def _check_indices(i: int, j: int, n: int) -> None:
    if n < 2 or not (0 <= i < n and 0 <= j < n) or i == j:
        raise ForcingLabError("BAD_INDICES", f"need n >= 2 and distinct i, j < n; got i={i}, j={j}, n={n}")


def f_sel(i: int, j: int, n: int, x: HF, y: HF) -> HF:
    """{(a_0..a_{n-1}) in y^n : (a_i, a_j) in x}, built from the operations by induction on n."""
    _check_indices(i, j, n)
    if i > j:
        return f_sel(j, i, n, inverse(x), y)
    if j < n - 1:
        return f4(f_sel(i, j, n - 1, x, y), y)
    # j is the last coordinate
    if n == 2:
        return intersect(x, f4(y, y))
    if i == n - 2:
        # (u, v, w) with (v, w) in x and u in y^(n-2): start from (v, w, u) and permute
        return f8(f7(f4(intersect(x, f4(y, y)), power(y, n - 2))))
    # insert the new coordinate c before the last: (t, a, c) -> (t, c, a)
    return f7(f4(f_sel(i, n - 2, n - 1, x, y), y))


def f_sel_direct(i: int, j: int, n: int, x: HF, y: HF) -> HF:
    _check_indices(i, j, n)
    ys = sorted(y, key=HF.sort_key)
    return HF(tup(*a) for a in itertools.product(ys, repeat=n) if pair(a[i], a[j]) in x)


# --- Val and the direct model checker ---------------------------------------

MAX_DOMAIN = 6
MAX_TUPLES = 4096


def _var_index(v) -> int:
    name = v.name if isinstance(v, Var) else str(v)
    if not (name.startswith("v") and name[1:].isdigit()):
        raise ForcingLabError("CONFIG_PARSE", f"variables are v0, v1, ...; got {name!r}")
    return int(name[1:])


def free_vars(phi) -> set[int]:
    if isinstance(phi, (In, Eq)):
        return {_var_index(phi.left), _var_index(phi.right)}
    if isinstance(phi, Not):
        return free_vars(phi.body)
    if isinstance(phi, (And, Or)):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, (All, Ex)):
        return free_vars(phi.body) - {_var_index(phi.var)}
    raise ForcingLabError("CONFIG_PARSE", f"not a formula: {phi!r}")


def quantifier_depth(phi) -> int:
    if isinstance(phi, (In, Eq)):
        return 0
    if isinstance(phi, Not):
        return quantifier_depth(phi.body)
    if isinstance(phi, (And, Or)):
        return max(quantifier_depth(phi.left), quantifier_depth(phi.right))
    return 1 + quantifier_depth(phi.body)


def _scale(x: HF, n: int) -> None:
    if len(x) > MAX_DOMAIN or len(x) ** n > MAX_TUPLES:
        raise ForcingLabError("SCALE_EXCEEDED", f"|x|={len(x)} with {n} coordinates exceeds the caps")


def _arity(phi, n: int | None) -> int:
    need = max(free_vars(phi), default=-1) + 1
    n = max(need, 1) if n is None else n
    if n < max(need, 1):
        raise ForcingLabError("CONFIG_PARSE", f"formula has free v{need - 1} but only {n} coordinates")
    return n


def _leveled(phi, env: dict[int, int], depth: int):
    """Rename bound variables so the quantifier at nesting level d binds coordinate depth+d."""
    if isinstance(phi, (In, Eq)):
        a, b = _var_index(phi.left), _var_index(phi.right)
        return type(phi)(env.get(a, a), env.get(b, b))
    if isinstance(phi, Not):
        return ("not", _leveled(phi.body, env, depth))
    if isinstance(phi, (And, Or)):
        tag = "and" if isinstance(phi, And) else "or"
        return (tag, _leveled(phi.left, env, depth), _leveled(phi.right, env, depth))
    tag = "ex" if isinstance(phi, Ex) else "all"
    inner = dict(env)
    inner[_var_index(phi.var)] = depth
    return (tag, _leveled(phi.body, inner, depth + 1))


def _diagonal(i: int, j: int, n: int, x: HF) -> HF:
    # the identity relation is taken as given; everything else is composed
    ident = HF(pair(u, u) for u in x)
    return f_sel(i, j, n, ident, x)


def _val(node, x: HF, n: int) -> HF:
    full = power(x, n)
    if isinstance(node, (In, Eq)):
        i, j = node.left, node.right
        if i == j:
            return full if isinstance(node, Eq) else EMPTY
        if n < 2:
            raise AssertionError("two distinct variables need two coordinates")
        return f_sel(i, j, n, f2(x), x) if isinstance(node, In) else _diagonal(i, j, n, x)
    tag = node[0]
    if tag == "not":
        return f3(full, _val(node[1], x, n))
    if tag == "and":
        return intersect(_val(node[1], x, n), _val(node[2], x, n))
    if tag == "or":
        return f3(full, intersect(f3(full, _val(node[1], x, n)), f3(full, _val(node[2], x, n))))
    inner = _val(node[1], x, n + 1)
    if tag == "ex":
        return f6(inner)
    # for all = not exists not
    return f3(full, f6(f3(power(x, n + 1), inner)))


def val(phi, x: HF, n: int | None = None) -> HF:
    """n-tuples from x satisfying phi in (x, ∈), computed by composing the operations.

    An existential quantifier over the last coordinate is a projection onto the
    first component of each pair, i.e. the domain.
    """
    n = _arity(phi, n)
    _scale(x, n + quantifier_depth(phi))
    return _val(_leveled(phi, {}, n), x, n)


def direct_modelcheck(phi, x: HF, n: int | None = None) -> HF:
    n = _arity(phi, n)
    _scale(x, n + quantifier_depth(phi))
    xs = sorted(x, key=HF.sort_key)

    def sat(f, a: dict) -> bool:
        if isinstance(f, In):
            return a[_var_index(f.left)] in a[_var_index(f.right)]
        if isinstance(f, Eq):
            return a[_var_index(f.left)] == a[_var_index(f.right)]
        if isinstance(f, Not):
            return not sat(f.body, a)
        if isinstance(f, And):
            return sat(f.left, a) and sat(f.right, a)
        if isinstance(f, Or):
            return sat(f.left, a) or sat(f.right, a)
        k = _var_index(f.var)
        results = (sat(f.body, {**a, k: u}) for u in xs)
        return any(results) if isinstance(f, Ex) else all(results)

    return HF(tup(*t) for t in itertools.product(xs, repeat=n) if sat(phi, dict(enumerate(t))))


def parse_fo(text: str):
    """Prefix syntax over variables v0, v1, ...: ``(ex v1 (in v0 v1))``."""
    phi = parse_formula(text, notion=None)
    free_vars(phi)  # validates variable names
    return phi


ORDINAL_FORMULA = "(and (all v1 (all v2 (or (not (and (in v2 v1) (in v1 v0))) (in v2 v0))))" \
    " (all v1 (all v2 (or (not (and (in v1 v0) (in v2 v0))) (or (in v1 v2) (or (eq v1 v2) (in v2 v1)))))))"


# --- Gödel terms ---------------------------------------------------------------


@dataclass(frozen=True)
class GodelTerm:
    entries: tuple

    def __post_init__(self):
        if not self.entries:
            raise ForcingLabError("MALFORMED_TERM", "a term needs at least one entry")
        for k, e in enumerate(self.entries):
            if e not in _choices(k):
                raise ForcingLabError("MALFORMED_TERM", f"entry {k} = {e!r} is not allowed at position {k}")

    @classmethod
    def from_json(cls, data) -> "GodelTerm":
        if isinstance(data, str):
            try:
                data = json.loads(data)
            except json.JSONDecodeError as exc:
                raise ForcingLabError("MALFORMED_TERM", f"not JSON: {exc}") from exc
        if not isinstance(data, list):
            raise ForcingLabError("MALFORMED_TERM", "a term is a JSON array")
        return cls(tuple(e if isinstance(e, int) else tuple(e) for e in data))

    def to_json(self) -> list:
        return [e if isinstance(e, int) else list(e) for e in self.entries]


@lru_cache(maxsize=None)
def _choices(k: int) -> tuple:
    leaves = (0, 1, 2)
    unary = tuple((i, n) for i in (2, 5, 6, 7, 8) for n in range(k))
    binary = tuple((i, n, p) for i in (1, 3, 4) for n in range(k) for p in range(k))
    return leaves + unary + binary


def eval_term(t: GodelTerm, delta: HF, a: HF, v_xi: HF | int) -> HF:
    """nu(q) for the term t; an int for v_xi stands for the rank segment of that height."""
    if isinstance(v_xi, int):
        v_xi = rank_segment(v_xi)
    nu: list[HF] = []
    for e in t.entries:
        if isinstance(e, int):
            nu.append((delta, a, v_xi)[e])
        elif len(e) == 2:
            nu.append(UNARY[e[0]](nu[e[1]]))
        else:
            nu.append(BINARY[e[0]](nu[e[1]], nu[e[2]]))
    return nu[-1]


def _count(length: int) -> int:
    c = 1
    for k in range(length):
        c *= len(_choices(k))
    return c


def term_index(t: GodelTerm) -> int:
    """Position of t in the enumeration: shorter terms first, then mixed radix over entries."""
    L = len(t.entries)
    offset = sum(_count(m) for m in range(1, L))
    code = 0
    for k, e in enumerate(t.entries):
        code = code * len(_choices(k)) + _choices(k).index(e)
    return offset + code


def term_at(j: int) -> GodelTerm:
    if j < 0:
        raise ForcingLabError("MALFORMED_TERM", "term indices are nonnegative")
    L = 1
    while j >= _count(L):
        j -= _count(L)
        L += 1
    digits = []
    for k in reversed(range(L)):
        base = len(_choices(k))
        digits.append(_choices(k)[j % base])
        j //= base
    return GodelTerm(tuple(reversed(digits)))


def parse_hf(text: str) -> HF:
    try:
        return parse(text)
    except ValueError as exc:
        raise ForcingLabError("CONFIG_PARSE", str(exc)) from exc


def product_check(x: HF, n: int) -> HF:
    """x^n by direct enumeration, for shape assertions."""
    xs = sorted(x, key=HF.sort_key)
    return HF(tup(*a) for a in itertools.product(xs, repeat=n))
