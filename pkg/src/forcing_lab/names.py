"""P-names, their evaluation by filters, and the forcing relation on finite posets.

``forces`` is the semantic relation: p forces phi iff phi holds in the
evaluation by every atom generic below p.  ``forces_recursive`` is the usual
recursive definition through "dense below p" and serves as an independent
route for the same relation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Iterable, Sequence, Union

from .errors import ForcingLabError
from .hf import HF, rank as hf_rank
from .poset import FilterCertificate, ForcingNotion, atom_generic, minimal_elements

DEFAULT_RANK_BOUND = 4


@dataclass(frozen=True)
class PName:
    """A finite set of (child name, condition) pairs."""

    pairs: frozenset = frozenset()

    @classmethod
    def of(cls, pairs: Iterable[tuple["PName", Any]]) -> "PName":
        return cls(frozenset(pairs))

    @property
    def rank(self) -> int:
        return _name_rank(self)

    def conditions(self) -> set:
        out = set()
        for child, p in self.pairs:
            out.add(p)
            out |= child.conditions()
        return out

    def text(self, cond_text: Callable[[Any], str] = str) -> str:
        inner = sorted(f"({c.text(cond_text)},{cond_text(p)})" for c, p in self.pairs)
        return "{" + ",".join(inner) + "}"

    def __repr__(self) -> str:
        return self.text()


@lru_cache(maxsize=None)
def _name_rank(a: PName) -> int:
    return max((_name_rank(c) + 1 for c, _ in a.pairs), default=0)


EMPTY_NAME = PName()


def _check_rank(a: PName, bound: int) -> None:
    if a.rank > bound:
        raise ForcingLabError("RANK_EXCEEDED", f"name rank {a.rank} > bound {bound}")


def eval_name(a: PName, G: FilterCertificate) -> HF:
    """K_G(a) = {K_G(b) : (b, p) in a, p in G}."""
    memo: dict[PName, HF] = {}

    def ev(x: PName) -> HF:
        if x not in memo:
            memo[x] = HF(ev(b) for b, p in x.pairs if G.contains(p))
        return memo[x]

    return ev(a)


def check_name(x: HF, notion: ForcingNotion, bound: int = DEFAULT_RANK_BOUND) -> PName:
    if hf_rank(x) > bound:
        raise ForcingLabError("RANK_EXCEEDED", f"set rank {hf_rank(x)} > bound {bound}")
    top = notion.top
    memo: dict[HF, PName] = {}

    def ch(y: HF) -> PName:
        if y not in memo:
            memo[y] = PName.of((ch(z), top) for z in y)
        return memo[y]

    return ch(x)


def canonical_gamma(notion: ForcingNotion, bound: int = DEFAULT_RANK_BOUND) -> PName:
    """Gamma = {(check(p), p) : p in the universe}; it evaluates to the filter."""
    if notion.finite_universe is None:
        raise ForcingLabError("NOT_FINITE", f"{notion.name} has no finite universe")
    return PName.of((check_name(notion.to_hf(p), notion, bound), p) for p in notion.finite_universe)


# --- formulas -------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


Term = Union[PName, Var]


@dataclass(frozen=True)
class In:
    left: Term
    right: Term


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    body: Any


@dataclass(frozen=True)
class And:
    left: Any
    right: Any


@dataclass(frozen=True)
class Or:
    left: Any
    right: Any


@dataclass(frozen=True)
class All:
    var: str
    body: Any


@dataclass(frozen=True)
class Ex:
    var: str
    body: Any


Formula = Union[In, Eq, Not, And, Or, All, Ex]


def substitute(phi: Formula, var: str, a: PName) -> Formula:
    def term(t: Term) -> Term:
        return a if isinstance(t, Var) and t.name == var else t

    if isinstance(phi, In):
        return In(term(phi.left), term(phi.right))
    if isinstance(phi, Eq):
        return Eq(term(phi.left), term(phi.right))
    if isinstance(phi, Not):
        return Not(substitute(phi.body, var, a))
    if isinstance(phi, (And, Or)):
        return type(phi)(substitute(phi.left, var, a), substitute(phi.right, var, a))
    if isinstance(phi, (All, Ex)):
        if phi.var == var:
            return phi
        return type(phi)(phi.var, substitute(phi.body, var, a))
    raise TypeError(f"not a formula: {phi!r}")


def formula_names(phi: Formula) -> set[PName]:
    if isinstance(phi, (In, Eq)):
        return {t for t in (phi.left, phi.right) if isinstance(t, PName)}
    if isinstance(phi, Not):
        return formula_names(phi.body)
    if isinstance(phi, (And, Or)):
        return formula_names(phi.left) | formula_names(phi.right)
    if isinstance(phi, (All, Ex)):
        return formula_names(phi.body)
    raise TypeError(f"not a formula: {phi!r}")


def holds(phi: Formula, G: FilterCertificate, domain: Sequence[PName] = ()) -> bool:
    """Truth of phi in the evaluation by G; quantifiers range over ``domain``."""
    cache: dict[PName, HF] = {}

    def val(t: Term) -> HF:
        if isinstance(t, Var):
            raise ForcingLabError("CONFIG_PARSE", f"free variable {t.name}")
        if t not in cache:
            cache[t] = eval_name(t, G)
        return cache[t]

    def go(f: Formula) -> bool:
        if isinstance(f, In):
            return val(f.left) in val(f.right)
        if isinstance(f, Eq):
            return val(f.left) == val(f.right)
        if isinstance(f, Not):
            return not go(f.body)
        if isinstance(f, And):
            return go(f.left) and go(f.right)
        if isinstance(f, Or):
            return go(f.left) or go(f.right)
        if isinstance(f, All):
            return all(go(substitute(f.body, f.var, a)) for a in domain)
        if isinstance(f, Ex):
            return any(go(substitute(f.body, f.var, a)) for a in domain)
        raise TypeError(f"not a formula: {f!r}")

    return go(phi)


def _validate(notion: ForcingNotion, phi: Formula, domain: Sequence[PName], bound: int) -> None:
    if notion.finite_universe is None:
        raise ForcingLabError("NOT_FINITE", f"{notion.name} has no finite universe")
    for a in list(formula_names(phi)) + list(domain):
        _check_rank(a, bound)


def forces(
    notion: ForcingNotion,
    p: Any,
    phi: Formula,
    domain: Sequence[PName] = (),
    bound: int = DEFAULT_RANK_BOUND,
) -> bool:
    _validate(notion, phi, domain, bound)
    below = [m for m in minimal_elements(notion) if notion.leq(m, p)]
    return all(holds(phi, atom_generic(notion, m), domain) for m in below)


def forces_recursive(
    notion: ForcingNotion,
    p: Any,
    phi: Formula,
    domain: Sequence[PName] = (),
    bound: int = DEFAULT_RANK_BOUND,
) -> bool:
    """The recursive forcing relation, with density below p checked exhaustively."""
    _validate(notion, phi, domain, bound)
    U = notion.finite_universe
    below = {x: tuple(y for y in U if notion.leq(y, x)) for x in U}

    def dense_below(x, pred: Callable[[Any], bool]) -> bool:
        return all(any(pred(q) for q in below[r]) for r in below[x])

    @lru_cache(maxsize=None)
    def f_eq(x, t1: PName, t2: PName) -> bool:
        def half(a: PName, b: PName) -> bool:
            for pa, s1 in a.pairs:
                def ok(q, pa=pa, s1=s1):
                    if not notion.leq(q, s1):
                        return True
                    return any(notion.leq(q, s2) and f_eq(q, pa, pb) for pb, s2 in b.pairs)
                if not dense_below(x, ok):
                    return False
            return True

        return half(t1, t2) and half(t2, t1)

    @lru_cache(maxsize=None)
    def f_in(x, t1: PName, t2: PName) -> bool:
        return dense_below(
            x, lambda q: any(notion.leq(q, s) and f_eq(q, pi, t1) for pi, s in t2.pairs)
        )

    def go(x, f: Formula) -> bool:
        if isinstance(f, In):
            return f_in(x, f.left, f.right)
        if isinstance(f, Eq):
            return f_eq(x, f.left, f.right)
        if isinstance(f, Not):
            return not any(go(q, f.body) for q in below[x])
        if isinstance(f, And):
            return go(x, f.left) and go(x, f.right)
        if isinstance(f, Or):
            return dense_below(x, lambda q: go(q, f.left) or go(q, f.right))
        if isinstance(f, All):
            return all(go(x, substitute(f.body, f.var, a)) for a in domain)
        if isinstance(f, Ex):
            return dense_below(x, lambda q: any(go(q, substitute(f.body, f.var, a)) for a in domain))
        raise TypeError(f"not a formula: {f!r}")

    return go(p, phi)


# --- automorphisms --------------------------------------------------------


@dataclass(frozen=True)
class PosetAutomorphism:
    """An order automorphism given as a function on conditions."""

    notion: ForcingNotion
    fn: Callable[[Any], Any] = field(compare=False)

    def __call__(self, p: Any) -> Any:
        return self.fn(p)

    @classmethod
    def from_mapping(cls, notion: ForcingNotion, mapping: dict) -> "PosetAutomorphism":
        return cls(notion, mapping.__getitem__)

    def validate(self, universe: Iterable[Any] | None = None) -> bool:
        """Check order preservation both ways and pi(top) = top on the given conditions."""
        N = self.notion
        U = list(universe if universe is not None else (N.finite_universe or ()))
        if not N.same(self(N.top), N.top):
            return False
        images = {N.encode(self(p)) for p in U}
        if len(images) != len(U):
            return False
        return all(N.leq(p, q) == N.leq(self(p), self(q)) for p in U for q in U)


def apply_automorphism(pi: PosetAutomorphism, a: PName) -> PName:
    memo: dict[PName, PName] = {}

    def go(x: PName) -> PName:
        if x not in memo:
            memo[x] = PName.of((go(b), pi(p)) for b, p in x.pairs)
        return memo[x]

    return go(a)


def apply_automorphism_formula(pi: PosetAutomorphism, phi: Formula) -> Formula:
    def term(t: Term) -> Term:
        return apply_automorphism(pi, t) if isinstance(t, PName) else t

    if isinstance(phi, In):
        return In(term(phi.left), term(phi.right))
    if isinstance(phi, Eq):
        return Eq(term(phi.left), term(phi.right))
    if isinstance(phi, Not):
        return Not(apply_automorphism_formula(pi, phi.body))
    if isinstance(phi, (And, Or)):
        return type(phi)(
            apply_automorphism_formula(pi, phi.left), apply_automorphism_formula(pi, phi.right)
        )
    if isinstance(phi, (All, Ex)):
        return type(phi)(phi.var, apply_automorphism_formula(pi, phi.body))
    raise TypeError(f"not a formula: {phi!r}")


# --- text syntax ----------------------------------------------------------

_TOKEN = re.compile(r"\s*(check:|gamma\b|[(){},]|[A-Za-z0-9_.\-]+)")


def _tokens(text: str) -> list[str]:
    out, pos = [], 0
    text = text.strip()
    while pos < len(text):
        if text[pos:].startswith("check:"):
            depth, j = 0, pos + 6
            while j < len(text):
                depth += {"{": 1, "}": -1}.get(text[j], 0)
                j += 1
                if depth == 0:
                    break
            out.append(text[pos:j])
            pos = j
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise ForcingLabError("CONFIG_PARSE", f"unexpected input at {pos}: {text[pos:pos+10]!r}")
        out.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def parse_name(text: str, notion: ForcingNotion, bound: int = DEFAULT_RANK_BOUND,
               cond: Callable[[str], Any] | None = None) -> PName:
    """Parse ``{(name,cond),...}`` with ``check:<hf>`` and ``gamma`` shorthands."""
    toks = _tokens(text)
    name, rest = _parse_name_tokens(toks, notion, bound, cond or (lambda s: s))
    if rest:
        raise ForcingLabError("CONFIG_PARSE", f"trailing tokens {rest[:3]}")
    return name


def _parse_name_tokens(toks, notion, bound, cond):
    from .hf import parse as parse_hf

    if not toks:
        raise ForcingLabError("CONFIG_PARSE", "unexpected end of name")
    head, rest = toks[0], toks[1:]
    if head.startswith("check:"):
        try:
            return check_name(parse_hf(head[6:]), notion, bound), rest
        except ValueError as exc:
            raise ForcingLabError("CONFIG_PARSE", str(exc)) from exc
    if head == "gamma":
        return canonical_gamma(notion, bound), rest
    if head != "{":
        raise ForcingLabError("CONFIG_PARSE", f"expected name, got {head!r}")
    pairs = []
    if rest and rest[0] == "}":
        return EMPTY_NAME, rest[1:]
    while True:
        if not rest or rest[0] != "(":
            raise ForcingLabError("CONFIG_PARSE", "expected '(' in name")
        child, rest = _parse_name_tokens(rest[1:], notion, bound, cond)
        if len(rest) < 3 or rest[0] != "," or rest[2] != ")":
            raise ForcingLabError("CONFIG_PARSE", "expected ',cond)' in name")
        c = cond(rest[1])
        if not notion.is_condition(c):
            raise ForcingLabError("CONFIG_PARSE", f"unknown condition {rest[1]!r}")
        pairs.append((child, c))
        rest = rest[3:]
        if rest and rest[0] == ",":
            rest = rest[1:]
            continue
        if rest and rest[0] == "}":
            name = PName.of(pairs)
            _check_rank(name, bound)
            return name, rest[1:]
        raise ForcingLabError("CONFIG_PARSE", "expected ',' or '}' in name")


_OPS = {"in": 2, "eq": 2, "not": 1, "and": 2, "or": 2, "all": 2, "ex": 2}


def parse_formula(text: str, notion: ForcingNotion, env: dict[str, PName] | None = None,
                  bound: int = DEFAULT_RANK_BOUND) -> Formula:
    """Prefix syntax: ``(in A B)``, ``(not F)``, ``(all x F)`` and so on.

    Terms are name literals, keys of ``env``, or bound variables.
    """
    env = env or {}
    toks = _tokens(text)

    def term(ts):
        if ts and (ts[0] in ("{", "gamma") or ts[0].startswith("check:")):
            return _parse_name_tokens(ts, notion, bound, lambda s: s)
        if ts and ts[0] in env:
            return env[ts[0]], ts[1:]
        if ts and re.fullmatch(r"[A-Za-z_]\w*", ts[0]):
            return Var(ts[0]), ts[1:]
        raise ForcingLabError("CONFIG_PARSE", f"bad term near {ts[:3]}")

    def form(ts):
        if not ts or ts[0] != "(":
            raise ForcingLabError("CONFIG_PARSE", f"expected '(' near {ts[:3]}")
        if len(ts) < 2 or ts[1] not in _OPS:
            raise ForcingLabError("CONFIG_PARSE", f"unknown operator near {ts[:3]}")
        op, ts = ts[1], ts[2:]
        if op in ("in", "eq"):
            a, ts = term(ts)
            b, ts = term(ts)
            out = In(a, b) if op == "in" else Eq(a, b)
        elif op == "not":
            f, ts = form(ts)
            out = Not(f)
        elif op in ("and", "or"):
            f, ts = form(ts)
            g, ts = form(ts)
            out = And(f, g) if op == "and" else Or(f, g)
        else:
            if not ts:
                raise ForcingLabError("CONFIG_PARSE", "missing bound variable")
            v, ts = ts[0], ts[1:]
            f, ts = form(ts)
            out = All(v, f) if op == "all" else Ex(v, f)
        if not ts or ts[0] != ")":
            raise ForcingLabError("CONFIG_PARSE", "expected ')'")
        return out, ts[1:]

    phi, rest = form(toks)
    if rest:
        raise ForcingLabError("CONFIG_PARSE", f"trailing tokens {rest[:3]}")
    return phi
