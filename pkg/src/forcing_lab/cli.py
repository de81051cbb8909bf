"""``forcing-lab``: batch front door that builds objects from specs, runs checks, and prints JSON reports.

Exit status is 0 when every verdict passes, 1 when some verdict fails, and 2
on errors (unparseable configuration, missing files, contract violations).
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import random
import re
import sys
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

from . import __version__
from .classic import CohenCond, CohenNotion, CollapseCond, IntervalCond, decided_prefix, parse_fraction
from .errors import ForcingLabError, Verdict
from .godel import (GodelTerm, direct_modelcheck, eval_term, parse_fo, parse_hf, quantifier_depth,
                    term_at, term_index, val)
from .measure import (DyadicUnion, cover_family, identity_battery, limsup_cover, random_compatible,
                      semimetric)
from .notions import NOTIONS, make_notion, parse_dense, random_dense_family
from .poset import DenseSet, FinitePoset, antichain_check, build_generic, dense_dp, parse_poset
from .prikry.engine import (Decision, PrikryCaps, PrikryCond, constant_statement, coordinate_in,
                            decision_chain, mathias_check, prikry_decide, prikry_leq_star)
from .prikry.handles import KAPPA, MeasureOracle, parse_handle, parse_seq
from .report import FAIL, PASS, all_pass, dumps, make_report, verdict
from .trees.combinatorics import delta_system
from .trees.halpern_lauchli import HLSweep, hl_check
from .trees.namba import (NambaTree, lev_star, minimax_winner, ntext, parse_namba, solve_open_game,
                          validate_strategy)
from .trees.sacks import PerfectTree, check_fusion, fuse, parse_tree, random_fusion_sequence

# --- argument helpers ---------------------------------------------------------


def parse_caps(text: str | None, allowed: dict[str, int]) -> dict[str, int]:
    """``key=value,...`` with positive integer values; unknown keys are errors."""
    caps = dict(allowed)
    if not text:
        return caps
    for pos, item in enumerate(text.split(",")):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in allowed:
            raise ForcingLabError("CONFIG_PARSE", f"--caps item {pos}: {item!r}; known keys {sorted(allowed)}",
                                  argument="--caps", index=pos)
        try:
            n = int(value)
        except ValueError:
            n = 0
        if n <= 0:
            raise ForcingLabError("CONFIG_PARSE", f"--caps {key} must be a positive integer",
                                  argument="--caps", index=pos)
        caps[key] = n
    return caps


def read_text(path: str, argument: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise ForcingLabError("FILE_NOT_FOUND", str(p), argument=argument)
    return p.read_text()


def read_json(value: str, argument: str) -> Any:
    """Inline JSON when the value starts with a bracket or brace, otherwise a file path."""
    text = value if value.lstrip()[:1] in ("[", "{") else read_text(value, argument)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ForcingLabError("CONFIG_PARSE", f"{argument}: {exc.msg}", argument=argument,
                              line=exc.lineno, column=exc.colno) from None


def int_list(text: str, argument: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ForcingLabError("CONFIG_PARSE", f"{argument}: expected comma-separated integers",
                              argument=argument) from None


@contextmanager
def _at(argument: str, index: int | None = None):
    """Attach the argument position to errors raised while parsing it."""
    try:
        yield
    except ForcingLabError as exc:
        if "argument" not in exc.details:
            exc.details["argument"] = argument
            if index is not None:
                exc.details["index"] = index
        raise


# --- generic ------------------------------------------------------------------


def _finite_dense(notion: FinitePoset, spec: str) -> DenseSet:
    kind, _, arg = spec.partition(":")
    if kind != "dp" or arg not in notion.finite_universe:
        raise ForcingLabError("CONFIG_PARSE", f"finite posets take dp:<element>, got {spec!r}")
    return dense_dp(notion, arg)


def _load_notion(args) -> Any:
    if args.poset:
        return parse_poset(read_text(args.poset, "--poset"), name=Path(args.poset).stem)
    if not args.notion:
        raise ForcingLabError("CONFIG_PARSE", "give --notion or --poset", argument="--notion")
    with _at("--notion"):
        return make_notion(args.notion)


def cmd_generic(args) -> dict:
    caps = parse_caps(args.caps, {"budget": 1000})
    notion = _load_notion(args)
    denses = []
    for i, spec in enumerate(args.dense or []):
        with _at("--dense", i):
            if isinstance(notion, FinitePoset):
                denses.append(_finite_dense(notion, spec))
            else:
                denses.append(parse_dense(notion, spec))
    if args.random:
        denses += random_dense_family(notion, args.random, args.seed)
    cert = build_generic(notion, denses, budget=caps["budget"])
    verdicts = {"chain_decreasing": verdict(all(notion.leq(q, p) for p, q in zip(cert.chain, cert.chain[1:])))}
    for d in denses:
        verdicts[f"met:{d.id}"] = verdict(d.member(cert.met[d.id]))
    witnesses: dict = {}
    if isinstance(notion, CohenNotion):
        witnesses["reals"] = _cohen_reals(notion, cert.last)
        for d in denses:
            if d.id.startswith("rowsplit:"):
                xi, zeta = d.id.split(":")[1].split(",")
                n = _split_point(cert.last, int(xi), int(zeta))
                witnesses[f"distinct:{xi},{zeta}"] = n
                verdicts[f"distinct:{xi},{zeta}"] = verdict(n is not None)
    else:
        witnesses["generic"] = notion.to_json(cert.last)
    config = {"notion": notion.name, "dense": list(args.dense or []), "random": args.random,
              "seed": args.seed, "caps": caps}
    return make_report(
        "generic", config,
        poset=notion.name,
        denses=[d.id for d in denses],
        chain=[notion.to_json(p) for p in cert.chain],
        met={k: notion.to_json(v) for k, v in cert.met.items()},
        verdicts=verdicts,
        witnesses=witnesses,
    )


def _cohen_reals(notion: CohenNotion, p: CohenCond) -> dict:
    out = {}
    for row in notion.rows:
        m = decided_prefix(p, row)
        bits = "".join(str(p.get(row, n)) for n in range(1, m + 1))
        value = sum((Fraction(1, 2**n) for n in range(1, m + 1) if p.get(row, n) == 1), Fraction(0))
        out[str(row)] = {"prefix": bits, "value": value}
    return out


def _split_point(p: CohenCond, xi: int, zeta: int) -> int | None:
    cols = sorted(n for (r, n) in p.as_dict() if r == xi and n >= 1)
    return next((n for n in cols if p.get(zeta, n) is not None and p.get(zeta, n) != p.get(xi, n)), None)


# --- antichain ----------------------------------------------------------------


def _parse_condition(notion, data: Any):
    name = notion.name
    try:
        if isinstance(notion, FinitePoset):
            if data not in notion.finite_universe:
                raise ForcingLabError("CONFIG_PARSE", f"{data!r} is not an element")
            return data
        if name == "cohen":
            return CohenCond.of({(int(r), int(n)): int(b) for r, n, b in data})
        if name == "interval":
            lo, hi = (_rational(x) for x in data)
            return IntervalCond(lo, hi)
        if name in ("random", "amoeba"):
            return DyadicUnion.from_json(data)
        if name == "collapse":
            return CollapseCond.of({int(k): int(v) for k, v in data.items()})
    except (TypeError, ValueError, AttributeError) as exc:
        raise ForcingLabError("CONFIG_PARSE", f"bad {name} condition {data!r}") from exc
    raise ForcingLabError("CONFIG_PARSE", f"no condition syntax for {name}")


def _rational(x) -> Fraction:
    if isinstance(x, list):
        return Fraction(int(x[0]), int(x[1]))
    return parse_fraction(str(x))


def cmd_antichain(args) -> dict:
    notion = _load_notion(args)
    if isinstance(notion, FinitePoset):
        raw = [c.strip() for c in args.conds.split(",") if c.strip()]
    else:
        raw = read_json(args.conds, "--conds")
        if not isinstance(raw, list):
            raise ForcingLabError("CONFIG_PARSE", "--conds must be a JSON list", argument="--conds")
    conds = []
    for i, c in enumerate(raw):
        with _at("--conds", i):
            conds.append(_parse_condition(notion, c))
    for c in conds:
        if not notion.is_condition(c):
            raise ForcingLabError("INVALID_CONDITION", f"{c!r} is not a {notion.name} condition", argument="--conds")
    v, w = antichain_check(notion, conds)
    witnesses = {}
    if w is not None:
        p, q, r = w
        witnesses["compatible_pair"] = [notion.to_json(p), notion.to_json(q)]
        witnesses["common_extension"] = notion.to_json(r)
    config = {"notion": notion.name, "conds": raw}
    return make_report("antichain", config, poset=notion.name,
                       verdicts={"antichain": verdict(v is Verdict.YES)},
                       witnesses={"answer": v.value, **witnesses})


# --- measure ------------------------------------------------------------------


def cmd_measure(args) -> dict:
    caps = parse_caps(args.caps, {"count": 1000})
    if args.union is not None:
        with _at("--union"):
            K = DyadicUnion.from_json(read_json(args.union, "--union"))
        with _at("--other"):
            C = DyadicUnion.from_json(read_json(args.other, "--other")) if args.other else DyadicUnion.of([])
        inter = K.intersect(C)
        d = semimetric(K, C)
        verdict_c, w = random_compatible(K, C)
        verdicts = {
            "additivity": verdict(K.union(C).measure + inter.measure == K.measure + C.measure),
            "symmetric_difference": verdict(d == K.measure + C.measure - 2 * inter.measure),
        }
        witnesses = {"measure": K.measure, "other_measure": C.measure, "intersection": inter.measure,
                     "semimetric": d, "compatible": verdict_c.value,
                     "common_extension": w.to_json() if w is not None else None}
        config = {"union": K.to_json(), "other": C.to_json()}
        return make_report("measure", config, verdicts=verdicts, witnesses=witnesses)
    stats = identity_battery(caps["count"], args.seed)
    verdicts = {k: verdict(v == 0) for k, v in stats["failures"].items()}
    return make_report("measure", {"seed": args.seed, "caps": caps}, verdicts=verdicts, witnesses=stats)


# --- limsup cover -------------------------------------------------------------


def cmd_limsup(args) -> dict:
    caps = parse_caps(args.caps, {"families": 6})
    if args.covers:
        data = read_json(args.covers, "--covers")
        if isinstance(data, list):
            data = {"covers": data, "samples": []}
        if not isinstance(data, dict) or "covers" not in data:
            raise ForcingLabError("CONFIG_PARSE", "--covers needs a list or {covers, samples}", argument="--covers")
        with _at("--covers"):
            covers = [DyadicUnion.from_json(u) for u in data["covers"]]
            samples = [_rational(x) for x in data.get("samples", [])]
    else:
        rng = random.Random(args.seed)
        samples = sorted({Fraction(rng.randrange(1, 256), 256) for _ in range(3)})
        covers = cover_family(samples, caps["families"])
    full = limsup_cover(covers, samples)
    horizon = args.horizon if args.horizon is not None else max(len(full.W) - 1, 0)
    mus = [full.measure(n) for n in range(len(full.W))]
    tails = [sum(mus[m:], Fraction(0)) for m in range(len(mus))]
    hits = {x: sorted(n for n in ns if n <= horizon) for x, ns in full.hits.items()}
    verdicts = {
        "measure_bound": verdict(all(mu < Fraction(1, 2**n) for n, mu in enumerate(mus))),
        "tail_bound": verdict(all(t < Fraction(2, 2**m) for m, t in enumerate(tails))),
    }
    if samples:
        verdicts["samples_hit_3"] = verdict(all(len(ns) >= 3 for ns in hits.values()))
    witnesses = {
        "W": [[[a, b] for a, b in w] for w in full.W[: horizon + 1]],
        "measures": mus[: horizon + 1],
        "hits": {f"{x.numerator}/{x.denominator}": ns for x, ns in hits.items()},
        "cuts": {str(p): c for p, c in full.cuts.items()},
    }
    config = {"covers": [c.to_json() for c in covers], "samples": samples, "horizon": horizon, "seed": args.seed}
    return make_report("limsup-cover", config, verdicts=verdicts, witnesses=witnesses)


# --- fusion -------------------------------------------------------------------


def _parse_trees(text: str) -> list[PerfectTree]:
    blocks = re.split(r"^---\s*$", text, flags=re.M)
    return [parse_tree(b) for b in blocks if b.strip()]


def cmd_fusion(args) -> dict:
    caps = parse_caps(args.caps, {"count": 20, "depth": 8, "stages": 3})
    if args.trees:
        with _at("--trees"):
            seq = _parse_trees(read_text(args.trees, "--trees"))
        ks = int_list(args.ks or "", "--ks")
        try:
            check_fusion(seq, ks)
        except ForcingLabError as exc:
            if exc.code != "FUSION_PRECONDITION":
                raise
            return make_report("fusion", {"trees": args.trees, "ks": ks},
                               verdicts={"precondition": FAIL},
                               witnesses={"n": exc.details.get("n"), "t": exc.details.get("t"),
                                          "message": exc.message})
        res = fuse(seq, ks)
        return make_report("fusion", {"trees": args.trees, "ks": ks},
                           verdicts={"precondition": PASS, "fused": PASS},
                           witnesses={"tree": res.tree.text(), "verified_depth": res.verified_depth})
    rng = random.Random(args.seed)
    verdicts, witnesses = {}, {}
    for i in range(caps["count"]):
        seq, ks = random_fusion_sequence(rng, depth=caps["depth"], stages=caps["stages"])
        res = fuse(seq, ks)
        verdicts[f"seq{i}"] = PASS
        witnesses[f"seq{i}"] = {"ks": list(ks), "nodes": len(res.tree.nodes), "verified_depth": res.verified_depth}
    return make_report("fusion", {"seed": args.seed, "caps": caps}, verdicts=verdicts, witnesses=witnesses)


# --- delta systems ------------------------------------------------------------


def random_pair_family(rng: random.Random, size: int = 9, universe: int = 12) -> list[frozenset]:
    pairs = [frozenset(p) for p in itertools.combinations(range(universe), 2)]
    return rng.sample(pairs, size)


def cmd_delta(args) -> dict:
    caps = parse_caps(args.caps, {"count": 10})
    if args.family:
        data = read_json(args.family, "--family")
        if not isinstance(data, list) or not all(isinstance(s, list) for s in data):
            raise ForcingLabError("CONFIG_PARSE", "--family must be a JSON list of lists", argument="--family")
        families = [[frozenset(map(json.dumps, s)) for s in data]]
        decode = json.loads
    else:
        rng = random.Random(args.seed)
        families = [random_pair_family(rng) for _ in range(caps["count"])]
        decode = lambda v: v  # noqa: E731
    verdicts, witnesses = {}, {}
    for i, fam in enumerate(families):
        sf = delta_system(fam, args.target)
        verdicts[f"family{i}"] = verdict(sf.verify() and len(sf.petals) == args.target)
        witnesses[f"family{i}"] = {
            "core": sorted(decode(x) for x in sf.core),
            "petals": [sorted(decode(x) for x in p) for p in sf.petals],
        }
    config = {"family": args.family, "target": args.target, "seed": args.seed, "caps": caps}
    return make_report("delta", config, verdicts=verdicts, witnesses=witnesses)


# --- Halpern-Lauchli ----------------------------------------------------------


def cmd_hl(args) -> dict:
    if args.tree:
        with _at("--tree"):
            T = parse_tree(read_text(args.tree, "--tree"))
    else:
        T = PerfectTree.full(args.height - 1)
    trees = [T] * args.dim
    C = int_list(args.levels, "--levels") if args.levels else list(range(trees[0].depth + 1))
    S = HLSweep(trees, C)
    config = {"dim": args.dim, "height": T.depth + 1, "levels": C, "seed": args.seed}
    if args.coloring is not None:
        if not 0 <= args.coloring < 1 << S.size:
            raise ForcingLabError("CONFIG_PARSE", f"coloring must be below 2^{S.size}", argument="--coloring")
        v = hl_check(trees, C, S.coloring(args.coloring))
        config["coloring"] = args.coloring
        return make_report("hl", config, verdicts={"dichotomy": verdict(v.holds)},
                           witnesses={"horn": v.horn, "both": v.both, "witness": v.witness})
    if args.sample:
        rng = random.Random(args.seed)
        colorings = [rng.getrandbits(S.size) for _ in range(args.sample)]
        config["sample"] = args.sample
    else:
        colorings = range(1 << S.size)
    stats = {"instances": 0, "horn1": 0, "horn2_only": 0, "both": 0, "neither": 0}
    for c in colorings:
        h1, h2 = S.verdict(c)
        stats["instances"] += 1
        stats["both"] += h1 and h2
        stats["horn1"] += h1
        stats["horn2_only"] += h2 and not h1
        stats["neither"] += not (h1 or h2)
    return make_report("hl", config, verdicts={"dichotomy": verdict(stats["neither"] == 0)},
                       witnesses={"tuples": S.size, **stats})


# --- Namba game ---------------------------------------------------------------


def _parse_word(text: str) -> tuple:
    text = text.strip()
    if text == "-":
        return ()
    if not text.isdigit():
        raise ForcingLabError("CONFIG_PARSE", f"bad node {text!r}")
    return tuple(int(c) for c in text)


def cmd_namba(args) -> dict:
    if args.tree:
        with _at("--tree"):
            T = parse_namba(read_text(args.tree, "--tree"), args.lam)
    else:
        T = NambaTree.full(args.lam, args.depth)
    x = int_list(args.x, "--x") if args.x else [0] * args.depth
    if len(x) < args.depth:
        raise ForcingLabError("CONFIG_PARSE", f"--x needs {args.depth} entries", argument="--x")
    if args.table:
        raw = read_json(args.table, "--table")
        with _at("--table"):
            table = {_parse_word(k): int(v) for k, v in raw.items()}
    else:
        rng = random.Random(args.seed)
        table = {u: rng.randrange(2) for u in sorted(T.nodes)}
    result = solve_open_game(T, table, x, args.depth, args.cap)
    mm = minimax_winner(T, table, x, args.depth, args.cap)
    levels = {}
    for n in range(args.depth):
        try:
            levels[str(n)] = [ntext(u) for u in lev_star(T, n)]
        except ForcingLabError:
            break
    config = {"lam": args.lam, "depth": args.depth, "cap": args.cap, "x": x, "seed": args.seed,
              "tree": args.tree, "table": {ntext(k): v for k, v in sorted(table.items())}}
    return make_report(
        "namba-game", config,
        verdicts={"strategy_valid": verdict(validate_strategy(T, table, x, result)),
                  "minimax_agrees": verdict(mm == result.winner)},
        witnesses={"winner": result.winner, "strategy": result.strategy, "lev_star": levels},
    )


# --- Prikry -------------------------------------------------------------------

_COORD = re.compile(r"^\s*C\((\d+)\)\s+in\s+(.+)$")


def parse_statement(text: str):
    """``C(i) in <handle>`` or ``const:FORCES`` / ``const:FORCES_NOT``."""
    if text.startswith("const:"):
        try:
            return constant_statement(text[6:].strip())
        except ValueError:
            raise ForcingLabError("CONFIG_PARSE", f"bad constant statement {text!r}") from None
    m = _COORD.match(text)
    if not m:
        raise ForcingLabError("CONFIG_PARSE", f"statement must be 'C(i) in <set>' or 'const:...', got {text!r}")
    return coordinate_in(int(m.group(1)), parse_handle(m.group(2)))


def parse_name(text: str) -> Callable[[int], object]:
    """``C(a) in <handle>``: a is in the name iff C(a) lands in the set.

    ``member:<handle>``: a is in the name iff a is in the set (decided outright).
    """
    if text.startswith("member:"):
        H = parse_handle(text[7:])
        return lambda a: constant_statement(Decision.FORCES if a in H else Decision.FORCES_NOT)
    m = re.match(r"^\s*C\(a\)\s+in\s+(.+)$", text)
    if not m:
        raise ForcingLabError("CONFIG_PARSE", f"name must be 'C(a) in <set>' or 'member:<set>', got {text!r}")
    H = parse_handle(m.group(1))
    return lambda a: coordinate_in(a, H)


def _oracle(args) -> MeasureOracle:
    if not args.table:
        return MeasureOracle({})
    data = read_json(args.table, "--table")
    if not isinstance(data, dict):
        raise ForcingLabError("CONFIG_PARSE", "--table must be a JSON object", argument="--table")
    with _at("--table"):
        return MeasureOracle(data)


def _condition(args) -> PrikryCond:
    with _at("--stem"):
        s = parse_seq(args.stem)
    with _at("--set"):
        A = parse_handle(args.set) if args.set else KAPPA
    return PrikryCond(s, A)


def cmd_prikry(args) -> dict:
    caps_d = parse_caps(args.caps, {"max_len": 3})
    caps = PrikryCaps(max_len=caps_d["max_len"])
    if args.action == "mathias":
        C = int_list(args.C, "--C")
        family = []
        for i, e in enumerate(args.set or []):
            with _at("--set", i):
                family.append(parse_handle(e))
        res = mathias_check(C, family, args.horizon)
        config = {"C": C, "sets": [h.text() for h in family], "horizon": args.horizon}
        return make_report("prikry mathias", config,
                           verdicts={f"set{i}:{r.handle}": verdict(r.ok) for i, r in enumerate(res)},
                           witnesses={"results": [r.to_json() for r in res]})
    oracle = _oracle(args)
    p = _condition(args)
    config = {"condition": p.to_json(), "table": {h.text(): a.value for h, a in oracle.table.items()},
              "caps": caps_d}
    if args.action == "decide":
        with _at("--phi"):
            phi = parse_statement(args.phi)
        config["phi"] = args.phi
        r = prikry_decide(p, phi, oracle, caps)
        audit = oracle.audit()
        verdicts = {
            "decides": verdict(r.decision.decided),
            "direct_extension": verdict(prikry_leq_star(r.cond, p)),
            "oracle_audit": verdict(not audit),
        }
        return make_report("prikry decide", config, verdicts=verdicts,
                           witnesses={**r.to_json(), "audit": audit})
    with _at("--name"):
        name = parse_name(args.name)
    config["name"] = args.name
    config["lam"] = args.lam
    forced, chain = decision_chain(p, args.lam, name, oracle, caps)
    audit = oracle.audit()
    verdicts = {
        "direct_chain": verdict(all(prikry_leq_star(b, a) for a, b in zip(chain, chain[1:]))),
        "oracle_audit": verdict(not audit),
    }
    return make_report("prikry chain", config, chain=[c.to_json() for c in chain], verdicts=verdicts,
                       witnesses={"forced": forced, "audit": audit})


# --- Gödel operations ---------------------------------------------------------


def cmd_godel(args) -> dict:
    if args.action == "val":
        with _at("--formula"):
            phi = parse_fo(args.formula)
        with _at("--x"):
            x = parse_hf(args.x)
        got = val(phi, x, args.n)
        want = direct_modelcheck(phi, x, args.n)
        config = {"formula": args.formula, "x": x.text, "n": args.n}
        return make_report("godel val", config, verdicts={"val_equals_direct": verdict(got == want)},
                           witnesses={"val": got.text, "direct": want.text, "size": len(got),
                                      "quantifier_depth": quantifier_depth(phi)})
    if args.index is not None:
        t = term_at(args.index)
    elif args.term:
        t = GodelTerm.from_json(args.term)
    else:
        raise ForcingLabError("CONFIG_PARSE", "give --term or --index", argument="--term")
    with _at("--delta"):
        delta = parse_hf(args.delta)
    with _at("--a"):
        a = parse_hf(args.a)
    value = eval_term(t, delta, a, args.xi)
    config = {"term": t.to_json(), "delta": delta.text, "a": a.text, "xi": args.xi}
    return make_report("godel term", config,
                       verdicts={"index_roundtrip": verdict(term_at(term_index(t)) == t)},
                       witnesses={"value": value.text, "index": term_index(t)})


# --- selftest -----------------------------------------------------------------

SELFTEST: list[list[str]] = [
    ["generic", "--notion", "cohen", "--dense", "rowsplit:0,1", "--seed", "7"],
    ["generic", "--notion", "cohen"],
    ["generic", "--notion", "interval", "--random", "20", "--seed", "3"],
    ["generic", "--notion", "random", "--random", "10", "--seed", "4"],
    ["generic", "--notion", "amoeba", "--random", "10", "--seed", "5"],
    ["generic", "--notion", "collapse", "--random", "20", "--seed", "6"],
    ["generic", "--notion", "cover", "--random", "20", "--seed", "8"],
    ["antichain", "--notion", "cohen", "--conds", "[[[0,1,0]],[[0,1,1]]]"],
    ["measure", "--seed", "1", "--caps", "count=200"],
    ["measure", "--union", "[[0,[1,2]]]", "--other", "[[[1,4],1]]"],
    ["limsup-cover", "--seed", "2", "--horizon", "30"],
    ["fusion", "--seed", "3", "--caps", "count=5"],
    ["delta", "--seed", "4", "--caps", "count=5"],
    ["hl", "--dim", "1", "--height", "3"],
    ["hl", "--dim", "2", "--height", "2", "--levels", "0,1"],
    ["namba-game", "--lam", "3", "--depth", "2", "--cap", "1", "--x", "0,1", "--seed", "5"],
    ["prikry", "decide", "--phi", "C(0) in evens", "--table", '{"evens": "IN"}'],
    ["prikry", "mathias", "--C", "2,4,6,8,10", "--set", "evens", "--set", "[5,inf)"],
    ["prikry", "chain", "--lam", "3", "--name", "C(a) in evens", "--table", '{"evens": "IN"}'],
    ["godel", "val", "--formula", "(ex v1 (in v1 v0))", "--x", "{{},{{}}}"],
    ["godel", "term", "--term", "[0,1,[4,0,1]]", "--delta", "{{}}", "--a", "{}", "--xi", "1"],
]


def cmd_selftest(args) -> dict:
    """Run each fixed config twice in-process and compare the serialized reports."""
    verdicts, witnesses = {}, {}
    for i, argv in enumerate(SELFTEST):
        first = _render(argv)
        second = _render(argv)
        key = f"{i:02d}:{' '.join(argv[:2]) if argv[0] in ('prikry', 'godel') else argv[0]}"
        ok = first[0] == second[0] and first[1] == 0
        verdicts[key] = verdict(ok)
        witnesses[key] = {"argv": argv, "sha256": hashlib.sha256(first[0].encode()).hexdigest(),
                          "exit": first[1]}
    return make_report("selftest", {"configs": len(SELFTEST)}, verdicts=verdicts, witnesses=witnesses)


def _render(argv: Sequence[str]) -> tuple[str, int]:
    args = build_parser().parse_args(list(argv))
    try:
        report = args.func(args)
    except ForcingLabError as exc:
        return _error_text(exc), 2
    return dumps(report), 0 if all_pass(report) else 1


# --- parser and entry point ---------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every randomized choice")
    common.add_argument("--caps", help="comma-separated key=value limits")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=["json"], default="json")

    ap = argparse.ArgumentParser(prog="forcing-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"forcing-lab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generic", parents=[common], help="build a generic filter meeting dense sets")
    p.add_argument("--notion", help=f"one of {', '.join(sorted(NOTIONS))}")
    p.add_argument("--poset", help="finite poset file of 'q <= p' lines")
    p.add_argument("--dense", action="append", help="dense set spec kind:args (repeatable)")
    p.add_argument("--random", type=int, default=0, help="add this many random dense sets")
    p.set_defaults(func=cmd_generic)

    p = sub.add_parser("antichain", parents=[common], help="check pairwise incompatibility")
    p.add_argument("--notion")
    p.add_argument("--poset")
    p.add_argument("--conds", required=True, help="labels a,b,c for posets; JSON list otherwise")
    p.set_defaults(func=cmd_antichain)

    p = sub.add_parser("measure", parents=[common], help="exact measure identities")
    p.add_argument("--union", help="interval union as JSON (or a file)")
    p.add_argument("--other", help="second union")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("limsup-cover", parents=[common], help="limsup cover of a null set")
    p.add_argument("--covers", help="JSON file: list of unions or {covers, samples}")
    p.add_argument("--horizon", type=int)
    p.set_defaults(func=cmd_limsup)

    p = sub.add_parser("fusion", parents=[common], help="fuse perfect-tree sequences")
    p.add_argument("--trees", help="file of trees separated by '---' lines")
    p.add_argument("--ks", help="comma-separated levels k_n")
    p.set_defaults(func=cmd_fusion)

    p = sub.add_parser("delta", parents=[common], help="sunflower extraction")
    p.add_argument("--family", help="JSON list of sets (or a file)")
    p.add_argument("--target", type=int, default=3)
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("hl", parents=[common], help="dense-sequence dichotomy on small trees")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--height", type=int, default=3)
    p.add_argument("--tree", help="perfect tree file (used in every coordinate)")
    p.add_argument("--levels", help="the level set C, comma-separated")
    p.add_argument("--coloring", type=int, help="one coloring as a bitmask")
    p.add_argument("--sample", type=int, help="random colorings instead of all")
    p.set_defaults(func=cmd_hl)

    p = sub.add_parser("namba-game", parents=[common], help="solve the pruning game on a Namba tree")
    p.add_argument("--lam", type=int, default=3)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--cap", type=int, default=1)
    p.add_argument("--tree", help="node-per-line tree file")
    p.add_argument("--table", help="JSON object node -> color (random if absent)")
    p.add_argument("--x", help="target colors per round, comma-separated")
    p.set_defaults(func=cmd_namba)

    p = sub.add_parser("prikry", parents=[common], help="Prikry decisions, Mathias checks, decision chains")
    p.add_argument("action", choices=["decide", "mathias", "chain"])
    p.add_argument("--stem", default="<>")
    p.add_argument("--set", action="append", help="measure-one part (decide, chain) or test sets (mathias)")
    p.add_argument("--table", help="decision table: JSON object handle -> IN/OUT (or a file)")
    p.add_argument("--phi", help="C(i) in <set> or const:FORCES")
    p.add_argument("--name", help="C(a) in <set> or member:<set>")
    p.add_argument("--lam", type=int, default=3)
    p.add_argument("--C", help="increasing sequence for mathias")
    p.add_argument("--horizon", type=int)
    p.set_defaults(func=_prikry_entry)

    p = sub.add_parser("godel", parents=[common], help="Gödel operations")
    p.add_argument("action", choices=["val", "term"])
    p.add_argument("--formula")
    p.add_argument("--x", default="{}")
    p.add_argument("--n", type=int)
    p.add_argument("--term", help="term as a JSON array")
    p.add_argument("--index", type=int, help="term by enumeration index")
    p.add_argument("--delta", default="{}")
    p.add_argument("--a", default="{}")
    p.add_argument("--xi", type=int, default=0)
    p.set_defaults(func=_godel_entry)

    p = sub.add_parser("selftest", parents=[common], help="run the fixed configs and check determinism")
    p.set_defaults(func=cmd_selftest)
    return ap


def _prikry_entry(args) -> dict:
    needs = {"decide": "phi", "chain": "name", "mathias": "C"}[args.action]
    if getattr(args, needs) is None:
        raise ForcingLabError("CONFIG_PARSE", f"prikry {args.action} needs --{needs}", argument=f"--{needs}")
    if args.action != "mathias":
        if args.set and len(args.set) > 1:
            raise ForcingLabError("CONFIG_PARSE", "give one --set for the condition", argument="--set")
        args.set = args.set[0] if args.set else None
    return cmd_prikry(args)


def _godel_entry(args) -> dict:
    if args.action == "val" and not args.formula:
        raise ForcingLabError("CONFIG_PARSE", "godel val needs --formula", argument="--formula")
    return cmd_godel(args)


def _error_text(exc: ForcingLabError) -> str:
    from .report import jsonable

    body = {"error": exc.code, "message": exc.message, "details": jsonable(exc.details)}
    return json.dumps(body, sort_keys=True) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = args.func(args)
    except ForcingLabError as exc:
        sys.stderr.write(_error_text(exc))
        return 2
    text = dumps(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if all_pass(report) else 1


if __name__ == "__main__":
    raise SystemExit(main())
