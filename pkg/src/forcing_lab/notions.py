"""Registry of built-in forcing notions and the ``kind:args`` dense-set syntax."""

from __future__ import annotations

import random
from typing import Callable

from .classic import CohenNotion, CollapseNotion, CoverNotion, IntervalNotion
from .errors import ForcingLabError
from .measure import AmoebaNotion, RandomNotion
from .poset import DenseSet, ForcingNotion

NOTIONS: dict[str, Callable[[], ForcingNotion]] = {
    "cohen": lambda: CohenNotion(rows=(0, 1, 2, 3)),
    "interval": IntervalNotion,
    "collapse": CollapseNotion,
    "cover": CoverNotion,
    "random": RandomNotion,
    "amoeba": AmoebaNotion,
}


def make_notion(name: str) -> ForcingNotion:
    try:
        return NOTIONS[name]()
    except KeyError:
        raise ForcingLabError("CONFIG_PARSE", f"unknown notion {name!r}; known: {sorted(NOTIONS)}") from None


def parse_dense(notion: ForcingNotion, spec: str) -> DenseSet:
    """``dq:0``, ``rowsplit:0,1``, ``cover:0=3,1=5``, ``avoid:<json>`` and so on."""
    kind, sep, rest = spec.strip().partition(":")
    if not kind:
        raise ForcingLabError("CONFIG_PARSE", f"empty dense spec {spec!r}")
    if kind == "avoid":
        args = [rest]
    else:
        args = [a for a in rest.split(",")] if rest else []
    dense = getattr(notion, "dense", None)
    if dense is None:
        raise ForcingLabError("CONFIG_PARSE", f"{notion.name} has no dense-set syntax")
    try:
        return dense(kind, args)
    except (IndexError, ValueError) as exc:
        raise ForcingLabError("CONFIG_PARSE", f"bad dense spec {spec!r}: {exc}") from exc


def random_dense_family(notion: ForcingNotion, size: int, seed: int) -> list[DenseSet]:
    """``size`` random dense sets; ids are prefixed with their position so they stay distinct."""
    rng = random.Random(seed)
    out = []
    for i in range(size):
        d = notion.random_dense(rng)
        out.append(DenseSet(f"{i}/{d.id}", d.member, d.refine))
    return out
