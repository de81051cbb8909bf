"""Deterministic JSON reports: rationals as [num, den], sorted keys, no timings."""

from __future__ import annotations

import dataclasses
import json
from enum import Enum
from fractions import Fraction
from typing import Any

from . import __version__
from .hf import HF

PASS = "PASS"
FAIL = "FAIL"


def jsonable(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, Fraction):
        return [obj.numerator, obj.denominator]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, HF):
        return obj.text
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    if hasattr(obj, "text") and callable(obj.text):
        return obj.text()
    if isinstance(obj, dict):
        return {_key(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        items = [jsonable(v) for v in obj]
        return sorted(items, key=lambda v: json.dumps(v, sort_keys=True))
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _key(k: Any) -> str:
    if isinstance(k, str):
        return k
    if isinstance(k, Fraction):
        return f"{k.numerator}/{k.denominator}"
    if isinstance(k, tuple):
        return ",".join(map(str, k))
    return str(jsonable(k))


def verdict(ok: bool) -> str:
    return PASS if ok else FAIL


def make_report(command: str, config: dict, *, poset=None, denses=(), chain=(), met=None,
                verdicts=None, witnesses=None) -> dict:
    return {
        "tool": "forcing-lab",
        "version": __version__,
        "command": command,
        "config": config,
        "poset": poset,
        "denses": list(denses),
        "chain": list(chain),
        "met": met or {},
        "verdicts": verdicts or {},
        "witnesses": witnesses or {},
    }


def dumps(report: dict) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def all_pass(report: dict) -> bool:
    return all(v == PASS for v in report["verdicts"].values())
