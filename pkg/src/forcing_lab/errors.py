"""Error type and three-valued verdicts shared by every module."""

from __future__ import annotations

from enum import Enum


class ForcingLabError(Exception):
    """Raised for contract violations; ``code`` is a stable machine-readable tag.

    Codes in use: UNIVERSE_REQUIRED, REFINER_VIOLATION, NOT_FINITE, RANK_EXCEEDED,
    NOT_EXTENDABLE, UNDECIDED_BITS, INSUFFICIENT_COVER, PRECONDITION_MEASURE,
    NODE_NOT_IN_TREE, FUSION_PRECONDITION, FAMILY_TOO_SMALL, NOT_NOWHERE_DENSE,
    SCALE_EXCEEDED, NO_SPLIT_ABOVE, SUBSET_UNDECIDABLE, ORACLE_UNDECIDED,
    ORACLE_INCONSISTENT, WINDOW_NONPERIODIC, BAD_INDICES, MALFORMED_TERM,
    INVALID_CONDITION, UNKNOWN, CONFIG_PARSE, FILE_NOT_FOUND.
    """

    def __init__(self, code: str, message: str = "", **details):
        self.code = code
        self.message = message
        self.details = details
        super().__init__(f"{code}: {message}" if message else code)


class Verdict(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    def __bool__(self) -> bool:  # pragma: no cover - guard against truthiness bugs
        raise TypeError("Verdict is three-valued; compare against Verdict.YES explicitly")
