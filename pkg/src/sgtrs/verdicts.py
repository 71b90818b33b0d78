"""Shared verdict type for the bounded decision procedures.

A bounded search never claims unreachability: the two outcomes are REACHABLE
(with a replayable witness when the engine has one) and UNKNOWN (with the
exhausted bounds spelled out).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


REACHABLE = "REACHABLE"
UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: Optional[tuple] = None
    bounds: Optional[dict] = None

    @property
    def reachable(self) -> bool:
        return self.status == REACHABLE

    def describe(self) -> str:
        if self.reachable:
            n = len(self.witness) if self.witness is not None else 0
            return "REACHABLE (witness length %d)" % n
        if self.bounds:
            inner = ", ".join("%s=%s" % kv for kv in sorted(self.bounds.items()))
            return "UNKNOWN (exhausted %s)" % inner
        return "UNKNOWN"


def reachable(witness=(), bounds=None) -> Verdict:
    return Verdict(REACHABLE, tuple(witness), bounds)


def unknown(bounds=None) -> Verdict:
    return Verdict(UNKNOWN, None, dict(bounds) if bounds else None)
