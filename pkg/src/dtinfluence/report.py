"""Outcome of checking one inequality instance ``lhs <= rhs``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from .arith import FLOAT_SLACK, Number, from_str, mode_of, to_str


class NotApplicable(ValueError):
    """The inequality's hypotheses do not hold for these inputs."""


@dataclass(frozen=True)
class VerificationReport:
    inequality: str
    lhs: Number
    rhs: Number
    holds: bool
    equality: bool
    mode: str
    witness: Any = None
    details: dict = field(default_factory=dict)

    @property
    def slack(self) -> Number:
        return self.rhs - self.lhs

    def to_dict(self) -> dict:
        return {
            "inequality": self.inequality,
            "lhs": to_str(self.lhs),
            "rhs": to_str(self.rhs),
            "slack": to_str(self.slack),
            "holds": self.holds,
            "equality": self.equality,
            "mode": self.mode,
            "witness": self.witness,
            "details": {k: _jsonable(v) for k, v in self.details.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> VerificationReport:
        return cls(d["inequality"], from_str(d["lhs"]), from_str(d["rhs"]), d["holds"], d["equality"],
                   d["mode"], d.get("witness"), {k: _unjson(v) for k, v in d.get("details", {}).items()})

    def __str__(self):
        tag = "equality" if self.equality else ("holds" if self.holds else "FAILS")
        return f"{self.inequality}: {to_str(self.lhs)} <= {to_str(self.rhs)} [{tag}, {self.mode}]"


def _jsonable(v):
    if isinstance(v, (list, tuple)):
        return [_jsonable(t) for t in v]
    if isinstance(v, bool) or isinstance(v, str) or v is None:
        return v
    return to_str(v)


def _unjson(v):
    if isinstance(v, list):
        return [_unjson(t) for t in v]
    if isinstance(v, str):
        try:
            return from_str(v)
        except ValueError:
            return v
    return v


def make_report(inequality: str, lhs: Number, rhs: Number, witness=None, details=None,
                tol: float = FLOAT_SLACK, require_equality: bool = False) -> VerificationReport:
    """Judge ``lhs <= rhs`` exactly for rationals, with slack ``tol`` for floats.

    With ``require_equality`` the check passes only when the two sides agree.
    """
    mode = mode_of(lhs, rhs)
    slack = rhs - lhs
    if mode == "rational":
        holds, equality = slack >= 0, slack == 0
    elif math.isinf(rhs) and rhs > 0:
        holds, equality = True, False
    else:
        holds = slack >= -tol
        equality = abs(slack) <= tol * max(1.0, abs(float(lhs)))
    if require_equality:
        holds = equality
    return VerificationReport(inequality, lhs, rhs, bool(holds), bool(equality), mode, witness, dict(details or {}))


def skipped_report(inequality: str, reason: str) -> VerificationReport:
    return VerificationReport(inequality, 0, 0, True, True, "rational", {"skipped": reason})

