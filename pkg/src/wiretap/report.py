"""Result records and the seeded random-stream contract."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

RELATION_TOL = 1e-10


def rng_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator fully determined by the (seed, stream-id) pair."""
    return np.random.default_rng([int(seed), int(stream)])


def binomial_half_width(p_hat: float, n: int, z: float = 3.0) -> float:
    """z-sigma half-width of a binomial proportion, floored at one count."""
    return z * math.sqrt(max(p_hat * (1.0 - p_hat), 1.0 / n) / n)


def to_bits(value: float) -> float:
    """Bits of security, -lg(value); infinite for a zero advantage."""
    if value <= 0:
        return math.inf
    return -math.log2(value)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    if isinstance(v, (np.floating, np.integer)):
        return _jsonable(v.item())
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


@dataclass
class AdvReport:
    metric: str
    value: float
    mode: str  # exact | monte-carlo | analytic-bound
    params: dict = field(default_factory=dict)
    seed: int | None = None
    trials: int | None = None
    half_width: float | None = None
    witness: Any = None
    lower_bound: bool = False

    def __post_init__(self):
        if self.mode not in ("exact", "monte-carlo", "analytic-bound"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "monte-carlo" and (not self.trials or self.half_width is None):
            raise ValueError("monte-carlo reports need trials and a half-width")
        self.value = float(self.value)

    @property
    def bits(self) -> float:
        return to_bits(self.value)

    def to_json(self) -> dict:
        out = {
            "metric": self.metric,
            "value": self.value,
            "bits": self.bits,
            "mode": self.mode,
            "params": self.params,
        }
        if self.mode == "monte-carlo":
            out.update(seed=self.seed, trials=self.trials, half_width=self.half_width)
        if self.lower_bound:
            out["lower_bound"] = True
        if self.witness is not None:
            out["witness"] = self.witness
        return _jsonable(out)


@dataclass
class RelationCheck:
    relation: str
    instance: str
    lhs: float
    rhs: float
    tol: float = RELATION_TOL
    precondition_met: bool = True
    note: str = ""
    certified: bool = True  # side conditions checked alongside the inequality

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.precondition_met and self.certified and self.slack >= -self.tol

    def to_json(self) -> dict:
        return _jsonable(
            {
                "relation": self.relation,
                "instance": self.instance,
                "lhs": self.lhs,
                "rhs": self.rhs,
                "slack": self.slack,
                "tol": self.tol,
                "pass": self.passed,
                "precondition_met": self.precondition_met,
                "certified": self.certified,
                "note": self.note,
            }
        )
