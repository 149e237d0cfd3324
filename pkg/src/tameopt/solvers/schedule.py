"""Step-size schedules and their validity test."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

VALID = "valid"
INVALID = "invalid"
UNDECIDABLE = "undecidable-from-prefix"


@dataclass(frozen=True)
class StepSchedule:
    """``gamma_k`` for ``k = 1, 2, ...``.

    Families: ``power`` (``c / k**alpha``), ``constant`` (``c``) and
    ``custom`` (explicit finite list; indexing past its end is an error).
    """

    family: str = "power"
    c: float = 1.0
    alpha: float = 1.0
    values: tuple = field(default=())

    def __post_init__(self):
        if self.family not in ("power", "constant", "custom"):
            raise ValueError(f"unknown schedule family {self.family!r}")
        if self.family == "custom":
            vals = tuple(float(v) for v in self.values)
            if not vals or any(v <= 0 or not math.isfinite(v) for v in vals):
                raise ValueError("custom schedules need positive finite steps")
            object.__setattr__(self, "values", vals)
        elif not (self.c > 0 and math.isfinite(self.c)):
            raise ValueError("schedule constant must be positive")

    @classmethod
    def power(cls, c: float = 1.0, alpha: float = 1.0) -> "StepSchedule":
        return cls("power", float(c), float(alpha))

    @classmethod
    def constant(cls, gamma: float) -> "StepSchedule":
        return cls("constant", float(gamma), 0.0)

    @classmethod
    def custom(cls, values) -> "StepSchedule":
        return cls("custom", 1.0, 0.0, tuple(values))

    def __call__(self, k: int) -> float:
        if k < 1:
            raise ValueError("steps are indexed from k = 1")
        if self.family == "power":
            return self.c / k**self.alpha
        if self.family == "constant":
            return self.c
        return self.values[k - 1]

    def steps(self, n: int) -> np.ndarray:
        """``gamma_1 .. gamma_n`` as an array (same values as calling one by one)."""
        return np.array([self(k) for k in range(1, n + 1)], dtype=float)

    def to_dict(self) -> dict:
        if self.family == "custom":
            return {"family": "custom", "values": list(self.values)}
        if self.family == "constant":
            return {"family": "constant", "c": self.c}
        return {"family": "power", "c": self.c, "alpha": self.alpha}

    @classmethod
    def from_dict(cls, d: dict) -> "StepSchedule":
        fam = d.get("family", "power")
        if fam == "custom":
            return cls.custom(d["values"])
        if fam == "constant":
            return cls.constant(d.get("c", d.get("gamma")))
        return cls.power(d.get("c", 1.0), d.get("alpha", 1.0))

    @classmethod
    def parse(cls, text: str) -> "StepSchedule":
        """``power:C:ALPHA``, ``constant:G`` or ``custom:g1,g2,...``."""
        fam, _, rest = text.partition(":")
        args = [a for a in rest.replace(",", ":").split(":") if a]
        if fam == "power":
            return cls.power(*(float(a) for a in args))
        if fam == "constant":
            return cls.constant(float(args[0]))
        if fam == "custom":
            return cls.custom([float(a) for a in args])
        raise ValueError(f"unknown schedule {text!r}")


@dataclass(frozen=True)
class ScheduleVerdict:
    verdict: str
    reason: str
    partial_sum: float | None = None
    partial_sum_squares: float | None = None

    @property
    def valid(self) -> bool:
        return self.verdict == VALID

    def __bool__(self) -> bool:
        return self.valid


def validate_schedule(s: StepSchedule) -> ScheduleVerdict:
    """Whether ``sum gamma_k = inf`` and ``sum gamma_k**2 < inf``.

    Decided analytically for the power and constant families; custom lists
    only get their partial sums.
    """
    if s.family == "constant":
        return ScheduleVerdict(INVALID, "constant steps are not square-summable")
    if s.family == "custom":
        v = np.asarray(s.values)
        return ScheduleVerdict(
            UNDECIDABLE,
            "a finite prefix cannot decide summability",
            float(v.sum()),
            float((v * v).sum()),
        )
    a = s.alpha
    if a > 1:
        return ScheduleVerdict(INVALID, f"alpha = {a} > 1: steps are summable")
    if a <= 0.5:
        return ScheduleVerdict(INVALID, f"alpha = {a} <= 1/2: squares are not summable")
    return ScheduleVerdict(VALID, f"1/2 < alpha = {a} <= 1")
