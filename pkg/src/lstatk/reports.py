"""Per-method decision records shared by all testing front ends."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Mapping

__all__ = ["Method", "TestReport"]


class Method(enum.Enum):
    """Method tags used in reports and CSV output.

    SUM is the bootstrap-calibrated full sum (an aggregation-type
    stand-in, not a reimplementation of any external procedure) and
    COM combines the MAX and SUM p-values; both are labeled by these
    tags in every output row.
    """

    CC = "CC"
    MAX = "MAX"
    SUM = "SUM"
    COM = "COM"
    MAX_BOOT = "MAX_BOOT"


@dataclass(frozen=True)
class TestReport:
    """One method's decision on one dataset.

    The rejection flag always equals p_value <= alpha; ``meta`` holds
    free-form provenance such as B, the grid, or smoothing choice.
    """

    # not a test case, despite the Test* name (keeps pytest collection quiet)
    __test__ = False

    method: Method
    statistic: float
    p_value: float
    alpha: float
    reject: bool
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p_value: must lie in [0, 1], got {self.p_value}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha: must lie in (0, 1), got {self.alpha}")
        if self.reject != (self.p_value <= self.alpha):
            raise ValueError("reject flag must equal (p_value <= alpha)")

    @classmethod
    def from_p(
        cls,
        method: Method,
        statistic: float,
        p_value: float,
        alpha: float,
        meta: Mapping[str, Any] | None = None,
    ) -> "TestReport":
        return cls(
            method=method,
            statistic=float(statistic),
            p_value=float(p_value),
            alpha=float(alpha),
            reject=bool(p_value <= alpha),
            meta=dict(meta) if meta else {},
        )
