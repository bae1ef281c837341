"""Adaptive truncation-level grid and Cauchy p-value combination.

The grid mixes two fixed levels (1 and 10) with dyadic fractions of m
down to about 20, spanning sparse to dense alternatives.  Component
p-values from one unified bootstrap run are combined through the
Cauchy statistic, whose heavy tail lets a single small p-value drive
the decision regardless of dependence among components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .calibrate import BootstrapConfig, wild_bootstrap
from .reports import Method, TestReport
from .statcore import ResidualizedDesign

__all__ = [
    "KGrid",
    "CauchyCombination",
    "PValueOutOfRange",
    "dyadic_grid",
    "bounded_component_pvalues",
    "cauchy_combine",
    "adaptive_test",
]

_FIXED_KS = (1, 10)


class PValueOutOfRange(ValueError):
    """Cauchy combination requires p-values strictly inside (0, 1)."""


@dataclass(frozen=True)
class KGrid:
    """Truncation levels for the adaptive test.

    ``dyadic_ks`` holds ceil(m / 2**i) for i = 1..K with
    K = floor(log2(m / 20)) clamped at 0; ``ks`` is the deduplicated
    ascending union with the fixed levels.
    """

    fixed_ks: tuple[int, ...]
    dyadic_ks: tuple[int, ...]
    K: int
    m: int
    ks: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if self.dyadic_ks and min(self.dyadic_ks) < 20:
            raise ValueError(f"dyadic levels must stay >= 20, got {self.dyadic_ks}")
        if any(b >= a for a, b in zip(self.dyadic_ks, self.dyadic_ks[1:])):
            raise ValueError(f"dyadic levels must decrease, got {self.dyadic_ks}")
        combined = sorted(set(self.fixed_ks) | set(self.dyadic_ks))
        if combined and (combined[0] < 1 or combined[-1] > self.m):
            raise ValueError(f"levels must lie in [1, m={self.m}], got {combined}")
        object.__setattr__(self, "ks", tuple(combined))


def dyadic_grid(m: int) -> KGrid:
    """Build the truncation grid for dimension m.

    The depth K uses an exact integer predicate (20 * 2**K <= m)
    rather than floating-point logarithms, so boundary dimensions are
    never off by one.
    """
    if m < 1:
        raise ValueError(f"m: must be >= 1, got {m}")
    depth = max((m // 20).bit_length() - 1, 0)
    dyadic = tuple(-(-m // (1 << i)) for i in range(1, depth + 1))
    fixed = tuple(k for k in _FIXED_KS if k <= m)
    return KGrid(fixed_ks=fixed, dyadic_ks=dyadic, K=depth, m=m)


@dataclass(frozen=True)
class CauchyCombination:
    """Combined evidence across components.

    ``t_c`` is the equal-weight average of tan((1/2 - p) pi) and
    ``p_c`` its standard-Cauchy upper tail probability.
    """

    t_c: float
    p_c: float
    components: tuple[tuple[str, float, float], ...]


def bounded_component_pvalues(
    p_values: Sequence[float] | np.ndarray, B: int
) -> np.ndarray:
    """Prepare add-one bootstrap p-values for Cauchy combination.

    Add-one smoothed p-values live on the discrete grid
    {1/(B+1), ..., (B+1)/(B+1)}, whose top cell is exactly 1 — outside
    the combiner's open-interval domain (and reached with probability
    about 1/(B+1) per component under the null).  That cell is mapped
    to its mid-p representative 1 - 1/(2(B+1)), mirroring at the upper
    end the add-one correction already applied at the lower end.  All
    other values pass through unchanged.
    """
    if B < 1:
        raise ValueError(f"B: must be >= 1, got {B}")
    arr = np.array(p_values, dtype=float, copy=True)
    arr[arr >= 1.0] = 1.0 - 0.5 / (B + 1)
    return arr


def cauchy_combine(
    pvals: Sequence[float], labels: Sequence[str] | None = None
) -> CauchyCombination:
    """Combine p-values with equal weights through the Cauchy statistic.

    Every p-value must lie strictly inside (0, 1); callers combining
    bootstrap components route them through
    ``bounded_component_pvalues`` first, since add-one smoothing bounds
    them away from 0 but not from 1.  Weights are 1/len(pvals) so
    degenerate grids remain a convex combination.
    """
    pvals = [float(p) for p in pvals]
    if not pvals:
        raise ValueError("need at least one p-value")
    for p in pvals:
        if not 0.0 < p < 1.0:
            raise PValueOutOfRange(f"p-values must lie strictly in (0, 1), got {p}")
    if labels is None:
        labels = [f"component_{i}" for i in range(len(pvals))]
    elif len(labels) != len(pvals):
        raise ValueError("labels and pvals must have equal length")
    weight = 1.0 / len(pvals)
    t_c = weight * math.fsum(math.tan((0.5 - p) * math.pi) for p in pvals)
    p_c = 0.5 - math.atan(t_c) / math.pi
    return CauchyCombination(
        t_c=t_c,
        p_c=p_c,
        components=tuple(
            (str(lab), p, weight) for lab, p in zip(labels, pvals)
        ),
    )


def adaptive_test(
    rd: ResidualizedDesign,
    Y: np.ndarray,
    X_a: np.ndarray,
    m: int,
    config: BootstrapConfig,
    alpha: float,
    rng: np.random.Generator,
) -> TestReport:
    """Run the adaptive combined test at level alpha.

    One unified bootstrap pass over the dyadic grid produces all
    component p-values from the same sign draws; after the boundary
    adjustment of ``bounded_component_pvalues`` they are combined via
    the Cauchy statistic and the null is rejected when the combined
    p-value is at most alpha.  ``meta`` records the unadjusted
    bootstrap p-values.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha: must lie in (0, 1), got {alpha}")
    if m != rd.m:
        raise ValueError(f"m = {m} does not match the residualized design (m = {rd.m})")
    grid = dyadic_grid(m)
    result = wild_bootstrap(rd, Y, X_a, grid.ks, config, rng)
    combo = cauchy_combine(
        bounded_component_pvalues(result.p_values, config.B),
        labels=[f"k={k}" for k in result.grid],
    )
    return TestReport.from_p(
        method=Method.CC,
        statistic=combo.t_c,
        p_value=combo.p_c,
        alpha=alpha,
        meta={
            "B": config.B,
            "grid": result.grid,
            "smoothing": config.smoothing.value,
            "component_p_values": tuple(result.p_values.tolist()),
        },
    )
