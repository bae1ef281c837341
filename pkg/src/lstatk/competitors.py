"""Reference tests for the comparison studies.

MAX calibrates the largest squared score against its closed-form
Gumbel-type limit; MAX_BOOT calibrates the same statistic by
bootstrap; SUM is the bootstrap-calibrated full sum, serving as the
aggregation-type stand-in; COM Cauchy-combines the MAX and SUM
p-values.  SUM and COM are structural stand-ins for external
procedures that are out of scope here, and are labeled by their own
method tags in every output.
"""

from __future__ import annotations

import math

import numpy as np

from .adaptive import cauchy_combine
from .asymptotic import ExtremeValueParams, _log_theta
from .calibrate import BootstrapConfig, wild_bootstrap
from .reports import Method, TestReport
from .statcore import OrderedEvidence, ResidualizedDesign

__all__ = [
    "Method",
    "TestReport",
    "max_test_from_stat",
    "max_test_asymptotic",
    "max_test_bootstrap",
    "sum_test_bootstrap",
    "com_test",
]


def max_test_from_stat(w_max: float, m: int) -> tuple[float, float]:
    """Centered maximum statistic and its closed-form p-value.

    Returns (W_(1) - b_m, upper tail of the limit law at that point).
    The tail uses expm1 so small p-values keep full precision.
    """
    params = ExtremeValueParams(m)
    statistic = float(w_max) - params.b_m
    p_value = -math.expm1(-math.exp(float(_log_theta(statistic))))
    return statistic, p_value


def max_test_asymptotic(oe: OrderedEvidence, m: int, alpha: float) -> TestReport:
    """Test on the centered maximum squared score with the closed-form
    null limit."""
    statistic, p_value = max_test_from_stat(float(oe.sorted_W[0]), m)
    return TestReport.from_p(
        method=Method.MAX,
        statistic=statistic,
        p_value=p_value,
        alpha=alpha,
        meta={"calibration": "closed_form"},
    )


def max_test_bootstrap(
    rd: ResidualizedDesign,
    Y: np.ndarray,
    X_a: np.ndarray,
    config: BootstrapConfig,
    alpha: float,
    rng: np.random.Generator,
) -> TestReport:
    """Bootstrap-calibrated test on the maximum squared score."""
    result = wild_bootstrap(rd, Y, X_a, [1], config, rng)
    return TestReport.from_p(
        method=Method.MAX_BOOT,
        statistic=float(result.l_obs[0]),
        p_value=float(result.p_values[0]),
        alpha=alpha,
        meta={"B": config.B, "smoothing": config.smoothing.value},
    )


def sum_test_bootstrap(
    rd: ResidualizedDesign,
    Y: np.ndarray,
    X_a: np.ndarray,
    config: BootstrapConfig,
    alpha: float,
    rng: np.random.Generator,
) -> TestReport:
    """Bootstrap-calibrated test on the full sum of squared scores.

    This is the aggregation-type stand-in: the truncation level is m,
    so every coordinate contributes.
    """
    result = wild_bootstrap(rd, Y, X_a, [rd.m], config, rng)
    return TestReport.from_p(
        method=Method.SUM,
        statistic=float(result.l_obs[0]),
        p_value=float(result.p_values[0]),
        alpha=alpha,
        meta={"B": config.B, "smoothing": config.smoothing.value, "standin": True},
    )


def com_test(p_max: float, p_sum: float, alpha: float) -> TestReport:
    """Equal-weight Cauchy combination of the MAX and SUM p-values.

    A structural analogue of published max+sum combinations, justified
    by the asymptotic independence of the two components; symmetric in
    its arguments.
    """
    combo = cauchy_combine([p_max, p_sum], labels=["max", "sum"])
    return TestReport.from_p(
        method=Method.COM,
        statistic=combo.t_c,
        p_value=combo.p_c,
        alpha=alpha,
        meta={"p_max": float(p_max), "p_sum": float(p_sum), "standin": True},
    )
