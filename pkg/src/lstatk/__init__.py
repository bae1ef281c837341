"""Adaptive top-k L-statistic tests for high-dimensional regression.

Given Y = X_a b_a + X_b b_b + eps with a low-dimensional nuisance
block X_a and a high-dimensional block X_b, the package tests
H0: b_b = 0 by sorting squared standardized score statistics,
summing the top k over a dyadic grid of truncation levels, wild
bootstrapping each level's p-value, and Cauchy-combining them into
one adaptive decision.  Closed-form extreme-value and trimmed-sum
limits back the bootstrap with independent calibration checks, and a
config-driven harness reproduces size/power studies deterministically
for any worker count.
"""

from ._rng import substream
from .adaptive import (
    CauchyCombination,
    KGrid,
    PValueOutOfRange,
    adaptive_test,
    bounded_component_pvalues,
    cauchy_combine,
    dyadic_grid,
)
from .asymptotic import (
    DriftSummary,
    ExtremeValueParams,
    GammaMoments,
    KTooLarge,
    NullDesignConfig,
    UnorderedArguments,
    chi1_upper_quantile,
    conditional_correlation,
    drift_summary,
    estimate_gamma_moments,
    independence_probe,
    joint_order_cdf,
    lambda_cdf,
    lambda_quantile,
    max_stat_sup_distance,
    max_stat_sup_distance_pipeline,
    order_stat_cdf,
    sup_distance,
    trimmed_sum_normality_probe,
)
from .calibrate import (
    BootstrapConfig,
    BootstrapResult,
    RngPolicy,
    Smoothing,
    pvalue_uniformity_check,
    wild_bootstrap,
)
from .competitors import (
    com_test,
    max_test_asymptotic,
    max_test_bootstrap,
    max_test_from_stat,
    sum_test_bootstrap,
)
from .harness import (
    DESIGNS,
    ConfigError,
    ExperimentSpec,
    ResultRow,
    SizeGateError,
    emit_csv,
    evaluate_methods,
    parse_csv,
    run_manifest,
    run_power_experiment,
    run_size_experiment,
    write_manifest,
)
from .randgen import (
    CoefficientSpec,
    CovarianceFactor,
    CovarianceSpec,
    Dataset,
    InnovationDistribution,
    InvalidSpec,
    NotPositiveDefinite,
    factorize,
    make_beta,
    sample_design,
    simulate,
)
from .reports import Method, TestReport
from .statcore import (
    DegenerateColumn,
    KOutOfRange,
    NonFiniteEvidence,
    OrderedEvidence,
    RankDeficientNuisance,
    ResidualizedDesign,
    ScoreStats,
    ZeroResidual,
    l_stat,
    order_evidence,
    residualize,
    score_stats,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "substream",
    # data generation
    "CovarianceSpec",
    "CovarianceFactor",
    "InnovationDistribution",
    "CoefficientSpec",
    "Dataset",
    "NotPositiveDefinite",
    "InvalidSpec",
    "factorize",
    "sample_design",
    "make_beta",
    "simulate",
    # score statistics
    "ResidualizedDesign",
    "ScoreStats",
    "OrderedEvidence",
    "RankDeficientNuisance",
    "DegenerateColumn",
    "ZeroResidual",
    "NonFiniteEvidence",
    "KOutOfRange",
    "residualize",
    "score_stats",
    "order_evidence",
    "l_stat",
    # bootstrap calibration
    "Smoothing",
    "RngPolicy",
    "BootstrapConfig",
    "BootstrapResult",
    "wild_bootstrap",
    "pvalue_uniformity_check",
    # limit laws and probes
    "ExtremeValueParams",
    "GammaMoments",
    "DriftSummary",
    "NullDesignConfig",
    "UnorderedArguments",
    "KTooLarge",
    "lambda_cdf",
    "lambda_quantile",
    "order_stat_cdf",
    "joint_order_cdf",
    "chi1_upper_quantile",
    "estimate_gamma_moments",
    "drift_summary",
    "conditional_correlation",
    "independence_probe",
    "max_stat_sup_distance",
    "max_stat_sup_distance_pipeline",
    "trimmed_sum_normality_probe",
    "sup_distance",
    # adaptive combination
    "KGrid",
    "CauchyCombination",
    "PValueOutOfRange",
    "dyadic_grid",
    "bounded_component_pvalues",
    "cauchy_combine",
    "adaptive_test",
    # reports and reference methods
    "Method",
    "TestReport",
    "max_test_from_stat",
    "max_test_asymptotic",
    "max_test_bootstrap",
    "sum_test_bootstrap",
    "com_test",
    # experiment harness
    "DESIGNS",
    "ExperimentSpec",
    "ResultRow",
    "ConfigError",
    "SizeGateError",
    "evaluate_methods",
    "run_size_experiment",
    "run_power_experiment",
    "emit_csv",
    "parse_csv",
    "run_manifest",
    "write_manifest",
]
