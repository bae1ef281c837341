"""Closed-form null limits and Monte Carlo verification probes.

Covers the Gumbel-type limit of the centered maximum squared score,
the limiting joint law of the top order statistics, the chi-square
machinery behind the trimmed-sum (expected-shortfall) normal limit,
and simulation probes that check those limits plus the asymptotic
independence that licenses combining p-values across truncation
levels.  Everything here is validation-side; the operational test
path calibrates by bootstrap instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .randgen import (
    CovarianceFactor,
    CovarianceSpec,
    InnovationDistribution,
    factorize,
    sample_design,
)
from .statcore import order_evidence, residualize, score_stats

__all__ = [
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
]

_LOG_SQRT_PI = 0.5 * math.log(math.pi)
# Fixed Monte Carlo chunk sizes keep memory bounded and results
# bit-identical for a given seed.
_MC_CHUNK = 2048
_PROBE_CHUNK = 500


class UnorderedArguments(ValueError):
    """Joint-CDF thresholds must be non-increasing."""


class KTooLarge(ValueError):
    """Joint-CDF enumeration is capped at k <= 6."""


@dataclass(frozen=True)
class ExtremeValueParams:
    """Centering constant for the maximum of m squared scores.

    b_m = 2 log m - log log m, defined and positive for m >= 3.
    """

    m: int
    b_m: float = field(init=False)

    def __post_init__(self):
        if self.m < 3:
            raise ValueError(f"m: must be >= 3 for the centering constant, got {self.m}")
        object.__setattr__(
            self, "b_m", 2.0 * math.log(self.m) - math.log(math.log(self.m))
        )


def _log_theta(x):
    """log of the Gumbel rate pi**-0.5 * exp(-x/2); finite for all finite x."""
    return -0.5 * np.asarray(x, dtype=float) - _LOG_SQRT_PI


def lambda_cdf(x):
    """CDF of the Gumbel-type limit exp{-pi**-0.5 * exp(-x/2)}.

    Accepts scalars or arrays; monotone nondecreasing with limits 0
    and 1.  Deeply negative arguments underflow to exactly 0.0, never
    below.
    """
    return np.exp(-np.exp(_log_theta(x)))


def lambda_quantile(u):
    """Inverse of ``lambda_cdf`` on (0, 1)."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise ValueError("quantile levels must lie strictly inside (0, 1)")
    return -2.0 * (np.log(-np.log(u)) + _LOG_SQRT_PI)


def _log_poisson_cdf(count: int, log_rate: float) -> float:
    """log P(Poisson(exp(log_rate)) <= count), accumulated in log domain."""
    terms = [i * log_rate - math.lgamma(i + 1) for i in range(count + 1)]
    top = max(terms)
    logsum = top + math.log(sum(math.exp(t - top) for t in terms))
    return -math.exp(log_rate) + logsum


def order_stat_cdf(s: int, x: float, m: int) -> float:
    """Limiting CDF of the s-th largest centered squared score.

    Equals the Gumbel-type CDF times the first s terms of the Poisson
    series in the rate pi**-0.5 * exp(-x/2); computed in log domain so
    deep tails neither overflow nor produce 0 * inf.  ``m`` pairs the
    limit with a concrete centering constant and must be >= 3; the
    limiting CDF itself does not depend on it.
    """
    if s < 1:
        raise ValueError(f"s: must be >= 1, got {s}")
    ExtremeValueParams(m)
    return math.exp(_log_poisson_cdf(s - 1, float(_log_theta(x))))


def _admissible_exponents(k: int):
    """Yield (k_2, ..., k_k) with partial sums bounded by position - 1."""

    def rec(prefix: tuple[int, ...], total: int):
        pos = len(prefix)  # choosing exponent number pos + 2
        if pos == k - 1:
            yield prefix
            return
        # constraint at j = pos + 2: total so far + choice <= j - 1
        for choice in range(pos + 2 - total):
            yield from rec(prefix + (choice,), total + choice)

    yield from rec((), 0)


def joint_order_cdf(xs: Sequence[float], m: int) -> float:
    """Limiting joint CDF of the top k centered squared scores.

    ``xs`` holds the thresholds for the 1st..k-th largest values and
    must be non-increasing, with 2 <= k <= 6 (the combinatorial sum is
    enumerated explicitly and its size grows like the Catalan
    numbers).  Increment terms are evaluated in log domain.  Equal
    adjacent thresholds zero out the corresponding increments, so an
    all-equal vector collapses to the Gumbel-type CDF of the common
    threshold, which is also the probability content of that event.
    """
    xs = np.asarray(xs, dtype=float)
    k = xs.size
    if k > 6:
        raise KTooLarge(f"joint enumeration supports k <= 6, got k = {k}")
    if k < 2:
        raise ValueError(f"need at least two thresholds, got {k}")
    if np.any(np.diff(xs) > 0.0):
        raise UnorderedArguments(f"thresholds must be non-increasing, got {xs.tolist()}")
    ExtremeValueParams(m)

    log_thetas = _log_theta(xs)
    # log of d_i = theta(x_i) - theta(x_{i-1}) >= 0 for i = 2..k
    log_d = np.empty(k - 1)
    for i in range(1, k):
        hi, lo = log_thetas[i], log_thetas[i - 1]
        if hi == lo:
            log_d[i - 1] = -math.inf
        else:
            log_d[i - 1] = hi + math.log1p(-math.exp(lo - hi))

    log_terms = []
    for exponents in _admissible_exponents(k):
        log_term = 0.0
        for log_di, ki in zip(log_d, exponents):
            if ki == 0:
                continue
            if log_di == -math.inf:
                log_term = -math.inf
                break
            log_term += ki * log_di - math.lgamma(ki + 1)
        if log_term > -math.inf:
            log_terms.append(log_term)
    top = max(log_terms)
    logsum = top + math.log(sum(math.exp(t - top) for t in log_terms))
    return math.exp(-math.exp(log_thetas[-1]) + logsum)


def chi1_upper_quantile(gamma: float) -> float:
    """Value v with P(chi-square_1 >= v) = gamma.

    Bisection on [0, 200] against the complementary error function of
    sqrt(v/2), to absolute tolerance 1e-12; dependency-free and
    monotone.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma: must lie in (0, 1), got {gamma}")
    lo, hi = 0.0, 200.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if math.erfc(math.sqrt(mid / 2.0)) > gamma:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class GammaMoments:
    """Monte Carlo estimates of the trimmed-sum limit moments.

    ``mu[t]`` estimates the centering of the top-ceil(gamma_t m) sum,
    ``sigma[t, l]`` the covariance of the m**-0.5-normalized sums, and
    ``xi`` the corresponding correlation matrix (unit diagonal by
    construction).  Standard errors are reported per entry.
    """

    gammas: tuple[float, ...]
    v: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    xi: np.ndarray
    mc_reps: int
    mu_standard_errors: np.ndarray
    sigma_standard_errors: np.ndarray


def estimate_gamma_moments(
    factor: CovarianceFactor,
    gammas: Sequence[float],
    mc_reps: int,
    rng: np.random.Generator,
) -> GammaMoments:
    """Estimate trimmed-sum moments under a given score correlation.

    Draws mc_reps Gaussian vectors with covariance L L', accumulates
    the per-replication tail sums sum_i [(U_i^2 - v) 1(U_i^2 >= v) +
    gamma v] for each gamma, and reports their means, the covariance
    of the m**-0.5-normalized sums, the implied correlations, and
    Monte Carlo standard errors.  The chunked accumulation is
    fixed-size, so a given seed reproduces bit-identically.
    """
    if mc_reps < 2:
        raise ValueError(f"mc_reps: must be >= 2, got {mc_reps}")
    gammas = tuple(float(g) for g in gammas)
    m = factor.dim
    v = np.array([chi1_upper_quantile(g) for g in gammas])
    base = m * np.array(gammas) * v  # constant gamma*v summed over coordinates

    samples = np.empty((mc_reps, len(gammas)))
    done = 0
    while done < mc_reps:
        c = min(_MC_CHUNK, mc_reps - done)
        u = rng.standard_normal((c, m))
        if not factor.is_identity:
            u = u @ factor.lower_triangular_factor.T
        w = u * u
        for t, vt in enumerate(v):
            excess = w - vt
            samples[done : done + c, t] = np.where(excess >= 0.0, excess, 0.0).sum(
                axis=1
            )
        done += c
    samples += base

    mu = samples.mean(axis=0)
    mu_se = samples.std(axis=0, ddof=1) / math.sqrt(mc_reps)
    centered = (samples - mu) / math.sqrt(m)
    sigma = centered.T @ centered / (mc_reps - 1)
    scale = np.sqrt(np.diag(sigma))
    xi = sigma / np.outer(scale, scale)
    np.fill_diagonal(xi, 1.0)
    # Moment-based SE of a covariance entry: Var ~ (E[c_t^2 c_l^2] - sigma_tl^2)/reps.
    sq = centered * centered
    m22 = sq.T @ sq / mc_reps
    sigma_se = np.sqrt(np.maximum(m22 - sigma * sigma, 0.0) / mc_reps)
    return GammaMoments(
        gammas=gammas,
        v=v,
        mu=mu,
        sigma=sigma,
        xi=xi,
        mc_reps=mc_reps,
        mu_standard_errors=mu_se,
        sigma_standard_errors=sigma_se,
    )


@dataclass(frozen=True, eq=False)
class DriftSummary:
    """Mean-shift table for the trimmed sum under an alternative.

    ``beta_star`` is the conditional-covariance image of the signal
    coefficients; ``topk_drift[k - 1]`` is n times the sum of the k
    largest squared entries, non-decreasing in k.
    """

    beta_star: np.ndarray
    topk_drift: np.ndarray


def drift_summary(sigma_b_given_a, beta_b: np.ndarray, n: int) -> DriftSummary:
    """Compute the drift vector and its cumulative top-k table."""
    if isinstance(sigma_b_given_a, CovarianceFactor):
        lower = sigma_b_given_a.lower_triangular_factor
        matrix = lower @ lower.T
    else:
        matrix = np.asarray(sigma_b_given_a, dtype=float)
    beta_b = np.asarray(beta_b, dtype=float)
    beta_star = matrix @ beta_b
    ranked = np.sort(beta_star * beta_star)[::-1]
    return DriftSummary(beta_star=beta_star, topk_drift=n * np.cumsum(ranked))


def conditional_correlation(spec: CovarianceSpec, q: int) -> CovarianceSpec:
    """Correlation of the signal block given the nuisance block.

    Returns the q-conditional covariance of the trailing p - q
    coordinates rescaled to unit diagonal, as a custom covariance
    spec.  This is the limiting correlation of the standardized
    scores, whose own normalization absorbs the conditional
    variances.
    """
    if not 0 <= q < spec.dim:
        raise ValueError(f"q: must lie in [0, {spec.dim - 1}], got {q}")
    full = spec.materialize()
    if q == 0:
        cond = full
    else:
        s_aa = full[:q, :q]
        s_ab = full[:q, q:]
        cond = full[q:, q:] - s_ab.T @ np.linalg.solve(s_aa, s_ab)
    scale = np.sqrt(np.diag(cond))
    corr = cond / np.outer(scale, scale)
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    return CovarianceSpec.custom(corr)


@dataclass(frozen=True)
class NullDesignConfig:
    """Design geometry for a null-model simulation probe."""

    n: int
    p: int
    q: int
    cov: CovarianceSpec
    dist: InnovationDistribution

    def __post_init__(self):
        if not 0 <= self.q < self.p:
            raise ValueError(f"q: must lie in [0, p), got {self.q}")
        if self.cov.dim != self.p:
            raise ValueError(
                f"cov.dim = {self.cov.dim} does not match p = {self.p}"
            )
        if self.n <= self.q:
            raise ValueError(f"n: must exceed q, got n={self.n}, q={self.q}")


def _default_levels() -> np.ndarray:
    return np.array([0.2, 0.35, 0.5, 0.65, 0.8])


def independence_probe(
    config: NullDesignConfig,
    x_grid=None,
    y_grid=None,
    gamma: float = 0.5,
    n_outer: int = 2000,
    rng: np.random.Generator | None = None,
    *,
    s: int = 1,
    y_order: int | None = None,
    moments: GammaMoments | None = None,
    moment_reps: int = 50_000,
) -> float:
    """Maximum factorization gap between two null test components.

    Simulates ``n_outer`` null replications of the full pipeline and
    records the pair (s-th largest centered squared score, second
    coordinate).  The second coordinate is the standardized trimmed
    sum at level ``gamma`` by default, or, when ``y_order`` is given,
    the y_order-th largest centered squared score (a deliberately
    dependent pair that serves as a negative control).  Returns the
    maximum over the (x, y) grid of |P(joint) - P(x) P(y)| estimated
    empirically; values near zero support factorization of the joint
    limit.

    Nuisance coefficients are annihilated exactly by the projection,
    so null responses are drawn as pure noise.
    """
    if rng is None:
        raise ValueError("rng is required")
    m = config.p - config.q
    params = ExtremeValueParams(m)
    k_gamma = math.ceil(gamma * m)

    streams = rng.spawn(n_outer + 1)
    if y_order is None:
        if moments is None:
            cond = conditional_correlation(config.cov, config.q)
            moments = estimate_gamma_moments(
                factorize(cond), [gamma], moment_reps, streams[0]
            )
        mu = float(moments.mu[0])
        sd = math.sqrt(m * float(moments.sigma[0, 0]))

    levels = _default_levels()
    if x_grid is None:
        x_grid = lambda_quantile(levels)
    if y_grid is None:
        y_grid = lambda_quantile(levels) if y_order is not None else special.ndtri(levels)
    x_grid = np.asarray(x_grid, dtype=float)
    y_grid = np.asarray(y_grid, dtype=float)

    factor = factorize(config.cov)
    xs = np.empty(n_outer)
    ys = np.empty(n_outer)
    for i in range(n_outer):
        child = streams[i + 1]
        x_mat = sample_design(config.n, factor, config.dist, child)
        y_vec = child.standard_normal(config.n)
        rd = residualize(x_mat[:, : config.q], x_mat[:, config.q :])
        oe = order_evidence(score_stats(rd, y_vec).W)
        xs[i] = oe.sorted_W[s - 1] - params.b_m
        if y_order is None:
            ys[i] = (float(oe.prefix_sums[k_gamma - 1]) - mu) / sd
        else:
            ys[i] = oe.sorted_W[y_order - 1] - params.b_m

    ind_x = xs[:, None] <= x_grid[None, :]
    ind_y = ys[:, None] <= y_grid[None, :]
    joint = ind_x.astype(float).T @ ind_y.astype(float) / n_outer
    px = ind_x.mean(axis=0)
    py = ind_y.mean(axis=0)
    return float(np.abs(joint - np.outer(px, py)).max())


def sup_distance(sample: np.ndarray, cdf) -> float:
    """Two-sided sup distance between an empirical CDF and ``cdf``."""
    ordered = np.sort(np.asarray(sample, dtype=float))
    n = ordered.size
    values = np.asarray(cdf(ordered), dtype=float)
    steps = np.arange(1, n + 1) / n
    return float(max((steps - values).max(), (values - steps + 1.0 / n).max()))


def max_stat_sup_distance(
    m: int, n_reps: int, rng: np.random.Generator, chunk: int = _PROBE_CHUNK
) -> float:
    """Sup distance of the centered max of m i.i.d. squared normals
    from its Gumbel-type limit, over ``n_reps`` direct simulations."""
    params = ExtremeValueParams(m)
    vals = np.empty(n_reps)
    done = 0
    while done < n_reps:
        c = min(chunk, n_reps - done)
        draws = rng.standard_normal((c, m))
        vals[done : done + c] = (draws * draws).max(axis=1) - params.b_m
        done += c
    return sup_distance(vals, lambda_cdf)


def max_stat_sup_distance_pipeline(
    n: int, p: int, n_reps: int, rng: np.random.Generator, q: int = 0
) -> float:
    """Same sup distance, but each maximum comes from the full
    regression pipeline (identity covariance, Gaussian design, null
    response) instead of direct draws."""
    params = ExtremeValueParams(p - q)
    factor = factorize(CovarianceSpec.identity(p))
    vals = np.empty(n_reps)
    for i, child in enumerate(rng.spawn(n_reps)):
        x_mat = sample_design(n, factor, InnovationDistribution.STANDARD_NORMAL, child)
        y_vec = child.standard_normal(n)
        rd = residualize(x_mat[:, :q], x_mat[:, q:])
        w = score_stats(rd, y_vec).W
        vals[i] = w.max() - params.b_m
    return sup_distance(vals, lambda_cdf)


def trimmed_sum_normality_probe(
    gamma: float,
    m: int,
    n_reps: int,
    mu: float,
    sigma_gg: float,
    rng: np.random.Generator,
    chunk: int = _PROBE_CHUNK,
) -> float:
    """KS distance of the standardized top-ceil(gamma m) sum from
    N(0, 1) under independent coordinates, over direct simulations."""
    k = math.ceil(gamma * m)
    sd = math.sqrt(m * sigma_gg)
    vals = np.empty(n_reps)
    done = 0
    while done < n_reps:
        c = min(chunk, n_reps - done)
        w = rng.standard_normal((c, m)) ** 2
        top = np.partition(w, m - k, axis=1)[:, m - k :]
        vals[done : done + c] = (top.sum(axis=1) - mu) / sd
        done += c
    return sup_distance(vals, special.ndtr)
