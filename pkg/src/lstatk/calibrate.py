"""Unified wild-bootstrap calibration for the whole L-statistic family.

One bootstrap run serves every truncation level in the grid: each
replicate flips residual signs, re-projects, recomputes the squared
scores, sorts once, and reads all requested L-statistics off the
prefix sums.  The residualized columns and their norms are fixed data
and are never recomputed inside the replicate loop.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .statcore import KOutOfRange, ResidualizedDesign, ZeroResidual

__all__ = [
    "Smoothing",
    "RngPolicy",
    "BootstrapConfig",
    "BootstrapResult",
    "wild_bootstrap",
    "pvalue_uniformity_check",
]

_RESIDUAL_FLOOR = 1e-300
# Replicates are dispatched in fixed-size chunks so the work layout,
# and hence the result, is independent of the worker count.
_CHUNK = 64


class Smoothing(enum.Enum):
    """Bootstrap p-value estimator.

    RAW is the plain Monte Carlo proportion and can return 0, which a
    downstream Cauchy combination cannot accept.  ADD_ONE shifts to
    (1 + count) / (B + 1), keeping p-values strictly inside (0, 1].
    """

    RAW = "raw"
    ADD_ONE = "add_one"


class RngPolicy(enum.Enum):
    """Per-replicate stream derivation.

    SPAWN derives an independent child stream per replicate up front;
    SEQUENTIAL draws all sign vectors from the parent stream in one
    pass.  Both are deterministic and worker-count invariant.
    """

    SPAWN = "spawn"
    SEQUENTIAL = "sequential"


@dataclass(frozen=True)
class BootstrapConfig:
    B: int = 500
    smoothing: Smoothing = Smoothing.ADD_ONE
    rng_policy: RngPolicy = RngPolicy.SPAWN

    def __post_init__(self):
        if self.B < 1:
            raise ValueError(f"B: must be >= 1, got {self.B}")


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    """Joint bootstrap reference for one dataset.

    ``l_star[l, g]`` is the bootstrap L-statistic of replicate l at
    grid entry g; ``l_obs`` holds the observed values computed through
    the identical code path, and ``p_values`` the per-entry Monte
    Carlo p-values.
    """

    l_star: np.ndarray
    l_obs: np.ndarray
    p_values: np.ndarray
    grid: tuple[int, ...]


def _grid_l_values(rd: ResidualizedDesign, v: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Scores-to-L kernel shared by the observed and bootstrap paths.

    Projects ``v`` onto the orthocomplement of the nuisance space,
    standardizes, squares, sorts descending, and returns the prefix
    sums at ``idx`` (0-based grid positions).
    """
    resid = rd.project_out(v)
    rss = float(resid @ resid)
    if np.sqrt(rss) < _RESIDUAL_FLOOR:
        raise ZeroResidual("bootstrap residual vector is numerically zero")
    scale = np.sqrt(rss / rd.r) * rd.col_norms
    z = (resid @ rd.Xb_tilde) / scale
    w = z * z
    w[::-1].sort()  # ascending in reversed view = descending in w
    return np.cumsum(w)[idx]


def _validate_grid(kgrid: Sequence[int], m: int) -> np.ndarray:
    ks = np.asarray(list(kgrid), dtype=int)
    if ks.size == 0:
        raise ValueError("kgrid must be non-empty")
    if ks.min() < 1 or ks.max() > m:
        raise KOutOfRange(f"kgrid entries must lie in [1, {m}], got {ks.tolist()}")
    if not (np.diff(ks) > 0).all():
        raise ValueError(f"kgrid must be sorted ascending without duplicates, got {ks.tolist()}")
    return ks


def _signs(stream: np.random.Generator, n: int) -> np.ndarray:
    # Exact float +-1 multipliers: products with them are lossless.
    return stream.integers(0, 2, size=n).astype(float) * 2.0 - 1.0


def wild_bootstrap(
    rd: ResidualizedDesign,
    Y: np.ndarray,
    X_a: np.ndarray,
    kgrid: Sequence[int],
    config: BootstrapConfig,
    rng: np.random.Generator,
    workers: int = 1,
) -> BootstrapResult:
    """Run one unified wild-bootstrap pass over ``kgrid``.

    Each replicate multiplies the observed residuals by independent
    random signs and re-projects, which is algebraically identical to
    residualizing the sign-flipped fitted response; the nuisance fit
    itself is never re-formed.  All grid entries share the same B sign
    draws.  Results are bit-identical for any ``workers`` value.

    Parameters
    ----------
    rd : ResidualizedDesign
        Built from the same (X_a, X_b) that produced ``Y``.
    Y : (n,) array
        Observed response.
    X_a : (n, q) array
        Nuisance block; retained in the signature for interface
        symmetry and dimension checking against ``rd``.
    kgrid : sequence of int
        Truncation levels, ascending, deduplicated, within [1, m].
    config : BootstrapConfig
    rng : numpy Generator
        Consumed exactly B times under SPAWN (one child stream per
        replicate); SEQUENTIAL takes the B sign vectors in one pass
        plus one reserved remedial vector.
    workers : int
        Worker-count hint for the replicate loop.
    """
    X_a = np.asarray(X_a, dtype=float)
    if X_a.shape != (rd.n, rd.q):
        raise ValueError(
            f"X_a shape {X_a.shape} does not match the residualized design "
            f"({rd.n}, {rd.q})"
        )
    ks = _validate_grid(kgrid, rd.m)
    idx = ks - 1
    n, B = rd.n, config.B

    eps_hat = rd.project_out(np.asarray(Y, dtype=float))
    if np.sqrt(float(eps_hat @ eps_hat)) < _RESIDUAL_FLOOR:
        raise ZeroResidual("response lies in the nuisance column space")

    if config.rng_policy is RngPolicy.SPAWN:
        children = rng.spawn(B)

        def replicate_signs(l: int) -> np.ndarray:
            return _signs(children[l], n)

        def retry_signs(l: int) -> np.ndarray:
            return _signs(children[l], n)

    else:
        sign_matrix = rng.integers(0, 2, size=(B, n)).astype(float) * 2.0 - 1.0
        # One reserved remedial draw for the probability-zero retry path.
        remedial = _signs(rng, n)

        def replicate_signs(l: int) -> np.ndarray:
            return sign_matrix[l]

        def retry_signs(l: int) -> np.ndarray:
            return remedial

    l_star = np.empty((B, len(ks)))

    def run_replicate(l: int) -> None:
        try:
            l_star[l] = _grid_l_values(rd, replicate_signs(l) * eps_hat, idx)
        except ZeroResidual:
            # Resample once, then give up: twice-degenerate replicates
            # indicate non-continuous data, not bad luck.
            l_star[l] = _grid_l_values(rd, retry_signs(l) * eps_hat, idx)

    def run_chunk(start: int) -> None:
        for l in range(start, min(start + _CHUNK, B)):
            run_replicate(l)

    with threadpool_limits(limits=1):
        l_obs = _grid_l_values(rd, eps_hat, idx)
        starts = range(0, B, _CHUNK)
        if workers <= 1 or B <= _CHUNK:
            for start in starts:
                run_chunk(start)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(run_chunk, starts))

    counts = (l_star >= l_obs[None, :]).sum(axis=0)
    if config.smoothing is Smoothing.RAW:
        p_values = counts / B
    else:
        p_values = (1.0 + counts) / (B + 1.0)
    return BootstrapResult(
        l_star=l_star,
        l_obs=l_obs,
        p_values=p_values,
        grid=tuple(int(k) for k in ks),
    )


def pvalue_uniformity_check(
    make_null_case: Callable[
        [np.random.Generator], tuple[ResidualizedDesign, np.ndarray, np.ndarray]
    ],
    kgrid: Sequence[int],
    config: BootstrapConfig,
    n_outer: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Measure calibration of the bootstrap p-values under the null.

    Simulates ``n_outer`` null datasets via ``make_null_case`` (a
    callable mapping a stream to ``(rd, Y, X_a)``), bootstraps each,
    and returns the Kolmogorov-Smirnov distance of the empirical
    p-value distribution from Uniform(0, 1), one entry per grid level.
    AddOne smoothing adds discreteness of order 1/(B + 1) to the
    distance, which the caller's tolerance must absorb.
    """
    from scipy import stats

    pvals = np.empty((n_outer, len(kgrid)))
    for i, child in enumerate(rng.spawn(n_outer)):
        case_rng, boot_rng = child.spawn(2)
        rd, y, x_a = make_null_case(case_rng)
        pvals[i] = wild_bootstrap(rd, y, x_a, kgrid, config, boot_rng).p_values
    return np.array(
        [stats.kstest(pvals[:, g], "uniform").statistic for g in range(len(kgrid))]
    )
