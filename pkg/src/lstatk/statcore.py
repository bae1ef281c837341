"""Score statistics and the top-k L-statistic family.

The nuisance block is projected out once through an orthonormal basis;
every statistic downstream is built from the residualized columns, the
null-model residuals, and a single descending sort of the squared
standardized scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
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
]

# Columns of X_a with an R diagonal below this times the largest column
# norm are treated as rank deficiency, never silently pseudo-inverted.
_RANK_TOL = 1e-10
_NORM_FLOOR = 1e-12
_RESIDUAL_FLOOR = 1e-300


class RankDeficientNuisance(ValueError):
    """Nuisance block has linearly dependent columns."""


class DegenerateColumn(ValueError):
    """A residualized column has (numerically) zero norm."""


class ZeroResidual(ValueError):
    """Null-model fit is exact, so the score statistics are undefined."""


class NonFiniteEvidence(ValueError):
    """Squared scores contain NaN or infinity."""


class KOutOfRange(ValueError):
    """Requested truncation level k is outside [1, m]."""


@dataclass(frozen=True, eq=False)
class ResidualizedDesign:
    """Signal columns with the nuisance space projected out.

    Fields
    ------
    Q : (n, q) array
        Orthonormal basis of the nuisance column space (0 columns when
        q == 0).
    Xb_tilde : (n, m) array
        Residualized signal columns.
    col_norms : (m,) array
        Euclidean norms of the residualized columns, all positive.
    r : int
        Residual degrees of freedom n - q.
    """

    Q: np.ndarray
    Xb_tilde: np.ndarray
    col_norms: np.ndarray
    r: int

    @property
    def n(self) -> int:
        return self.Xb_tilde.shape[0]

    @property
    def q(self) -> int:
        return self.Q.shape[1]

    @property
    def m(self) -> int:
        return self.Xb_tilde.shape[1]

    def project_out(self, v: np.ndarray) -> np.ndarray:
        """Return the component of ``v`` orthogonal to the nuisance space."""
        if self.q == 0:
            return v
        return v - self.Q @ (self.Q.T @ v)


@dataclass(frozen=True, eq=False)
class ScoreStats:
    """Null-model residuals and standardized scores.

    ``Z[j]`` is the inner product of residualized column j with the
    residuals, standardized by the residual scale estimate and the
    column norm; ``W = Z**2``.
    """

    eps_hat: np.ndarray
    sigma_hat_sq: float
    Z: np.ndarray
    W: np.ndarray


@dataclass(frozen=True, eq=False)
class OrderedEvidence:
    """Descending-sorted squared scores with prefix sums.

    ``prefix_sums[k - 1]`` is the sum of the k largest entries, so any
    L_k is an O(1) lookup.  ``perm`` maps sorted positions back to the
    original column indices (ties broken by original index).
    """

    sorted_W: np.ndarray
    prefix_sums: np.ndarray
    perm: np.ndarray

    @property
    def m(self) -> int:
        return self.sorted_W.shape[0]


def residualize(X_a: np.ndarray, X_b: np.ndarray) -> ResidualizedDesign:
    """Project the nuisance column space out of the signal columns.

    Uses a thin QR factorization of X_a; the projector is never formed
    explicitly and X_a' X_a is never inverted.  q == 0 is allowed and
    leaves the signal columns untouched.
    """
    X_a = np.asarray(X_a, dtype=float)
    X_b = np.asarray(X_b, dtype=float)
    if X_a.ndim != 2 or X_b.ndim != 2 or X_a.shape[0] != X_b.shape[0]:
        raise ValueError("X_a and X_b must be 2-D with matching row counts")
    n, q = X_a.shape
    if q >= n:
        raise RankDeficientNuisance(f"q = {q} must be smaller than n = {n}")
    if q == 0:
        basis = np.zeros((n, 0))
        xb_tilde = X_b
    else:
        basis, rmat = np.linalg.qr(X_a, mode="reduced")
        max_norm = np.linalg.norm(X_a, axis=0).max()
        if np.abs(np.diag(rmat)).min() < _RANK_TOL * max_norm:
            raise RankDeficientNuisance(
                f"nuisance block has column rank below q = {q}"
            )
        xb_tilde = X_b - basis @ (basis.T @ X_b)
    norms = np.linalg.norm(xb_tilde, axis=0)
    if norms.size and norms.min() < _NORM_FLOOR:
        j = int(norms.argmin())
        raise DegenerateColumn(
            f"residualized column {j} has norm {norms[j]:.3e} < {_NORM_FLOOR}"
        )
    return ResidualizedDesign(Q=basis, Xb_tilde=xb_tilde, col_norms=norms, r=n - q)


def score_stats(rd: ResidualizedDesign, Y: np.ndarray) -> ScoreStats:
    """Compute residuals, the variance estimate and standardized scores.

    The variance estimate uses divisor n - q.  Raises ``ZeroResidual``
    when the null model fits Y exactly.
    """
    eps_hat = rd.project_out(np.asarray(Y, dtype=float))
    rss = float(eps_hat @ eps_hat)
    if np.sqrt(rss) < _RESIDUAL_FLOOR:
        raise ZeroResidual("response lies in the nuisance column space")
    sigma_hat_sq = rss / rd.r
    z = (eps_hat @ rd.Xb_tilde) / (np.sqrt(sigma_hat_sq) * rd.col_norms)
    return ScoreStats(eps_hat=eps_hat, sigma_hat_sq=sigma_hat_sq, Z=z, W=z * z)


def order_evidence(W: np.ndarray) -> OrderedEvidence:
    """Sort squared scores descending and accumulate prefix sums.

    The sort is stable: equal values keep their original index order.
    """
    w = np.asarray(W, dtype=float)
    if not np.isfinite(w).all():
        raise NonFiniteEvidence("squared scores must be finite")
    perm = np.argsort(-w, kind="stable")
    sorted_w = w[perm]
    return OrderedEvidence(
        sorted_W=sorted_w, prefix_sums=np.cumsum(sorted_w), perm=perm
    )


def l_stat(oe: OrderedEvidence, k: int) -> float:
    """Return L_k, the sum of the k largest squared scores."""
    if not 1 <= k <= oe.m:
        raise KOutOfRange(f"k = {k} outside [1, {oe.m}]")
    return float(oe.prefix_sums[k - 1])
