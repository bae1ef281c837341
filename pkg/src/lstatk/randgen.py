"""Synthetic data generation for the simulation studies.

Designs are drawn as X = Z L' where Z has i.i.d. unit-variance entries
from one of three innovation laws and L is the lower Cholesky factor of
the target covariance.  Coefficients split into a dense nuisance block
and a sparse signal block whose squared norm is fixed exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
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
]


class NotPositiveDefinite(ValueError):
    """Covariance matrix has no Cholesky factorization."""


class InvalidSpec(ValueError):
    """Coefficient or covariance specification is internally inconsistent."""


class CovarianceKind(enum.Enum):
    AR1 = "ar1"
    IDENTITY = "identity"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class CovarianceSpec:
    """Unit-diagonal covariance model for the design rows.

    Use the ``ar1``, ``identity`` or ``custom`` constructors; custom
    matrices are checked for symmetry, unit diagonal and positive
    definiteness at construction.
    """

    kind: CovarianceKind
    dim: int
    rho: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidSpec(f"dim: must be >= 1, got {self.dim}")
        if self.kind is CovarianceKind.AR1:
            if self.rho is None or not -1.0 < self.rho < 1.0:
                raise InvalidSpec(f"rho: must lie in (-1, 1), got {self.rho}")
        if self.kind is CovarianceKind.CUSTOM:
            mat = self.matrix
            if mat is None or mat.shape != (self.dim, self.dim):
                raise InvalidSpec("matrix: must be a dim x dim array")
            if not np.allclose(mat, mat.T, atol=1e-12):
                raise InvalidSpec("matrix: must be symmetric")
            if not np.allclose(np.diag(mat), 1.0, atol=1e-12):
                raise InvalidSpec("matrix: diagonal entries must all equal 1")
            try:
                np.linalg.cholesky(mat)
            except np.linalg.LinAlgError:
                raise NotPositiveDefinite("matrix: not positive definite") from None

    @classmethod
    def ar1(cls, rho: float, dim: int) -> "CovarianceSpec":
        return cls(kind=CovarianceKind.AR1, dim=dim, rho=rho)

    @classmethod
    def identity(cls, dim: int) -> "CovarianceSpec":
        return cls(kind=CovarianceKind.IDENTITY, dim=dim)

    @classmethod
    def custom(cls, matrix: np.ndarray) -> "CovarianceSpec":
        mat = np.asarray(matrix, dtype=float)
        return cls(kind=CovarianceKind.CUSTOM, dim=mat.shape[0], matrix=mat)

    def materialize(self) -> np.ndarray:
        """Return the dense covariance matrix."""
        if self.kind is CovarianceKind.IDENTITY:
            return np.eye(self.dim)
        if self.kind is CovarianceKind.AR1:
            idx = np.arange(self.dim)
            return self.rho ** np.abs(idx[:, None] - idx[None, :])
        return np.array(self.matrix, dtype=float)


@dataclass(frozen=True, eq=False)
class CovarianceFactor:
    """Lower-triangular L with L L' equal to the covariance."""

    lower_triangular_factor: np.ndarray
    is_identity: bool = False

    @property
    def dim(self) -> int:
        return self.lower_triangular_factor.shape[0]


class InnovationDistribution(enum.Enum):
    """Mean-zero unit-variance laws for the design innovations."""

    STANDARD_NORMAL = "standard_normal"
    # exp(1) - 1 has mean 0, variance 1
    CENTERED_EXPONENTIAL = "centered_exponential"
    # V / sqrt(1.8) with V ~ 0.9 N(0,1) + 0.1 N(0,9); (0.9 + 0.1*9)/1.8 = 1
    SCALED_MIXTURE_NORMAL = "scaled_mixture_normal"


def draw_innovations(
    dist: InnovationDistribution, shape, rng: np.random.Generator
) -> np.ndarray:
    """Draw i.i.d. mean-zero unit-variance innovations of the given shape."""
    if dist is InnovationDistribution.STANDARD_NORMAL:
        return rng.standard_normal(shape)
    if dist is InnovationDistribution.CENTERED_EXPONENTIAL:
        return rng.standard_exponential(shape) - 1.0
    if dist is InnovationDistribution.SCALED_MIXTURE_NORMAL:
        z = rng.standard_normal(shape)
        widen = rng.random(shape) < 0.1
        z[widen] *= 3.0
        return z / math.sqrt(1.8)
    raise TypeError(f"unknown innovation distribution: {dist!r}")


@dataclass(frozen=True)
class CoefficientSpec:
    """Coefficient layout: q nuisance entries, s signal entries.

    ``signal_norm_sq`` is the exact squared norm of the signal block;
    zero encodes the null model and requires s == 0.  ``noise_sigma``
    is the response noise standard deviation (0 gives noiseless data).
    """

    q: int
    s: int
    signal_norm_sq: float
    noise_sigma: float = 1.0

    def __post_init__(self):
        if self.q < 0:
            raise InvalidSpec(f"q: must be >= 0, got {self.q}")
        if self.s < 0:
            raise InvalidSpec(f"s: must be >= 0, got {self.s}")
        if self.signal_norm_sq < 0:
            raise InvalidSpec(
                f"signal_norm_sq: must be >= 0, got {self.signal_norm_sq}"
            )
        if (self.s == 0) != (self.signal_norm_sq == 0.0):
            raise InvalidSpec(
                "signal_norm_sq must be 0 exactly when s == 0 "
                f"(got s={self.s}, signal_norm_sq={self.signal_norm_sq})"
            )
        if self.noise_sigma < 0:
            raise InvalidSpec(f"noise_sigma: must be >= 0, got {self.noise_sigma}")


@dataclass(frozen=True, eq=False)
class Dataset:
    """One simulated replication: design, response and ground truth."""

    X: np.ndarray
    Y: np.ndarray
    beta: np.ndarray
    q: int

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def m(self) -> int:
        return self.p - self.q


def factorize(spec: CovarianceSpec) -> CovarianceFactor:
    """Cholesky-factorize the covariance described by ``spec``."""
    if spec.kind is CovarianceKind.IDENTITY:
        return CovarianceFactor(np.eye(spec.dim), is_identity=True)
    try:
        lower = np.linalg.cholesky(spec.materialize())
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(
            f"covariance of kind {spec.kind.value} is not positive definite"
        ) from None
    return CovarianceFactor(lower)


def sample_design(
    n: int,
    factor: CovarianceFactor,
    dist: InnovationDistribution,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw n design rows with the factored covariance.

    Rows are X_i = L z_i with z_i i.i.d. unit-variance innovations, so
    each row has mean zero and covariance L L'.
    """
    if n < 1:
        raise ValueError(f"n: must be >= 1, got {n}")
    z = draw_innovations(dist, (n, factor.dim), rng)
    if factor.is_identity:
        return z
    return z @ factor.lower_triangular_factor.T


def make_beta(spec: CoefficientSpec, p: int, rng: np.random.Generator) -> np.ndarray:
    """Draw the length-p coefficient vector for ``spec``.

    The q nuisance entries are i.i.d. standard normal.  The s signal
    entries (positions q+1..q+s) are standard normal draws rescaled so
    their squared norm equals ``signal_norm_sq`` exactly; the remaining
    entries are zero.
    """
    if spec.q + spec.s > p:
        raise InvalidSpec(f"s: q + s = {spec.q + spec.s} exceeds p = {p}")
    beta = np.zeros(p)
    beta[: spec.q] = rng.standard_normal(spec.q)
    if spec.s > 0:
        raw = rng.standard_normal(spec.s)
        kappa = math.sqrt(spec.signal_norm_sq / float(raw @ raw))
        beta[spec.q : spec.q + spec.s] = kappa * raw
    return beta


def simulate(
    n: int,
    spec: CovarianceSpec,
    dist: InnovationDistribution,
    coef: CoefficientSpec,
    rng: np.random.Generator,
    factor: CovarianceFactor | None = None,
) -> Dataset:
    """Simulate one dataset Y = X beta + eps with Gaussian noise.

    The design distribution varies via ``dist``; the noise is fixed
    Gaussian with standard deviation ``coef.noise_sigma``.  Draw order
    is design, then coefficients, then noise, so a fixed stream yields
    a bit-identical dataset.  ``factor`` lets callers reuse a
    precomputed factorization of ``spec`` across replications; passing
    it changes nothing but the cost.
    """
    if factor is None:
        factor = factorize(spec)
    elif factor.dim != spec.dim:
        raise InvalidSpec(
            f"factor dimension {factor.dim} does not match spec dimension {spec.dim}"
        )
    x = sample_design(n, factor, dist, rng)
    beta = make_beta(coef, spec.dim, rng)
    noise = coef.noise_sigma * rng.standard_normal(n)
    y = x @ beta + noise
    return Dataset(X=x, Y=y, beta=beta, q=coef.q)
