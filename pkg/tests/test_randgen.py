"""Data generation: covariance specs, innovations, coefficients, datasets."""

import math

import numpy as np
import pytest

from lstatk import (
    CoefficientSpec,
    CovarianceSpec,
    InnovationDistribution,
    InvalidSpec,
    NotPositiveDefinite,
    factorize,
    make_beta,
    sample_design,
    simulate,
    substream,
)
from lstatk.randgen import draw_innovations


class TestCovarianceSpec:
    def test_ar1_materialize_matches_power_structure(self):
        mat = CovarianceSpec.ar1(0.7, 3).materialize()
        idx = np.arange(3)
        expected = 0.7 ** np.abs(idx[:, None] - idx[None, :])
        assert np.array_equal(mat, expected)
        assert np.array_equal(np.diag(mat), np.ones(3))

    @pytest.mark.parametrize("rho", [1.0, -1.0, 1.3, float("nan")])
    def test_ar1_rho_out_of_open_interval_rejected(self, rho):
        with pytest.raises(InvalidSpec):
            CovarianceSpec.ar1(rho, 4)

    def test_dim_must_be_positive(self):
        with pytest.raises(InvalidSpec):
            CovarianceSpec.identity(0)

    def test_custom_requires_symmetry(self):
        mat = np.array([[1.0, 0.5], [0.2, 1.0]])
        with pytest.raises(InvalidSpec):
            CovarianceSpec.custom(mat)

    def test_custom_requires_unit_diagonal(self):
        mat = np.array([[2.0, 0.1], [0.1, 1.0]])
        with pytest.raises(InvalidSpec):
            CovarianceSpec.custom(mat)

    def test_custom_requires_positive_definite(self):
        mat = np.array([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(NotPositiveDefinite):
            CovarianceSpec.custom(mat)


class TestFactorize:
    def test_ar1_dim2_cholesky_frozen(self):
        # Lower factor of [[1, .7], [.7, 1]] is [[1, 0], [.7, sqrt(.51)]].
        factor = factorize(CovarianceSpec.ar1(0.7, 2))
        expected = np.array([[1.0, 0.0], [0.7, 0.714142842854285]])
        assert np.allclose(factor.lower_triangular_factor, expected, atol=1e-15)
        assert not factor.is_identity

    def test_factor_reproduces_covariance(self):
        spec = CovarianceSpec.ar1(-0.4, 7)
        lower = factorize(spec).lower_triangular_factor
        assert np.allclose(lower @ lower.T, spec.materialize(), atol=1e-12)
        assert np.allclose(np.triu(lower, 1), 0.0)

    def test_identity_fast_path(self):
        factor = factorize(CovarianceSpec.identity(5))
        assert factor.is_identity
        assert np.array_equal(factor.lower_triangular_factor, np.eye(5))


class TestInnovations:
    @pytest.mark.parametrize("dist", list(InnovationDistribution))
    def test_shape_and_unit_moments(self, dist):
        draws = draw_innovations(dist, (400, 500), substream(3, dist.value))
        assert draws.shape == (400, 500)
        # 200k draws: 4-sigma bands around mean 0 and variance 1
        assert abs(draws.mean()) < 4.0 / math.sqrt(draws.size)
        assert abs(draws.var() - 1.0) < 4.0 * 3.0 / math.sqrt(draws.size)

    def test_centered_exponential_support(self):
        draws = draw_innovations(
            InnovationDistribution.CENTERED_EXPONENTIAL, 10_000, substream(4)
        )
        assert draws.min() > -1.0

    def test_mixture_has_heavier_tail_than_normal(self):
        rng = substream(5)
        mix = draw_innovations(InnovationDistribution.SCALED_MIXTURE_NORMAL, 200_000, rng)
        gauss = substream(6).standard_normal(200_000)
        assert np.mean(mix**4) > np.mean(gauss**4) + 1.0


class TestCoefficientSpec:
    def test_null_model_requires_zero_signal_both_ways(self):
        with pytest.raises(InvalidSpec):
            CoefficientSpec(q=2, s=0, signal_norm_sq=0.8)
        with pytest.raises(InvalidSpec):
            CoefficientSpec(q=2, s=3, signal_norm_sq=0.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(q=-1, s=0, signal_norm_sq=0.0),
            dict(q=0, s=-2, signal_norm_sq=0.0),
            dict(q=0, s=1, signal_norm_sq=-0.5),
            dict(q=0, s=0, signal_norm_sq=0.0, noise_sigma=-1.0),
        ],
    )
    def test_negative_fields_rejected(self, kwargs):
        with pytest.raises(InvalidSpec):
            CoefficientSpec(**kwargs)

    def test_noiseless_allowed(self):
        spec = CoefficientSpec(q=1, s=0, signal_norm_sq=0.0, noise_sigma=0.0)
        assert spec.noise_sigma == 0.0


class TestMakeBeta:
    def test_signal_norm_hit_exactly_and_support_contiguous(self):
        spec = CoefficientSpec(q=3, s=5, signal_norm_sq=0.8)
        beta = make_beta(spec, 20, substream(9))
        signal = beta[3:8]
        assert math.isclose(float(signal @ signal), 0.8, rel_tol=1e-12)
        assert np.all(signal != 0.0)
        assert np.array_equal(beta[8:], np.zeros(12))
        assert np.all(beta[:3] != 0.0)

    def test_null_model_beta_b_zero(self):
        spec = CoefficientSpec(q=2, s=0, signal_norm_sq=0.0)
        beta = make_beta(spec, 6, substream(10))
        assert np.array_equal(beta[2:], np.zeros(4))

    def test_support_larger_than_p_rejected(self):
        spec = CoefficientSpec(q=3, s=5, signal_norm_sq=0.8)
        with pytest.raises(InvalidSpec):
            make_beta(spec, 7, substream(11))


class TestSimulate:
    def test_shapes_and_reconstruction(self):
        spec = CovarianceSpec.ar1(0.5, 12)
        coef = CoefficientSpec(q=2, s=3, signal_norm_sq=0.8, noise_sigma=2.0)
        ds = simulate(30, spec, InnovationDistribution.STANDARD_NORMAL, coef, substream(12))
        assert ds.X.shape == (30, 12) and ds.Y.shape == (30,)
        assert (ds.n, ds.p, ds.m, ds.q) == (30, 12, 10, 2)
        # replay the documented draw order on a fresh copy of the stream
        rng = substream(12)
        factor = factorize(spec)
        x = sample_design(30, factor, InnovationDistribution.STANDARD_NORMAL, rng)
        beta = make_beta(coef, 12, rng)
        noise = 2.0 * rng.standard_normal(30)
        assert np.array_equal(ds.X, x)
        assert np.array_equal(ds.beta, beta)
        assert np.array_equal(ds.Y, x @ beta + noise)

    def test_precomputed_factor_is_bit_identical(self):
        spec = CovarianceSpec.ar1(0.6, 8)
        coef = CoefficientSpec(q=1, s=0, signal_norm_sq=0.0)
        dist = InnovationDistribution.CENTERED_EXPONENTIAL
        base = simulate(15, spec, dist, coef, substream(13))
        again = simulate(15, spec, dist, coef, substream(13), factor=factorize(spec))
        assert np.array_equal(base.X, again.X)
        assert np.array_equal(base.Y, again.Y)

    def test_mismatched_factor_dimension_rejected(self):
        spec = CovarianceSpec.ar1(0.6, 8)
        coef = CoefficientSpec(q=1, s=0, signal_norm_sq=0.0)
        wrong = factorize(CovarianceSpec.identity(9))
        with pytest.raises(InvalidSpec):
            simulate(15, spec, InnovationDistribution.STANDARD_NORMAL, coef, substream(1), factor=wrong)

    def test_identity_design_skips_mixing(self):
        factor = factorize(CovarianceSpec.identity(6))
        x = sample_design(9, factor, InnovationDistribution.STANDARD_NORMAL, substream(14))
        assert np.array_equal(x, substream(14).standard_normal((9, 6)))

    def test_sample_design_requires_positive_n(self):
        factor = factorize(CovarianceSpec.identity(3))
        with pytest.raises(ValueError):
            sample_design(0, factor, InnovationDistribution.STANDARD_NORMAL, substream(2))

    def test_design_rows_have_target_covariance(self):
        spec = CovarianceSpec.ar1(0.7, 4)
        x = sample_design(
            60_000, factorize(spec), InnovationDistribution.STANDARD_NORMAL, substream(15)
        )
        emp = x.T @ x / x.shape[0]
        assert np.allclose(emp, spec.materialize(), atol=0.03)
