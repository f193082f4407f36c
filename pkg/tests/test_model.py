import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varest.errors import (
    DimensionMismatch,
    NearSingularCovariance,
    TooFewObservations,
)
from varest.model import (
    CoefficientVector,
    CovariateModel,
    LabeledDataset,
    build_w,
    sample_variance_y,
    whiten,
)

from oracles import w_loop

rng = np.random.default_rng(42)


class TestCovariateModel:
    def test_rejects_asymmetric_covariance(self):
        with pytest.raises(ValueError):
            CovariateModel(mean=np.zeros(2), covariance=[[1.0, 0.5], [0.0, 1.0]],
                           fourth_moments=3.0)

    def test_rejects_nonpositive_eigenvalue(self):
        with pytest.raises(NearSingularCovariance):
            CovariateModel(mean=np.zeros(2), covariance=[[1.0, 1.0], [1.0, 1.0]],
                           fourth_moments=3.0)

    def test_rejects_fourth_moment_below_one(self):
        with pytest.raises(ValueError):
            CovariateModel.independent(3, fourth_moment=0.5)

    def test_gaussian_forces_fourth_moment_three(self):
        with pytest.raises(ValueError):
            CovariateModel(mean=np.zeros(2), covariance=np.eye(2),
                           fourth_moments=2.0, gaussian=True)
        m = CovariateModel.standard_gaussian(4)
        np.testing.assert_array_equal(m.fourth_moments, 3.0)

    def test_scalar_fourth_moment_broadcast(self):
        m = CovariateModel.independent(5, fourth_moment=2.5)
        assert m.fourth_moments.shape == (5,)

    def test_immutable(self):
        m = CovariateModel.standard_gaussian(3)
        with pytest.raises(ValueError):
            m.mean[0] = 1.0


class TestWhiten:
    def test_identity_model_is_identity_map_bitwise(self):
        x = rng.standard_normal((6, 3))
        model = CovariateModel.standard_gaussian(3)
        np.testing.assert_array_equal(whiten(x, model), x)

    def test_diagonal_hand_example(self):
        model = CovariateModel(mean=[1.0, 1.0], covariance=np.diag([4.0, 9.0]),
                               fourth_moments=3.0)
        out = whiten(np.array([[3.0, 4.0]]), model)
        np.testing.assert_allclose(out, [[1.0, 1.0]], rtol=1e-12)

    def test_whitened_population_covariance_is_identity(self):
        g = np.random.default_rng(5)
        a = g.standard_normal((3, 3))
        cov = a @ a.T + 0.5 * np.eye(3)
        mu = g.standard_normal(3)
        model = CovariateModel(mean=mu, covariance=cov, fourth_moments=3.0)
        x = g.standard_normal((5, 3))
        out = whiten(x, model)
        # matrix identity: Sigma^{-1/2} Sigma Sigma^{-1/2} = I
        m = model.sqrt_inverse_covariance()
        np.testing.assert_allclose(m @ cov @ m, np.eye(3), atol=1e-10)
        # transform consistency on the sample
        np.testing.assert_allclose(out, (x - mu) @ m.T, rtol=1e-12)

    def test_near_singular_raises(self):
        cov = np.diag([1.0, 1e-12])
        model = CovariateModel(mean=np.zeros(2), covariance=cov, fourth_moments=3.0)
        with pytest.raises(NearSingularCovariance):
            whiten(np.zeros((2, 2)), model)

    def test_dimension_mismatch(self):
        model = CovariateModel.standard_gaussian(3)
        with pytest.raises(DimensionMismatch):
            whiten(np.zeros((4, 2)), model)


class TestLabeledDataset:
    def test_requires_two_rows(self):
        with pytest.raises(TooFewObservations):
            LabeledDataset(x=[[1.0]], y=[1.0])

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            LabeledDataset(x=[[1.0], [np.inf]], y=[0.0, 0.0])

    def test_center_y(self):
        ds = LabeledDataset(x=[[1.0], [2.0]], y=[1.0, 3.0])
        centered = ds.center_y()
        np.testing.assert_allclose(centered.y, [-1.0, 1.0])


class TestBuildW:
    def test_hand_example(self):
        w = build_w(LabeledDataset(x=[[1.0], [2.0]], y=[1.0, 1.0]))
        np.testing.assert_array_equal(w.w, [[1.0], [2.0]])
        np.testing.assert_array_equal(w.column_sums, [3.0])

    def test_zero_response(self):
        w = build_w(LabeledDataset(x=rng.standard_normal((4, 2)), y=np.zeros(4)))
        assert np.all(w.w == 0.0)

    def test_matches_loop(self):
        x = rng.standard_normal((6, 4))
        y = rng.standard_normal(6)
        w = build_w(LabeledDataset(x=x, y=y))
        np.testing.assert_array_equal(w.w, w_loop(x, y))

    def test_cached_sums_match_recomputation(self):
        x = rng.standard_normal((30, 7))
        y = rng.standard_normal(30)
        w = build_w(LabeledDataset(x=x, y=y))
        np.testing.assert_allclose(w.column_sums, w.w.sum(axis=0), rtol=1e-12)
        np.testing.assert_allclose(w.column_square_sums, (w.w ** 2).sum(axis=0), rtol=1e-12)

    def test_column_permutation_commutes(self):
        x = rng.standard_normal((8, 5))
        y = rng.standard_normal(8)
        perm = rng.permutation(5)
        w1 = build_w(LabeledDataset(x=x[:, perm], y=y))
        w2 = build_w(LabeledDataset(x=x, y=y))
        np.testing.assert_array_equal(w1.w, w2.w[:, perm])


class TestSampleVarianceY:
    def test_constant_vector(self):
        assert sample_variance_y([1.0, 1.0, 1.0]) == 0.0

    def test_hand_example(self):
        assert sample_variance_y([0.0, 2.0]) == 2.0

    def test_too_few(self):
        with pytest.raises(TooFewObservations):
            sample_variance_y([1.0])

    def test_simulation_oracle(self):
        g = np.random.default_rng(99)
        y = g.normal(0.0, 2.0, size=2000)
        est = sample_variance_y(y)
        # Var of the sample variance of N(0,4): 2*sigma^4/(n-1)
        se = np.sqrt(2.0 * 16.0 / 1999)
        assert abs(est - 4.0) < 3 * se

    @given(st.floats(-1e8, 1e8))
    @settings(max_examples=50, deadline=None)
    def test_shift_invariance(self, c):
        y = np.array([0.3, -1.2, 2.5, 0.0, 4.793])
        base = sample_variance_y(y)
        shifted = sample_variance_y(y + c)
        assert abs(shifted - base) <= 1e-12 * max(base, abs(c) ** 2 * 1e-3, 1.0)


class TestCoefficientVector:
    def test_tau2(self):
        assert CoefficientVector(beta=[3.0, 4.0]).tau2 == 25.0

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            CoefficientVector(beta=[np.nan])
