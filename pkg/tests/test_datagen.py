import math

import numpy as np
import pytest

from onebit.datagen import (
    ScenarioSpec,
    make_lowrank,
    make_sparse_cov,
    make_sparse_signal,
    sample_gaussian,
    sample_iid_t,
    sample_mvt,
    sample_noise,
    spikiness,
)
from onebit.exceptions import ConfigError
from onebit.rng import stream


class TestSparseCov:
    def test_pair_value_for_s3(self):
        # the strong pair is 0.99 - (s-2) * 0.03 before normalization
        cov = make_sparse_cov(30, 3)
        op = np.linalg.eigvalsh(cov)[-1]
        pair_raw = cov[0, 1] / cov[0, 0]  # ratio survives normalization
        assert pair_raw == pytest.approx(0.96, abs=1e-12)
        assert op == pytest.approx(1.0, abs=1e-10)

    def test_unit_operator_norm(self):
        for d, s in [(20, 3), (60, 9), (100, 5)]:
            cov = make_sparse_cov(d, s)
            assert np.linalg.norm(cov, 2) == pytest.approx(1.0, abs=1e-10)

    def test_s2_boundary_has_only_the_pair(self):
        cov = make_sparse_cov(12, 2)
        assert cov[0, 1] / cov[0, 0] == pytest.approx(0.99, abs=1e-12)
        # no 0.03 fill exists in a 2x2 block
        block = cov[:2, :2]
        assert np.count_nonzero(block) == 4

    def test_column_sparsity(self):
        for d, s in [(30, 3), (90, 9)]:
            cov = make_sparse_cov(d, s)
            nnz_per_col = np.count_nonzero(cov, axis=0)
            assert nnz_per_col.max() <= s

    def test_psd(self):
        w = np.linalg.eigvalsh(make_sparse_cov(60, 9))
        assert w.min() > 0

    def test_rejects_bad_sizes(self):
        with pytest.raises(ConfigError):
            make_sparse_cov(8, 3)
        with pytest.raises(ConfigError):
            make_sparse_cov(10, 1)


class TestSamplers:
    def test_zero_covariance_gives_zero_rows(self):
        x = sample_gaussian(np.zeros((4, 4)), 10, stream(1, 0))
        np.testing.assert_array_equal(x, 0.0)

    def test_gaussian_identity_monte_carlo(self):
        x = sample_gaussian(np.eye(5), 10**5, stream(2, 0))
        emp = x.T @ x / len(x)
        assert np.abs(emp - np.eye(5)).max() < 0.05

    def test_gaussian_variances(self):
        x = sample_gaussian(np.diag([4.0, 1.0]), 10**5, stream(3, 0))
        v = x.var(axis=0)
        assert abs(v[0] - 4.0) / 4.0 < 0.03
        assert abs(v[1] - 1.0) < 0.03

    def test_gaussian_rejects_indefinite(self):
        with pytest.raises(FloatingPointError):
            sample_gaussian(np.diag([1.0, -0.5]), 10, stream(4, 0))

    def test_mvt_large_nu_approaches_gaussian(self):
        cov = make_sparse_cov(10, 3)
        x = sample_mvt(cov, 10**6, 10**5, stream(5, 0))
        emp = x.T @ x / len(x)
        assert np.abs(emp - cov).max() < 0.05

    def test_mvt_normalized_covariance(self):
        x = sample_mvt(np.eye(4), 6.0, 10**6, stream(6, 0), normalize_cov=True)
        emp = x.T @ x / len(x)
        assert np.abs(emp - np.eye(4)).max() < 0.05

    def test_mvt_compat_inflates_variance(self):
        # Matlab semantics: correlation input, covariance nu/(nu-2)
        cov = 0.5 * np.eye(3)
        x = sample_mvt(cov, 6.0, 2 * 10**5, stream(7, 0), mvtrnd_compat=True)
        v = x.var(axis=0)
        np.testing.assert_allclose(v, 1.5, rtol=0.05)

    def test_mvt_rejects_small_nu_with_normalization(self):
        with pytest.raises(ConfigError):
            sample_mvt(np.eye(2), 2.0, 10, stream(8, 0))

    def test_scalar_t_normalization(self):
        # sqrt(2/3) t(6) has unit variance
        x = sample_iid_t(6.0, 10**6, 1, stream(9, 0))
        assert x.var() == pytest.approx(1.0, abs=0.02)


class TestSignals:
    def test_first_s_entries(self):
        theta = make_sparse_signal(10, 4)
        np.testing.assert_allclose(theta[:4], 0.5)
        np.testing.assert_array_equal(theta[4:], 0.0)

    def test_s_one_is_basis_vector(self):
        np.testing.assert_array_equal(make_sparse_signal(5, 1), [1, 0, 0, 0, 0])

    def test_unit_norm(self):
        for s in (1, 3, 7):
            assert np.linalg.norm(make_sparse_signal(20, s)) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_bad_s(self):
        with pytest.raises(ConfigError):
            make_sparse_signal(5, 6)


class TestLowRank:
    def test_unit_frobenius(self):
        for r in (1, 3):
            theta = make_lowrank(30, r, stream(10, r))
            assert np.linalg.norm(theta) == pytest.approx(1.0, abs=1e-12)

    def test_exact_rank(self):
        theta = make_lowrank(100, 1, stream(11, 0))
        s = np.linalg.svd(theta, compute_uv=False)
        assert s[1] / s[0] < 1e-10

    def test_full_rank_at_r_equals_d(self):
        theta = make_lowrank(8, 8, stream(12, 0))
        assert np.linalg.matrix_rank(theta) == 8

    def test_spikiness_range(self):
        theta = make_lowrank(50, 2, stream(13, 0))
        alpha = spikiness(theta)
        assert 1.0 <= alpha <= 50.0

    def test_rejects_bad_rank(self):
        with pytest.raises(ConfigError):
            make_lowrank(5, 6, stream(14, 0))


class TestNoise:
    def test_regression_heavy_std(self):
        # 0.3 t(6) has standard deviation 0.3 sqrt(6/4)
        eps = sample_noise("regression", "heavytailed", 10**6, stream(15, 0))
        assert eps.std() == pytest.approx(0.3 * math.sqrt(1.5), rel=0.02)

    def test_mc_heavy_std(self):
        # t(3)/sqrt(3) has unit variance, then scaled by 1/250
        eps = sample_noise("mc", "heavytailed", 10**6, stream(16, 0))
        assert eps.std() == pytest.approx(1 / 250, rel=0.02)

    def test_regression_subg_variance_reading(self):
        eps = sample_noise("regression", "subgaussian", 10**6, stream(17, 0))
        assert eps.var() == pytest.approx(math.sqrt(3 / 5), rel=0.02)

    def test_regression_subg_std_reading(self):
        eps = sample_noise("regression", "subgaussian", 10**6, stream(18, 0), gaussian_arg="std")
        assert eps.std() == pytest.approx(math.sqrt(3 / 5), rel=0.02)

    def test_mc_subg_variance_reading(self):
        eps = sample_noise("mc", "subgaussian", 10**6, stream(19, 0))
        assert eps.var() == pytest.approx(1 / 400, rel=0.02)

    def test_zero_mean(self):
        for problem, regime in [("regression", "subgaussian"), ("regression", "heavytailed"),
                                ("mc", "subgaussian"), ("mc", "heavytailed")]:
            eps = sample_noise(problem, regime, 10**5, stream(20, 0))
            assert abs(eps.mean()) < 3 * eps.std() / math.sqrt(len(eps))

    def test_unknown_family_rejected(self):
        with pytest.raises(ConfigError):
            sample_noise("pca", "subgaussian", 10, stream(21, 0))


class TestDeterminism:
    def test_generators_reproduce_bitwise(self):
        a = sample_gaussian(np.eye(3), 50, stream(42, 7))
        b = sample_gaussian(np.eye(3), 50, stream(42, 7))
        np.testing.assert_array_equal(a, b)
        c = sample_mvt(np.eye(3), 6, 50, stream(42, 8))
        d = sample_mvt(np.eye(3), 6, 50, stream(42, 8))
        np.testing.assert_array_equal(c, d)
        e = make_lowrank(10, 2, stream(42, 9))
        f = make_lowrank(10, 2, stream(42, 9))
        np.testing.assert_array_equal(e, f)

    def test_distinct_tags_give_distinct_streams(self):
        a = sample_gaussian(np.eye(3), 50, stream(42, 0))
        b = sample_gaussian(np.eye(3), 50, stream(42, 1))
        assert not np.array_equal(a, b)


class TestScenarioSpec:
    def test_cov_requires_3s_le_d(self):
        with pytest.raises(ConfigError):
            ScenarioSpec(problem="cov", regime="subgaussian", d=8, n=100, s_or_r=3)

    def test_valid(self):
        spec = ScenarioSpec(problem="mc", regime="heavytailed", d=100, n=6000, s_or_r=2)
        assert spec.nu == 6.0
