from fractions import Fraction

import numpy as np
import pytest

from biclust import (
    FitConfig,
    KGrid,
    ModelSpec,
    ObservedMatrix,
    adaptive_fit,
    derive_seed,
    estimate_p,
    fit_observed,
    fit_unknown_p,
    gen_gaussian,
    gen_mask,
    select_k,
    split_data,
    surrogate,
)
from biclust.adapt import _spec_for
from biclust.estimator import fit

from .conftest import planted


def gaussian_data(spec, q, p, sigma, seed):
    _, _, theta = planted(spec, q, seed=derive_seed(seed, 0))
    mask = gen_mask(spec.n1, spec.n2, p, spec.symmetric, seed=derive_seed(seed, 1))
    return theta, gen_gaussian(theta, sigma, mask, seed=derive_seed(seed, 2), symmetric=spec.symmetric)


class TestSplit:
    def test_full_observation(self, rng):
        x = ObservedMatrix.build(rng.normal(size=(6, 7)))
        s = split_data(x, 1.0, seed=3)
        t = s.delta_mask
        np.testing.assert_array_equal(s.y_delta[t], 2 * x.values[t])
        assert not s.y_delta_c[t].any()

    def test_disjoint_and_reconstruct(self, rng):
        x = gen_gaussian(rng.normal(size=(9, 8)), 1.0, gen_mask(9, 8, 0.6, seed=1), seed=2)
        s = split_data(x, 0.6, seed=4)
        assert not (s.y_delta * s.y_delta_c).any()
        np.testing.assert_array_equal(s.y_delta + s.y_delta_c, 2 * surrogate(x, 0.6))

    def test_symmetric(self):
        x = gen_gaussian(np.zeros((10, 10)), 1.0, gen_mask(10, 10, 0.7, True, 1), seed=2, symmetric=True)
        s = split_data(x, 0.7, seed=5)
        assert np.array_equal(s.delta_mask, s.delta_mask.T) and not np.diag(s.delta_mask).any()
        assert np.array_equal(s.y_delta, s.y_delta.T)

    def test_unbiased(self):
        """E[2 X E T / p] = theta, checked at one entry over 10^4 replicates."""
        theta, p, sigma = 0.7, 0.6, 1.0
        draws = np.empty(10_000)
        for r in range(draws.size):
            mask = gen_mask(1, 1, p, seed=derive_seed(r, 0))
            x = gen_gaussian(np.full((1, 1), theta), sigma, mask, seed=derive_seed(r, 1))
            draws[r] = split_data(x, p, seed=derive_seed(r, 2)).y_delta[0, 0]
        se = draws.std(ddof=1) / np.sqrt(draws.size)
        assert abs(draws.mean() - theta) <= 4 * se


class TestSelectK:
    def test_single_point(self, rng):
        x = ObservedMatrix.build(rng.normal(size=(10, 10)))
        k, losses = select_k(split_data(x, 1.0, seed=1), KGrid((3,), (2,)), 1.0, FitConfig(restarts=2))
        assert k == (3, 2) and list(losses) == [(3, 2)]

    def test_prefers_one_cluster(self):
        picks = []
        spec = ModelSpec.asymmetric(30, 30, 1, 1, 3.0)
        for t in range(20):
            _, x = gaussian_data(spec, [[2.0]], 1.0, 1.0, seed=t)
            k, _ = select_k(split_data(x, 1.0, seed=t), KGrid.up_to(2), 3.0, FitConfig(restarts=4, seed=t))
            picks.append(k == (1, 1))
        assert sum(picks) > 10

    def test_more_restarts_on_strong_instance(self):
        spec = ModelSpec.asymmetric(30, 30, 2, 2, 3.0)
        _, x = gaussian_data(spec, [[2, -2], [-2, 2]], 1.0, 1.0, seed=3)
        split = split_data(x, 1.0, seed=7)
        k4, l4 = select_k(split, KGrid.up_to(3), 3.0, FitConfig(restarts=4, seed=11))
        k8, l8 = select_k(split, KGrid.up_to(3), 3.0, FitConfig(restarts=8, seed=11))
        assert l8[k8] <= l4[k4]

    def test_more_restarts_never_worse_objective(self, rng):
        y = rng.normal(size=(20, 20))
        for k in (2, 3, 4):
            spec = ModelSpec.asymmetric(20, 20, k, k, 1.0)
            few = fit(y, spec, FitConfig(restarts=3, seed=5)).objective
            many = fit(y, spec, FitConfig(restarts=6, seed=5)).objective
            assert many <= few

    def test_empty_validation_falls_back(self):
        x = ObservedMatrix.build(np.ones((1, 1)))
        split = split_data(x, 1.0, seed=0)
        if not split.delta_mask[0, 0]:
            split = split_data(x, 1.0, seed=1)
        assert split.delta_mask[0, 0]
        k, _ = select_k(split, KGrid((1,), (1,)), 1.0, FitConfig(restarts=1))
        assert k == (1, 1)


class TestAdaptiveFit:
    def test_singleton_grid_is_two_half_fit(self):
        spec = ModelSpec.asymmetric(24, 20, 2, 2, 3.0)
        _, x = gaussian_data(spec, [[1, -1], [0, 2]], 0.8, 1.0, seed=1)
        config = FitConfig(restarts=6, seed=9)
        res = adaptive_fit(x, 0.8, 3.0, KGrid((2,), (2,)), config)
        split = res.split
        a = fit(split.y_delta, spec, config).theta_hat
        b = fit(split.y_delta_c, spec, config).theta_hat
        np.testing.assert_array_equal(res.theta_hat, np.where(split.delta_mask, b, a))
        assert res.k_hat_delta == res.k_hat_delta_c == (2, 2)

    def test_patchwork(self):
        spec = ModelSpec.asymmetric(20, 20, 2, 2, 3.0)
        _, x = gaussian_data(spec, [[1, -1], [0, 2]], 1.0, 1.0, seed=2)
        config = FitConfig(restarts=4, seed=1)
        res = adaptive_fit(x, 1.0, 3.0, KGrid.up_to(3), config, selection_restarts=2)
        other = fit(res.split.y_delta_c, _spec_for(x.shape, *res.k_hat_delta_c, 3.0, False), config).theta_hat
        t = res.split.delta_mask
        np.testing.assert_array_equal(res.theta_hat[t], other[t])

    def test_noiseless_recovers_structure(self):
        """Noiseless data: both halves find the true partition.

        The half-sample surrogates are 2*theta or 0 entrywise, so block
        values are recovered only up to sampling error of T.
        """
        spec = ModelSpec.asymmetric(20, 20, 2, 2, 4.0)
        truth, _, theta = planted(spec, [[2, -2], [-2, 2]], seed=5)
        x = gen_gaussian(theta, 0.0, np.ones((20, 20), bool), seed=0)
        res = adaptive_fit(x, 1.0, 4.0, KGrid.up_to(3), FitConfig(restarts=16, seed=3))
        assert res.k_hat_delta == res.k_hat_delta_c == (2, 2)
        for half in (res.split.y_delta, res.split.y_delta_c):
            f = fit(half, spec, FitConfig(restarts=16, seed=3))
            same_true = truth.z1[:, None] == truth.z1[None, :]
            same_fit = f.assignment.z1[:, None] == f.assignment.z1[None, :]
            assert np.array_equal(same_true, same_fit)
        assert np.abs(res.theta_hat - theta).max() < 1.0
        assert np.array_equal(np.sign(res.theta_hat), np.sign(theta))

    def test_symmetric_output(self):
        spec = ModelSpec.symmetric_model(20, 2, 2.0)
        _, x = gaussian_data(spec, [[1, -1], [-1, 1]], 0.9, 1.0, seed=4)
        res = adaptive_fit(x, 0.9, 2.0, KGrid.up_to(3), FitConfig(restarts=4, seed=2))
        assert np.array_equal(res.theta_hat, res.theta_hat.T) and not np.diag(res.theta_hat).any()
        assert all(k1 == k2 for k1, k2 in res.losses_delta)

    def test_unknown_p_defaults_to_estimate(self):
        spec = ModelSpec.asymmetric(16, 16, 2, 2, 2.0)
        _, x = gaussian_data(spec, [[1, -1], [-1, 1]], 0.7, 1.0, seed=6)
        res = adaptive_fit(x, None, 2.0, KGrid.up_to(2), FitConfig(restarts=2))
        assert res.p_hat == estimate_p(x.mask)

    def test_grid_risk_budget(self):
        """Wide grid costs at most a constant factor over the true-k grid."""
        n, M, sigma, p = 30, 2.0, 1.0, 1.0
        spec = ModelSpec.asymmetric(n, n, 2, 2, M)
        wide, single = [], []
        for t in range(20):
            theta, x = gaussian_data(spec, [[1.5, -1.5], [-1.5, 1.5]], p, sigma, seed=100 + t)
            config = FitConfig(restarts=4, seed=t)
            wide.append(np.sum((adaptive_fit(x, p, M, KGrid.up_to(5), config).theta_hat - theta) ** 2))
            single.append(np.sum((adaptive_fit(x, p, M, KGrid((2,), (2,)), config).theta_hat - theta) ** 2))
        slack = 10 * max(M**2, sigma**2) * (np.log(2 * n) / p) ** 2
        assert np.median(wide) <= 3 * np.median(single) + slack


class TestEstimateP:
    def test_examples(self):
        assert estimate_p([[1, 1], [1, 0]]) == 0.75
        full = ~np.eye(3, dtype=bool)
        assert estimate_p(full, symmetric=True) == 1.0

    def test_exact_fraction(self, rng):
        for _ in range(20):
            m = rng.random((5, 7)) < 0.4
            assert Fraction(estimate_p(m)).limit_denominator(35) == Fraction(int(m.sum()), 35)
            s = gen_mask(6, 6, 0.5, True, int(rng.integers(1000)))
            assert Fraction(estimate_p(s, True)).limit_denominator(15) == Fraction(int(np.triu(s).sum()), 15)

    def test_concentration(self):
        bound = 4 * np.sqrt(0.4 * 0.6 / 40_000)
        for t in range(50):
            assert abs(estimate_p(gen_mask(200, 200, 0.4, seed=t)) - 0.4) <= bound

    def test_degenerate(self):
        with pytest.raises(ValueError):
            estimate_p(np.zeros((1, 1), bool), symmetric=True)


class TestFitUnknownP:
    def test_full_mask(self, rng):
        spec = ModelSpec.asymmetric(10, 8, 2, 2, 2.0)
        _, x = gaussian_data(spec, [[1, -1], [0, 2]], 1.0, 0.5, seed=1)
        res, p_hat = fit_unknown_p(x, spec, FitConfig(restarts=4))
        assert p_hat == 1.0
        ref = fit_observed(x, 1.0, spec, FitConfig(restarts=4))
        np.testing.assert_array_equal(res.theta_hat, ref.theta_hat)

    def test_composition(self):
        spec = ModelSpec.symmetric_model(14, 2, 2.0)
        _, x = gaussian_data(spec, [[1, -1], [-1, 1]], 0.6, 0.5, seed=2)
        res, p_hat = fit_unknown_p(x, spec, FitConfig(restarts=4, seed=3))
        ref = fit_observed(x, p_hat, spec, FitConfig(restarts=4, seed=3))
        assert res.objective == ref.objective
        np.testing.assert_array_equal(res.theta_hat, ref.theta_hat)

    def test_no_observations(self):
        x = ObservedMatrix.build(np.zeros((3, 3)), np.zeros((3, 3)))
        with pytest.raises(ValueError):
            fit_unknown_p(x, ModelSpec.asymmetric(3, 3, 1, 1, 1.0))
