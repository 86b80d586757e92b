"""Prior densities, the unnormalized posterior, and the Gibbs rate update."""

import math

import numpy as np
import pytest
from scipy import integrate, stats

import dwreg.distribution as dw
from dwreg.priors import (
    HyperState,
    PriorSpec,
    gamma_logpdf,
    gibbs_update_rate,
    log_posterior_unnorm,
    log_prior,
)
from dwreg.regression import (
    Dataset,
    ModelSpec,
    RegressionParams,
    log_likelihood,
)


def small_dataset(seed=0, n=80):
    rng = np.random.default_rng(seed)
    y = dw.sample(dw.DWParams(0.55, 1.2), n, rng)
    X = np.column_stack([np.ones(n), rng.uniform(0, 1.5, n), rng.uniform(0, 1.5, n)])
    return Dataset(y=y, X=X)


class TestLogPrior:
    def test_flat_is_zero(self):
        params = RegressionParams(theta=[3.0, -2.0], gamma=[0.7])
        assert log_prior(params, HyperState(1.0, 1.0), PriorSpec("flat")) == 0.0

    def test_laplace_peak_value(self):
        # single penalized coordinate at 0 with rate 2: ln(2/2) = 0
        params = RegressionParams(theta=[5.0, 0.0], gamma=[1.0])
        spec = PriorSpec("laplace", hyper_a=2, hyper_b=1)
        assert log_prior(params, HyperState(2.0, 3.0), spec) == pytest.approx(0.0)

    def test_laplace_single_coordinate(self):
        # ln(lambda/2) - lambda*|theta_1| with lambda=1, theta_1=0.5
        params = RegressionParams(theta=[9.9, 0.5], gamma=[2.2])
        spec = PriorSpec("laplace")
        got = log_prior(params, HyperState(1.0, 7.0), spec)
        assert got == pytest.approx(math.log(0.5) - 0.5, rel=1e-14)

    def test_intercepts_excluded_by_default(self):
        spec = PriorSpec("laplace")
        hyper = HyperState(1.3, 2.1)
        a = log_prior(RegressionParams([0.0, 0.4], [0.0, -0.2]), hyper, spec)
        b = log_prior(RegressionParams([99.0, 0.4], [-5.0, -0.2]), hyper, spec)
        assert a == pytest.approx(b)

    def test_penalize_intercepts_switch(self):
        spec = PriorSpec("laplace", penalize_intercepts=True)
        hyper = HyperState(1.0, 1.0)
        a = log_prior(RegressionParams([0.0, 0.4], [0.0]), hyper, spec)
        b = log_prior(RegressionParams([1.0, 0.4], [0.0]), hyper, spec)
        assert b == pytest.approx(a - 1.0)

    def test_normalizes_per_coordinate(self):
        # exp(log prior) integrates to 1 over one penalized coordinate
        spec = PriorSpec("laplace")
        hyper = HyperState(1.7, 1.0)

        def density(t):
            params = RegressionParams([0.0, t], [0.0])
            return math.exp(log_prior(params, hyper, spec))

        val, _ = integrate.quad(density, -60, 60, limit=200)
        assert val == pytest.approx(1.0, abs=1e-6)


class TestLogPosterior:
    def test_flat_equals_likelihood(self):
        data = small_dataset()
        mspec = ModelSpec(q_regressed=True, beta_regressed=False)
        params = RegressionParams(theta=[0.1, -0.2, 0.3], gamma=[0.05])
        lp = log_posterior_unnorm(params, None, data, mspec, PriorSpec("flat"))
        assert lp == pytest.approx(log_likelihood(data, params, mspec))

    def test_laplace_term_by_term(self):
        data = small_dataset(1)
        mspec = ModelSpec(q_regressed=True, beta_regressed=True)
        pspec = PriorSpec("laplace", hyper_a=2.0, hyper_b=1.0)
        params = RegressionParams(theta=[0.1, -0.2, 0.3], gamma=[0.05, 0.4, -0.6])
        hyper = HyperState(1.4, 0.9)
        expected = (log_likelihood(data, params, mspec)
                    + log_prior(params, hyper, pspec)
                    + gamma_logpdf(1.4, 2.0, 1.0) + gamma_logpdf(0.9, 2.0, 1.0))
        got = log_posterior_unnorm(params, hyper, data, mspec, pspec)
        assert got == pytest.approx(expected, rel=1e-14)

    def test_penalized_loglik_differs_by_constant(self):
        # with the rates fixed the posterior is the L1-penalized
        # log-likelihood up to an additive constant
        data = small_dataset(2)
        mspec = ModelSpec(q_regressed=True, beta_regressed=True)
        pspec = PriorSpec("laplace")
        hyper = HyperState(1.8, 0.7)
        rng = np.random.default_rng(3)
        diffs = []
        for _ in range(25):
            params = RegressionParams(theta=rng.normal(size=3) * 0.3,
                                      gamma=rng.normal(size=3) * 0.3)
            penalized = (log_likelihood(data, params, mspec)
                         - hyper.lam * np.sum(np.abs(params.theta[1:]))
                         - hyper.tau * np.sum(np.abs(params.gamma[1:])))
            lp = log_posterior_unnorm(params, hyper, data, mspec, pspec)
            diffs.append(lp - penalized)
        assert np.var(diffs) < 1e-18

    def test_gamma_logpdf_matches_scipy(self):
        for x, a, b in [(0.5, 2.0, 1.0), (3.0, 1.5, 0.5), (0.01, 4.0, 2.0)]:
            assert gamma_logpdf(x, a, b) == pytest.approx(
                stats.gamma.logpdf(x, a, scale=1.0 / b), rel=1e-12)


class TestGibbsRateUpdate:
    def test_zero_coeffs_moments(self):
        # full conditional Gamma(2+5, 1): mean 7
        rng = np.random.default_rng(42)
        draws = np.array([gibbs_update_rate(np.zeros(5), 2.0, 1.0, rng)
                          for _ in range(100_000)])
        assert np.mean(draws) == pytest.approx(7.0, abs=0.1)

    def test_empty_set_is_prior(self):
        rng = np.random.default_rng(43)
        draws = np.array([gibbs_update_rate(np.zeros(0), 3.0, 2.0, rng)
                          for _ in range(100_000)])
        assert np.mean(draws) == pytest.approx(1.5, abs=0.05)
        assert np.var(draws) == pytest.approx(0.75, abs=0.05)

    def test_density_tvd_against_analytic(self):
        coeffs = np.array([0.3, -0.4, 0.1])
        a, b = 2.0, 1.0
        shape, rate = a + 3, b + 0.8
        rng = np.random.default_rng(44)
        draws = np.array([gibbs_update_rate(coeffs, a, b, rng)
                          for _ in range(100_000)])
        hi = stats.gamma.ppf(0.9995, shape, scale=1 / rate)
        edges = np.linspace(0.0, hi, 41)
        emp, _ = np.histogram(draws, bins=edges)
        emp = emp / draws.size
        cdfv = stats.gamma.cdf(edges, shape, scale=1 / rate)
        truth = np.diff(cdfv)
        tvd = 0.5 * np.abs(emp - truth).sum()
        assert tvd < 0.02
