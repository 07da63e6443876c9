import numpy as np
import pytest
from scipy import integrate, stats

from reinforce_lab.graphs import PinnedGraph, WeightedGraph
from reinforce_lab.mcmc import (McmcChain, adapt_and_sample, autocorrelation,
                                effective_sample_size, metropolis_step,
                                split_rhat)
from reinforce_lab.measures import limit_log_density, sigma_log_density
from test_graphs import triangle


def single_vertex_pin(eps=1.0):
    g = WeightedGraph(1, np.zeros((0, 2), dtype=np.int64), np.zeros(0))
    return PinnedGraph(g, np.array([eps]))


class TestStep:
    def test_uniform_target_always_accepts(self):
        rng = np.random.default_rng(0)
        chain = McmcChain(position=np.zeros(2), scale=0.5)
        chain.current_logp = 0.0
        for _ in range(200):
            metropolis_step(chain, lambda x: 0.0, rng)
        assert chain.accepted == chain.proposed == 200

    def test_nonfinite_proposals_counted_and_rejected(self):
        rng = np.random.default_rng(1)
        chain = McmcChain(position=np.zeros(1), scale=1.0)
        chain.current_logp = 0.0

        def half_line(x):
            if x[0] < 0:
                raise ValueError("outside support")
            return 0.0

        for _ in range(300):
            metropolis_step(chain, half_line, rng)
        assert chain.rejected_nonfinite > 0
        assert chain.position[0] >= 0

    def test_zero_sum_gauge_preserved(self):
        rng = np.random.default_rng(2)
        chain = McmcChain(position=np.zeros(3), scale=0.8, zero_sum=True)
        chain.current_logp = 0.0
        for _ in range(500):
            metropolis_step(chain, lambda x: -0.5 * np.dot(x, x), rng)
            assert abs(chain.position.sum()) < 1e-12

    def test_detailed_balance_two_state_caricature(self):
        # discretised double-well: occupation of the right half must match the
        # target mass ratio
        rng = np.random.default_rng(3)

        def logp(x):
            return float(-0.5 * (abs(x[0]) - 2.0) ** 2)

        chain = McmcChain(position=np.array([2.0]), scale=1.5)
        chain.current_logp = logp(chain.position)
        right = 0
        n = 60_000
        for _ in range(n):
            metropolis_step(chain, logp, rng)
            right += chain.position[0] > 0
        assert abs(right / n - 0.5) < 0.02


class TestDiagnostics:
    def test_autocorrelation_iid(self):
        rng = np.random.default_rng(4)
        rho = autocorrelation(rng.normal(size=20_000), 5)
        assert rho[0] == 1.0
        assert np.abs(rho[1:]).max() < 0.03

    def test_autocorrelation_ar1(self):
        rng = np.random.default_rng(5)
        phi = 0.8
        x = np.empty(50_000)
        x[0] = 0.0
        eps = rng.normal(size=len(x))
        for k in range(1, len(x)):
            x[k] = phi * x[k - 1] + eps[k]
        rho = autocorrelation(x, 3)
        assert rho[1] == pytest.approx(phi, abs=0.02)

    def test_ess_iid_near_n(self):
        rng = np.random.default_rng(6)
        assert effective_sample_size(rng.normal(size=5000)) > 3500

    def test_ess_correlated_much_smaller(self):
        rng = np.random.default_rng(7)
        x = np.cumsum(rng.normal(size=5000))      # random walk
        assert effective_sample_size(x) < 500

    def test_rhat_stationary_near_one(self):
        rng = np.random.default_rng(8)
        assert split_rhat(rng.normal(size=4000)) < 1.01

    def test_rhat_detects_drift(self):
        assert split_rhat(np.linspace(0, 10, 4000)) > 1.5


class TestAdaptAndSample:
    def test_gaussian_target_moments(self):
        samples, diag = adapt_and_sample(lambda x: -0.5 * np.dot(x, x), 1, 4000,
                                         seed=9, burn_in=3000)
        assert abs(samples.mean()) < 0.08
        assert samples.var() == pytest.approx(1.0, abs=0.1)
        assert 0.2 < diag["acceptance"] < 0.7
        assert not diag["flagged"]

    def test_deterministic_given_seed(self):
        kwargs = dict(zero_sum=True, seed=10, burn_in=500)
        a, _ = adapt_and_sample(lambda x: -np.dot(x, x), 3, 50, **kwargs)
        b, _ = adapt_and_sample(lambda x: -np.dot(x, x), 3, 50, **kwargs)
        assert np.array_equal(a, b)

    def test_shaped_proposals_fix_bad_conditioning(self):
        # target with variances 1 and 1e4: isotropic proposals crawl along the
        # wide coordinate, shaped ones sample both marginals correctly
        cov_inv = np.array([1.0, 1e-4])

        def logp(x):
            return float(-0.5 * np.sum(cov_inv * x * x))

        transform = np.diag(1.0 / np.sqrt(cov_inv))
        samples, diag = adapt_and_sample(logp, 2, 3000, seed=20, burn_in=3000,
                                         proposal_transform=transform)
        assert samples[:, 0].var() == pytest.approx(1.0, rel=0.2)
        assert samples[:, 1].var() == pytest.approx(1e4, rel=0.2)
        assert not diag["flagged"]

    def test_asymmetric_transform_rejected(self):
        with pytest.raises(ValueError):
            adapt_and_sample(lambda x: 0.0, 2, 10, burn_in=10,
                             proposal_transform=np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_bad_initial_point_rejected(self):
        with pytest.raises(ValueError):
            adapt_and_sample(lambda x: np.nan, 1, 10, burn_in=10)

    def test_single_site_field_mean(self):
        # E[cosh(t) - 1] under the one-vertex pinned measure, vs quadrature
        pin = single_vertex_pin(1.0)

        def logp(t):
            return sigma_log_density(pin, t)

        samples, diag = adapt_and_sample(logp, 1, 6000, seed=11, burn_in=4000)
        f = lambda t: (np.cosh(t) - 1.0) * np.exp(logp(np.array([t])))
        target, _ = integrate.quad(f, -40, 40)
        mass, _ = integrate.quad(lambda t: np.exp(logp(np.array([t]))), -40, 40)
        est = np.mean(np.cosh(samples[:, 0]) - 1.0)
        se = np.std(np.cosh(samples[:, 0]) - 1.0) / np.sqrt(min(diag["ess"]))
        assert abs(est - target / mass) < 4 * se + 1e-3

    def test_two_vertex_limit_field_ks(self):
        # marginal of u_0 - u_1 against the quadrature-normalised density
        g = WeightedGraph(2, np.array([[0, 1]]), np.array([1.0]))

        def logp(u):
            return limit_log_density(g, u, 0, check_gauge=False)

        samples, _ = adapt_and_sample(logp, 2, 4000, zero_sum=True, seed=12,
                                      burn_in=4000)
        s = samples[:, 0] - samples[:, 1]

        def pdf(x):
            return np.exp(logp(np.array([x / 2, -x / 2])))

        grid = np.linspace(-25, 25, 4001)
        vals = np.array([pdf(x) for x in grid])
        cdf_grid = np.concatenate([[0.0], np.cumsum((vals[1:] + vals[:-1]) / 2
                                                    * np.diff(grid))])
        cdf_grid /= cdf_grid[-1]
        cdf = lambda x: np.interp(x, grid, cdf_grid)
        assert stats.kstest(s, cdf).pvalue > 0.01
