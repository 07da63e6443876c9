import numpy as np
import pytest
from scipy import stats

from reinforce_lab.batch import (_categorical_rows, encode_paths,
                                 errw_jump_chains, rubin_jump_chains,
                                 two_vertex_martingale_samples,
                                 vrjp_jump_chains, x_jump_chains,
                                 x_occupation, z_jump_chains, z_occupancy)
from reinforce_lab.gof import enumerate_path_law, path_law_chi_square
from reinforce_lab.graphs import WeightedGraph
from reinforce_lab.processes import run_until
from test_graphs import triangle


class TestHelpers:
    def test_categorical_rows_law(self):
        rng = np.random.default_rng(0)
        w = np.tile(np.array([1.0, 2.0, 3.0]), (60_000, 1))
        k = _categorical_rows(w, rng)
        freq = np.bincount(k, minlength=3) / len(k)
        assert np.abs(freq - np.array([1, 2, 3]) / 6).max() < 0.01

    def test_categorical_rows_respects_mask(self):
        rng = np.random.default_rng(1)
        w = np.tile(np.array([0.0, 1.0, 0.0]), (200, 1))
        assert np.all(_categorical_rows(w, rng) == 1)

    def test_encode_paths_bijective(self):
        rng = np.random.default_rng(2)
        paths = rng.integers(0, 3, size=(500, 5))
        codes = encode_paths(paths, 3)
        assert len(np.unique(codes)) == len(np.unique(paths, axis=0))


class TestJumpChainLaws:
    """Each batched kernel against the exact enumerated path law."""

    def test_errw_matches_exact_law(self):
        g = triangle()
        a = np.array([1.0, 2.0, 0.5])
        law = enumerate_path_law(g, a, 3, start=0)
        rng = np.random.default_rng(3)
        paths = errw_jump_chains(g, a, 3, 40_000, rng)
        _, p, _ = path_law_chi_square(paths, law, g.n)
        assert p > 0.01

    def test_rubin_matches_exact_law(self):
        # the continuous-time embedded chain has the same path law
        g = triangle()
        a = np.array([1.0, 2.0, 0.5])
        law = enumerate_path_law(g, a, 3, start=0)
        rng = np.random.default_rng(4)
        paths = rubin_jump_chains(g, a, 3, 40_000, rng)
        _, p, _ = path_law_chi_square(paths, law, g.n)
        assert p > 0.01

    def test_x_first_step_proportional_to_w(self):
        g = triangle(np.array([1.0, 3.0, 1.0]))
        rng = np.random.default_rng(5)
        paths = x_jump_chains(g, g.weights, 1, 40_000, rng)
        freq = np.bincount(paths[:, 1], minlength=3) / len(paths)
        assert np.abs(freq - np.array([0, 0.25, 0.75])).max() < 0.01

    def test_vrjp_first_step_proportional_to_w(self):
        g = triangle(np.array([1.0, 3.0, 1.0]))
        rng = np.random.default_rng(6)
        paths = vrjp_jump_chains(g, g.weights, 1, 40_000, rng)
        freq = np.bincount(paths[:, 1], minlength=3) / len(paths)
        assert np.abs(freq - np.array([0, 0.25, 0.75])).max() < 0.01

    def test_z_first_step_tilted_by_field(self):
        g = triangle()
        U = np.array([0.0, np.log(2.0), 0.0])
        rng = np.random.default_rng(7)
        paths = z_jump_chains(g, g.weights, U, 1, 40_000, rng)
        freq = np.bincount(paths[:, 1], minlength=3) / len(paths)
        assert np.abs(freq - np.array([0, 2 / 3, 1 / 3])).max() < 0.01

    def test_per_replica_weights_accepted(self):
        g = triangle()
        rng = np.random.default_rng(8)
        W = rng.gamma(1.0, size=(100, 3))
        paths = x_jump_chains(g, W, 4, 100, rng)
        assert paths.shape == (100, 5)
        U = rng.normal(size=(100, 3))
        paths = z_jump_chains(g, g.weights, U, 4, 100, rng)
        assert paths.shape == (100, 5)


class TestXOccupation:
    def test_local_times_sum_to_horizon(self):
        g = triangle()
        rng = np.random.default_rng(9)
        T, jumps = x_occupation(g, g.weights, 2.5, 300, rng)
        assert np.allclose(T.sum(axis=1), 2.5, rtol=1e-9)
        assert jumps.min() >= 0

    def test_matches_scalar_trajectories(self):
        g = triangle()
        rng = np.random.default_rng(10)
        T, _ = x_occupation(g, g.weights, 3.0, 2000, rng)
        scalar = np.array([
            run_until("xproc", g, weights=g.weights, horizon=3.0,
                      seed=10_000 + r).final_local_time[0]
            for r in range(2000)])
        assert stats.ks_2samp(T[:, 0], scalar).pvalue > 0.01


class TestZOccupancy:
    def test_long_run_matches_stationary(self):
        g = triangle()
        U = np.array([0.4, 0.0, -0.4])
        rng = np.random.default_rng(11)
        occ, pi = z_occupancy(g, g.weights, U, 200_000, rng)
        w = np.exp(2 * U)
        assert np.allclose(pi, w / w.sum(), atol=1e-12)
        assert np.abs(occ - pi).max() < 0.01


class TestTwoVertexMartingale:
    def test_mean_and_variance(self):
        rng = np.random.default_rng(12)
        W, h = 1.0, 5.0
        m = two_vertex_martingale_samples(W, h, 40_000, rng)
        target_var = (1.0 - np.exp(-h)) / (4.0 * W)
        assert abs(m.mean()) < 3 * m.std() / np.sqrt(len(m))
        assert m.var() == pytest.approx(target_var, rel=0.05)

    def test_variance_scales_with_weight(self):
        rng = np.random.default_rng(13)
        W, h = 2.5, 4.0
        m = two_vertex_martingale_samples(W, h, 40_000, rng)
        assert m.var() == pytest.approx((1 - np.exp(-h)) / (4 * W), rel=0.05)

    def test_both_targets_sum_to_zero(self):
        # the two coordinates of the centred field are exact negatives, so
        # their martingales have identical laws
        rng = np.random.default_rng(14)
        a = two_vertex_martingale_samples(1.0, 3.0, 20_000, rng, target=0)
        rng = np.random.default_rng(14)
        b = two_vertex_martingale_samples(1.0, 3.0, 20_000, rng, target=1)
        assert np.allclose(a + b, 0.0, atol=1e-12)
