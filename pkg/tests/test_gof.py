import numpy as np
import pytest
from scipy import stats

from reinforce_lab.gof import (OracleError, chi_square_gof, enumerate_path_law,
                               errw_path_prob, ks_one_sample, ks_two_sample,
                               path_law_chi_square)
from reinforce_lab.graphs import WeightedGraph
from test_graphs import triangle


def path3():
    return WeightedGraph(3, np.array([[0, 1], [1, 2]]), np.ones(2))


class TestPathOracle:
    def test_single_step_uniform(self):
        assert errw_path_prob(triangle(), np.ones(3), [0, 1]) == pytest.approx(0.5)

    def test_reinforced_return(self):
        # 0 -> 1 (prob 1/2), then back with boosted count 2 vs 1: 2/3
        p = errw_path_prob(triangle(), np.ones(3), [0, 1, 0])
        assert p == pytest.approx(0.5 * 2 / 3)

    def test_hand_computed_three_steps(self):
        # path graph, a = (1, 2): 1 -> 2 -> 1 -> 0 is (2/3) * 1 * (1/5),
        # the middle edge having been crossed twice by the last step
        p = errw_path_prob(path3(), np.array([1.0, 2.0]), [1, 2, 1, 0])
        assert p == pytest.approx(2 / 3 * 1.0 * 0.2)

    def test_alternating_path_telescopes(self):
        # 0->1->0->1->0 on the fresh triangle: 1/2 * 2/3 * 3/4 * 4/5 = 1/5
        p = errw_path_prob(triangle(), np.ones(3), [0, 1, 0, 1, 0])
        assert p == pytest.approx(0.2, abs=1e-15)

    def test_total_probability(self):
        law = enumerate_path_law(triangle(), np.ones(3), 4)
        assert sum(law.values()) == pytest.approx(1.0, abs=1e-12)

    def test_non_adjacent_rejected(self):
        g = path3()
        with pytest.raises(OracleError):
            errw_path_prob(g, np.ones(2), [0, 2])

    def test_long_path_rejected(self):
        with pytest.raises(OracleError):
            errw_path_prob(triangle(), np.ones(3), [0, 1] * 6)


class TestEnumeratedLaw:
    def test_sums_to_one(self):
        law = enumerate_path_law(triangle(), np.array([0.7, 1.1, 2.0]), 4)
        assert sum(law.values()) == pytest.approx(1.0, abs=1e-12)

    def test_consistent_with_scalar_oracle(self):
        a = np.array([0.7, 1.1, 2.0])
        law = enumerate_path_law(triangle(), a, 3)
        for path, prob in law.items():
            assert prob == pytest.approx(errw_path_prob(triangle(), a, path),
                                         abs=1e-14)

    def test_length_cap(self):
        with pytest.raises(OracleError):
            enumerate_path_law(triangle(), np.ones(3), 9)


class TestChiSquare:
    def test_exact_match_statistic_zero(self):
        stat, p, dof = chi_square_gof([50, 30, 20], [0.5, 0.3, 0.2])
        assert stat == 0.0 and p == 1.0 and dof == 2

    def test_hand_computed_statistic(self):
        stat, _, dof = chi_square_gof([60, 40], [0.5, 0.5])
        assert stat == pytest.approx(4.0) and dof == 1

    def test_pooling_small_cells(self):
        # two tiny cells pooled into one: dof drops accordingly
        _, _, dof = chi_square_gof([96, 2, 2], [0.96, 0.02, 0.02])
        assert dof == 1

    def test_all_small_raises(self):
        with pytest.raises(OracleError):
            chi_square_gof([1, 1], [0.5, 0.5])

    def test_calibration_under_null(self):
        rng = np.random.default_rng(0)
        probs = np.array([0.2, 0.3, 0.5])
        ps = []
        for _ in range(400):
            counts = rng.multinomial(500, probs)
            ps.append(chi_square_gof(counts, probs)[1])
        # p-values roughly uniform: rejection rate near the nominal level
        assert 0.02 < np.mean(np.array(ps) < 0.1) < 0.2

    def test_power_against_wrong_law(self):
        rng = np.random.default_rng(1)
        counts = rng.multinomial(5000, [0.25, 0.35, 0.4])
        _, p, _ = chi_square_gof(counts, [1 / 3, 1 / 3, 1 / 3])
        assert p < 1e-6


class TestPathLawChiSquare:
    def test_detects_wrong_simulator(self):
        # uniform random paths on the triangle are not the reinforced law
        g = triangle()
        rng = np.random.default_rng(2)
        law = enumerate_path_law(g, np.array([1.0, 2.0, 0.5]), 3)
        paths = np.empty((20_000, 4), dtype=np.int64)
        paths[:, 0] = 0
        for s in range(3):
            step = rng.integers(1, 3, size=20_000)
            paths[:, s + 1] = (paths[:, s] + step) % 3
        _, p, _ = path_law_chi_square(paths, law, 3)
        assert p < 1e-10

    def test_rejects_impossible_paths(self):
        g = path3()
        law = enumerate_path_law(g, np.ones(2), 1, start=0)
        bad = np.array([[0, 2]])                  # not an edge
        with pytest.raises(OracleError):
            path_law_chi_square(bad, law, 3)


class TestKs:
    def test_one_sample_calibrated(self):
        rng = np.random.default_rng(3)
        _, p = ks_one_sample(rng.normal(size=2000), stats.norm.cdf)
        assert p > 0.01

    def test_one_sample_power(self):
        rng = np.random.default_rng(4)
        _, p = ks_one_sample(rng.normal(0.3, size=2000), stats.norm.cdf)
        assert p < 1e-6

    def test_two_sample(self):
        rng = np.random.default_rng(5)
        d, p = ks_two_sample(rng.normal(size=3000), rng.normal(size=3000))
        assert p > 0.01 and d < 0.05
        _, p = ks_two_sample(rng.normal(size=3000), rng.normal(0.5, size=3000))
        assert p < 1e-6
