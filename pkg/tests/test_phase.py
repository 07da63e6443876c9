import numpy as np
import pytest
from scipy import integrate

from reinforce_lab.phase import (BracketError, a_c, beta_c, decay_scan,
                                 fitted_log_slope, i_beta, i_hat, j_hat,
                                 phase_base_a, phase_base_beta,
                                 resistance_bound_check)


class TestIBeta:
    def test_monotone_increasing(self):
        betas = [0.01, 0.1, 1.0, 10.0, 100.0]
        vals = [i_beta(b) for b in betas]
        assert all(x < y for x, y in zip(vals, vals[1:]))
        assert 0.0 < vals[0] and vals[-1] < 1.0

    def test_large_beta_limit(self):
        # Laplace approximation: the integral tends to the Gaussian one
        assert i_beta(1e4) == pytest.approx(1.0, abs=1e-4)

    def test_small_beta_asymptotics(self):
        # for tiny beta the integral is dominated by |t| < log(2/beta):
        # value ~ sqrt(beta) * 2 log(1/beta) / sqrt(2 pi) -> 0
        assert i_beta(1e-8) == pytest.approx(
            np.sqrt(1e-8) * 2 * np.log(1 / 1e-8) / np.sqrt(2 * np.pi), rel=0.1)

    def test_direct_quadrature_agreement(self):
        beta = 0.37
        val, _ = integrate.quad(lambda t: np.exp(-beta * (np.cosh(t) - 1)),
                                -50, 50)
        assert i_beta(beta) == pytest.approx(np.sqrt(beta) * val / np.sqrt(2 * np.pi),
                                             abs=1e-10)

    def test_invalid(self):
        with pytest.raises(ValueError):
            i_beta(0.0)


class TestBetaC:
    def test_d1_infinite(self):
        assert beta_c(1) == float("inf")

    def test_root_property(self):
        for d in (2, 3):
            b = beta_c(d)
            assert phase_base_beta(b, d) == pytest.approx(1.0, abs=1e-10)

    def test_decreasing_in_dimension(self):
        assert beta_c(3) < beta_c(2)

    def test_d2_value_stable(self):
        assert beta_c(2) == pytest.approx(0.006232, abs=5e-5)


class TestHattedConstants:
    @pytest.mark.parametrize("a", [0.3, 1.0, 3.0])
    def test_representations_agree(self, a):
        assert i_hat(a, "cosh") == pytest.approx(i_hat(a, "average"), abs=1e-8)

    def test_i_hat_monotone(self):
        vals = [i_hat(a) for a in (0.1, 0.5, 1.0, 5.0, 50.0)]
        assert all(x < y for x, y in zip(vals, vals[1:]))
        assert vals[-1] < 1.0

    def test_j_hat_exceeds_one(self):
        for a in (0.2, 1.0, 4.0):
            assert j_hat(a) > 1.0

    def test_j_hat_large_a_linear(self):
        # for large a, beta > 1 almost surely, so J ~ e * E[beta] = e a
        a = 50.0
        assert j_hat(a) == pytest.approx(np.e * a, rel=0.01)

    def test_unknown_representation(self):
        with pytest.raises(ValueError):
            i_hat(1.0, "bogus")


class TestAC:
    def test_d1_has_no_root(self):
        with pytest.raises(BracketError):
            a_c(1)

    def test_root_property_d3(self):
        a = a_c(3)
        assert phase_base_a(a, 3) == pytest.approx(1.0, abs=1e-9)

    def test_smaller_a_is_subcritical(self):
        a = a_c(2)
        assert phase_base_a(a / 2, 2) < 1.0 < phase_base_a(a * 2, 2)


class TestDecayScan:
    def test_fixed_beta_rows(self):
        rows = decay_scan(2, 2, beta=0.004, n_samples=1500, seed=0)
        assert [r["distance"] for r in rows] == [1, 2]
        for r in rows:
            assert r["estimate"] > 0 and r["stderr"] > 0
            assert r["estimate"] < r["bound"] + 3 * r["stderr"]
        assert fitted_log_slope(rows) < 0.0

    def test_gamma_environment_rows(self):
        rows = decay_scan(2, 1, a=0.05, n_samples=400, seed=1, n_env=4)
        assert len(rows) == 1 and rows[0]["estimate"] > 0

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            decay_scan(2, 2)
        with pytest.raises(ValueError):
            decay_scan(2, 2, beta=0.1, a=0.1)


class TestResistanceBound:
    def test_small_box_holds(self):
        res = resistance_bound_check(2, 1, beta=50.0, n_samples=100, seed=2)
        assert res["holds"]
        assert res["flow_bound_per_sample"]
        assert res["energy_identity_gap"] < 1e-10
        assert res["lhs"] > 0 and res["rhs"] > 0

    def test_strong_coupling_lhs_near_trivial(self):
        # at huge beta the field freezes near 0, so c ~ beta and
        # c0 R(c) ~ (2d) beta * R_unit/beta = 2d R_unit << 16 d R_unit
        res = resistance_bound_check(2, 1, beta=500.0, n_samples=60, seed=3)
        assert res["lhs"] < 0.5 * res["rhs"]
