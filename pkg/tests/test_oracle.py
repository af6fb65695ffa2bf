import numpy as np
import pytest

from elris.baseline import LifeCycle
from elris.mortality import GompertzLaw
from elris.oracle import (EXPONENT_VERDICT_KEY, EnumerationOverflow,
                          EnumerationSpec, enumerate_b, enumerate_b_hat,
                          enumerate_beta_hat, enumerate_count_factor,
                          enumerate_count_mean, enumerate_log_y, mc_check,
                          validate_count_identities, write_validation_report)
from elris.pool import (PoolSpec, b_hat, beta_count_factor, beta_hat,
                        conditional_count_mean)

LAW = GompertzLaw(80.0, 10.0)
LIFE = LifeCycle(25.0, 40.0)


class TestEnumeration:
    def test_count_mean_terminal_time(self):
        # at t = T the joint mean is l times the terminal count pmf
        from scipy.stats import binom

        from elris.mortality import survival
        p_T = survival(LAW, LIFE.x0, LIFE.T)
        for n in (2, 4):
            for ell in range(1, n + 1):
                expected = ell * binom.pmf(ell - 1, n - 1, p_T)
                got = enumerate_count_mean(n, LIFE.T, ell, LAW, LIFE)
                assert got == pytest.approx(expected, rel=1e-9)

    def test_count_factor_degenerate_pool(self):
        assert enumerate_count_factor(1, 10.0, 2.0, LAW, 65.0) == 1.0

    def test_beta_hat_within_bounds(self):
        got = enumerate_beta_hat(4, 10.0, LAW, 65.0)
        assert 0.25 <= got <= 1.0

    def test_overflow_guard(self):
        with pytest.raises(EnumerationOverflow):
            enumerate_b(PoolSpec(6, LAW, LifeCycle(25.0, 5.0)), 2.0,
                        EnumerationSpec(bins=8), 0.01)
        with pytest.raises(ValueError):
            EnumerationSpec(bins=60)

    def test_bin_refinement_converges(self):
        pool = PoolSpec(3, LAW, LifeCycle(25.0, 5.0))
        coarse = enumerate_b(pool, 2.0, EnumerationSpec(bins=6), 0.01)
        fine = enumerate_b(pool, 2.0, EnumerationSpec(bins=12), 0.01)
        np.testing.assert_allclose(coarse, fine, rtol=5e-3)

    def test_log_y_finite(self):
        pool = PoolSpec(3, LAW, LifeCycle(25.0, 5.0))
        assert np.isfinite(enumerate_log_y(pool, EnumerationSpec(bins=8), 0.01))


class TestClosedFormAgreement:
    def test_count_factor_matches_enumeration(self):
        for ell, s, gamma in ((2, 5.0, 2.0), (4, 15.0, 10.0), (3, 0.0, 0.5)):
            exact = enumerate_count_factor(ell, s, gamma, LAW, 65.0)
            got = beta_count_factor(30, ell, s, gamma, LAW, 65.0)
            assert got == pytest.approx(exact, rel=1e-10)

    def test_beta_hat_matches_enumeration(self):
        for ell, s in ((2, 5.0), (4, 15.0)):
            exact = enumerate_beta_hat(ell, s, LAW, 65.0)
            assert beta_hat(30, ell, s, LAW, 65.0) == pytest.approx(
                exact, rel=1e-10)

    def test_count_mean_matches_enumeration(self):
        for n, t, ell in ((3, 20.0, 2), (5, 40.0, 5), (4, 0.0, 1)):
            exact = enumerate_count_mean(n, t, ell, LAW, LIFE)
            assert conditional_count_mean(n, t, ell, LAW, LIFE) == \
                pytest.approx(exact, rel=1e-10, abs=1e-300)

    def test_fund_mean_matches_enumeration(self):
        exact = enumerate_b_hat(4, 2, 0.01, LAW, LIFE, t_points=400)
        assert b_hat(4, 2, 0.01, LAW, LIFE) == pytest.approx(exact, rel=1e-4)


class TestMonteCarlo:
    def test_count_factor_within_three_se(self):
        exact = beta_count_factor(30, 4, 10.0, 2.0, LAW, 65.0)
        est, se = mc_check("beta_count_factor",
                           {"n": 30, "ell": 4, "s": 10.0, "gamma": 2.0,
                            "law": LAW, "x1": 65.0},
                           n_samples=200_000, seed=99)
        assert abs(est - exact) <= 3.0 * se

    def test_unknown_expression_rejected(self):
        with pytest.raises(ValueError):
            mc_check("nonsense", {}, 10, 1)


class TestValidationReport:
    def test_all_cells_pass(self):
        rows = validate_count_identities(LAW, LIFE)
        assert rows and all(r["ok"] for r in rows)
        assert any(r["ell"] == r["n"] for r in rows)  # l = n edge included

    def test_report_artifacts(self, tmp_path):
        ok = write_validation_report(tmp_path, LAW, LIFE)
        assert ok
        text = (tmp_path / "oracle_report.txt").read_text()
        assert f"{EXPONENT_VERDICT_KEY}: expanded" in text
        assert (tmp_path / "oracle_report.csv").exists()
