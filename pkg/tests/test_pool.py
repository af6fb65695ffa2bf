import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elris.baseline import EconomicBasis, LifeCycle
from elris.mortality import GompertzLaw, survival
from elris.pool import (PoolSpec, b_hat, beta_count_factor, beta_hat,
                        conditional_count_mean, default_s_grid,
                        infinite_pool_rate, log_count_moment,
                        terminal_count_pmf)

LAW = GompertzLaw(80.0, 10.0)
LIFE = LifeCycle(25.0, 40.0)
X1 = 65.0

# Frozen targets from the exhaustive survivor-subset enumeration oracle.
COUNT_FACTOR_CASES = [
    # (ell, s, gamma, expected)
    (1, 5.0, 2.0, 1.0),
    (3, 10.0, 2.0, 2.3630797763820395),
    (5, 0.0, 10.0, 1953124.999999999),
    (4, 20.0, 0.5, 0.8155333779790657),
]
BETA_HAT_CASES = [
    (1, 5.0, 1.0),
    (3, 10.0, 0.47329231820745615),
    (5, 20.0, 0.6215994895421522),
]
B_HAT_CASES = [
    # (n, ell, expected) at r = 0.01, from the enumerated fund-mean oracle
    (3, 1, 4.885408917246096),
    (3, 3, 95.20791689301672),
    (5, 2, 5.233334457728922),
]
COUNT_MEAN_CASES = [
    # (n, t, ell, expected) from exact three-state enumeration
    (4, 20.0, 2, 0.34857328111845154),
    (3, 40.0, 3, 1.9358093567415833),
]


class TestCountFactor:
    @pytest.mark.parametrize("ell,s,gamma,expected", COUNT_FACTOR_CASES)
    def test_frozen_oracle_values(self, ell, s, gamma, expected):
        got = beta_count_factor(30, ell, s, gamma, LAW, X1)
        assert got == pytest.approx(expected, rel=1e-10)

    def test_single_member_is_unity(self):
        s = default_s_grid()
        np.testing.assert_allclose(beta_count_factor(1, 1, s, 2.0, LAW, X1), 1.0)

    def test_far_horizon_converges_to_sole_survivor(self):
        # every companion is long dead, so the factor tends to 1
        got = beta_count_factor(30, 10, 60.0, 2.0, LAW, X1)
        assert got == pytest.approx(1.0, abs=1e-6)


class TestBetaHat:
    @pytest.mark.parametrize("ell,s,expected", BETA_HAT_CASES)
    def test_frozen_oracle_values(self, ell, s, expected):
        assert beta_hat(30, ell, s, LAW, X1) == pytest.approx(expected, rel=1e-10)

    @given(ell=st.integers(1, 8), s=st.floats(0.0, 40.0))
    @settings(max_examples=100)
    def test_bounded_by_unity(self, ell, s):
        got = float(beta_hat(30, ell, np.array([s]), LAW, X1)[0])
        assert 1.0 / ell - 1e-12 <= got <= 1.0 + 1e-12


class TestConditionalCountMean:
    @pytest.mark.parametrize("n,t,ell,expected", COUNT_MEAN_CASES)
    def test_frozen_oracle_values(self, n, t, ell, expected):
        for form in ("expanded", "compact"):
            got = conditional_count_mean(n, t, ell, LAW, LIFE, form=form)
            assert got == pytest.approx(expected, rel=1e-10)

    def test_forms_agree_at_scale(self):
        for ell in (1, 400, 1100, 1999, 2000):
            a = conditional_count_mean(2000, 20.0, ell, LAW, LIFE, "expanded")
            b = conditional_count_mean(2000, 20.0, ell, LAW, LIFE, "compact")
            assert np.isfinite(a)
            assert a == pytest.approx(b, rel=1e-9, abs=1e-300)

    def test_partition_over_counts(self):
        # summing the joint mean over terminal counts recovers the
        # reference-pinned mean count 1 + (n-1) p_t
        t = 25.0
        total = sum(conditional_count_mean(5, t, ell, LAW, LIFE)
                    for ell in range(1, 6))
        assert total == pytest.approx(1 + 4 * survival(LAW, LIFE.x0, t),
                                      rel=1e-10)


class TestBHat:
    @pytest.mark.parametrize("n,ell,expected", B_HAT_CASES)
    def test_frozen_oracle_values(self, n, ell, expected):
        got = b_hat(n, ell, 0.01, LAW, LIFE)
        assert got == pytest.approx(expected, rel=1e-4)

    def test_finite_at_large_pool(self):
        for ell in (1, 1000, 2000):
            assert np.isfinite(b_hat(2000, ell, 0.01, LAW, LIFE))


class TestTerminalPmf:
    def test_normalized(self):
        pmf = terminal_count_pmf(PoolSpec(30, LAW, LIFE))
        assert pmf.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(pmf >= 0)

    def test_large_pool_normalized(self):
        pmf = terminal_count_pmf(PoolSpec(2000, LAW, LIFE))
        assert pmf.sum() == pytest.approx(1.0, abs=1e-10)


class TestInfinitePool:
    def test_base_population_fixed_point(self, basis, life, base_law):
        from elris.baseline import calibrate_eta
        eta = calibrate_eta(basis, life, base_law).eta
        rate = infinite_pool_rate(basis, life, eta, base_law)
        assert rate == pytest.approx(0.06, abs=1e-6)

    def test_impaired_below_fixed_point(self, basis, life, base_law):
        from elris.baseline import calibrate_eta
        eta = calibrate_eta(basis, life, base_law).eta
        assert infinite_pool_rate(basis, life, eta, LAW) < 0.06

    def test_gamma_independent(self, life, base_law):
        from elris.baseline import calibrate_eta
        rates = []
        for gamma in (0.5, 2.0, 10.0):
            basis = EconomicBasis(0.01, 0.01, 0.06, gamma)
            eta = calibrate_eta(basis, life, base_law).eta
            rates.append(infinite_pool_rate(basis, life, eta, LAW))
        assert rates[0] == pytest.approx(rates[1], rel=1e-12)
        assert rates[1] == pytest.approx(rates[2], rel=1e-12)


class TestLogCountMoment:
    def test_single_member_has_zero_entropy(self):
        s = default_s_grid()
        np.testing.assert_allclose(log_count_moment(1, s, LAW, LIFE), 0.0,
                                   atol=1e-14)

    def test_nonnegative_and_bounded(self):
        s = default_s_grid()
        vals = log_count_moment(30, s, LAW, LIFE)
        assert np.all(vals >= -1e-12)
        assert np.all(vals <= np.log(30) + 1e-12)
