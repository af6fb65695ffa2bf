import numpy as np
import pytest

from elris.baseline import EconomicBasis, LifeCycle
from elris.lattice import (LatticeSpec, MassLeakError, StepSizeError,
                           compute_b_vector, compute_log_y_moment,
                           default_y_max, fund_bound, propagate_distribution,
                           richardson_extrapolate)
from elris.mortality import GompertzLaw
from elris.pool import PoolSpec

LAW = GompertzLaw(80.0, 10.0)
BASIS = EconomicBasis(0.01, 0.01, 0.06, 2.0)

# Frozen targets from the exhaustive death-time enumeration oracle
# (12 bins, bin-conditional mean placement) at n = 3, T = 5, rho = 1%.
ORACLE_B_N3_T5 = np.array(
    [6.81705506e-07, 4.10007598e-04, 6.46700742e-02])
ORACLE_LOG_Y_N3_T5 = 2.732249788039929


def small_pool(n=3, T=5.0):
    return PoolSpec(n, LAW, LifeCycle(25.0, T))


class TestPropagation:
    def test_mass_conservation(self):
        pool = small_pool()
        spec = LatticeSpec(n_t=400, n_y=200, richardson_levels=1)
        dist = propagate_distribution(pool, BASIS, spec)
        assert dist.total_mass() == pytest.approx(1.0, abs=1e-10)

    def test_count_marginal_matches_binomial(self):
        from elris.pool import terminal_count_pmf
        pool = small_pool(n=4, T=10.0)
        spec = LatticeSpec(n_t=1000, n_y=200, richardson_levels=1)
        dist = propagate_distribution(pool, BASIS, spec)
        # companion deaths are O(dt)-biased per step; coarse agreement only
        np.testing.assert_allclose(dist.count_marginal(),
                                   terminal_count_pmf(pool), atol=2e-4)

    def test_deterministic_repeatability(self):
        pool = small_pool()
        spec = LatticeSpec(n_t=400, n_y=200, richardson_levels=1)
        a = propagate_distribution(pool, BASIS, spec)
        b = propagate_distribution(pool, BASIS, spec)
        np.testing.assert_array_equal(a.mass, b.mass)

    def test_step_size_guard(self):
        # hazard near the modal age makes k * h * dt blow past the cap
        pool = PoolSpec(40, GompertzLaw(40.0, 5.0), LifeCycle(25.0, 20.0))
        spec = LatticeSpec(n_t=100, n_y=100, richardson_levels=1)
        with pytest.raises(StepSizeError):
            propagate_distribution(pool, BASIS, spec)

    def test_mass_leak_guard(self):
        pool = small_pool()
        tight = fund_bound(pool, BASIS) * 1.0001
        spec = LatticeSpec(n_t=400, n_y=200, y_max=tight, richardson_levels=1)
        with pytest.raises(MassLeakError):
            propagate_distribution(pool, BASIS, spec)

    def test_mass_floor_tracks_dropped_mass(self):
        pool = small_pool(n=3, T=5.0)
        spec = LatticeSpec(n_t=400, n_y=200, richardson_levels=1,
                           mass_floor=1e-6)
        dist = propagate_distribution(pool, BASIS, spec)
        assert dist.total_mass() == pytest.approx(1.0, abs=1e-10)

    def test_dump_csv(self, tmp_path):
        pool = small_pool()
        spec = LatticeSpec(n_t=400, n_y=200, richardson_levels=1)
        dist = propagate_distribution(pool, BASIS, spec)
        out = tmp_path / "terminal.csv"
        dist.dump_csv(out)
        lines = out.read_text().splitlines()
        assert lines[0] == "n_t,400"
        assert len(lines) == 4 + pool.n


class TestMoments:
    def test_single_member_closed_form(self):
        # n = 1: the fund is deterministic, Y = (e^{rho T} - 1)/rho
        pool = PoolSpec(1, LAW, LifeCycle(25.0, 40.0))
        spec = LatticeSpec(n_t=2000, n_y=1000, richardson_levels=2)
        b = compute_b_vector(pool, BASIS, 2.0, spec)
        exact = (np.expm1(0.01 * 40.0) / 0.01) ** (1.0 - 2.0)
        assert b.values[0] == pytest.approx(exact, abs=1e-6)
        assert b.extrapolated

    def test_oracle_agreement_small_pool(self):
        spec = LatticeSpec(n_t=2000, n_y=1000, richardson_levels=2)
        b = compute_b_vector(small_pool(), BASIS, 2.0, spec)
        np.testing.assert_allclose(b.values, ORACLE_B_N3_T5, rtol=2e-3)

    def test_log_moment_oracle_agreement(self):
        spec = LatticeSpec(n_t=2000, n_y=1000, richardson_levels=2)
        got = compute_log_y_moment(small_pool(), BASIS, spec)
        assert got == pytest.approx(ORACLE_LOG_Y_N3_T5, rel=2e-3)

    def test_mean_fund_against_closed_form(self):
        # E[Y, N_T = l] has a closed form (b_hat); the gamma = 0 weight
        # reduces the lattice moment to exactly that quantity
        from elris.pool import b_hat
        pool = small_pool(n=3, T=10.0)
        spec = LatticeSpec(n_t=2000, n_y=1000, richardson_levels=2)
        b = compute_b_vector(pool, BASIS, 0.0, spec)
        expected = [b_hat(3, ell, BASIS.rho, LAW, pool.life)
                    for ell in (1, 2, 3)]
        np.testing.assert_allclose(b.values, expected, rtol=1e-4)

    def test_richardson_tightens_single_member(self):
        pool = PoolSpec(1, LAW, LifeCycle(25.0, 40.0))
        exact = (np.expm1(0.01 * 40.0) / 0.01) ** (1.0 - 2.0)
        errs = []
        for levels in (1, 2):
            spec = LatticeSpec(n_t=2000, n_y=1000, richardson_levels=levels)
            b = compute_b_vector(pool, BASIS, 2.0, spec)
            errs.append(abs(b.values[0] - exact))
        assert errs[1] < errs[0]


class TestRichardson:
    def test_eliminates_first_order_error(self):
        # f(h) = L + c h with h = 1/n: two levels recover L exactly
        L, c = 3.0, 0.7
        seq = [(100, L + c / 100), (200, L + c / 200)]
        assert richardson_extrapolate(seq) == pytest.approx(L, rel=1e-12)

    def test_three_levels_remove_second_order(self):
        L, c1, c2 = 1.5, 0.4, 5.0
        seq = [(n, L + c1 / n + c2 / n ** 2) for n in (100, 200, 400)]
        assert richardson_extrapolate(seq) == pytest.approx(L, rel=1e-10)

    def test_vector_valued(self):
        L = np.array([1.0, 2.0])
        seq = [(n, L + 1.0 / n) for n in (50, 100)]
        np.testing.assert_allclose(richardson_extrapolate(seq), L, rtol=1e-12)

    def test_requires_doubling(self):
        with pytest.raises(ValueError):
            richardson_extrapolate([(100, 1.0), (150, 1.0)])
        with pytest.raises(ValueError):
            richardson_extrapolate([(100, 1.0)])


class TestSpecValidation:
    def test_resolution_floors(self):
        with pytest.raises(ValueError):
            LatticeSpec(n_t=50, n_y=200)
        with pytest.raises(ValueError):
            LatticeSpec(n_t=200, n_y=10)

    def test_divisibility_for_extrapolation(self):
        with pytest.raises(ValueError):
            LatticeSpec(n_t=201, n_y=200, richardson_levels=2)
        LatticeSpec(n_t=202, n_y=200, richardson_levels=2)

    def test_level_bounds(self):
        with pytest.raises(ValueError):
            LatticeSpec(n_t=400, n_y=200, richardson_levels=4)

    def test_default_ceiling_clears_bound(self):
        pool = small_pool()
        spec = LatticeSpec(n_t=400, n_y=200, richardson_levels=1)
        assert default_y_max(pool, BASIS, spec) > fund_bound(pool, BASIS)
