import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elris.mortality import (DEFAULT_QUAD, GompertzLaw, QuadratureError,
                             QuadratureSpec, annuity_factor,
                             composite_integral, constant_hazard_survival,
                             discounted_working_integral, hazard,
                             sample_lifetimes, survival)


class TestHazard:
    def test_modal_age_value(self):
        assert hazard(GompertzLaw(90.0, 10.0), 90.0) == pytest.approx(0.1)

    def test_below_mode(self):
        # frozen by hand-evaluating (1/b) e^{(x-m)/b}
        assert hazard(GompertzLaw(90.0, 10.0), 80.0) == pytest.approx(
            0.036787944117144233, rel=1e-12)

    def test_above_mode(self):
        assert hazard(GompertzLaw(80.0, 10.0), 90.0) == pytest.approx(
            0.27182818284590452, rel=1e-12)

    def test_impairment_shifts_mode(self):
        law = GompertzLaw(90.0, 10.0)
        assert law.impaired(10.0) == GompertzLaw(80.0, 10.0)
        assert hazard(law.impaired(10.0), 70.0) == pytest.approx(
            hazard(law, 80.0), rel=1e-12)


class TestSurvival:
    def test_constant_hazard_reference_values(self):
        # e^{-lambda t} over 30 years, exact to 4 digits
        assert constant_hazard_survival(0.01, 30.0) == pytest.approx(
            0.7408, abs=5e-5)
        assert constant_hazard_survival(0.02, 30.0) == pytest.approx(
            0.5488, abs=5e-5)
        assert constant_hazard_survival(0.03, 30.0) == pytest.approx(
            0.4066, abs=5e-5)

    def test_extreme_age_survival(self, impaired_law):
        assert survival(impaired_law, 65.0, 30.0) == pytest.approx(
            0.0142, abs=2e-4)

    def test_zero_horizon(self, base_law):
        assert survival(base_law, 40.0, 0.0) == 1.0

    @given(x=st.floats(20.0, 90.0), t=st.floats(0.0, 40.0),
           u=st.floats(0.0, 40.0))
    @settings(max_examples=200)
    def test_semigroup(self, x, t, u):
        law = GompertzLaw(90.0, 10.0)
        combined = survival(law, x, t + u)
        split = survival(law, x, t) * survival(law, x + t, u)
        assert combined == pytest.approx(split, rel=1e-12, abs=1e-300)

    @given(x=st.floats(20.0, 80.0), t=st.floats(0.0, 50.0),
           delta=st.floats(0.0, 25.0))
    @settings(max_examples=200)
    def test_impairment_orders_survival(self, x, t, delta):
        law = GompertzLaw(90.0, 10.0)
        assert survival(law.impaired(delta), x, t) <= survival(law, x, t) + 1e-15

    @given(x=st.floats(20.0, 80.0),
           t1=st.floats(0.0, 30.0), t2=st.floats(0.0, 30.0))
    @settings(max_examples=200)
    def test_monotone_in_horizon(self, x, t1, t2):
        law = GompertzLaw(85.0, 9.0)
        lo, hi = sorted((t1, t2))
        assert survival(law, x, hi) <= survival(law, x, lo) + 1e-15


class TestSampling:
    @given(u=st.floats(1e-12, 1.0 - 1e-12))
    @settings(max_examples=300)
    def test_inverse_transform(self, u):
        law = GompertzLaw(90.0, 10.0)
        t = sample_lifetimes(law, 25.0, np.array([u]))[0]
        assert t >= 0.0
        assert survival(law, 25.0, t) == pytest.approx(u, rel=1e-9)

    def test_vectorized_matches_scalar(self):
        law = GompertzLaw(80.0, 10.0)
        u = np.linspace(0.05, 0.95, 19)
        batch = sample_lifetimes(law, 25.0, u)
        singles = [sample_lifetimes(law, 25.0, np.array([v]))[0] for v in u]
        np.testing.assert_allclose(batch, singles, rtol=1e-14)


class TestQuadrature:
    def test_simpson_exact_for_cubic(self):
        x = np.linspace(0.0, 2.0, 9)
        vals = x ** 3 - x
        assert composite_integral(vals, 0.25) == pytest.approx(2.0, rel=1e-13)

    def test_trapezoid_rule(self):
        x = np.linspace(0.0, 1.0, 1001)
        got = composite_integral(x ** 2, 0.001, rule="trapezoid")
        assert got == pytest.approx(1.0 / 3.0, rel=1e-5)

    def test_annuity_factor_discount_monotonicity(self, base_law):
        a0 = annuity_factor(base_law, 65.0, 0.0)
        a1 = annuity_factor(base_law, 65.0, 0.01)
        assert a0 > a1 > 0

    def test_annuity_factor_against_fine_trapezoid(self, base_law):
        fine = QuadratureSpec(max_age=130.0, step=1.0 / 256.0, rule="trapezoid")
        coarse = annuity_factor(base_law, 65.0, 0.01)
        ref = annuity_factor(base_law, 65.0, 0.01, fine)
        assert coarse == pytest.approx(ref, rel=1e-8)

    def test_truncation_guard(self):
        # modal age far beyond the truncation age leaves visible mass there
        with pytest.raises(QuadratureError):
            annuity_factor(GompertzLaw(250.0, 10.0), 65.0, 0.01)

    def test_working_integral_bounds(self, base_law, life):
        w = discounted_working_integral(base_law, life.x0, life.T, 0.01)
        assert 0 < w < life.T
