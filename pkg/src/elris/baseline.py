"""The stylized guaranteed national plan: fair replacement rate, its
lifetime utility for a (possibly impaired) member, and its undiscounted
generosity ratio.

The replacement rate is always calibrated on the base population law;
member-level utility and generosity may use an impaired law.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mortality import (DEFAULT_QUAD, GompertzLaw, QuadratureSpec,
                        annuity_factor, discounted_working_integral, survival)


@dataclass(frozen=True)
class EconomicBasis:
    """Real rate r, subjective discount rho (= r), employee contribution
    fraction alpha and CRRA coefficient gamma. Wage is normalized to 1."""

    r: float
    rho: float
    alpha: float
    gamma: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"real rate must be nonnegative, got {self.r}")
        if self.rho != self.r:
            raise ValueError(
                f"the model assumes rho = r, got rho={self.rho}, r={self.r}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"contribution fraction out of (0,1): {self.alpha}")
        if self.gamma <= 0:
            raise ValueError(f"risk aversion must be positive, got {self.gamma}")


@dataclass(frozen=True)
class LifeCycle:
    """Entry age x0 and contribution span T; retirement age is x0 + T."""

    x0: float
    T: float

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError(f"contribution span must be positive, got {self.T}")
        if self.x0 < 0:
            raise ValueError(f"entry age must be nonnegative, got {self.x0}")

    @property
    def x1(self) -> float:
        return self.x0 + self.T


@dataclass(frozen=True)
class ReplacementRate:
    eta: float

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError(f"replacement rate must be positive, got {self.eta}")


class DegenerateConfigError(Exception):
    """The retirement-phase present value underflowed; eta is undefined."""


def calibrate_eta(basis: EconomicBasis, life: LifeCycle, base_law: GompertzLaw,
                  quad: QuadratureSpec = DEFAULT_QUAD) -> ReplacementRate:
    """Replacement rate making the plan actuarially fair on the base law.

    Solves 2 alpha int_0^T e^{-rt} tpx0 dt = eta int_T^inf e^{-rt} tpx0 dt,
    employer matching included on the contribution side.
    """
    working = discounted_working_integral(base_law, life.x0, life.T, basis.r, quad)
    retired = (np.exp(-basis.r * life.T) * survival(base_law, life.x0, life.T)
               * annuity_factor(base_law, life.x1, basis.r, quad))
    if retired < 1e-300:
        raise DegenerateConfigError("retirement-phase present value underflowed")
    return ReplacementRate(2.0 * basis.alpha * working / retired)


def plan_expected_utility(basis: EconomicBasis, life: LifeCycle, eta: float,
                         member_law: GompertzLaw,
                         quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Discounted expected lifetime utility of the guaranteed benefit eta,
    valued at entry age for a member under member_law (gamma != 1)."""
    g = basis.gamma
    if g == 1:
        raise ValueError("gamma = 1 uses plan_expected_utility_log")
    return (np.exp(-basis.rho * life.T) * survival(member_law, life.x0, life.T)
            * eta ** (1.0 - g) / (1.0 - g)
            * annuity_factor(member_law, life.x1, basis.rho, quad))


def plan_expected_utility_log(basis: EconomicBasis, life: LifeCycle, eta: float,
                             member_law: GompertzLaw,
                             quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Logarithmic-utility (gamma = 1) variant of plan_expected_utility."""
    if basis.gamma != 1:
        raise ValueError("log-utility variant requires gamma = 1")
    return (np.exp(-basis.rho * life.T) * survival(member_law, life.x0, life.T)
            * annuity_factor(member_law, life.x1, basis.rho, quad) * np.log(eta))


def plan_generosity(alpha: float, eta: float, member_law: GompertzLaw,
                   life: LifeCycle, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Expected undiscounted benefits over expected undiscounted contributions.

    The denominator deliberately uses the employee rate alpha only (no
    employer match), matching the convention of the ratio as defined.
    """
    contrib = alpha * discounted_working_integral(member_law, life.x0, life.T, 0.0, quad)
    benefit = eta * (survival(member_law, life.x0, life.T)
                     * annuity_factor(member_law, life.x1, 0.0, quad))
    return benefit / contrib
