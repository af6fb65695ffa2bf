"""Pool payout optimization and utility equivalence.

Assembles the payout-weight curve beta_s from the lattice moments,
derives the budget-constrained optimal payout density, and solves for the
contribution rate alpha_bar (and dual replacement rate eta_bar) at which
the pool matches the guaranteed plan's discounted expected utility.

All powers with exponents 1/gamma and 1/(1-gamma) are taken through log
magnitudes so both gamma < 1 and gamma > 1 are sign-safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import pool as pool_mod
from .baseline import EconomicBasis, LifeCycle, plan_expected_utility, \
    plan_expected_utility_log
from .lattice import BVector
from .mortality import annuity_factor, discounted_working_integral, survival
from .pool import BetaCurve, PoolSpec, b_hat, beta_hat, build_beta_curve, \
    default_s_grid, simpson_on_grid

BUDGET_TOL = 1e-6


class BudgetError(Exception):
    """The payout normalization integral underflowed or is non-finite."""


@dataclass(frozen=True)
class PayoutSchedule:
    """Payout density d_s per year, as a fraction of the retirement fund.

    Satisfies the budget constraint int e^{-rs} d_s ds = 1 on its grid.
    """

    s_grid: np.ndarray
    d: np.ndarray

    def budget(self, r: float) -> float:
        return simpson_on_grid(np.exp(-r * self.s_grid) * self.d, self.s_grid)


@dataclass(frozen=True)
class EquivalenceResult:
    alpha_bar: float
    eta_bar: float
    u_plan: float
    u_elris: float
    gamma: float
    n: int
    m_bar: float
    r: float
    eta: float
    n_t: int | None = None
    n_y: int | None = None
    extrapolated: bool = False


def optimal_payout(beta: BetaCurve, gamma: float, basis: EconomicBasis,
                   survival_curve: np.ndarray | None = None) -> PayoutSchedule:
    """Budget-constrained utility-maximizing payout density.

    For gamma != 1, d_s is proportional to beta_s^{1/gamma}. For gamma = 1
    the optimum is d_s = spx1 / abar independently of the fund moments;
    pass the member survival curve on beta.s_grid via survival_curve.
    """
    s = beta.s_grid
    if gamma == 1:
        if survival_curve is None:
            raise ValueError("gamma = 1 payout needs the member survival curve")
        shape = np.asarray(survival_curve, dtype=float)
    else:
        if np.any(beta.values < 0):
            raise BudgetError("beta curve has negative entries")
        shape = np.exp(_log_or_ninf(beta.values) / gamma)
    norm = simpson_on_grid(np.exp(-basis.rho * s) * shape, s)
    if not np.isfinite(norm) or norm <= 1e-300:
        raise BudgetError("payout normalization integral underflowed")
    return PayoutSchedule(s_grid=s, d=shape / norm)


def _log_or_ninf(values: np.ndarray) -> np.ndarray:
    out = np.full_like(values, -np.inf, dtype=float)
    pos = values > 0
    out[pos] = np.log(values[pos])
    return out


def _payout_integral(beta: BetaCurve, gamma: float, rho: float) -> float:
    """I = int e^{-rho s} beta_s^{1/gamma} ds on the curve's own grid."""
    shape = np.exp(_log_or_ninf(np.asarray(beta.values, dtype=float)) / gamma)
    return simpson_on_grid(np.exp(-rho * beta.s_grid) * shape, beta.s_grid)


def elris_expected_utility(alpha: float, beta: BetaCurve, gamma: float,
                           basis: EconomicBasis, life: LifeCycle,
                           pool: PoolSpec) -> float:
    """Discounted expected lifetime utility of the pool under the optimal
    payout, at contribution rate alpha (gamma != 1)."""
    if gamma == 1:
        raise ValueError("gamma = 1 uses elris_expected_utility_log")
    integral = _payout_integral(beta, gamma, basis.rho)
    return (np.exp(-basis.rho * life.T) * survival(pool.member_law, life.x0, life.T)
            * (2.0 * alpha) ** (1.0 - gamma) / (1.0 - gamma)
            * integral ** gamma)


def elris_expected_utility_log(alpha: float, pool: PoolSpec,
                               basis: EconomicBasis, life: LifeCycle,
                               log_y_moment: float,
                               s_grid: np.ndarray | None = None) -> float:
    """gamma = 1 pool utility from the lattice's E[log Y]."""
    if s_grid is None:
        s_grid = default_s_grid()
    law = pool.member_law
    sp = survival(law, life.x1, s_grid)
    disc = np.exp(-basis.rho * s_grid)
    abar = simpson_on_grid(disc * sp, s_grid)
    beta = sp * (log_y_moment
                 - pool_mod.log_count_moment(pool.n, s_grid, law, life))
    entropy = simpson_on_grid(disc * sp * _xlogx_curve(sp), s_grid)
    return (np.exp(-basis.rho * life.T) * survival(law, life.x0, life.T)
            * (abar * np.log(2.0 * alpha / abar)
               + simpson_on_grid(disc * beta, s_grid) + entropy))


def _xlogx_curve(sp: np.ndarray) -> np.ndarray:
    out = np.zeros_like(sp)
    pos = sp > 0
    out[pos] = np.log(sp[pos])
    return out


def equivalent_rates(pool: PoolSpec, basis: EconomicBasis, life: LifeCycle,
                     eta: float, b_vec: BVector | None,
                     log_y_moment: float | None = None) -> EquivalenceResult:
    """Contribution rate alpha_bar (and dual eta_bar) equating the pool's
    utility with the guaranteed plan's, for the configured gamma.

    gamma != 1 consumes the lattice moment vector b_vec; gamma = 1 consumes
    the scalar log_y_moment instead.
    """
    gamma = basis.gamma
    law = pool.member_law
    abar = annuity_factor(law, life.x1, basis.rho)
    if gamma == 1:
        if log_y_moment is None:
            raise ValueError("gamma = 1 equivalence needs log_y_moment")
        s_grid = default_s_grid()
        sp = survival(law, life.x1, s_grid)
        disc = np.exp(-basis.rho * s_grid)
        beta = sp * (log_y_moment
                     - pool_mod.log_count_moment(pool.n, s_grid, law, life))
        entropy = simpson_on_grid(disc * sp * _xlogx_curve(sp), s_grid)
        log_ratio = (np.log(abar)
                     - (simpson_on_grid(disc * beta, s_grid) + entropy) / abar)
        alpha_bar = eta / 2.0 * np.exp(log_ratio)
        u_plan = plan_expected_utility_log(basis, life, eta, law)
        u_elris = elris_expected_utility_log(alpha_bar, pool, basis, life,
                                             log_y_moment, s_grid)
        n_t = n_y = None
        extrapolated = False
    else:
        if b_vec is None:
            raise ValueError("gamma != 1 equivalence needs the b vector")
        if not np.all(np.isfinite(np.asarray(b_vec.values))):
            raise ValueError("non-finite accumulation moments")
        beta_curve = build_beta_curve(b_vec.values, pool, gamma)
        integral = _payout_integral(beta_curve, gamma, basis.rho)
        if not np.isfinite(integral) or integral <= 0:
            raise BudgetError("payout integral degenerate")
        # (2 alpha_bar / eta)^{1-gamma} = abar / I^gamma, solved in logs.
        log_ratio = (np.log(abar) - gamma * np.log(integral)) / (1.0 - gamma)
        alpha_bar = eta / 2.0 * np.exp(log_ratio)
        u_plan = plan_expected_utility(basis, life, eta, law)
        u_elris = elris_expected_utility(alpha_bar, beta_curve, gamma,
                                         basis, life, pool)
        n_t, n_y = b_vec.n_t, b_vec.n_y
        extrapolated = b_vec.extrapolated
    return EquivalenceResult(
        alpha_bar=float(alpha_bar), eta_bar=float(eta * basis.alpha / alpha_bar),
        u_plan=float(u_plan), u_elris=float(u_elris), gamma=gamma, n=pool.n,
        m_bar=law.m, r=basis.r, eta=eta, n_t=n_t, n_y=n_y,
        extrapolated=extrapolated)


def elris_generosity(pool: PoolSpec, basis: EconomicBasis, life: LifeCycle,
                     gamma: float, b_vec: BVector) -> float:
    """Undiscounted benefit/contribution ratio of the pool at its optimal
    payout; the contribution rate cancels between numerator and denominator."""
    law = pool.member_law
    s_grid = default_s_grid()
    sp = survival(law, life.x1, s_grid)
    beta_curve = build_beta_curve(b_vec.values, pool, gamma)
    shape = np.exp(_log_or_ninf(np.asarray(beta_curve.values)) / gamma)
    norm = simpson_on_grid(np.exp(-basis.r * s_grid) * shape, s_grid)
    bh = np.array([b_hat(pool.n, ell, basis.r, law, life)
                   for ell in range(1, pool.n + 1)])
    beta_hat_curve = sp * np.sum(
        np.array([beta_hat(pool.n, ell, s_grid, law, life.x1) * bh[ell - 1]
                  for ell in range(1, pool.n + 1)]), axis=0)
    benefit = (2.0 * survival(law, life.x0, life.T)
               * simpson_on_grid(shape * beta_hat_curve, s_grid) / norm)
    contrib = discounted_working_integral(law, life.x0, life.T, 0.0)
    return float(benefit / contrib)
