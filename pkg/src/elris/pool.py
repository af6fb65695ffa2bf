"""Closed-form binomial quantities for the pool.

Survivor counts are Binomial; all expectations here condition on the
reference member being alive at the relevant time, so only the n - 1
companions are random. Binomial weights are evaluated through
scipy.stats.binom (log-space internally), which stays stable up to the
n = 2000 pools used to approximate the infinite-pool limit.

The conditional count mean E[N_t, N_T = l] and the fund mean b_hat admit
two algebraically equivalent closed forms. The compact one has a factor
(1 - p)^(n-l-1) that degenerates at l = n; the expanded one is safe
everywhere. The oracle module validates both against exhaustive
enumeration (see oracle.write_validation_report); the expanded form is
the validated default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import binom

from .baseline import EconomicBasis, LifeCycle
from .mortality import (DEFAULT_QUAD, GompertzLaw, QuadratureSpec,
                        annuity_factor, composite_integral,
                        discounted_working_integral, survival)

# s-grid default: step 1/8 year, truncated at age 130 for a retirement age
# of 65 (s = 65). Payout integrals reuse this grid without resampling.
S_STEP = 1.0 / 8.0
S_MAX = 65.0


@dataclass(frozen=True)
class PoolSpec:
    """A pool of n members sharing one age and one (possibly impaired) law."""

    n: int
    member_law: GompertzLaw
    life: LifeCycle

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"pool size must be >= 1, got {self.n}")


@dataclass(frozen=True)
class BetaCurve:
    """Retirement-time curve of pooled payout weights beta_s."""

    s_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.s_grid[0] != 0 or np.any(np.diff(self.s_grid) <= 0):
            raise ValueError("s_grid must increase strictly from 0")
        if len(self.s_grid) != len(self.values):
            raise ValueError("grid/value length mismatch")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("beta values must be finite")


def default_s_grid(step: float = S_STEP, s_max: float = S_MAX) -> np.ndarray:
    n = int(round(s_max / step))
    n += n % 2  # even interval count for Simpson
    return np.linspace(0.0, s_max, n + 1)


def _count_weights(ell: int, p):
    """Binomial weights over k = 0..ell-1 survivors out of ell - 1 trials.

    Returns (k, pmf) with pmf broadcast over p. For large ell the k range
    is truncated to mean +- 12 sigma; the discarded tail mass is < 1e-30.
    """
    p = np.asarray(p, dtype=float)
    trials = ell - 1
    if trials <= 400:
        k = np.arange(trials + 1)
    else:
        mean = trials * p
        sig = np.sqrt(trials * 0.25) + 1.0
        lo = max(0, int(np.floor(np.min(mean) - 12 * sig)))
        hi = min(trials, int(np.ceil(np.max(mean) + 12 * sig)))
        k = np.arange(lo, hi + 1)
    return k, binom.pmf(k[None, :], trials, p[..., None])


def beta_count_factor(n: int, ell: int, s, gamma: float,
                      member_law: GompertzLaw, x1: float):
    """E[(1/N_{s+T})^{1-gamma} | N_T = ell] for the pooled payout split."""
    if not 1 <= ell <= n:
        raise ValueError(f"need 1 <= ell <= n, got ell={ell}, n={n}")
    sp = np.asarray(survival(member_law, x1, s), dtype=float)
    k, w = _count_weights(ell, sp)
    out = np.sum((1.0 / (1.0 + k)) ** (1.0 - gamma) * w, axis=-1)
    return out if out.ndim else float(out)


def beta_hat(n: int, ell: int, s, member_law: GompertzLaw, x1: float):
    """E[1/N_{s+T} | N_T = ell]: beta_count_factor with the exponent fixed at 1."""
    if not 1 <= ell <= n:
        raise ValueError(f"need 1 <= ell <= n, got ell={ell}, n={n}")
    sp = np.asarray(survival(member_law, x1, s), dtype=float)
    k, w = _count_weights(ell, sp)
    out = np.sum(w / (1.0 + k), axis=-1)
    return out if out.ndim else float(out)


def assemble_beta(s, b_values: np.ndarray, pool: PoolSpec, gamma: float):
    """beta_s = spx1 sum_l beta_count_factor(l, s) b_l."""
    b_values = np.asarray(getattr(b_values, "values", b_values), dtype=float)
    if len(b_values) != pool.n:
        raise ValueError(
            f"b vector has length {len(b_values)}, pool size is {pool.n}")
    x1 = pool.life.x1
    sp = np.asarray(survival(pool.member_law, x1, s), dtype=float)
    total = np.zeros_like(sp)
    for ell in np.nonzero(b_values)[0] + 1:
        total += beta_count_factor(pool.n, int(ell), s, gamma,
                                   pool.member_law, x1) * b_values[ell - 1]
    out = sp * total
    return out if out.ndim else float(out)


def build_beta_curve(b_values: np.ndarray, pool: PoolSpec, gamma: float,
                     s_grid: np.ndarray | None = None) -> BetaCurve:
    if s_grid is None:
        s_grid = default_s_grid()
    return BetaCurve(s_grid, np.asarray(assemble_beta(s_grid, b_values, pool, gamma)))


def log_count_moment(n: int, s, member_law: GompertzLaw, life: LifeCycle):
    """E[log N_{s+T}] conditional on the reference member being alive at s+T."""
    if n < 1:
        raise ValueError(f"pool size must be >= 1, got {n}")
    sp = np.asarray(survival(member_law, life.x0, life.T + np.asarray(s, dtype=float)))
    k, w = _count_weights(n, sp)
    out = np.sum(np.log1p(k) * w, axis=-1)
    return out if out.ndim else float(out)


def _log_prefactor(n: int, ell: int, p_T: float) -> float:
    """log of C(n-1, l-1) p_T^{l-1} (1-p_T)^{n-l-1}; the shared prefactor of
    the count-mean closed forms, kept in log space for large pools."""
    log_c = gammaln(n) - gammaln(ell) - gammaln(n - ell + 1)
    return float(log_c + (ell - 1) * np.log(p_T)
                 + (n - ell - 1) * np.log1p(-p_T))


def conditional_count_mean(n: int, t: float, ell: int, law: GompertzLaw,
                           life: LifeCycle, form: str = "expanded") -> float:
    """E[N_t, N_T = ell] with the reference member pinned alive.

    form="expanded" (oracle-validated, safe at ell = n):
        C(n-1, l-1) p_T^{l-1} [ l (1-p_T)^{n-l} + (n-l)(p_t - p_T)(1-p_T)^{n-l-1} ]
    form="compact" is the same expression with (1-p_T)^{n-l-1} factored out,
    which divides by zero when ell = n and p_T -> 1.
    """
    if not 0 <= t <= life.T:
        raise ValueError(f"need 0 <= t <= T, got t={t}")
    if not 1 <= ell <= n:
        raise ValueError(f"need 1 <= ell <= n, got ell={ell}, n={n}")
    p_t = survival(law, life.x0, t)
    p_T = survival(law, life.x0, life.T)
    q = 1.0 - p_T
    if form == "expanded":
        if ell == n:
            return float(n * np.exp((n - 1) * np.log(p_T)))
        pre = _log_prefactor(n, ell, p_T)
        return float(np.exp(pre) * (ell * q + (n - ell) * (p_t - p_T)))
    if form == "compact":
        pre = _log_prefactor(n, ell, p_T)
        return float(np.exp(pre) * (ell + (n - ell) * p_t - n * p_T))
    raise ValueError(f"unknown form {form!r}")


def b_hat(n: int, ell: int, r: float, law: GompertzLaw, life: LifeCycle,
          quad: QuadratureSpec = DEFAULT_QUAD, form: str = "expanded") -> float:
    """E[Y, N_T = ell]: mean accumulated per-unit fund restricted to ell
    survivors at retirement, reference pinned alive."""
    if not 1 <= ell <= n:
        raise ValueError(f"need 1 <= ell <= n, got ell={ell}, n={n}")
    p_T = survival(law, life.x0, life.T)
    q = 1.0 - p_T
    T = life.T
    ann = (np.expm1(r * T) / r) if r > 0 else T
    work = np.exp(r * T) * discounted_working_integral(law, life.x0, T, r, quad)
    if form == "expanded":
        if ell == n:
            return float(n * ann * np.exp((n - 1) * np.log(p_T)))
        pre = _log_prefactor(n, ell, p_T)
        return float(np.exp(pre)
                     * (ell * q * ann + (n - ell) * (work - p_T * ann)))
    if form == "compact":
        pre = _log_prefactor(n, ell, p_T)
        return float(np.exp(pre) * ((ell - n * p_T) * ann + (n - ell) * work))
    raise ValueError(f"unknown form {form!r}")


def infinite_pool_rate(basis: EconomicBasis, life: LifeCycle, eta: float,
                       member_law: GompertzLaw,
                       quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Utility-equivalent contribution rate in the infinite-pool limit.

    alpha_bar = (eta/2) abar e^{-rho T} Tpx0 / int_0^T e^{-rho t} tpx0 dt,
    everything under the member law; independent of gamma. When the member
    law equals the calibration law this collapses to the base rate alpha.
    """
    abar = annuity_factor(member_law, life.x1, basis.rho, quad)
    work = discounted_working_integral(member_law, life.x0, life.T, basis.rho, quad)
    return (eta / 2.0 * abar * np.exp(-basis.rho * life.T)
            * survival(member_law, life.x0, life.T) / work)


def terminal_count_pmf(pool: PoolSpec) -> np.ndarray:
    """Exact Binomial(n-1, Tpx0) pmf of companion survivors at retirement."""
    p_T = survival(pool.member_law, pool.life.x0, pool.life.T)
    return binom.pmf(np.arange(pool.n), pool.n - 1, p_T)


def simpson_on_grid(values: np.ndarray, s_grid: np.ndarray) -> float:
    """Simpson integral over a uniform s-grid (even interval count)."""
    return composite_integral(values, s_grid[1] - s_grid[0])
