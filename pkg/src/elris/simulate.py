"""Seeded Monte Carlo of pool income paths.

Death ages are drawn exactly by inverting the closed-form survival
function; time-stepping is used only for the accumulation integral.
Each path gets its own RNG stream derived from the master seed by a
counter-based split, so path i is identical regardless of how paths are
scheduled or chunked.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baseline import EconomicBasis, LifeCycle
from .mortality import sample_lifetimes
from .pool import PoolSpec, simpson_on_grid
from .solver import PayoutSchedule

LOW_CONFIDENCE_PATHS = 50
_CHUNK = 256


class SeedError(Exception):
    """Simulation runs must carry an explicit seed (reproducibility contract)."""


@dataclass(frozen=True)
class SimulationRun:
    seed: int | None
    n_paths: int
    pool: PoolSpec
    basis: EconomicBasis
    life: LifeCycle
    schedule: PayoutSchedule
    alpha_bar: float
    dt: float = 1.0 / 52.0
    cap_age: float | None = None  # cap lifetimes at this age (testing aid)

    def __post_init__(self):
        if self.seed is None:
            raise SeedError("simulation requires an explicit seed")
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be >= 1, got {self.n_paths}")


@dataclass
class SimulationResult:
    """Per-path income for the reference member, wage-normalized.

    income[p, a] is the integral of the payout rate over age-year ages[a];
    rate[p, j] is the instantaneous payout rate at retirement time
    s_grid[j] (0 once the reference has died); fund[p] is the accumulated
    retirement fund X on path p.
    """

    income: np.ndarray
    ages: np.ndarray
    rate: np.ndarray
    s_grid: np.ndarray
    fund: np.ndarray
    ref_death_age: np.ndarray
    run: SimulationRun = field(repr=False, default=None)


def _draw_death_ages(run: SimulationRun, path_lo: int, path_hi: int) -> np.ndarray:
    """Death ages for paths [path_lo, path_hi), shape (paths, n)."""
    n = run.pool.n
    x0 = run.life.x0
    out = np.empty((path_hi - path_lo, n))
    for i, p in enumerate(range(path_lo, path_hi)):
        rng = np.random.default_rng([run.seed, p])
        u = rng.uniform(size=n)
        out[i] = x0 + sample_lifetimes(run.pool.member_law, x0, u)
    if run.cap_age is not None:
        np.minimum(out, run.cap_age, out=out)
    return out


def simulate_paths(run: SimulationRun) -> SimulationResult:
    """Simulate pool income paths for the reference member (member 0)."""
    life, basis = run.life, run.basis
    x1 = life.x1
    s_grid = run.schedule.s_grid
    d = run.schedule.d
    n_s = len(s_grid)
    t_grid = np.arange(0.0, life.T, run.dt)
    growth = np.exp(basis.rho * (life.T - t_grid)) * run.dt

    ages = np.arange(int(x1), int(x1 + s_grid[-1]))
    n_years = len(ages)
    sub = int(round(1.0 / (s_grid[1] - s_grid[0])))  # grid points per year

    income = np.zeros((run.n_paths, n_years))
    rate = np.zeros((run.n_paths, n_s))
    fund = np.zeros(run.n_paths)
    ref_death = np.zeros(run.n_paths)

    for lo in range(0, run.n_paths, _CHUNK):
        hi = min(lo + _CHUNK, run.n_paths)
        deaths = _draw_death_ages(run, lo, hi)
        ref_death[lo:hi] = deaths[:, 0]
        # accumulation: X = 2 alpha_bar sum_t N_t e^{rho (T - t)} dt
        alive_t = (deaths[:, None, :] > life.x0 + t_grid[None, :, None]).sum(-1)
        fund[lo:hi] = 2.0 * run.alpha_bar * alive_t @ growth
        # decumulation: reference gets d_s X / N_{s+T} while alive
        alive_s = (deaths[:, None, :] > x1 + s_grid[None, :, None]).sum(-1)
        ref_alive = deaths[:, 0:1] > x1 + s_grid[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            r_chunk = np.where(ref_alive,
                               d[None, :] * fund[lo:hi, None] / alive_s, 0.0)
        rate[lo:hi] = r_chunk
        # yearly income: integral of the rate over each age-year (left rule)
        whole = n_years * sub
        income[lo:hi] = r_chunk[:, :whole].reshape(hi - lo, n_years, sub).sum(2) / sub

    return SimulationResult(income=income, ages=ages, rate=rate, s_grid=s_grid,
                            fund=fund, ref_death_age=ref_death, run=run)


def percentile_fan(result: SimulationResult, quantiles=(20, 40, 60, 80)):
    """Empirical income quantiles per age over paths where the reference is
    alive at that age. Returns (ages, fan, n_alive, low_confidence)."""
    if result.income.shape[0] < 1000:
        raise ValueError("percentile fan needs at least 1000 paths")
    ages = result.ages
    fan = np.zeros((len(ages), len(quantiles)))
    n_alive = np.zeros(len(ages), dtype=np.int64)
    for i, a in enumerate(ages):
        alive = result.ref_death_age > a
        n_alive[i] = alive.sum()
        if n_alive[i]:
            fan[i] = np.percentile(result.income[alive, i], quantiles)
    low_confidence = n_alive < LOW_CONFIDENCE_PATHS
    return ages, fan, n_alive, low_confidence


def mc_utility(result: SimulationResult, basis: EconomicBasis,
               gamma: float) -> tuple[float, float]:
    """Monte Carlo estimate (mean, standard error) of the discounted
    lifetime utility realized by the payout rates.

    Paths where the reference dies before retirement contribute zero, so
    the mean is comparable to the analytic age-x0 expected utility.
    """
    run = result.run
    s = result.s_grid
    disc = np.exp(-basis.rho * (s + run.life.T))
    alive = result.rate > 0
    u = np.zeros_like(result.rate)
    if gamma == 1:
        u[alive] = np.log(result.rate[alive])
    else:
        u[alive] = result.rate[alive] ** (1.0 - gamma) / (1.0 - gamma)
    per_path = np.array([simpson_on_grid(disc * row, s) for row in u])
    mean = float(per_path.mean())
    stderr = float(per_path.std(ddof=1) / np.sqrt(len(per_path)))
    return mean, stderr
