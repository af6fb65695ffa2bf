"""Markov-chain lattice for the accumulation moments b_l = E[Y^{1-gamma},
N_T = l] of the compounded per-unit fund Y = int_0^T N_t e^{rho(T-t)} dt.

The chain tracks companions only (k = 0..n-1); the reference member is
pinned alive on [0, T], because every downstream expectation conditions on
the reference being alive at or after retirement. A single forward pass of
the joint (fund level, companion count) distribution yields every b_l at
once.

Per step, at most one companion death occurs (probability k h(x0+t) dt,
error O(dt^2) per step, removed by Richardson extrapolation) and the fund
advances deterministically by (rho y + k + 1) dt, deposited on the level
grid as floor-many cells plus one extra cell with the fractional
probability, so the mean increment is exact. Summation order is fixed
(ascending fund level, then count) so runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baseline import EconomicBasis
from .mortality import hazard
from .pool import PoolSpec

# Stochastic rounding onto the level grid diffuses mass around the true
# fund value with standard deviation at most (y_max / n_y) sqrt(n_t) / 2,
# so the headroom above the deterministic fund bound must scale with that
# width; BOUNDARY_SIGMA fixes how many widths of clearance the grid keeps.
BOUNDARY_SIGMA = 8.0
MAX_HEADROOM = 3.0
BOUNDARY_MASS_TOL = 1e-9
MAX_STEP_DEATH_PROB = 0.1


class MassLeakError(Exception):
    """Non-negligible probability mass reached the fund-level boundary."""


class StepSizeError(Exception):
    """A per-step death probability exceeded the single-death cap."""


@dataclass(frozen=True)
class LatticeSpec:
    """Resolution of the forward lattice.

    n_t time steps over [0, T]; n_y fund levels up to y_max (defaulted to
    a headroom multiple of the all-survive bound). richardson_levels runs
    the lattice at step-halved resolutions and extrapolates; mass_floor
    optionally drops companion-count rows whose total mass falls below
    mass_floor (used only for very large pools; dropped mass is tracked).
    """

    n_t: int
    n_y: int
    y_max: float | None = None
    richardson_levels: int = 2
    mass_floor: float = 0.0

    def __post_init__(self):
        if self.n_t < 100:
            raise ValueError(f"n_t must be >= 100, got {self.n_t}")
        if self.n_y < 50:
            raise ValueError(f"n_y must be >= 50, got {self.n_y}")
        if self.richardson_levels not in (1, 2, 3):
            raise ValueError(
                f"richardson_levels must be 1, 2 or 3, got {self.richardson_levels}")
        step = 2 ** (self.richardson_levels - 1)
        if self.n_t % step or self.n_y % step:
            raise ValueError("n_t and n_y must be divisible by "
                             f"2^(levels-1) = {step}")


@dataclass(frozen=True)
class BVector:
    """Accumulation moments b_l for l = 1..n, with resolution provenance."""

    values: np.ndarray
    n_t: int
    n_y: int
    extrapolated: bool = False

    def __len__(self):
        return len(self.values)


@dataclass
class TerminalDistribution:
    """Joint terminal mass over (fund level, companion count) at T."""

    mass: np.ndarray          # shape (n, n_y + 2); [k, i], level y_i = i * delta
    delta: float
    y_max: float
    n_t: int
    dropped_mass: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def y_levels(self) -> np.ndarray:
        return np.arange(self.mass.shape[1]) * self.delta

    def total_mass(self) -> float:
        return float(self.mass.sum()) + self.dropped_mass

    def count_marginal(self) -> np.ndarray:
        return self.mass.sum(axis=1)

    def dump_csv(self, path) -> None:
        """Debug dump: header (n_t, n_y, y_max, n) + row-major mass table."""
        n, width = self.mass.shape
        with open(path, "w") as fh:
            fh.write(f"n_t,{self.n_t}\nn_y,{width - 2}\n"
                     f"y_max,{self.y_max:.17g}\nn,{n}\n")
            for k in range(n):
                fh.write(",".join(f"{v:.17g}" for v in self.mass[k]) + "\n")


def fund_bound(pool: PoolSpec, basis: EconomicBasis) -> float:
    """Deterministic upper bound on the compounded fund (all members
    survive the whole accumulation phase)."""
    rho = basis.rho
    return pool.n * (np.expm1(rho * pool.life.T) / rho if rho > 0 else pool.life.T)


def default_y_max(pool: PoolSpec, basis: EconomicBasis,
                  spec: LatticeSpec | None = None) -> float:
    """Grid ceiling: the fund bound plus BOUNDARY_SIGMA rounding-diffusion
    widths of the coarsest resolution the spec will run (so Richardson
    levels share one grid ceiling and the boundary stays unpopulated)."""
    bound = fund_bound(pool, basis)
    if spec is None:
        return MAX_HEADROOM * bound
    shift = spec.richardson_levels - 1
    n_t_c, n_y_c = spec.n_t >> shift, spec.n_y >> shift
    # y_max = bound + BOUNDARY_SIGMA * (y_max / n_y) sqrt(n_t) / 2
    rel_width = BOUNDARY_SIGMA * np.sqrt(n_t_c) / (2.0 * n_y_c)
    if rel_width >= 1.0 - 1.0 / MAX_HEADROOM:
        return MAX_HEADROOM * bound
    return bound / (1.0 - rel_width)


def propagate_distribution(pool: PoolSpec, basis: EconomicBasis,
                           spec: LatticeSpec) -> TerminalDistribution:
    """Forward-propagate the exact initial state (y = 0, all companions
    alive) to the terminal joint distribution at T."""
    n, life, law = pool.n, pool.life, pool.member_law
    rho = basis.rho
    dt = life.T / spec.n_t
    y_max = spec.y_max if spec.y_max is not None else default_y_max(pool, basis, spec)
    if y_max <= fund_bound(pool, basis):
        raise ValueError("y_max is below the deterministic fund bound")
    delta = y_max / spec.n_y
    top = spec.n_y + 1  # one guard level above y_max catches clamped mass

    mass = np.zeros((n, top + 1))
    mass[n - 1, 0] = 1.0
    hi = np.zeros(n, dtype=np.int64)  # highest occupied level per count row
    hi[n - 1] = 0
    lo = np.zeros(n, dtype=np.int64)
    active = np.zeros(n, dtype=bool)
    active[n - 1] = True
    dropped = 0.0

    for it in range(spec.n_t):
        hz = hazard(law, life.x0 + it * dt)
        k_top = int(np.max(np.nonzero(active)[0]))
        if k_top * hz * dt > MAX_STEP_DEATH_PROB:
            raise StepSizeError(
                f"per-step death probability {k_top * hz * dt:.3f} exceeds "
                f"{MAX_STEP_DEATH_PROB}; increase n_t")
        new = np.zeros_like(mass)
        new_hi = np.full(n, -1, dtype=np.int64)
        new_lo = np.full(n, top, dtype=np.int64)
        for k in range(n):
            if not active[k]:
                continue
            i = np.arange(lo[k], hi[k] + 1)
            v = mass[k, lo[k]:hi[k] + 1]
            g = (rho * i * delta + (k + 1)) * dt / delta
            j = g.astype(np.int64)  # floor; g >= 0
            frac = g - j
            tgt = i + j
            # tgt is strictly increasing, so fancy-indexed += has no
            # collisions below the clamp point.
            cut = np.searchsorted(tgt, top - 1, side="right")
            pd = k * hz * dt
            for dest, w in ((k, 1.0 - pd), (k - 1, pd)):
                if w == 0.0 or dest < 0:
                    continue
                row = new[dest]
                row[tgt[:cut]] += w * v[:cut] * (1.0 - frac[:cut])
                row[tgt[:cut] + 1] += w * v[:cut] * frac[:cut]
                if cut < len(tgt):
                    row[top] += w * np.sum(v[cut:])
                new_lo[dest] = min(new_lo[dest], tgt[0])
                new_hi[dest] = max(new_hi[dest], min(tgt[-1] + 1, top))
        mass, lo, hi = new, new_lo, new_hi
        active = new_hi >= 0
        if spec.mass_floor > 0.0:
            row_tot = mass.sum(axis=1)
            drop = active & (row_tot < spec.mass_floor)
            if drop.any():
                dropped += float(row_tot[drop].sum())
                mass[drop] = 0.0
                active[drop] = False

    boundary = float(mass[:, top].sum()) + float(mass[:, top - 1].sum())
    if boundary > BOUNDARY_MASS_TOL:
        raise MassLeakError(
            f"mass {boundary:.3e} reached the fund-level boundary; "
            "increase y_max")
    return TerminalDistribution(mass=mass, delta=delta, y_max=y_max,
                                n_t=spec.n_t, dropped_mass=dropped,
                                meta={"n": n, "n_y": spec.n_y})


def _level_resolutions(spec: LatticeSpec):
    """Coarse-to-fine (n_t, n_y) pairs; the finest equals the spec."""
    levels = spec.richardson_levels
    return [(spec.n_t >> (levels - 1 - i), spec.n_y >> (levels - 1 - i))
            for i in range(levels)]


def _terminal_moment(pool, basis, spec, n_t, n_y, weight_fn) -> np.ndarray:
    y_max = spec.y_max if spec.y_max is not None else default_y_max(pool, basis, spec)
    sub = LatticeSpec(n_t=n_t, n_y=n_y, y_max=y_max,
                      richardson_levels=1, mass_floor=spec.mass_floor)
    dist = propagate_distribution(pool, basis, sub)
    w = weight_fn(dist.y_levels)
    return dist.mass @ w


def compute_b_vector(pool: PoolSpec, basis: EconomicBasis, gamma: float,
                     spec: LatticeSpec) -> BVector:
    """All moments b_l = E[Y^{1-gamma}, N_T = l], Richardson-extrapolated
    across the spec's resolutions (gamma != 1)."""
    if gamma == 1:
        raise ValueError("gamma = 1 uses compute_log_y_moment")

    def weight(y):
        w = np.zeros_like(y)
        w[1:] = y[1:] ** (1.0 - gamma)  # level 0 never carries terminal mass
        return w

    resolutions = _level_resolutions(spec)
    per_level = [_terminal_moment(pool, basis, spec, nt, ny, weight)
                 for nt, ny in resolutions]
    if len(per_level) == 1:
        values = per_level[0]
    else:
        values = richardson_extrapolate(
            [(nt, v) for (nt, _), v in zip(resolutions, per_level)])
    return BVector(values=values, n_t=spec.n_t, n_y=spec.n_y,
                   extrapolated=len(per_level) > 1)


def compute_log_y_moment(pool: PoolSpec, basis: EconomicBasis,
                         spec: LatticeSpec) -> float:
    """E[log Y] with the reference alive at T (log-utility pipeline),
    pooled over all companion counts."""

    def weight(y):
        w = np.zeros_like(y)
        w[1:] = np.log(y[1:])
        return w

    resolutions = _level_resolutions(spec)
    per_level = [float(_terminal_moment(pool, basis, spec, nt, ny, weight).sum())
                 for nt, ny in resolutions]
    if len(per_level) == 1:
        return per_level[0]
    return float(richardson_extrapolate(
        [(nt, v) for (nt, _), v in zip(resolutions, per_level)]))


def richardson_extrapolate(values):
    """Eliminate the leading O(step) error from a coarse-to-fine sequence.

    values: sequence of (resolution, value) with each resolution double the
    previous; value may be scalar or ndarray. Two levels give
    2 f(fine) - f(coarse); three levels eliminate the O(step^2) term too.
    """
    values = list(values)
    if len(values) < 2:
        raise ValueError("need at least two resolutions to extrapolate")
    res = [r for r, _ in values]
    for a, b in zip(res, res[1:]):
        if b != 2 * a:
            raise ValueError(f"resolutions must double: {res}")
    tableau = [np.asarray(v, dtype=float) for _, v in values]
    for m in range(1, len(tableau)):
        factor = 2.0 ** m
        tableau = [(factor * tableau[i + 1] - tableau[i]) / (factor - 1.0)
                   for i in range(len(tableau) - 1)]
    out = tableau[0]
    return float(out) if out.ndim == 0 else out
