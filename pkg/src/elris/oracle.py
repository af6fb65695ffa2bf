"""Independent brute-force verification engine.

Everything here deliberately avoids the numerical machinery of the modules
it checks: integration is trapezoidal on its own grids, fund values are
piecewise-exponential closed forms per enumerated outcome, binomial
expectations are explicit sums over survivor subsets, and Monte Carlo uses
its own stream layout. Slowness is fine; independence is the point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .baseline import EconomicBasis, LifeCycle
from .mortality import GompertzLaw, sample_lifetimes, survival
from .pool import PoolSpec

MAX_ENUM_POOL = 5
MAX_BINS = 16
MAX_OUTCOMES = 10_000_000


class EnumerationOverflow(Exception):
    pass


@dataclass(frozen=True)
class EnumerationSpec:
    """Death-time partition of the working phase for exhaustive enumeration.

    Each companion either dies in one of `bins` sub-intervals of [0, T]
    (placed at the bin-conditional mean death time by default, or the bin
    midpoint) or survives to T; bin probabilities are exact.
    """

    bins: int = 8
    placement: str = "mean"  # or "midpoint"

    def __post_init__(self):
        if not 1 <= self.bins <= MAX_BINS:
            raise ValueError(f"bins must be in [1, {MAX_BINS}], got {self.bins}")
        if self.placement not in ("mean", "midpoint"):
            raise ValueError(f"unknown placement {self.placement!r}")


def _bin_outcomes(law: GompertzLaw, life: LifeCycle, spec: EnumerationSpec):
    """Per-companion outcomes: (death time or None, probability)."""
    edges = np.linspace(0.0, life.T, spec.bins + 1)
    outcomes = []
    for a, b in zip(edges, edges[1:]):
        p = survival(law, life.x0, a) - survival(law, life.x0, b)
        if spec.placement == "midpoint":
            t_rep = 0.5 * (a + b)
        else:
            # bin-conditional mean death time via a fine trapezoid
            tt = np.linspace(a, b, 257)
            dens = -np.gradient(survival(law, life.x0, tt), tt)
            t_rep = np.trapezoid(tt * dens, tt) / max(np.trapezoid(dens, tt), 1e-300)
        outcomes.append((float(t_rep), float(p)))
    outcomes.append((None, float(survival(law, life.x0, life.T))))
    return outcomes


def _fund_value(death_times, n: int, rho: float, T: float) -> float:
    """Y = int_0^T N_t e^{rho (T-t)} dt, exactly, for given companion deaths."""
    events = sorted(t for t in death_times if t is not None)
    times = [0.0] + events + [T]
    y = 0.0
    alive = n
    for a, b in zip(times, times[1:]):
        if rho > 0:
            y += alive * (np.exp(rho * (T - a)) - np.exp(rho * (T - b))) / rho
        else:
            y += alive * (b - a)
        alive -= 1
    return y


def enumerate_b(pool: PoolSpec, gamma: float,
                spec: EnumerationSpec = EnumerationSpec(),
                rho: float | None = None) -> np.ndarray:
    """b_l = E[Y^{1-gamma}, N_T = l] by exhaustive enumeration over
    companion death bins, reference pinned alive."""
    n = pool.n
    if n > MAX_ENUM_POOL:
        raise EnumerationOverflow(f"enumeration limited to n <= {MAX_ENUM_POOL}")
    if (spec.bins + 1) ** (n - 1) > MAX_OUTCOMES:
        raise EnumerationOverflow("outcome space too large")
    rho = rho if rho is not None else 0.0
    outcomes = _bin_outcomes(pool.member_law, pool.life, spec)
    b = np.zeros(n)
    for combo in itertools.product(outcomes, repeat=n - 1):
        prob = 1.0
        deaths = []
        survivors = 1  # the reference
        for t_rep, p in combo:
            prob *= p
            if t_rep is None:
                survivors += 1
            else:
                deaths.append(t_rep)
        y = _fund_value(deaths, n, rho, pool.life.T)
        b[survivors - 1] += prob * y ** (1.0 - gamma)
    return b


def enumerate_log_y(pool: PoolSpec, spec: EnumerationSpec = EnumerationSpec(),
                    rho: float = 0.0) -> float:
    """E[log Y] with the reference pinned alive, by enumeration."""
    n = pool.n
    if n > MAX_ENUM_POOL:
        raise EnumerationOverflow(f"enumeration limited to n <= {MAX_ENUM_POOL}")
    outcomes = _bin_outcomes(pool.member_law, pool.life, spec)
    total = 0.0
    for combo in itertools.product(outcomes, repeat=n - 1):
        prob = np.prod([p for _, p in combo])
        deaths = [t for t, _ in combo if t is not None]
        total += prob * np.log(_fund_value(deaths, n, rho, pool.life.T))
    return float(total)


def enumerate_count_mean(n: int, t: float, ell: int, law: GompertzLaw,
                         life: LifeCycle) -> float:
    """E[N_t, N_T = ell], reference pinned alive, by exact enumeration over
    each companion's three states at (t, T)."""
    if n > MAX_ENUM_POOL:
        raise EnumerationOverflow(f"enumeration limited to n <= {MAX_ENUM_POOL}")
    p_t = survival(law, life.x0, t)
    p_T = survival(law, life.x0, life.T)
    # states: dead by t / alive at t, dead by T / alive at T
    states = [(0, 0, 1.0 - p_t), (1, 0, p_t - p_T), (1, 1, p_T)]
    total = 0.0
    for combo in itertools.product(states, repeat=n - 1):
        n_t_count = 1 + sum(c[0] for c in combo)
        n_T_count = 1 + sum(c[1] for c in combo)
        if n_T_count == ell:
            prob = 1.0
            for c in combo:
                prob *= c[2]
            total += prob * n_t_count
    return total


def enumerate_beta_hat(ell: int, s: float, law: GompertzLaw, x1: float) -> float:
    """E[1/N_{s+T} | N_T = ell] by explicit enumeration over survivor
    subsets of the ell - 1 companions alive at retirement."""
    if ell > MAX_ENUM_POOL:
        raise EnumerationOverflow(f"enumeration limited to ell <= {MAX_ENUM_POOL}")
    p = survival(law, x1, s)
    total = 0.0
    for alive in itertools.product((0, 1), repeat=ell - 1):
        k = sum(alive)
        prob = 1.0
        for a in alive:
            prob *= p if a else 1.0 - p
        total += prob / (1.0 + k)
    return total


def enumerate_count_factor(ell: int, s: float, gamma: float, law: GompertzLaw,
                           x1: float) -> float:
    """E[(1/N_{s+T})^{1-gamma} | N_T = ell] over explicit survivor subsets."""
    if ell > MAX_ENUM_POOL:
        raise EnumerationOverflow(f"enumeration limited to ell <= {MAX_ENUM_POOL}")
    p = survival(law, x1, s)
    total = 0.0
    for alive in itertools.product((0, 1), repeat=ell - 1):
        k = sum(alive)
        prob = 1.0
        for a in alive:
            prob *= p if a else 1.0 - p
        total += prob * (1.0 / (1.0 + k)) ** (1.0 - gamma)
    return total


def enumerate_b_hat(n: int, ell: int, r: float, law: GompertzLaw,
                    life: LifeCycle, t_points: int = 200) -> float:
    """E[Y, N_T = ell] = int_0^T e^{r(T-t)} E[N_t, N_T = ell] dt by
    trapezoid over the enumerated integrand."""
    tt = np.linspace(0.0, life.T, t_points + 1)
    vals = np.array([np.exp(r * (life.T - t)) * enumerate_count_mean(n, t, ell, law, life)
                     for t in tt])
    return float(np.trapezoid(vals, tt))


def mc_beta_count_factor(n: int, ell: int, s: float, gamma: float,
                         law: GompertzLaw, x1: float, n_samples: int,
                         seed: int) -> tuple[float, float]:
    """Monte Carlo estimate of beta_count_factor with standard error."""
    rng = np.random.default_rng([seed, 101])
    p = survival(law, x1, s)
    k = rng.binomial(ell - 1, p, size=n_samples)
    vals = (1.0 / (1.0 + k)) ** (1.0 - gamma)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n_samples))


def mc_generosity_plan(alpha: float, eta: float, law: GompertzLaw,
                      life: LifeCycle, n_samples: int, seed: int,
                      cap_age: float = 130.0) -> tuple[float, float]:
    """MC estimate of the guaranteed plan's undiscounted benefit/contribution
    ratio (lifetimes capped at cap_age), with a delta-method standard error."""
    rng = np.random.default_rng([seed, 202])
    t = np.minimum(sample_lifetimes(law, life.x0, rng.uniform(size=n_samples)),
                   cap_age - life.x0)
    contrib = alpha * np.minimum(t, life.T)
    benefit = eta * np.maximum(t - life.T, 0.0)
    g = benefit.mean() / contrib.mean()
    # delta method for a ratio of means
    var = (benefit.var(ddof=1) / contrib.mean() ** 2
           + g ** 2 * contrib.var(ddof=1) / contrib.mean() ** 2
           - 2 * g * np.cov(benefit, contrib)[0, 1] / contrib.mean() ** 2)
    return float(g), float(np.sqrt(var / n_samples))


def mc_beta_s(pool: PoolSpec, gamma: float, s: float, rho: float,
              n_samples: int, seed: int) -> tuple[float, float]:
    """MC estimate of beta_s = spx1 E[(Y/N_{s+T})^{1-gamma}] (reference
    alive at s + T), via direct lifetime simulation."""
    rng = np.random.default_rng([seed, 303])
    life, law, n = pool.life, pool.member_law, pool.n
    sp = survival(law, life.x1, s)
    vals = np.empty(n_samples)
    for i in range(n_samples):
        t = sample_lifetimes(law, life.x0, rng.uniform(size=n - 1))
        y = _fund_value(list(t[t < life.T]), n, rho, life.T)
        n_alive = 1 + int(np.sum(t > life.T + s))
        vals[i] = (y / n_alive) ** (1.0 - gamma)
    return (float(sp * vals.mean()),
            float(sp * vals.std(ddof=1) / np.sqrt(n_samples)))


def mc_check(expression: str, params: dict, n_samples: int,
             seed: int) -> tuple[float, float]:
    """Dispatch a named Monte Carlo estimate; returns (estimate, stderr)."""
    table = {
        "beta_count_factor": mc_beta_count_factor,
        "plan_generosity": mc_generosity_plan,
        "beta_s": mc_beta_s,
    }
    if expression not in table:
        raise ValueError(f"unknown expression {expression!r}")
    return table[expression](**params, n_samples=n_samples, seed=seed)


EXPONENT_VERDICT_KEY = "count_mean_closed_form"


def validate_count_identities(law: GompertzLaw, life: LifeCycle,
                              tol: float = 1e-10) -> list[dict]:
    """Check both closed forms of E[N_t, N_T = l] and E[Y, N_T = l] against
    exact enumeration, including the l = n edge case. Returns one record
    per checked cell."""
    from .pool import b_hat, conditional_count_mean

    rows = []
    for n in (2, 3, 4, 5):
        for ell in range(1, n + 1):
            for frac in (0.0, 0.5, 1.0):
                t = frac * life.T
                exact = enumerate_count_mean(n, t, ell, law, life)
                for form in ("expanded", "compact"):
                    val = conditional_count_mean(n, t, ell, law, life, form=form)
                    rows.append({
                        "check": "count_mean", "form": form, "n": n,
                        "ell": ell, "t": t, "exact": exact, "value": val,
                        "ok": bool(np.isfinite(val)
                                   and abs(val - exact) <= tol * max(1.0, abs(exact))),
                    })
            exact_b = enumerate_b_hat(n, ell, 0.01, law, life, t_points=400)
            for form in ("expanded", "compact"):
                val = b_hat(n, ell, 0.01, law, life, form=form)
                rows.append({
                    "check": "fund_mean", "form": form, "n": n, "ell": ell,
                    "t": float("nan"), "exact": exact_b, "value": val,
                    "ok": bool(np.isfinite(val)
                               and abs(val - exact_b) <= 1e-4 * max(1.0, abs(exact_b))),
                })
    return rows


def write_validation_report(out_dir, law: GompertzLaw, life: LifeCycle) -> bool:
    """Run the closed-form validation suite and write oracle_report.txt and
    oracle_report.csv under out_dir. Returns True when every validated form
    passes."""
    import csv
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = validate_count_identities(law, life)
    by_form = {}
    for row in rows:
        by_form.setdefault(row["form"], []).append(row["ok"])
    verdicts = {form: all(oks) for form, oks in by_form.items()}
    adopted = "expanded" if verdicts.get("expanded") else (
        "compact" if verdicts.get("compact") else "none")

    with open(out_dir / "oracle_report.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)

    with open(out_dir / "oracle_report.txt", "w") as fh:
        fh.write("closed-form validation against exhaustive enumeration\n")
        for form, ok in sorted(verdicts.items()):
            fh.write(f"form={form}: {'PASS' if ok else 'FAIL'} "
                     f"({sum(r['form'] == form for r in rows)} cells)\n")
        fh.write(f"{EXPONENT_VERDICT_KEY}: {adopted}\n")
    return adopted != "none"
