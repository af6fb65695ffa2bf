"""Equitable longevity risk sharing: pooled-annuity contribution-rate
solver, lattice moment engine, Monte Carlo simulator and validation
oracles for a stylized national pension comparison."""

__version__ = "0.1.0"

from .baseline import (EconomicBasis, LifeCycle, ReplacementRate,
                       calibrate_eta, plan_generosity)
from .config import ConfigError, RunConfig, load_config
from .lattice import (BVector, LatticeSpec, MassLeakError, StepSizeError,
                      compute_b_vector, compute_log_y_moment)
from .mortality import GompertzLaw, QuadratureSpec, annuity_factor, survival
from .pool import PoolSpec, infinite_pool_rate
from .simulate import SeedError, SimulationRun, mc_utility, percentile_fan, \
    simulate_paths
from .solver import (EquivalenceResult, PayoutSchedule, elris_generosity,
                     equivalent_rates, optimal_payout)

__all__ = [
    "EconomicBasis", "LifeCycle", "ReplacementRate", "calibrate_eta",
    "plan_generosity", "ConfigError", "RunConfig", "load_config", "BVector",
    "LatticeSpec", "MassLeakError", "StepSizeError", "compute_b_vector",
    "compute_log_y_moment", "GompertzLaw", "QuadratureSpec", "annuity_factor",
    "survival", "PoolSpec", "infinite_pool_rate", "SeedError",
    "SimulationRun", "mc_utility", "percentile_fan", "simulate_paths",
    "EquivalenceResult", "PayoutSchedule", "elris_generosity",
    "equivalent_rates", "optimal_payout", "__version__",
]
