"""Run configuration: reference defaults, flat key=value config files with
[section] grouping, and CLI flag overrides (flag > file > default)."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .baseline import EconomicBasis, LifeCycle
from .lattice import LatticeSpec
from .mortality import GompertzLaw
from .pool import PoolSpec


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """All knobs for one scenario; defaults mirror the reference
    configuration (entry 25, 40 working years, base law m=90 b=10,
    6% employee contribution, 1% real rate)."""

    scenario: str = "default"
    r: float = 0.01
    rho: float = 0.01
    alpha: float = 0.06
    gamma: float = 2.0
    x0: float = 25.0
    T: float = 40.0
    m: float = 90.0
    b: float = 10.0
    m_bar: float = 90.0
    n: int = 30
    n_t: int = 2000
    n_y: int = 1000
    richardson: int = 2
    seed: int | None = None
    n_paths: int = 10_000
    sim_dt: float = 1.0 / 52.0
    out_dir: str = "out"
    jobs: int = 1
    sweep_mbar: tuple = (65.0, 70.0, 75.0, 80.0, 85.0, 90.0, 95.0)
    sweep_n: tuple = (1, 5, 30)
    sweep_infinite: bool = True

    def basis(self) -> EconomicBasis:
        return EconomicBasis(r=self.r, rho=self.rho, alpha=self.alpha,
                             gamma=self.gamma)

    def life(self) -> LifeCycle:
        return LifeCycle(x0=self.x0, T=self.T)

    def base_law(self) -> GompertzLaw:
        return GompertzLaw(m=self.m, b=self.b)

    def member_law(self) -> GompertzLaw:
        return GompertzLaw(m=self.m_bar, b=self.b)

    def pool(self) -> PoolSpec:
        return PoolSpec(n=self.n, member_law=self.member_law(), life=self.life())

    def lattice_spec(self) -> LatticeSpec:
        mass_floor = 1e-18 if self.n > 200 else 0.0
        return LatticeSpec(n_t=self.n_t, n_y=self.n_y,
                           richardson_levels=self.richardson,
                           mass_floor=mass_floor)


_SECTION_KEYS = {
    "run": {"scenario", "out_dir", "jobs"},
    "economics": {"r", "rho", "alpha", "gamma"},
    "lifecycle": {"x0", "T"},
    "mortality": {"m", "b", "m_bar"},
    "pool": {"n"},
    "lattice": {"n_t", "n_y", "richardson"},
    "simulation": {"seed", "n_paths", "sim_dt"},
    "sweep": {"sweep_mbar", "sweep_n", "sweep_infinite"},
}

_FLOAT_KEYS = {"r", "rho", "alpha", "gamma", "x0", "T", "m", "b", "m_bar",
               "sim_dt"}
_INT_KEYS = {"n", "n_t", "n_y", "richardson", "seed", "n_paths", "jobs"}


def _parse_value(key: str, raw: str):
    try:
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _INT_KEYS:
            return int(raw)
        if key == "sweep_infinite":
            return raw.strip().lower() in ("1", "true", "yes")
        if key == "sweep_mbar":
            return tuple(float(v) for v in raw.replace(",", " ").split())
        if key == "sweep_n":
            return tuple(int(v) for v in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return raw.strip()


def load_config(path: str | Path | None = None, **overrides) -> RunConfig:
    """Build a RunConfig from an optional config file plus overrides."""
    values: dict = {}
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(str(path))
        if not read:
            raise ConfigError(f"config file not found: {path}")
        known = {k for keys in _SECTION_KEYS.values() for k in keys}
        for section in parser.sections():
            if section not in _SECTION_KEYS:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key == "t":  # configparser lowercases keys
                    key = "T"
                if key not in known:
                    raise ConfigError(f"unknown config key {key!r}")
                if key not in _SECTION_KEYS[section]:
                    raise ConfigError(
                        f"key {key!r} does not belong in section [{section}]")
                values[key] = _parse_value(key, raw)
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    try:
        cfg = RunConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.rho != cfg.r:
        raise ConfigError(f"the model requires rho = r (got rho={cfg.rho}, "
                          f"r={cfg.r})")
    return cfg


def with_cell(cfg: RunConfig, n: int | None = None,
              m_bar: float | None = None,
              gamma: float | None = None) -> RunConfig:
    kwargs = {}
    if n is not None:
        kwargs["n"] = n
    if m_bar is not None:
        kwargs["m_bar"] = m_bar
    if gamma is not None:
        kwargs["gamma"] = gamma
    return replace(cfg, **kwargs)
