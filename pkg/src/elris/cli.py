"""Batch command-line front end.

Subcommands: calibrate, solve, sweep, simulate, generosity, oracle.
Every command is deterministic given (config, seed); CSV outputs are
byte-stable across runs and across --jobs settings because sweep rows are
sorted by (n, m_bar, gamma) and written by the parent process only.

Exit codes: 0 success, 1 internal panic, 2 configuration error,
3 lattice mass leak, 4 sweep cell failure, 5 missing simulation seed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .baseline import DegenerateConfigError, calibrate_eta, plan_generosity
from .config import ConfigError, RunConfig, load_config, with_cell
from .lattice import MassLeakError, StepSizeError, compute_b_vector, \
    compute_log_y_moment
from .mortality import survival
from .oracle import EXPONENT_VERDICT_KEY, write_validation_report
from .pool import BetaCurve, build_beta_curve, default_s_grid, \
    infinite_pool_rate
from .simulate import SeedError, SimulationRun, percentile_fan, simulate_paths
from .solver import elris_generosity, equivalent_rates, optimal_payout

EXIT_OK = 0
EXIT_PANIC = 1
EXIT_CONFIG = 2
EXIT_MASS_LEAK = 3
EXIT_SWEEP_CELL = 4
EXIT_SEED = 5

INF_TOKEN = "inf"


def _f17(x) -> str:
    return format(float(x), ".17g")


def _f4(x) -> str:
    return format(float(x), ".4g")


def _provenance(cfg: RunConfig) -> dict:
    return {
        "code_version": __version__,
        "n_t": cfg.n_t,
        "n_y": cfg.n_y,
        "richardson": cfg.richardson,
        "seed": cfg.seed,
    }


def _eta_for(cfg: RunConfig) -> float:
    return calibrate_eta(cfg.basis(), cfg.life(), cfg.base_law()).eta


def _solve_cell(cfg: RunConfig, infinite: bool) -> dict:
    """One (gamma, n, m_bar) equivalence cell as a plain row dict."""
    eta = _eta_for(cfg)
    basis, life = cfg.basis(), cfg.life()
    if infinite:
        alpha_bar = infinite_pool_rate(basis, life, eta, cfg.member_law())
        return {"n": INF_TOKEN, "m_bar": cfg.m_bar, "gamma": cfg.gamma,
                "alpha_bar": alpha_bar, "eta_bar": eta * cfg.alpha / alpha_bar,
                "eta": eta, "r": cfg.r, "n_t": "", "n_y": "",
                "extrapolated": False}
    pool = cfg.pool()
    spec = cfg.lattice_spec()
    if cfg.gamma == 1:
        log_y = compute_log_y_moment(pool, basis, spec)
        res = equivalent_rates(pool, basis, life, eta, None, log_y_moment=log_y)
    else:
        b_vec = compute_b_vector(pool, basis, cfg.gamma, spec)
        res = equivalent_rates(pool, basis, life, eta, b_vec)
    return {"n": pool.n, "m_bar": cfg.m_bar, "gamma": cfg.gamma,
            "alpha_bar": res.alpha_bar, "eta_bar": res.eta_bar, "eta": eta,
            "r": cfg.r, "n_t": res.n_t or "", "n_y": res.n_y or "",
            "extrapolated": res.extrapolated}


_TABLE_COLUMNS = ("gamma", "n", "m_bar", "r", "eta", "alpha_bar", "eta_bar",
                  "n_t", "n_y", "extrapolated", "alpha_bar_pct", "eta_bar_pct")


def _table_row(row: dict) -> str:
    cells = [
        _f17(row["gamma"]), str(row["n"]), _f17(row["m_bar"]), _f17(row["r"]),
        _f17(row["eta"]), _f17(row["alpha_bar"]), _f17(row["eta_bar"]),
        str(row["n_t"]), str(row["n_y"]), str(bool(row["extrapolated"])),
        _f4(100.0 * row["alpha_bar"]), _f4(100.0 * row["eta_bar"]),
    ]
    return ",".join(cells)


def _append_table(path: Path, row: dict) -> None:
    new = not path.exists()
    with open(path, "a") as fh:
        if new:
            fh.write(",".join(_TABLE_COLUMNS) + "\n")
        fh.write(_table_row(row) + "\n")


def cmd_calibrate(cfg: RunConfig, out_dir: Path) -> int:
    eta = _eta_for(cfg)
    payload = {"eta": eta, "r": cfg.r, "alpha": cfg.alpha, "x0": cfg.x0,
               "T": cfg.T, "m": cfg.m, "b": cfg.b,
               "provenance": _provenance(cfg)}
    with open(out_dir / "eta.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"eta = {eta:.4f}")
    return EXIT_OK


def cmd_solve(cfg: RunConfig, out_dir: Path, infinite: bool) -> int:
    row = _solve_cell(cfg, infinite)
    payload = dict(row)
    payload["provenance"] = _provenance(cfg)
    with open(out_dir / "result.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _append_table(out_dir / "table.csv", row)
    print(f"gamma={row['gamma']:g} n={row['n']} m_bar={row['m_bar']:g}: "
          f"alpha_bar={100 * row['alpha_bar']:.4f}% "
          f"eta_bar={100 * row['eta_bar']:.4f}%")
    return EXIT_OK


def _sweep_worker(args) -> dict:
    cfg, n_token, m_bar = args
    infinite = n_token == INF_TOKEN
    cell = cfg if infinite else with_cell(cfg, n=int(n_token))
    cell = with_cell(cell, m_bar=m_bar)
    try:
        row = _solve_cell(cell, infinite)
        row["status"] = "ok"
    except Exception as exc:  # worker reports, parent decides the exit code
        row = {"n": n_token, "m_bar": m_bar, "gamma": cfg.gamma,
               "alpha_bar": math.nan, "eta_bar": math.nan, "eta": math.nan,
               "r": cfg.r, "n_t": "", "n_y": "", "extrapolated": False,
               "status": f"failed:{type(exc).__name__}"}
    return row


def cmd_sweep(cfg: RunConfig, out_dir: Path, jobs: int) -> int:
    tokens = [str(n) for n in cfg.sweep_n]
    if cfg.sweep_infinite:
        tokens.append(INF_TOKEN)
    tasks = [(cfg, tok, m_bar) for tok in tokens for m_bar in cfg.sweep_mbar]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_worker, tasks))
    else:
        rows = [_sweep_worker(t) for t in tasks]

    def sort_key(row):
        n = math.inf if row["n"] == INF_TOKEN else int(row["n"])
        return (n, row["m_bar"], row["gamma"])

    rows.sort(key=sort_key)
    header = ("n", "m_bar", "gamma", "alpha_bar", "eta_bar", "status",
              "alpha_bar_pct")
    with open(out_dir / "sweep.csv", "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join([
                str(row["n"]), _f17(row["m_bar"]), _f17(row["gamma"]),
                _f17(row["alpha_bar"]), _f17(row["eta_bar"]), row["status"],
                _f4(100.0 * row["alpha_bar"]),
            ]) + "\n")
    failed = [r for r in rows if r["status"] != "ok"]
    print(f"sweep: {len(rows)} cells, {len(failed)} failed")
    return EXIT_SWEEP_CELL if failed else EXIT_OK


def cmd_simulate(cfg: RunConfig, out_dir: Path) -> int:
    if cfg.seed is None:
        raise SeedError("simulate requires --seed (or a config seed)")
    eta = _eta_for(cfg)
    basis, life, pool = cfg.basis(), cfg.life(), cfg.pool()
    spec = cfg.lattice_spec()
    if cfg.gamma == 1:
        log_y = compute_log_y_moment(pool, basis, spec)
        res = equivalent_rates(pool, basis, life, eta, None, log_y_moment=log_y)
        s_grid = default_s_grid()
        sp = survival(pool.member_law, life.x1, s_grid)
        schedule = optimal_payout(BetaCurve(s_grid, sp), 1.0, basis,
                                  survival_curve=sp)
    else:
        b_vec = compute_b_vector(pool, basis, cfg.gamma, spec)
        res = equivalent_rates(pool, basis, life, eta, b_vec)
        beta = build_beta_curve(b_vec.values, pool, cfg.gamma)
        schedule = optimal_payout(beta, cfg.gamma, basis)
    run = SimulationRun(seed=cfg.seed, n_paths=cfg.n_paths, pool=pool,
                        basis=basis, life=life, schedule=schedule,
                        alpha_bar=res.alpha_bar, dt=cfg.sim_dt)
    result = simulate_paths(run)

    with open(out_dir / "paths.csv", "w") as fh:
        fh.write("age,path_id,income\n")
        for p in range(cfg.n_paths):
            for a, inc in zip(result.ages, result.income[p]):
                fh.write(f"{a},{p},{_f17(inc)}\n")

    ages, fan, n_alive, _low = percentile_fan(result)
    with open(out_dir / "fan.csv", "w") as fh:
        fh.write("age,q20,q40,q60,q80,n_alive\n")
        for i, a in enumerate(ages):
            fh.write(",".join([str(a)] + [_f17(q) for q in fan[i]]
                              + [str(int(n_alive[i]))]) + "\n")
    print(f"simulated {cfg.n_paths} paths at alpha_bar="
          f"{100 * res.alpha_bar:.4f}% (seed {cfg.seed})")
    return EXIT_OK


def cmd_generosity(cfg: RunConfig, out_dir: Path,
                   mbar_values=(70.0, 80.0, 90.0)) -> int:
    report = out_dir / "oracle_report.txt"
    if not report.exists() or EXPONENT_VERDICT_KEY not in report.read_text():
        raise ConfigError(
            "generosity needs the validated closed-form verdict; run the "
            f"oracle command first (missing {report})")
    eta = _eta_for(cfg)
    basis, life = cfg.basis(), cfg.life()
    rows = []
    for m_bar in mbar_values:
        cell = with_cell(cfg, m_bar=m_bar)
        law = cell.member_law()
        g_plan = plan_generosity(cfg.alpha, eta, law, life)
        b_vec = compute_b_vector(cell.pool(), basis, cfg.gamma,
                                 cell.lattice_spec())
        g_elris = elris_generosity(cell.pool(), basis, life, cfg.gamma, b_vec)
        rows.append((m_bar, g_plan, g_elris))
    with open(out_dir / "generosity.csv", "w") as fh:
        fh.write("m_bar,gamma,n,g_plan,g_elris,g_plan_disp,g_elris_disp\n")
        for m_bar, g_plan, g_elris in rows:
            fh.write(",".join([
                _f17(m_bar), _f17(cfg.gamma), str(cfg.n), _f17(g_plan),
                _f17(g_elris), _f4(g_plan), _f4(g_elris)]) + "\n")
    for m_bar, g_plan, g_elris in rows:
        print(f"m_bar={m_bar:g}: G_plan={g_plan:.2f} G_pool={g_elris:.2f}")
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, out_dir: Path) -> int:
    ok = write_validation_report(out_dir, cfg.base_law(), cfg.life())
    print(f"oracle validation {'passed' if ok else 'FAILED'}; "
          f"report in {out_dir / 'oracle_report.txt'}")
    return EXIT_OK if ok else EXIT_PANIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elris",
        description="Pooled-annuity contribution-rate solver and simulator.")
    parser.add_argument("command",
                        choices=["calibrate", "solve", "sweep", "simulate",
                                 "generosity", "oracle"])
    parser.add_argument("--config", help="path to a [section] key=value file")
    parser.add_argument("--jobs", type=int, default=None,
                        help="worker processes for sweep cells")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--resolution", metavar="NT,NY",
                        help="lattice resolution as n_t,n_y")
    parser.add_argument("--richardson", type=int, default=None, metavar="K",
                        help="extrapolation levels (1-3)")
    parser.add_argument("--n", default=None,
                        help=f"pool size (integer or '{INF_TOKEN}')")
    parser.add_argument("--mbar", type=float, default=None,
                        help="member modal age m_bar")
    parser.add_argument("--gamma", type=float, default=None)
    parser.add_argument("--rate", type=float, default=None,
                        help="real interest rate r (sets rho = r too)")
    parser.add_argument("--n-paths", type=int, default=None)
    parser.add_argument("--out-dir", default=None)
    return parser


def _config_from_args(args) -> tuple[RunConfig, bool]:
    overrides: dict = {}
    infinite = False
    if args.n is not None:
        if str(args.n).lower() == INF_TOKEN:
            infinite = True
        else:
            overrides["n"] = int(args.n)
    if args.resolution is not None:
        try:
            nt, ny = (int(v) for v in args.resolution.split(","))
        except ValueError as exc:
            raise ConfigError(
                f"--resolution expects NT,NY, got {args.resolution!r}") from exc
        overrides["n_t"], overrides["n_y"] = nt, ny
    if args.rate is not None:
        overrides["r"] = overrides["rho"] = args.rate
    for key, val in (("jobs", args.jobs), ("seed", args.seed),
                     ("richardson", args.richardson), ("m_bar", args.mbar),
                     ("gamma", args.gamma), ("n_paths", args.n_paths),
                     ("out_dir", args.out_dir)):
        if val is not None:
            overrides[key] = val
    return load_config(args.config, **overrides), infinite


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, infinite = _config_from_args(args)
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "calibrate":
            return cmd_calibrate(cfg, out_dir)
        if args.command == "solve":
            return cmd_solve(cfg, out_dir, infinite)
        if args.command == "sweep":
            return cmd_sweep(cfg, out_dir, cfg.jobs)
        if args.command == "simulate":
            return cmd_simulate(cfg, out_dir)
        if args.command == "generosity":
            if args.mbar is not None:
                return cmd_generosity(cfg, out_dir, (args.mbar,))
            return cmd_generosity(cfg, out_dir)
        if args.command == "oracle":
            return cmd_oracle(cfg, out_dir)
        raise AssertionError(f"unhandled command {args.command}")
    except (ConfigError, DegenerateConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MassLeakError, StepSizeError) as exc:
        print(f"lattice error: {exc}", file=sys.stderr)
        return EXIT_MASS_LEAK
    except SeedError as exc:
        print(f"seed error: {exc}", file=sys.stderr)
        return EXIT_SEED
    except Exception as exc:  # pragma: no cover - panic path
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PANIC


if __name__ == "__main__":
    raise SystemExit(main())
