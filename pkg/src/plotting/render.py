"""Render static charts from the solver CLI's CSV outputs.

Three chart kinds, one per CSV schema:

- paths: spaghetti plot of per-path wage-normalized retirement income
  (columns age, path_id, income)
- fan: income percentile fan with a horizontal reference line at the
  guaranteed plan's replacement rate (columns age, q20, q40, q60, q80,
  n_alive)
- sweep: contribution rate against the member modal age, one curve per
  pool size, with reference lines at the employee contribution fraction
  and the base-population modal age (columns n, m_bar, gamma, alpha_bar,
  eta_bar, status, alpha_bar_pct)

Reference values are read from the eta.json produced by the calibrate
command, never hard-coded. Invocation:

    elris-render --kind fan --in fan.csv --eta eta.json --out fan.png
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

EXPECTED_COLUMNS = {
    "paths": ["age", "path_id", "income"],
    "fan": ["age", "q20", "q40", "q60", "q80", "n_alive"],
    "sweep": ["n", "m_bar", "gamma", "alpha_bar", "eta_bar", "status",
              "alpha_bar_pct"],
}

MAX_SPAGHETTI_PATHS = 200


class SchemaError(Exception):
    pass


def read_rows(path: str | Path, kind: str) -> list[dict]:
    """Read and schema-check one CSV; raises SchemaError with a column
    diff on mismatch or when there are no data rows."""
    expected = EXPECTED_COLUMNS[kind]
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if list(header) != expected:
            missing = [c for c in expected if c not in header]
            extra = [c for c in header if c not in expected]
            raise SchemaError(
                f"{path}: schema mismatch for kind '{kind}': "
                f"expected {expected}, got {list(header)} "
                f"(missing {missing}, unexpected {extra})")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def load_references(eta_path: str | Path | None) -> dict:
    if eta_path is None:
        return {}
    with open(eta_path) as fh:
        return json.load(fh)


def render_paths(rows: list[dict], refs: dict):
    by_path: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        by_path.setdefault(row["path_id"], []).append(
            (float(row["age"]), float(row["income"])))
    fig, ax = plt.subplots(figsize=(8, 5))
    for i, (pid, pts) in enumerate(sorted(by_path.items(),
                                          key=lambda kv: int(kv[0]))):
        if i >= MAX_SPAGHETTI_PATHS:
            break
        pts.sort()
        ax.plot([a for a, _ in pts], [v for _, v in pts],
                lw=0.5, alpha=0.4, color="tab:blue")
    if "eta" in refs:
        ax.axhline(refs["eta"], color="black", lw=1.2,
                   label=f"guaranteed replacement rate {refs['eta']:.4f}")
        ax.legend()
    ax.set_xlabel("age")
    ax.set_ylabel("wage-normalized income")
    return fig


def render_fan(rows: list[dict], refs: dict):
    ages = [float(r["age"]) for r in rows]
    fig, ax = plt.subplots(figsize=(8, 5))
    for col in ("q20", "q40", "q60", "q80"):
        ax.plot(ages, [float(r[col]) for r in rows],
                label=f"{col[1:]}th percentile")
    if "eta" in refs:
        ax.axhline(refs["eta"], color="black", lw=1.2,
                   label=f"guaranteed replacement rate {refs['eta']:.4f}")
    ax.set_xlabel("age")
    ax.set_ylabel("wage-normalized income")
    ax.legend()
    return fig


def render_sweep(rows: list[dict], refs: dict):
    by_n: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        if row["status"] != "ok":
            continue
        by_n.setdefault(row["n"], []).append(
            (float(row["m_bar"]), float(row["alpha_bar"])))

    def n_key(tok: str) -> float:
        return float("inf") if tok == "inf" else float(tok)

    fig, ax = plt.subplots(figsize=(8, 5))
    for tok in sorted(by_n, key=n_key):
        pts = sorted(by_n[tok])
        ax.plot([m for m, _ in pts], [a for _, a in pts], label=f"n = {tok}")
    if "alpha" in refs:
        ax.axhline(refs["alpha"], color="black", lw=1.0, ls="--",
                   label=f"employee fraction {refs['alpha']:.0%}")
    if "m" in refs:
        ax.axvline(refs["m"], color="gray", lw=1.0, ls=":",
                   label=f"base modal age {refs['m']:g}")
    ax.set_xlabel("member modal age")
    ax.set_ylabel("contribution rate")
    ax.legend()
    return fig


RENDERERS = {"paths": render_paths, "fan": render_fan, "sweep": render_sweep}


def render(kind: str, in_path: str | Path, out_path: str | Path,
           eta_path: str | Path | None = None) -> None:
    rows = read_rows(in_path, kind)
    refs = load_references(eta_path)
    fig = RENDERERS[kind](rows, refs)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="elris-render",
        description="Render a chart from a solver CSV output.")
    parser.add_argument("--kind", required=True, choices=sorted(RENDERERS))
    parser.add_argument("--in", dest="in_path", required=True,
                        help="input CSV path")
    parser.add_argument("--eta", dest="eta_path", default=None,
                        help="eta.json with reference values")
    parser.add_argument("--out", dest="out_path", required=True,
                        help="output image path")
    args = parser.parse_args(argv)
    try:
        render(args.kind, args.in_path, args.out_path, args.eta_path)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
