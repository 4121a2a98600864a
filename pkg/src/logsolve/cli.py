"""Experiment orchestration: config ingestion, runs, report serialization.

Usage:
    logsolve solve|multistart|gausson|check-logsob|p-solve --config cfg.json --out dir

Reports are JSON (deterministic: sorted keys, repr floats), field dumps
are CSV with 17 significant digits so fields can be reconstructed
bit-faithfully.  Two runs with the same config and seed produce
byte-identical report files; wall time therefore goes to a separate
meta.json that is excluded from reproducibility comparisons.

Exit codes: 0 converged / checks passed, 1 config error, 2 numerical
failure or non-convergence (partial report still written).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .coefficients import Coefficients, make_coefficients
from .energy import SplitParams, energy, logsob_slack
from .errors import ConfigError, LogSolveError, SchemaMismatchError
from .lattice import Field, Grid
from .plap import PLapParams, plap_descend, plap_energy, plap_nehari_residual
from .solver import SolverConfig, _bump_start, descend, gausson, multistart

MODES = ("solve", "multistart", "gausson", "check-logsob", "p-solve")

_TOP_KEYS = {"grid", "coefficients", "delta", "solver", "mode", "p", "gausson", "logsob"}
_GRID_KEYS = {"dim", "cells", "box", "boundary"}
_SOLVER_KEYS = {
    "max_iters",
    "tol_residual",
    "step_init",
    "armijo_c",
    "armijo_shrink",
    "seed",
    "n_starts",
    "dedup_tol",
}
_GAUSSON_KEYS = {"v0", "q0"}
_LOGSOB_KEYS = {"n_fields", "a_values"}


def _reject_unknown(d: dict, allowed: set, where: str):
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def load_config(path) -> dict:
    text = Path(path).read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top-level config must be an object")
    _reject_unknown(cfg, _TOP_KEYS, "config")
    for key in ("grid", "coefficients"):
        if key not in cfg:
            raise ConfigError(f"{path}: missing required section {key!r}")
    _reject_unknown(cfg["grid"], _GRID_KEYS, "grid")
    if set(cfg["coefficients"]) != {"V", "Q"}:
        raise ConfigError(f"{path}: coefficients must define exactly V and Q")
    _reject_unknown(cfg.get("solver", {}), _SOLVER_KEYS, "solver")
    _reject_unknown(cfg.get("gausson", {}), _GAUSSON_KEYS, "gausson")
    _reject_unknown(cfg.get("logsob", {}), _LOGSOB_KEYS, "logsob")
    return cfg


def _build(cfg: dict):
    try:
        grid = Grid(
            dim=int(cfg["grid"]["dim"]),
            cells=cfg["grid"]["cells"],
            box=cfg["grid"]["box"],
            boundary=cfg["grid"].get("boundary", "periodic"),
        )
        coeffs = make_coefficients(cfg["coefficients"], grid)
        split = SplitParams(delta=float(cfg["delta"])) if "delta" in cfg else SplitParams()
        solver_cfg = SolverConfig(**cfg.get("solver", {}))
    except (LogSolveError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
    return grid, coeffs, split, solver_cfg


def _field_csv(path: Path, u: Field):
    coords = u.grid.coordinates()
    headers = ["x", "y", "z"][: u.grid.dim] + ["u"]
    with path.open("w", newline="") as fh:
        fh.write(",".join(headers) + "\n")
        for row, val in zip(coords, u.values):
            cols = [f"{c:.17g}" for c in row] + [f"{val:.17g}"]
            fh.write(",".join(cols) + "\n")


def read_field_csv(path, grid: Grid) -> Field:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return Field(grid, np.atleast_2d(data)[:, -1])


def _solution_entry(u, report, coeffs, split, out_dir: Path, index: int):
    csv_name = f"field_{index:03d}.csv"
    _field_csv(out_dir / csv_name, u)
    return {
        "energy_breakdown": energy(u, coeffs, split).as_dict(),
        "report": report.as_dict(),
        "field_file": csv_name,
    }


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def run(config_path, out_dir, mode: str) -> int:
    """Execute one experiment mode; returns the process exit code."""
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    t0 = time.monotonic()
    try:
        cfg = load_config(config_path)
        if "mode" in cfg and cfg["mode"] != mode:
            raise ConfigError(
                f"config declares mode {cfg['mode']!r} but {mode!r} was requested"
            )
        grid, coeffs, split, solver_cfg = _build(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifact = {
        "mode": mode,
        "config": cfg,
        "library_version": __version__,
    }
    exit_code = 0

    try:
        if mode in ("solve", "multistart"):
            if mode == "solve":
                rng = np.random.default_rng([solver_cfg.seed, 0])
                u0 = _bump_start(grid, coeffs, rng)
                u, report = descend(u0, coeffs, split, solver_cfg)
                solutions = [(u, report)]
                exit_code = 0 if report.converged else 2
            else:
                solutions = multistart(coeffs, split, solver_cfg)
                exit_code = 0 if solutions else 2
            artifact["solutions"] = [
                _solution_entry(u, r, coeffs, split, out, i)
                for i, (u, r) in enumerate(solutions)
            ]
            artifact["n_solutions"] = len(solutions)

        elif mode == "gausson":
            gsec = cfg.get("gausson", {})
            v0 = float(gsec.get("v0", 0.0))
            q0 = float(gsec.get("q0", 1.0))
            u0 = gausson(v0, q0, grid)
            u, report = descend(u0, coeffs, split, solver_cfg)
            artifact["solutions"] = [_solution_entry(u, report, coeffs, split, out, 0)]
            artifact["gausson"] = {"v0": v0, "q0": q0}
            exit_code = 0 if report.converged else 2

        elif mode == "check-logsob":
            lsec = cfg.get("logsob", {})
            n_fields = int(lsec.get("n_fields", 100))
            a_values = [float(a) for a in lsec.get("a_values", (0.1, 0.5, 1.0, 2.0, 5.0))]
            rng = np.random.default_rng(solver_cfg.seed)
            min_slack = float("inf")
            for _ in range(n_fields):
                u = _bump_start(grid, coeffs, rng)
                for a in a_values:
                    min_slack = min(min_slack, logsob_slack(u, a))
            artifact["logsob"] = {
                "n_fields": n_fields,
                "a_values": a_values,
                "min_slack": min_slack,
            }
            exit_code = 0 if min_slack >= -1e-10 else 2

        elif mode == "p-solve":
            if "p" not in cfg:
                print("config error: p-solve requires the key 'p'", file=sys.stderr)
                return 1
            pp = PLapParams(p=float(cfg["p"]))
            rng = np.random.default_rng([solver_cfg.seed, 0])
            u0 = _bump_start(grid, coeffs, rng)
            u, report = plap_descend(u0, coeffs, pp, solver_cfg)
            csv_name = "field_000.csv"
            _field_csv(out / csv_name, u)
            artifact["solutions"] = [
                {
                    "p_energy": plap_energy(u, coeffs, pp),
                    "p_nehari_residual": plap_nehari_residual(u, coeffs, pp),
                    "report": report.as_dict(),
                    "field_file": csv_name,
                }
            ]
            exit_code = 0 if report.converged else 2

    except LogSolveError as exc:
        artifact["failure"] = f"{type(exc).__name__}: {exc}"
        exit_code = 2

    _write_json(out / "report.json", artifact)
    _write_json(out / "meta.json", {"wall_time_seconds": time.monotonic() - t0})
    return exit_code


def _diff_walk(a, b, path, tol, diffs):
    if type(a) is not type(b):
        raise SchemaMismatchError(f"type mismatch at {path}: {type(a)} vs {type(b)}")
    if isinstance(a, dict):
        if set(a) != set(b):
            raise SchemaMismatchError(
                f"key mismatch at {path}: {sorted(set(a) ^ set(b))}"
            )
        for k in sorted(a):
            _diff_walk(a[k], b[k], f"{path}/{k}", tol, diffs)
    elif isinstance(a, list):
        if len(a) != len(b):
            raise SchemaMismatchError(f"length mismatch at {path}")
        for i, (x, y) in enumerate(zip(a, b)):
            _diff_walk(x, y, f"{path}[{i}]", tol, diffs)
    elif isinstance(a, float):
        scale = max(abs(a), abs(b), 1.0)
        if abs(a - b) > tol * scale:
            diffs.append({"path": path, "a": a, "b": b})
    else:
        if a != b:
            diffs.append({"path": path, "a": a, "b": b})


def diff_reports(a_path, b_path, tol: float = 0.0):
    """Structured numeric diff of two report artifacts."""
    a = json.loads(Path(a_path).read_text())
    b = json.loads(Path(b_path).read_text())
    diffs: list = []
    _diff_walk(a, b, "", tol, diffs)
    return diffs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="logsolve",
        description="Ground states of the logarithmic Schrodinger equation",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        sp = sub.add_parser(mode)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", required=True)
    diff_p = sub.add_parser("diff")
    diff_p.add_argument("a")
    diff_p.add_argument("b")
    diff_p.add_argument("--tol", type=float, default=0.0)
    args = parser.parse_args(argv)

    if args.mode == "diff":
        try:
            diffs = diff_reports(args.a, args.b, args.tol)
        except SchemaMismatchError as exc:
            print(f"schema mismatch: {exc}", file=sys.stderr)
            return 1
        print(json.dumps(diffs, indent=2, sort_keys=True))
        return 0 if not diffs else 2

    return run(args.config, args.out, args.mode)


if __name__ == "__main__":
    sys.exit(main())
