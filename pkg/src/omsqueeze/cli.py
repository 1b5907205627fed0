"""Command-line entry point: one experiment per invocation, CSV plus a JSON manifest."""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import optimal_angle, squeezing_table, sweep_generation, sweep_persistence
from .config import KINDS, ConfigError, ExperimentConfig, load_config
from .drive import DriveSchedule
from .markov import MarkovModel, full_model, full_propagate, propagate_cm
from .model import default_scan, effective_model, eigen_splitting
from .nonmarkov import nmhl_run
from .stepper import SolverError, uniform_grid

THREADS_ENV = "OMSQUEEZE_THREADS"
TRAJECTORY_COLUMNS = ("t", "dX", "dY", "dX_opt", "dY_opt", "S_dB", "S_opt_dB")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    return f"{float(x):.9g}"


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(obj) else float(fmt(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _trajectory_rows(cfg: ExperimentConfig, traj, angle, strict=True):
    tab = squeezing_table(traj, angle, strict)
    stride = int(round(cfg.sample_dt / cfg.dt))
    idx = list(range(0, len(tab.t), stride))
    if idx[-1] != len(tab.t) - 1:
        idx.append(len(tab.t) - 1)
    cols = (tab.t, tab.dX, tab.dY, tab.dX_opt, tab.dY_opt, tab.S, tab.S_opt)
    return [[c[i] for c in cols] for i in idx], tab


def run_effective(cfg: ExperimentConfig):
    em = effective_model(cfg.params)
    rows = [("g_eff", em.g_eff), ("delta", em.delta), ("theta", em.theta), ("valid", em.valid)]
    for c in em.validity.criteria:
        rows.append((f"{c.name}_passed", c.passed))
        rows.append((f"{c.name}_margin", c.margin))
    return ("quantity", "value"), rows, {"g_eff": em.g_eff, "delta": em.delta, "valid": em.valid}


def run_validate(cfg: ExperimentConfig):
    grid = default_scan(cfg.params, cfg.scan_half_width, cfg.scan_points)
    res = eigen_splitting(cfg.params, grid)
    em = effective_model(cfg.params)
    summary = {
        "g_eff_num": res.g_eff_num,
        "delta_num": res.delta_num,
        "g_eff": em.g_eff,
        "delta": em.delta,
    }
    print(" ".join(f"{k}={fmt(v)}" for k, v in summary.items()))
    rows = [(d, b[0], b[1]) for d, b in zip(res.delta_a, res.branches)]
    return ("delta_a", "branch_1", "branch_2"), rows, summary


def run_trajectory(cfg: ExperimentConfig):
    t = uniform_grid(cfg.t_max, cfg.dt)
    g_eff = effective_model(cfg.params).g_eff
    schedule = DriveSchedule(g_eff, cfg.tau_off)
    structured = cfg.kind == "nmhl" or (cfg.kind == "persist" and cfg.env == "structured")
    if structured:
        traj = nmhl_run(
            cfg.params, cfg.bath_a, cfg.bath_c, t, schedule,
            cfg.nmhl_method, cfg.greens_method, cfg.refine_tol,
        )
        angle = traj.mix_angle
    elif cfg.full_model:
        if cfg.tau_off is not None:
            raise ConfigError("the three-mode model has no switch-off protocol", "tau_off")
        drift, diff = full_model(
            cfg.params, None, cfg.kappa_a, cfg.kappa_b, cfg.kappa_c,
            cfg.nbar_a, cfg.nbar_b, cfg.nbar_c,
        )
        traj = full_propagate(drift, diff, t).effective()
        angle = optimal_angle(g_eff, cfg.kappa_a, cfg.kappa_c)
    else:
        model = MarkovModel(g_eff, cfg.kappa_a, cfg.kappa_c, cfg.nbar_a, cfg.nbar_c)
        traj = propagate_cm(model, t, schedule=schedule)
        angle = optimal_angle(g_eff, cfg.kappa_a, cfg.kappa_c)
    # the three-mode CM only approximately has the two-mode squeezing structure
    rows, tab = _trajectory_rows(cfg, traj, angle, strict=not cfg.full_model or structured)
    summary = {
        "g_eff": g_eff,
        "mix_angle": angle,
        "final_S_dB": float(tab.S[-1]),
        "final_S_opt_dB": float(tab.S_opt[-1]),
        "min_symplectic": float(traj.min_symplectic().min()),
    }
    return TRAJECTORY_COLUMNS, rows, summary


def run_sweep_gen(cfg: ExperimentConfig):
    s = cfg.sweep
    out = sweep_generation(cfg.scenario, s.axes, s.envs, s.tau, cfg.dt, cfg.threads, cfg.nmhl_method)
    names = list(s.axes)
    header = ("env", *names, "tau", "S_dB", "S_opt_dB", "error")
    rows = [[r["env"], *(r[n] for n in names), r["tau"], r["S_dB"], r["S_opt_dB"], r["error"]] for r in out]
    return header, rows, {"points": len(out), "failures": sum(r["error"] is not None for r in out)}


def run_sweep_persist(cfg: ExperimentConfig):
    s = cfg.sweep
    base = cfg.scenario
    configs = {
        label: (base.with_values({k: v for k, v in spec.items() if k != "env"}), spec["env"])
        for label, spec in s.configs.items()
    }
    out = sweep_persistence(configs, s.tau_offs, s.T, cfg.dt, cfg.threads, cfg.nmhl_method)
    header = ("config", "env", "tau_off", "T", "S_dB", "S_opt_dB", "dX", "dY", "error")
    rows = [[r[h] for h in header] for r in out]
    return header, rows, {"points": len(out), "failures": sum(r["error"] is not None for r in out)}


RUNNERS = {
    "effective": run_effective,
    "validate": run_validate,
    "markov": run_trajectory,
    "nmhl": run_trajectory,
    "persist": run_trajectory,
    "sweep-gen": run_sweep_gen,
    "sweep-persist": run_sweep_persist,
}


def run(cfg: ExperimentConfig, out: Path) -> dict:
    """Execute one experiment and write ``out`` plus ``out.manifest.json``."""
    header, rows, summary = RUNNERS[cfg.kind](cfg)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_csv(out, header, rows)
    manifest = {"parameters": cfg.manifest(), "summary": summary, "output": out.name}
    manifest_path = out.with_name(out.name + ".manifest.json")
    manifest_path.write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    return summary


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omsqueeze",
        description="Optical-microwave two-mode squeezing in Markovian and structured reservoirs.",
    )
    parser.add_argument("kind", choices=KINDS, help="experiment to run")
    parser.add_argument("--config", type=Path, help="YAML parameter file (defaults if omitted)")
    parser.add_argument("--out", type=Path, help="output CSV path (default: <kind>.csv)")
    parser.add_argument("--dt", type=float, help="time step, overrides the config")
    parser.add_argument("--tmax", type=float, help="final time, overrides the config")
    parser.add_argument(
        "--threads", type=int, help=f"worker threads for sweeps (default: ${THREADS_ENV} or 1)"
    )
    return parser


def _threads(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get(THREADS_ENV)
    if env is None:
        return 1
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"not an integer: {env!r}", THREADS_ENV) from None


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(
            args.config, args.kind, {"dt": args.dt, "t_max": args.tmax}, _threads(args.threads)
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = args.out or Path(f"{args.kind}.csv")
    try:
        run(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
