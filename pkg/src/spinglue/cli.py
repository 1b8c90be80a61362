"""Config-driven experiment runner.

Subcommands: glue | certify | truncation | lr, each reading one TOML
config (--config) and writing a results CSV plus a metadata JSON into the
output directory (--out). CSV bodies are deterministic functions of the
config and seed; wall-clock data live only in the metadata file. Exit
codes: 0 success, 2 config problems, 3 runtime failure (partial results
are written and flagged).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .adiabatic import (GapCollapseError, error_certificate, linear_path,
                        measure_transport_error)
from .chain import DEFAULT_SITE_CAP, SiteCapError, transverse_field_ising
from .config import ConfigError, ExperimentConfig, model_builder, parse_config
from .exact import DegenerateGroundStateError
from .filters import cached_filter
from .gluing import (EngineParams, GluingError, iterate_gluing, split,
                     total_budget, truncation_distance)
from .lieb_robinson import fill_bounds, fit_lr_constants, lr_commutator_scan

CAP_ENV_VAR = "SPINGLUE_SITE_CAP"
CSV_SCHEMA_VERSION = 1

CSV_COLUMNS = {
    "glue": ["experiment", "gamma", "alpha", "steps", "fidelity",
             "measured_error", "budget_total", "gap", "x_used", "config_hash"],
    "certify": ["experiment", "gamma", "eta_star", "f_star", "error_bound",
                "measured_error", "gap", "config_hash"],
    "truncation": ["experiment", "gamma", "s", "alpha", "distance", "config_hash"],
    "lr": ["experiment", "t", "distance", "commutator_norm", "bound_value",
           "config_hash"],
}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.12g}"
    return str(value)


def _write_outputs(out_dir: Path, command: str, cfg: ExperimentConfig, rows,
                   runtime_ms: float, partial: bool, cap: int, jobs: int,
                   extra_files: dict | None = None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    columns = CSV_COLUMNS[command]
    body = io.StringIO()
    writer = csv.writer(body, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(col)) for col in columns])
    (out_dir / "results.csv").write_bytes(body.getvalue().encode("utf-8"))
    meta = {
        "command": command,
        "config_hash": cfg.config_hash,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "package_version": __version__,
        "seed": cfg.seed,
        "cap": cap,
        "jobs": jobs,
        "partial": partial,
        "started_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "runtime_ms": runtime_ms,
    }
    (out_dir / "metadata.json").write_text(json.dumps(meta, indent=2) + "\n",
                                           encoding="utf-8")
    for name, payload in (extra_files or {}).items():
        (out_dir / name).write_text(payload, encoding="utf-8")


def _run_cells(cells, worker, jobs: int):
    """Evaluate sweep cells, merging results strictly by cell index.

    Returns (rows, first_error). On an error, rows hold every cell that
    finished before the failing index.
    """
    if jobs <= 1:
        rows = []
        for cell in cells:
            try:
                rows.append(worker(cell))
            except (GluingError, GapCollapseError, DegenerateGroundStateError,
                    ValueError, RuntimeError) as exc:
                return rows, exc
        return rows, None
    rows = []
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(worker, cell) for cell in cells]
        for fut in futures:
            try:
                rows.append(fut.result())
            except (GluingError, GapCollapseError, DegenerateGroundStateError,
                    ValueError, RuntimeError) as exc:
                for other in futures:
                    other.cancel()
                return rows, exc
    return rows, None


def cmd_glue(cfg: ExperimentConfig, out_dir: Path, jobs: int, cap: int) -> int:
    builder = model_builder(cfg, cap)
    constants = cfg.budget.constants
    cells = [(g, a) for g in cfg.engine.gamma_grid for a in cfg.engine.alpha_grid]

    def worker(cell):
        gamma, alpha = cell
        engine = EngineParams(gamma=gamma, filter_kind=cfg.engine.filter,
                              alpha=None if alpha == 0 else alpha,
                              steps=cfg.engine.steps, order=cfg.engine.order)
        circuit = iterate_gluing(builder, cfg.m, cfg.n, engine,
                                 lr_constants=constants, cap=cap)
        fid = circuit.final_fidelity
        budget = (total_budget(circuit, gamma, constants).total
                  if constants is not None else math.nan)
        return {
            "experiment": "glue", "gamma": gamma, "alpha": alpha,
            "steps": "auto" if cfg.engine.steps == "auto" else cfg.engine.steps,
            "fidelity": fid,
            "measured_error": math.sqrt(max(0.0, 2.0 - 2.0 * fid)),
            "budget_total": budget,
            "gap": min(r.delta_e for r in circuit.level_reports),
            "x_used": min(r.x_used for r in circuit.level_reports),
            "config_hash": cfg.config_hash,
        }

    start = time.perf_counter()
    rows, err = _run_cells(cells, worker, jobs)
    runtime = 1000.0 * (time.perf_counter() - start)
    _write_outputs(out_dir, "glue", cfg, rows, runtime, err is not None, cap, jobs)
    if err is not None:
        print(f"glue stage failure: {err}", file=sys.stderr)
        return 3
    return 0


def cmd_certify(cfg: ExperimentConfig, out_dir: Path, jobs: int, cap: int) -> int:
    model = cfg.model
    if model.kind != "tfim":
        print("certify currently drives the tfim field ramp only", file=sys.stderr)
        return 2
    h0 = transverse_field_ising(cfg.n, coupling=model.coupling,
                                field=cfg.certify.field_start,
                                boundary=model.boundary,
                                shift_ground_to_zero=False, cap=cap)
    h1 = transverse_field_ising(cfg.n, coupling=model.coupling,
                                field=cfg.certify.field_end,
                                boundary=model.boundary,
                                shift_ground_to_zero=False, cap=cap)
    path = linear_path(h0, h1)
    grid = np.linspace(0.0, 1.0, cfg.certify.grid_points)

    def worker(gamma):
        filt = cached_filter(cfg.engine.filter, gamma)
        cert = error_certificate(path, filt, grid)
        measured = measure_transport_error(path, filt, steps=cfg.certify.steps,
                                           order="richardson",
                                           ref_points=cfg.certify.ref_points)
        return {
            "experiment": "certify", "gamma": gamma,
            "eta_star": cert.eta_star, "f_star": cert.f_star,
            "error_bound": cert.bound, "measured_error": measured,
            "gap": cert.delta_gap, "config_hash": cfg.config_hash,
        }

    start = time.perf_counter()
    rows, err = _run_cells(list(cfg.engine.gamma_grid), worker, jobs)
    runtime = 1000.0 * (time.perf_counter() - start)
    _write_outputs(out_dir, "certify", cfg, rows, runtime, err is not None, cap, jobs)
    if err is not None:
        print(f"certify failure: {err}", file=sys.stderr)
        return 3
    return 0


def cmd_truncation(cfg: ExperimentConfig, out_dir: Path, jobs: int, cap: int) -> int:
    builder = model_builder(cfg, cap)
    alpha_full = max(cfg.m, cfg.n - 1 - cfg.m)
    s_grid = np.linspace(0.0, 1.0, cfg.truncation.s_points)

    def worker(gamma):
        sp = split(builder(cfg.n), cfg.m)
        alphas = sorted(alpha_full if a == 0 else a for a in cfg.engine.alpha_grid)
        table = truncation_distance(sp, s_grid, gamma, alphas,
                                    filter_kind=cfg.engine.filter)
        return [{
            "experiment": "truncation", "gamma": gamma, "s": s, "alpha": alpha,
            "distance": dist, "config_hash": cfg.config_hash,
        } for s, alpha, dist in table.rows()]

    start = time.perf_counter()
    nested, err = _run_cells(list(cfg.engine.gamma_grid), worker, jobs)
    rows = [row for group in nested for row in group]
    runtime = 1000.0 * (time.perf_counter() - start)
    _write_outputs(out_dir, "truncation", cfg, rows, runtime, err is not None, cap, jobs)
    if err is not None:
        print(f"truncation failure: {err}", file=sys.stderr)
        return 3
    return 0


def cmd_lr(cfg: ExperimentConfig, out_dir: Path, jobs: int, cap: int) -> int:
    builder = model_builder(cfg, cap)
    h = builder(cfg.n)
    start = time.perf_counter()
    err = None
    rows = []
    constants_payload = None
    try:
        samples = lr_commutator_scan(h, cfg.lr.a_site,
                                     (0, cfg.lr.b_width - 1),
                                     cfg.lr.t_grid, cfg.lr.d_grid)
        fit = fit_lr_constants(samples)
        samples = fill_bounds(samples, fit, inflation=0.1)
        rows = [{
            "experiment": "lr", "t": s.t, "distance": s.distance,
            "commutator_norm": s.commutator_norm, "bound_value": s.bound_value,
            "config_hash": cfg.config_hash,
        } for s in samples]
        constants_payload = json.dumps({
            "v": float(f"{fit.v:.12g}"),
            "kappa_lr": float(f"{fit.kappa_lr:.12g}"),
            "residual": float(f"{fit.residual:.12g}"),
            "log_amplitude": float(f"{fit.log_amplitude:.12g}"),
            "config_hash": cfg.config_hash,
        }, indent=2) + "\n"
    except (ValueError, RuntimeError) as exc:
        err = exc
    runtime = 1000.0 * (time.perf_counter() - start)
    extra = {"lr_constants.json": constants_payload} if constants_payload else None
    _write_outputs(out_dir, "lr", cfg, rows, runtime, err is not None, cap, jobs,
                   extra_files=extra)
    if err is not None:
        print(f"lr failure: {err}", file=sys.stderr)
        return 3
    return 0


COMMANDS = {
    "glue": cmd_glue,
    "certify": cmd_certify,
    "truncation": cmd_truncation,
    "lr": cmd_lr,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinglue",
        description="gluing-construction experiment runner (CSV/JSON outputs)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="TOML experiment config")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
        p.add_argument("--cap", type=int, default=None,
                       help=f"dense site cap (default {DEFAULT_SITE_CAP})")
    return parser


def resolve_cap(flag_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get(CAP_ENV_VAR)
    if env is not None:
        print(f"warning: site cap overridden to {env} via {CAP_ENV_VAR}",
              file=sys.stderr)
        return int(env)
    return DEFAULT_SITE_CAP


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    cap = resolve_cap(args.cap)
    if cfg.n > cap:
        print(f"config error: geometry.n={cfg.n} exceeds the site cap {cap}",
              file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](cfg, Path(args.out), max(1, args.jobs), cap)
    except SiteCapError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
