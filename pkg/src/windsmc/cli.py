"""Command-line front end: ``windsmc <command> --scenario <path> [options]``."""

from __future__ import annotations

import argparse
import csv
import itertools
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import parse_overrides, parse_scenario
from .errors import ConfigError, DomainError, WindSmcError
from .plant import TurbineParams, power_coefficient
from .sim import compare, run

DEFAULT_SCENARIO = "table1"
METRIC_ROWS = ("mse_speed", "mse_lambda", "torque_std", "energy_efficiency")


def _out_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_metrics(path, metrics):
    keys = METRIC_ROWS + ("min_stability_margin", "settle_time")
    values = metrics.as_dict()
    with Path(path).open("w", encoding="utf-8") as fh:
        for key in keys:
            fh.write(f"{key} = {values[key]:.9g}\n")


def read_metrics(path):
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            key, value = line.split("=", 1)
            out[key.strip()] = float(value)
    return out


def cmd_run(args):
    scenario = parse_scenario(args.scenario[0], args.set, args.seed)
    record, metrics = run(scenario)
    out = _out_dir(args.out)
    record.to_csv(out / "record.csv")
    write_metrics(out / "metrics.txt", metrics)
    for key, value in metrics.as_dict().items():
        print(f"{key} = {value:.6g}")
    return 0


def format_comparison(comp, label_a, label_b):
    width = max(len(label_a), len(label_b), 12)
    lines = [f"{'metric':<20}{label_a:>{width + 2}}{label_b:>{width + 2}}"]
    a, b = comp.a.as_dict(), comp.b.as_dict()
    for key in METRIC_ROWS:
        lines.append(f"{key:<20}{a[key]:>{width + 2}.6g}{b[key]:>{width + 2}.6g}")
    lines.append(f"speed-MSE improvement: {100 * comp.speed_mse_improvement:.1f}%")
    lines.append(f"lambda-MSE improvement: {100 * comp.lambda_mse_improvement:.1f}%")
    return "\n".join(lines)


def cmd_compare(args):
    if len(args.scenario) != 2:
        raise ConfigError("compare needs exactly two --scenario arguments")
    sa = parse_scenario(args.scenario[0], args.set, args.seed)
    sb = parse_scenario(args.scenario[1], args.set, args.seed)
    comp, (ra, rb) = compare(sa, sb)
    label_a, label_b = sa.controller, sb.controller
    if label_a == label_b:
        label_a, label_b = f"{label_a}[a]", f"{label_b}[b]"
    text = format_comparison(comp, label_a, label_b)
    print(text)
    if args.out:
        out = _out_dir(args.out)
        (out / "compare.txt").write_text(text + "\n", encoding="utf-8")
        ra.to_csv(out / "record_a.csv")
        rb.to_csv(out / "record_b.csv")
    return 0


def _parse_grid(items):
    grid = {}
    for key, text in parse_overrides(items).items():
        grid[key] = [v.strip() for v in text.split(",") if v.strip()]
    return grid


def _sweep_job(job):
    path, overrides, seed = job
    try:
        _, metrics = run(parse_scenario(path, overrides, seed))
        return "ok", metrics.as_dict()
    except WindSmcError as exc:
        return f"error: {exc}", {}


def cmd_sweep(args):
    grid = _parse_grid(args.grid)
    base = parse_overrides(args.set)
    keys = list(grid)
    jobs, rows = [], []
    for path in args.scenario:
        for combo in itertools.product(*(grid[k] for k in keys)):
            overrides = {**base, **dict(zip(keys, combo))}
            parse_scenario(path, overrides, args.seed)  # fail fast on bad values
            jobs.append((path, overrides, args.seed))
            rows.append((path, combo))
    workers = args.jobs or os.cpu_count() or 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_job, jobs))
    else:
        results = [_sweep_job(job) for job in jobs]

    out = _out_dir(args.out)
    metric_keys = METRIC_ROWS + ("settle_time", "min_stability_margin")
    best = None
    with (out / "sweep.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario", *keys, "status", *metric_keys])
        for (path, combo), (status, metrics) in zip(rows, results):
            writer.writerow([path, *combo, status, *(f"{metrics[k]:.9g}" if metrics else "" for k in metric_keys)])
            if metrics and (best is None or metrics[args.rank_by] < best[2][args.rank_by]):
                best = (path, combo, metrics)
    failed = sum(1 for status, _ in results if status != "ok")
    print(f"{len(results)} runs, {failed} failed")
    if best is not None:
        settings = ", ".join(f"{k}={v}" for k, v in zip(keys, best[1]))
        print(f"best by {args.rank_by}: {best[0]} {settings} ({args.rank_by} = {best[2][args.rank_by]:.6g})")
    return 0 if failed == 0 else 1


def _grid_range(text, name):
    try:
        parts = [float(x) for x in text.split(":")]
    except ValueError:
        raise ConfigError(f"--{name}: expected start:stop[:step], got {text!r}") from None
    if len(parts) == 1:
        parts = [parts[0], parts[0], 1.0]
    elif len(parts) == 2:
        parts.append(1.0)
    start, stop, step = parts
    if not step > 0 or stop < start:
        raise ConfigError(f"--{name}: need stop >= start and step > 0")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(n)]


def cmd_cp_surface(args):
    params = parse_scenario(args.scenario[0], args.set).params if args.scenario else TurbineParams()
    lambdas = _grid_range(args.lam, "lambda")
    betas = _grid_range(args.beta, "beta")
    out = _out_dir(args.out)
    warnings = 0
    best = None
    with (out / "cp_surface.csv").open("w", encoding="utf-8", newline="") as fh:
        fh.write("lambda,beta,cp\n")
        for beta in betas:
            for lam in lambdas:
                try:
                    cp = power_coefficient(lam, beta, params)
                except DomainError:
                    warnings += 1
                    fh.write(f"{lam:.9g},{beta:.9g},\n")
                    continue
                fh.write(f"{lam:.9g},{beta:.9g},{cp:.9g}\n")
                if best is None or cp > best[2]:
                    best = (lam, beta, cp)
    if warnings:
        print(f"warning: {warnings} grid points are singular or outside the model domain", file=sys.stderr)
    if best is not None:
        print(f"argmax: lambda={best[0]:.6g} beta={best[1]:.6g} cp={best[2]:.6g}")
    return 0


def cmd_wind_gen(args):
    scenario = parse_scenario(args.scenario[0] if args.scenario else DEFAULT_SCENARIO, args.set, args.seed)
    if scenario.wind.path:
        raise ConfigError("wind-gen needs a synthetic wind section (wind.path is set)")
    profile = scenario.wind_profile()
    out = _out_dir(args.out)
    profile.to_csv(out / "wind.csv")
    print(f"wrote {len(profile)} samples, mean {np.mean(profile.v):.4f} m/s, std {np.std(profile.v):.4f} m/s")
    return 0


COMMANDS = {
    "run": cmd_run,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "cp-surface": cmd_cp_surface,
    "wind-gen": cmd_wind_gen,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="windsmc", description="Wind-turbine SMC/AFDO simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario_required=True):
        p.add_argument("--scenario", action="append", required=scenario_required,
                       help="scenario file or shipped scenario name (repeatable where meaningful)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a scenario key")
        p.add_argument("--seed", type=int, help="override sim.seed")
        return p

    common(sub.add_parser("run", help="simulate one scenario"))
    common(sub.add_parser("compare", help="simulate two scenarios on the same environment"))
    sw = common(sub.add_parser("sweep", help="grid of overrides over one or more scenarios"))
    sw.add_argument("--grid", action="append", default=[], metavar="KEY=V1,V2,...")
    sw.add_argument("--jobs", type=int, default=0, help="worker processes (default: CPU count)")
    sw.add_argument("--rank-by", default="mse_speed", choices=METRIC_ROWS + ("settle_time",))
    cp = common(sub.add_parser("cp-surface", help="tabulate Cp over a (lambda, beta) grid"), False)
    cp.add_argument("--lambda", dest="lam", default="1:12:0.001", help="start:stop:step")
    cp.add_argument("--beta", default="0", help="start:stop:step in degrees")
    common(sub.add_parser("wind-gen", help="write a synthetic wind CSV"), False)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except WindSmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
