"""Benchmark command line: solve, grid, export, gap, and oracle subcommands.

Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors.  All CSV
outputs are sorted by (instance, mu, lambda, algo, seed) so repeated runs with
the same master seed are byte-identical.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import pandas as pd

from .baseline import build_original_schedule, solve_tsp
from .config import SolverConfig, load_config
from .instances import Instance, compute_limits, load_instance
from .lpmodel import export_original, export_rescheduling, gap
from .memetic import solve_with_algorithm
from .oracle import exhaustive_optimum

CONFIG_ENV_VAR = "CAREROUTE_CONFIG"
DEFAULT_ALGOS = ("MA2",)


def _config_from_args(args) -> SolverConfig:
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    overrides = {}
    for key in ("mu", "lam", "rejection_cost"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return load_config(path, **overrides)


def _load(args, config: SolverConfig) -> Instance:
    return load_instance(args.instance, args.ne, args.nn, config.rejection_cost)


def _solve_task(task):
    algo, inst, config, seed = task
    try:
        report = solve_with_algorithm(algo, inst, config, seed)
        return algo, inst.name, seed, report, None
    except ValueError as exc:
        return algo, inst.name, seed, None, str(exc)


def _run_many(tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [_solve_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_solve_task, tasks))


def _write_csv(frame: pd.DataFrame, path: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    frame.to_csv(path, index=False)


# ---------------------------------------------------------------------------
# solve

def cmd_solve(args) -> int:
    config = _config_from_args(args)
    inst = _load(args, config)
    seeds = range(args.seed, args.seed + args.repeats)
    tasks = [(args.algo, inst, config, seed) for seed in seeds]
    results = _run_many(tasks, args.jobs)

    rows, failures = [], []
    for algo, name, seed, report, error in results:
        if error is not None:
            failures.append((seed, error))
            continue
        row = report.csv_row()
        row.update({"mu": config.mu, "lambda": config.lam, "algo": algo})
        rows.append(row)
    if failures:
        for seed, error in failures:
            print(f"seed {seed}: {error}", file=sys.stderr)
        return 1

    frame = pd.DataFrame(rows).sort_values(["instance", "mu", "lambda", "seed"])
    frame = frame[
        ["instance", "mu", "lambda", "algo", "seed",
         "best_obj", "avg_obj_trace", "time_s", "generations"]
    ]
    _write_csv(frame, os.path.join(args.out, "solve_runs.csv"))

    summary = pd.DataFrame(
        [{
            "instance": inst.name,
            "mu": config.mu,
            "lambda": config.lam,
            "algo": args.algo,
            "repeats": args.repeats,
            "best_obj": frame["best_obj"].max(),
            "avg_obj": round(frame["best_obj"].mean(), 9),
            "worst_obj": frame["best_obj"].min(),
            "best_time_s": frame["time_s"].min(),
        }]
    )
    _write_csv(summary, os.path.join(args.out, "solve_summary.csv"))
    print(
        f"{inst.name}: best {summary.best_obj[0]:.6f} "
        f"avg {summary.avg_obj[0]:.6f} worst {summary.worst_obj[0]:.6f}"
    )
    return 0


# ---------------------------------------------------------------------------
# grid

def _read_instance_list(path: str) -> list[tuple[str, int, int]]:
    entries = []
    base = os.path.dirname(os.path.abspath(path))
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(
                    f"{path}:{lineno}: expected '<file> <n_existing> <n_new>'"
                )
            file_path = parts[0]
            if not os.path.isabs(file_path):
                file_path = os.path.join(base, file_path)
            entries.append((file_path, int(parts[1]), int(parts[2])))
    if not entries:
        raise ValueError(f"instance list {path} is empty")
    return entries


def _parse_floats(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def cmd_grid(args) -> int:
    base_config = _config_from_args(args)
    mus = _parse_floats(args.mu_values)
    lams = _parse_floats(args.lambda_values)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    entries = _read_instance_list(args.instances)
    instances = [
        load_instance(path, ne, nn, base_config.rejection_cost)
        for path, ne, nn in entries
    ]
    seeds = range(args.seed, args.seed + args.repeats)

    tasks = []
    for mu in mus:
        for lam in lams:
            cell_config = base_config.updated(mu=mu, lam=lam)
            for inst in instances:
                for algo in algos:
                    for seed in seeds:
                        tasks.append((algo, inst, cell_config, seed))
    results = _run_many(tasks, args.jobs)

    rows = []
    for (algo, inst, cfg, seed), (r_algo, name, r_seed, report, error) in zip(
        tasks, results
    ):
        rows.append({
            "instance": name,
            "mu": cfg.mu,
            "lambda": cfg.lam,
            "algo": r_algo,
            "seed": r_seed,
            "objective": "" if error else round(report.best_objective, 9),
            "status": "infeasible" if error else "ok",
        })
    frame = pd.DataFrame(rows).sort_values(
        ["instance", "mu", "lambda", "algo", "seed"]
    )

    for mu in mus:
        for lam in lams:
            cell = frame[(frame["mu"] == mu) & (frame["lambda"] == lam)]
            _write_csv(
                cell, os.path.join(args.out, f"grid_mu{mu:g}_lam{lam:g}.csv")
            )

    solved = frame[frame["status"] == "ok"].copy()
    if not solved.empty:
        solved["objective"] = solved["objective"].astype(float)
        pivot = solved.pivot_table(
            index=["algo", "mu"], columns="lambda",
            values="objective", aggfunc="mean",
        ).round(9).sort_index()
        pivot_path = os.path.join(args.out, "grid_pivot.csv")
        os.makedirs(args.out, exist_ok=True)
        pivot.to_csv(pivot_path)

        stats = (
            solved.groupby(["instance", "mu", "lambda", "algo"])["objective"]
            .agg(best="max", avg="mean", worst="min")
            .round(9)
            .reset_index()
            .sort_values(["instance", "mu", "lambda", "algo"])
        )
        _write_csv(stats, os.path.join(args.out, "grid_algos.csv"))

    n_failed = int((frame["status"] != "ok").sum())
    print(
        f"grid complete: {len(mus) * len(lams)} cells, "
        f"{len(frame)} runs, {n_failed} infeasible"
    )
    return 0


# ---------------------------------------------------------------------------
# export

def cmd_export(args) -> int:
    config = _config_from_args(args)
    inst = _load(args, config)
    baseline = build_original_schedule(inst, mode=config.tsp_mode)
    _, tsp_len = solve_tsp(list(inst.customer_ids), inst, mode=config.tsp_mode)
    limits = compute_limits(inst, config.mu, config.lam, tsp_len)

    os.makedirs(args.out, exist_ok=True)
    original_path = os.path.join(args.out, f"{inst.name}_original.lp")
    resched_path = os.path.join(args.out, f"{inst.name}_rescheduling.lp")
    with open(original_path, "w", encoding="utf-8") as fh:
        fh.write(export_original(inst))
    with open(resched_path, "w", encoding="utf-8") as fh:
        fh.write(export_rescheduling(inst, baseline, limits))

    manifest = pd.DataFrame([
        {
            "file": os.path.basename(original_path),
            "model": "original",
            "instance": inst.name,
            "n_existing": inst.n_existing,
            "n_new": inst.n_new,
            "mu": config.mu,
            "lambda": config.lam,
            "rejection_cost": inst.rejection_cost,
            "t_max": round(limits.t_max, 9),
            "disruption_cap": round(limits.disruption_cap, 9),
        },
        {
            "file": os.path.basename(resched_path),
            "model": "rescheduling",
            "instance": inst.name,
            "n_existing": inst.n_existing,
            "n_new": inst.n_new,
            "mu": config.mu,
            "lambda": config.lam,
            "rejection_cost": inst.rejection_cost,
            "t_max": round(limits.t_max, 9),
            "disruption_cap": round(limits.disruption_cap, 9),
        },
    ])
    _write_csv(manifest, os.path.join(args.out, "manifest.csv"))
    print(f"wrote {original_path}, {resched_path}")
    return 0


# ---------------------------------------------------------------------------
# gap

def cmd_gap(args) -> int:
    exact = pd.read_csv(args.exact)
    runs = pd.read_csv(args.runs)
    if "instance" not in exact.columns or "exact_obj" not in exact.columns:
        raise ValueError("exact results CSV needs 'instance' and 'exact_obj'")
    if "instance" not in runs.columns or "best_obj" not in runs.columns:
        raise ValueError("runs CSV needs 'instance' and 'best_obj'")
    joined = runs.merge(exact[["instance", "exact_obj"]], on="instance")
    gaps, flags = [], []
    for _, row in joined.iterrows():
        if row["exact_obj"] == 0:
            gaps.append("")
            flags.append("zero_exact")
        else:
            gaps.append(round(gap(row["exact_obj"], row["best_obj"]), 9))
            flags.append("")
    joined["gap_pct"] = gaps
    joined["flag"] = flags
    joined = joined.sort_values(["instance"])
    _write_csv(joined, args.out)
    print(f"wrote {args.out} ({len(joined)} rows)")
    return 0


# ---------------------------------------------------------------------------
# oracle

def cmd_oracle(args) -> int:
    config = _config_from_args(args)
    inst = _load(args, config)
    baseline = build_original_schedule(inst, mode=config.tsp_mode)
    _, tsp_len = solve_tsp(list(inst.customer_ids), inst, mode=config.tsp_mode)
    limits = compute_limits(inst, config.mu, config.lam, tsp_len)
    result = exhaustive_optimum(inst, baseline, limits)
    route = ",".join(str(v) for v in result.route)
    rejected = ",".join(str(v) for v in result.rejected)
    print(f"instance={inst.name}")
    print(f"optimum={result.objective:.6f}")
    print(f"route={route}")
    print(f"rejected={rejected}")
    if args.out:
        frame = pd.DataFrame([{
            "instance": inst.name,
            "mu": config.mu,
            "lambda": config.lam,
            "exact_obj": round(result.objective, 9),
            "route": route,
            "rejected": rejected,
        }])
        _write_csv(frame, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser

def _add_instance_flags(sub, required=True):
    sub.add_argument("--instance", required=required, help="benchmark file path")
    sub.add_argument("--ne", type=int, required=required,
                     help="number of existing customers")
    sub.add_argument("--nn", type=int, required=required,
                     help="number of new customers")


def _add_scenario_flags(sub):
    sub.add_argument("--mu", type=float, default=None,
                     help="travel budget multiplier")
    sub.add_argument("--lambda", dest="lam", type=float, default=None,
                     help="disruption cap multiplier")
    sub.add_argument("--rejection-cost", dest="rejection_cost", type=float,
                     default=None, help="penalty per rejected new customer")
    sub.add_argument("--config", default=None,
                     help=f"config file (or set ${CONFIG_ENV_VAR})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="careroute",
        description="Home-care route rescheduling benchmark harness",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="multi-seed solver runs")
    _add_instance_flags(solve)
    _add_scenario_flags(solve)
    solve.add_argument("--repeats", type=int, default=10)
    solve.add_argument("--seed", type=int, default=42)
    solve.add_argument("--algo", default="MA2",
                       choices=["MA2", "ALNS", "TS", "MA1"])
    solve.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    solve.add_argument("--out", default="bench_out")
    solve.set_defaults(func=cmd_solve)

    grid = commands.add_parser("grid", help="full-factorial parameter grid")
    grid.add_argument("--instances", required=True,
                      help="list file: one '<path> <ne> <nn>' per line")
    grid.add_argument("--mu-values", default="0.8,0.9,1.0")
    grid.add_argument(
        "--lambda-values",
        default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0",
    )
    grid.add_argument("--algos", default=",".join(DEFAULT_ALGOS),
                      help="comma-separated subset of MA2,ALNS,TS,MA1")
    grid.add_argument("--repeats", type=int, default=10)
    grid.add_argument("--seed", type=int, default=42)
    grid.add_argument("--config", default=None)
    grid.add_argument("--rejection-cost", dest="rejection_cost", type=float,
                      default=None)
    grid.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    grid.add_argument("--out", default="bench_out")
    grid.set_defaults(func=cmd_grid)

    export = commands.add_parser("export", help="write LP model files")
    _add_instance_flags(export)
    _add_scenario_flags(export)
    export.add_argument("--out", default="bench_out")
    export.set_defaults(func=cmd_export)

    gap_cmd = commands.add_parser("gap", help="join external exact results")
    gap_cmd.add_argument("--exact", required=True,
                         help="CSV with instance,exact_obj columns")
    gap_cmd.add_argument("--runs", required=True,
                         help="runs or summary CSV with best_obj column")
    gap_cmd.add_argument("--out", default="gaps.csv")
    gap_cmd.set_defaults(func=cmd_gap)

    oracle = commands.add_parser(
        "oracle", help="exhaustive optimum for at most 12 customers"
    )
    _add_instance_flags(oracle)
    _add_scenario_flags(oracle)
    oracle.add_argument("--out", default=None, help="optional CSV output")
    oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
