"""Command-line interface: generate, solve, reschedule, verify, bench, serve.

Every subcommand is non-interactive and deterministic given its flags and
seed; ``--iterations`` swaps the wall-clock budget for an iteration count so
CI runs are machine-independent.  Exit codes: 0 success, 1 verification
failure or infeasibility, 2 bad arguments.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import fileio, generate, oracle
from .reschedule import (
    RescheduleError,
    RescheduleRequest,
    dropped_registrations,
    reschedule,
)
from .solver import SolveError, SolverConfig, solve
from .verify import check_schedule, compute_metrics


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(
        time_limit=args.timeout,
        seed=args.seed,
        iteration_budget=args.iterations,
    )


def _add_budget_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--timeout", type=float, default=60.0, help="wall-clock budget in seconds")
    parser.add_argument(
        "--iterations", type=int, default=None,
        help="iteration budget; replaces the wall clock for reproducible runs",
    )
    parser.add_argument("--seed", type=int, default=0, help="search seed")


def _cmd_generate(args: argparse.Namespace) -> int:
    spec = generate.scenario(args.scenario)
    instance = generate.generate_instance(spec, args.days, args.seed)
    metadata = generate.metadata_for(spec, args.days, args.seed)
    fileio.write_instance(instance, args.out, metadata)
    print(
        f"wrote {args.out}: scenario {spec.name}, {args.days} days, "
        f"{len(instance.registrations)} registrations, seed {args.seed}"
    )
    return 0


def _cmd_solve(args: argparse.Namespace) -> int:
    instance = fileio.read_instance(args.instance)
    if args.oracle:
        try:
            objective, schedule = oracle.brute_force_schedule(instance)
        except SolveError as error:
            print(f"error: {error.code}: {error}", file=sys.stderr)
            return 1
        fileio.write_schedule(schedule, args.out, {"solver": "oracle", "proved_optimal": True})
        print(f"oracle optimum: unassigned P2 {objective.unassigned_p2}, P3 {objective.unassigned_p3}")
        return 0

    incumbents_path = Path(args.incumbents) if args.incumbents else None
    stream = incumbents_path.open("w", encoding="utf-8") if incumbents_path else None

    def sink(incumbent) -> None:
        if stream is None:
            return
        record = {
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
            "elapsed": incumbent.elapsed,
            "objective": {
                "unassigned_p2": incumbent.objective.unassigned_p2,
                "unassigned_p3": incumbent.objective.unassigned_p3,
            },
            "schedule": fileio.schedule_to_dict(incumbent.schedule),
        }
        stream.write(json.dumps(record) + "\n")
        stream.flush()

    try:
        outcome = solve(instance, _solver_config(args), sink)
    except SolveError as error:
        print(f"error: {error.code}: {error}", file=sys.stderr)
        return 1
    finally:
        if stream is not None:
            stream.close()

    fileio.write_schedule(
        outcome.best_schedule,
        args.out,
        {
            "solver": "local-search",
            "seed": args.seed,
            "proved_optimal": outcome.proved_optimal,
            "incumbents": outcome.incumbents_emitted,
        },
    )
    metrics = compute_metrics(instance, outcome.best_schedule)
    (p1, t1), (p2, t2), (p3, t3) = metrics.assigned_by_priority
    print(
        f"solved in {outcome.elapsed:.1f}s: P1 {p1}/{t1}, P2 {p2}/{t2}, P3 {p3}/{t3}, "
        f"OR time {metrics.or_time_efficiency:.1%}, bed occupancy {metrics.bed_occupancy_efficiency:.1%}"
    )
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    instance = fileio.read_instance(args.instance)
    schedule = fileio.read_schedule(args.schedule)
    violations = check_schedule(instance, schedule)
    report = [v.as_dict() for v in violations]
    text = json.dumps(report, indent=2)
    print(text)
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
    return 1 if violations else 0


def _parse_window(value: str | None) -> tuple[int, int] | None:
    if value is None:
        return None
    first, _, last = value.partition(":")
    return int(first), int(last)


def _cmd_reschedule(args: argparse.Namespace) -> int:
    instance = fileio.read_instance(args.instance)
    old_schedule = fileio.read_schedule(args.old_schedule)
    postponed = frozenset(int(token) for token in args.postponed.split(",") if token)
    request = RescheduleRequest(
        instance=instance,
        old_schedule=old_schedule,
        postponed=postponed,
        disruption_day=args.day,
        reschedule_days=_parse_window(args.window),
        specialty_filter=args.specialty,
    )
    try:
        if args.oracle:
            objective, schedule = oracle.brute_force_reschedule(request)
            dropped = sorted(dropped_registrations(request, schedule))
        else:
            outcome = reschedule(request, _solver_config(args))
            objective, schedule, dropped = outcome.objective, outcome.new_schedule, sorted(outcome.dropped)
    except (RescheduleError, SolveError) as error:
        print(f"error: {error.code}: {error}", file=sys.stderr)
        return 1

    document = {
        "format": fileio.FORMAT_VERSION,
        "objective": {
            "level4": objective.level4,
            "level3": objective.level3,
            "level2": objective.level2,
            "level1": objective.level1,
        },
        "dropped": list(dropped),
        "new_schedule": fileio.schedule_to_dict(schedule),
    }
    fileio.dump_json(document, args.out)
    print(
        f"rescheduled: dropped {len(dropped)} registrations, day-shift total {objective.level1}; "
        f"wrote {args.out}"
    )
    return 0


def bench_one(scenario_name: str, days: int, seed: int, timeout: float, iterations: int | None) -> dict:
    """One benchmark run; top-level so process pools can pickle it."""
    spec = generate.scenario(scenario_name)
    instance = generate.generate_instance(spec, days, seed)
    config = SolverConfig(time_limit=timeout, seed=seed, iteration_budget=iterations)
    started = time.monotonic()
    try:
        outcome = solve(instance, config)
    except SolveError as error:
        return {"seed": seed, "status": error.code, "elapsed": round(time.monotonic() - started, 2)}
    metrics = compute_metrics(instance, outcome.best_schedule)
    (p1, t1), (p2, t2), (p3, t3) = metrics.assigned_by_priority
    return {
        "seed": seed,
        "status": "solved",
        "assigned": {
            "p1": [p1, t1],
            "p2": [p2, t2],
            "p3": [p3, t3],
            "total": [p1 + p2 + p3, t1 + t2 + t3],
        },
        "or_time_efficiency": metrics.or_time_efficiency,
        "bed_occupancy_efficiency": metrics.bed_occupancy_efficiency,
        "elapsed": round(outcome.elapsed, 2),
    }


def _format_bench_table(rows: list[dict]) -> str:
    header = f"{'seed':>4}  {'P1':>9}  {'P2':>9}  {'P3':>9}  {'Total':>9}  {'OR eff':>7}  {'Bed eff':>7}  {'time':>6}"
    lines = [header, "-" * len(header)]
    for row in rows:
        if row["status"] != "solved":
            lines.append(f"{row['seed']:>4}  {row['status']}")
            continue
        a = row["assigned"]
        lines.append(
            f"{row['seed']:>4}  "
            f"{a['p1'][0]:>3}/{a['p1'][1]:<4}  {a['p2'][0]:>3}/{a['p2'][1]:<4}  "
            f"{a['p3'][0]:>3}/{a['p3'][1]:<4}  {a['total'][0]:>4}/{a['total'][1]:<4}  "
            f"{row['or_time_efficiency']:>6.1%}  {row['bed_occupancy_efficiency']:>6.1%}  "
            f"{row['elapsed']:>5.1f}s"
        )
    solved = [row for row in rows if row["status"] == "solved"]
    if solved:
        mean_or = sum(r["or_time_efficiency"] for r in solved) / len(solved)
        mean_bed = sum(r["bed_occupancy_efficiency"] for r in solved) / len(solved)
        lines.append(f"mean over {len(solved)} solved runs: OR eff {mean_or:.1%}, bed eff {mean_bed:.1%}")
    return "\n".join(lines)


def _cmd_bench(args: argparse.Namespace) -> int:
    seeds = list(range(args.seed, args.seed + args.runs))
    jobs = [(args.scenario, args.days, seed, args.timeout, args.iterations) for seed in seeds]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(bench_one, *zip(*jobs)))
    else:
        rows = [bench_one(*job) for job in jobs]
    rows.sort(key=lambda row: row["seed"])

    solved = [row for row in rows if row["status"] == "solved"]
    report = {
        "format": fileio.FORMAT_VERSION,
        "scenario": args.scenario.upper(),
        "days": args.days,
        "timeout": args.timeout,
        "iterations": args.iterations,
        "runs": rows,
        "mean": {
            "or_time_efficiency": sum(r["or_time_efficiency"] for r in solved) / len(solved) if solved else None,
            "bed_occupancy_efficiency": sum(r["bed_occupancy_efficiency"] for r in solved) / len(solved) if solved else None,
            "solved": len(solved),
        },
    }
    if args.out:
        fileio.dump_json(report, args.out)
    print(_format_bench_table(rows))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.store, token=args.token, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orsched", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random benchmark instance")
    p.add_argument("--scenario", required=True, help="A, B, or C")
    p.add_argument("--days", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("solve", help="schedule an instance file")
    p.add_argument("instance")
    p.add_argument("--out", required=True)
    p.add_argument("--incumbents", help="stream improving schedules to this JSONL file")
    p.add_argument("--oracle", action="store_true", help="exact search (tiny instances only)")
    _add_budget_flags(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify", help="check a schedule against an instance")
    p.add_argument("instance")
    p.add_argument("schedule")
    p.add_argument("--report", help="also write the violation list to this file")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("reschedule", help="recompute a disrupted schedule")
    p.add_argument("instance")
    p.add_argument("old_schedule")
    p.add_argument("--postponed", required=True, help="comma-separated registration ids")
    p.add_argument("--day", type=int, default=2, help="disruption day")
    p.add_argument("--window", help="FIRST:LAST reschedule days (default: rest of horizon)")
    p.add_argument("--specialty", type=int, default=None, help="reschedule only this specialty")
    p.add_argument("--out", required=True)
    p.add_argument("--oracle", action="store_true", help="exact search (tiny requests only)")
    _add_budget_flags(p)
    p.set_defaults(func=_cmd_reschedule)

    p = sub.add_parser("bench", help="run seeded benchmark instances and report a table")
    p.add_argument("--scenario", required=True)
    p.add_argument("--days", type=int, default=5)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="first seed; runs use seed..seed+runs-1")
    p.add_argument("--workers", type=int, default=1, help="parallel solver processes")
    p.add_argument("--out", help="machine-readable report path")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--iterations", type=int, default=None)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP planning service")
    p.add_argument("--host", default=os.environ.get("ORSCHED_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(os.environ.get("ORSCHED_PORT", "8000")))
    p.add_argument("--store", default=os.environ.get("ORSCHED_STORE", "orsched-store"),
                   help="scenario/job storage directory")
    p.add_argument("--token", default=os.environ.get("ORSCHED_TOKEN"),
                   help="require this bearer token on every request")
    p.add_argument("--ui", default=os.environ.get("ORSCHED_UI"),
                   help="serve console assets from this directory at /ui")
    p.set_defaults(func=_cmd_serve)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    return args.func(args)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
