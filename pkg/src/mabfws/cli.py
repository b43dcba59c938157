"""Command-line entry point: ``mabfws plan|validate|width-profile|bench``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from mabfws.harness import (
    BenchConfig, RunConfig, bench_suite, load_plan, run, validate, width_profile,
)
from mabfws.heuristics import HEURISTICS
from mabfws.ingest import load_problem
from mabfws.search import ConfigError


def _k(value: str):
    return None if value == "unbounded" else int(value)


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_plan(args) -> int:
    config = RunConfig(args.file, args.heuristic, args.k, args.mode, args.seed, args.time_limit, args.repeats)
    report = run(config)
    _write(report.to_json(timing=True if args.timing else None), args.out)
    if args.out:
        print(f"{report.status}: plan length {report.plan_length}, cost {report.plan_cost}")
    return 0 if report.solved else 1


def cmd_validate(args) -> int:
    problem = load_problem(args.file)
    check = validate(problem, load_plan(args.plan))
    if check:
        print("valid")
        return 0
    print(f"invalid at step {check.failed_step}: {check.reason}")
    return 1


def cmd_width_profile(args) -> int:
    profile = width_profile(load_problem(args.file), time_limit=args.time_limit, seed=args.seed)
    sys.stdout.write(profile.table())
    return 0


def cmd_bench(args) -> int:
    bench = BenchConfig.load(args.config) if args.config else BenchConfig()
    result = bench_suite(args.dir, bench)
    _write(result.cells_csv(), args.out)
    if args.summary:
        Path(args.summary).write_text(result.summary_csv(), encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mabfws", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve a problem file and write a run report")
    p.add_argument("file")
    p.add_argument("--heuristic", default="f6", choices=[v.value for v in HEURISTICS])
    p.add_argument("--k", type=_k, default=None, help="1, 2 or unbounded (default)")
    p.add_argument("--mode", default="det", choices=["det", "conc"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--timing", action="store_true", help="include wall time in deterministic reports")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate", help="check a plan file against a problem")
    p.add_argument("file")
    p.add_argument("plan")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("width-profile", help="1-/2-bounded blind search per single goal")
    p.add_argument("file")
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_width_profile)

    p = sub.add_parser("bench", help="coverage matrix over a directory of problems")
    p.add_argument("dir")
    p.add_argument("--config", help="JSON file with configs/mode/seed/time_limit/repeats")
    p.add_argument("--out")
    p.add_argument("--summary", help="also write the aggregate CSV here")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
