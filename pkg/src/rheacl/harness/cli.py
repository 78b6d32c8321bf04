"""Command line entry point.

    rheacl run CONFIG [--path.to.field=value ...]
    rheacl sweep SWEEP.yaml [--jobs N] [--output DIR]
    rheacl aggregate RUN_DIR... --group-by PATH [--bucket N] [--out FILE]
    rheacl validate PATH...

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from rheacl.harness import validate as val
from rheacl.harness.aggregate import aggregate, write_aggregate_csv
from rheacl.harness.config import ConfigError, load_run_config
from rheacl.harness.runner import run_all_seeds
from rheacl.harness.sweep import load_sweep, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rheacl",
                                     description="curriculum-optimization experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one config across its seeds")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--output", type=Path, default=None,
                       help="override the config's output directory")

    p_sweep = sub.add_parser("sweep", help="execute a sweep file")
    p_sweep.add_argument("sweep", type=Path)
    p_sweep.add_argument("--output", type=Path, default=None)
    p_sweep.add_argument("--jobs", type=int, default=1,
                         help="parallel (row, seed) jobs")

    p_agg = sub.add_parser("aggregate", help="aggregate run directories to CSV")
    p_agg.add_argument("run_dirs", nargs="+", type=Path)
    p_agg.add_argument("--group-by", required=True,
                       help="dotted config path, e.g. scheduler.evolution.generations")
    p_agg.add_argument("--bucket", type=int, default=None,
                       help="frame bucket width (default: eval cadence)")
    p_agg.add_argument("--out", type=Path, default=Path("aggregate.csv"))

    p_val = sub.add_parser("validate", help="check run directories / sweep files")
    p_val.add_argument("paths", nargs="+", type=Path)
    return parser


_CLI_OPTIONS = {"output", "jobs", "group-by", "bucket", "out"}


def _is_override(arg: str) -> bool:
    if not (arg.startswith("--") and "=" in arg):
        return False
    return arg[2:].split("=", 1)[0] not in _CLI_OPTIONS


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # Config-field overrides (--path.to.field=value) are stripped before
    # argparse sees them; real CLI options are excluded by name.
    overrides = [a for a in argv if _is_override(a)]
    rest = [a for a in argv if a not in overrides]
    args = _build_parser().parse_args(rest)
    try:
        if args.command == "run":
            return _cmd_run(args, overrides)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "aggregate":
            return _cmd_aggregate(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 -- CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def _cmd_run(args, overrides) -> int:
    cfg = load_run_config(args.config, overrides)
    out = args.output if args.output is not None else cfg.resolved_output_dir()
    dirs = run_all_seeds(cfg, out)
    print(f"wrote {len(dirs)} run directories under {out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = load_sweep(args.sweep)
    out = args.output if args.output is not None else Path(str(args.sweep) + ".out")
    failures = run_sweep(spec, out, jobs=max(1, args.jobs))
    print(f"sweep finished under {out}; {failures} failed job(s)")
    return EXIT_OK if failures == 0 else EXIT_RUNTIME


def _cmd_aggregate(args) -> int:
    rows = aggregate(args.run_dirs, args.group_by, args.bucket)
    write_aggregate_csv(rows, args.out)
    print(f"wrote {len(rows)} aggregated rows to {args.out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    any_problems = False
    for path in args.paths:
        lines, problems = val.validate_path(path)
        for line in lines:
            print(line)
        for problem in problems:
            any_problems = True
            print(f"  PROBLEM: {problem}")
    return EXIT_CONFIG if any_problems else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
