"""Validation subcommand: completeness of run directories, sweep file checks."""

from __future__ import annotations

from pathlib import Path

from rheacl.harness.config import ConfigError
from rheacl.harness.runner import read_jsonl
from rheacl.harness.sweep import load_sweep
from rheacl.schedulers.base import RunLog

RUN_DIR_ARTIFACTS = ("config.yaml", "log.jsonl", "log.csv", "checkpoint.npz")


def validate_run_dir(run_dir: Path) -> list[str]:
    """Returns a list of problems; empty means the directory is complete."""
    run_dir = Path(run_dir)
    problems = [f"missing {name}" for name in RUN_DIR_ARTIFACTS
                if not (run_dir / name).exists()]
    if problems:
        return problems
    records = list(read_jsonl(run_dir / "log.jsonl"))
    if not records or records[0].get("type") != "header":
        problems.append("log.jsonl: missing header record")
    evals = [r for r in records if r.get("type") == "eval"]
    if not evals:
        problems.append("log.jsonl: no evaluation records")
    last = None
    for i, rec in enumerate(evals):
        missing = [k for k in RunLog.EVAL_FIELDS if k not in rec]
        if missing:
            problems.append(f"log.jsonl record {i}: missing fields {missing}")
            break
        if last is not None and rec["frames"] < last:
            problems.append(f"log.jsonl record {i}: frames not ordered")
            break
        last = rec["frames"]
    return problems


def validate_sweep_file(path: Path) -> tuple[list[dict], list[str]]:
    """Resolve a sweep file; returns (rows, problems)."""
    try:
        spec = load_sweep(path)
        rows = spec.resolve_rows()
    except ConfigError as exc:
        return [], [str(exc)]
    problems = []
    for i, row in enumerate(rows):
        try:
            spec.row_config(row)
        except ConfigError as exc:
            problems.append(f"row {i}: {exc}")
    return rows, problems


def validate_path(path: Path) -> tuple[list[str], list[str]]:
    """Dispatch: run directory or sweep YAML. Returns (report_lines, problems)."""
    path = Path(path)
    if path.is_dir():
        problems = validate_run_dir(path)
        return [f"run directory {path}: "
                + ("ok" if not problems else f"{len(problems)} problem(s)")], problems
    rows, problems = validate_sweep_file(path)
    lines = [f"sweep file {path}: {len(rows)} row(s)"]
    lines += [f"  row {i:3d}: {row}" for i, row in enumerate(rows)]
    return lines, problems
