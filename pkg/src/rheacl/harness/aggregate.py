"""Aggregate committed-trajectory returns across runs into plot-ready tables."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import yaml

from rheacl.harness.config import ConfigError, lookup_path
from rheacl.harness.runner import read_jsonl


def _load_run(run_dir: Path):
    cfg_path = run_dir / "config.yaml"
    log_path = run_dir / "log.jsonl"
    problems = [str(p) for p in (cfg_path, log_path) if not p.exists()]
    if problems:
        raise ConfigError(f"not a run directory (missing {', '.join(problems)})")
    with open(cfg_path) as fh:
        config = yaml.safe_load(fh)
    records = [r for r in read_jsonl(log_path)
               if r.get("type") == "eval" and r.get("phase") == "commit"]
    return config, records


def aggregate(run_dirs, group_by: str, bucket: int | None = None):
    """Group committed evaluations by a config parameter and frame bucket.

    Returns rows of (frames, group, mean, std, n); std is the population
    standard deviation. Bucket width defaults to the first run's eval
    cadence (scheduler.iter_steps).
    """
    loaded = []
    errors = []
    for run_dir in map(Path, run_dirs):
        try:
            config, records = _load_run(run_dir)
            group = lookup_path(config, group_by)
            loaded.append((config, group, records))
        except KeyError:
            errors.append(f"{run_dir}: config has no parameter {group_by!r}")
        except ConfigError as exc:
            errors.append(f"{run_dir}: {exc}")
    if errors:
        raise ConfigError("aggregate: incompatible inputs:\n  " + "\n  ".join(errors))
    if not loaded:
        raise ConfigError("aggregate: no run directories given")

    if bucket is None:
        bucket = int(lookup_path(loaded[0][0], "scheduler.iter_steps"))
    if bucket < 1:
        raise ConfigError("bucket width must be positive")

    cells: dict[tuple[int, object], list[float]] = {}
    for _, group, records in loaded:
        for rec in records:
            b = round(rec["frames"] / bucket) * bucket
            cells.setdefault((b, group), []).append(rec["roster_mean"])

    rows = []
    for (frames, group) in sorted(cells, key=lambda k: (k[0], str(k[1]))):
        vals = np.asarray(cells[(frames, group)], dtype=np.float64)
        rows.append((frames, group, float(vals.mean()), float(vals.std()), len(vals)))
    return rows


def write_aggregate_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frames", "group", "mean", "std", "n"])
        writer.writerows(rows)
