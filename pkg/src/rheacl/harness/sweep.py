"""Sweep execution: a base config plus explicit rows or cross-product axes."""

from __future__ import annotations

import csv
import itertools
import json
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from rheacl.harness.config import (
    ConfigError,
    RunConfig,
    apply_overrides,
    from_dict,
    run_config_from_dict,
    to_dict,
)
from rheacl.harness.runner import run_single_seed, seed_dir


@dataclass
class SweepSpec:
    base: dict = field(default_factory=dict)   # RunConfig as a nested dict
    rows: list[dict] = field(default_factory=list)   # dotted-path -> value
    axes: dict = field(default_factory=dict)         # dotted-path -> [values]

    def validate(self) -> None:
        if bool(self.rows) == bool(self.axes):
            raise ConfigError("sweep needs exactly one of 'rows' or 'axes'")

    def resolve_rows(self) -> list[dict]:
        """Flat list of dotted-path override dicts, one per sweep row."""
        self.validate()
        if self.rows:
            return [dict(r) for r in self.rows]
        keys = list(self.axes)
        combos = itertools.product(*(self.axes[k] for k in keys))
        return [dict(zip(keys, combo)) for combo in combos]

    def row_config(self, row: dict) -> RunConfig:
        overrides = [f"{k}={yaml.safe_dump(v).strip()}" for k, v in row.items()]
        return run_config_from_dict(dict(self.base), overrides)


def load_sweep(path) -> SweepSpec:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read sweep {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"bad YAML in {path}: {exc}") from exc
    spec = from_dict(SweepSpec, data)
    spec.validate()
    # Fail early if the base itself is broken.
    run_config_from_dict(dict(spec.base))
    return spec


def _run_job(args) -> tuple[int, int, str, str]:
    row_idx, seed, base, row, out = args
    try:
        cfg = SweepSpec(base=base).row_config(row)
        run_single_seed(cfg, seed, Path(out))
        return (row_idx, seed, "ok", "")
    except Exception:
        return (row_idx, seed, "failed", traceback.format_exc(limit=3))


def run_sweep(spec: SweepSpec, out_dir: Path, jobs: int = 1) -> int:
    """Run every row x seed; one directory per row. Failures don't stop
    other rows; the index CSV tallies them. Returns the failure count."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = spec.resolve_rows()
    base_cfg = run_config_from_dict(dict(spec.base))

    tasks = []
    for row_idx, row in enumerate(rows):
        row_dir = out_dir / f"row_{row_idx:03d}"
        row_dir.mkdir(parents=True, exist_ok=True)
        (row_dir / "row.json").write_text(json.dumps(row, indent=2))
        for seed in base_cfg.seeds:
            tasks.append((row_idx, seed, spec.base, row,
                          str(seed_dir(row_dir, seed))))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_job, tasks))
    else:
        outcomes = [_run_job(t) for t in tasks]

    failures = 0
    with open(out_dir / "index.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "seed", "status", "params", "error"])
        for (row_idx, seed, status, err), task in zip(outcomes, tasks):
            if status != "ok":
                failures += 1
            writer.writerow([row_idx, seed, status, json.dumps(rows[row_idx]),
                             err.replace("\n", " | ")])
    return failures
