"""Execute one RunConfig: per-seed run directories with JSONL, CSV, checkpoint."""

from __future__ import annotations

import csv
import json
import time
from pathlib import Path

import numpy as np

import rheacl
from rheacl.harness.config import RunConfig, save_run_config, to_dict
from rheacl.ppo import PpoAgent
from rheacl.schedulers import PpoTrainable, RunLog, RunResult, run_scheduler
from rheacl.seeding import stream

CSV_FIXED_COLUMNS = ("frames", "phase", "epoch", "generation", "individual",
                     "step_index", "roster_mean", "curriculum",
                     "candidate_frames", "committed_frames")


def seed_dir(out_dir: Path, seed: int) -> Path:
    return Path(out_dir) / f"seed_{seed}"


def run_single_seed(cfg: RunConfig, seed: int, out_dir: Path) -> RunResult:
    """One scheduler run for one seed; writes all run-directory artifacts."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_run_config(cfg, out_dir / "config.yaml")

    log = RunLog(out_dir / "log.jsonl")
    log.set_header({
        "config": to_dict(cfg),
        "seed": seed,
        "version": rheacl.__version__,
        "kernel_backend": rheacl.kernel_backend,
        "started_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
    })
    roster = cfg.scheduler.roster_specs()
    agent = PpoAgent(cfg.ppo, stream(seed, "init"))
    trainable = PpoTrainable(agent, roster, cfg.schedule, cfg.score)
    try:
        result = run_scheduler(cfg.scheduler, cfg.score, seed, trainable, log)
        agent.save(out_dir / "checkpoint.npz")
        write_csv(log, roster, out_dir / "log.csv")
        summary = {
            "seed": seed,
            "committed_frames": result.committed_frames,
            "candidate_frames": result.candidate_frames,
            "final_roster_mean": _final_commit_mean(log),
        }
        (out_dir / "summary.json").write_text(json.dumps(summary, indent=2))
        return result
    finally:
        log.close()


def write_csv(log: RunLog, roster, path) -> None:
    env_cols = [spec.env_id for spec in roster]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(CSV_FIXED_COLUMNS) + [f"return.{e}" for e in env_cols])
        for rec in log.records:
            row = [rec[c] for c in CSV_FIXED_COLUMNS]
            row += [rec["returns"].get(e) for e in env_cols]
            writer.writerow(row)


def _final_commit_mean(log: RunLog):
    commits = [r for r in log.records if r["phase"] == "commit"]
    return commits[-1]["roster_mean"] if commits else None


def run_all_seeds(cfg: RunConfig, out_dir: Path | None = None) -> list[Path]:
    """Run every configured seed sequentially; returns the seed directories."""
    out_dir = Path(out_dir) if out_dir is not None else cfg.resolved_output_dir()
    dirs = []
    for seed in cfg.seeds:
        sdir = seed_dir(out_dir, seed)
        run_single_seed(cfg, seed, sdir)
        dirs.append(sdir)
    write_cross_seed_summary(dirs, out_dir / "summary.csv")
    return dirs


def write_cross_seed_summary(seed_dirs, path) -> None:
    """Mean and population std of the committed roster mean per frame bucket."""
    by_bucket: dict[int, list[float]] = {}
    for sdir in seed_dirs:
        for rec in read_jsonl(Path(sdir) / "log.jsonl"):
            if rec.get("type") == "eval" and rec.get("phase") == "commit":
                by_bucket.setdefault(rec["frames"], []).append(rec["roster_mean"])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frames", "mean", "std", "n"])
        for frames in sorted(by_bucket):
            vals = np.asarray(by_bucket[frames])
            writer.writerow([frames, vals.mean(), vals.std(), len(vals)])


def read_jsonl(path):
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)
