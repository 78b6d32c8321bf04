"""Config round-trips, CLI commands, sweeps, aggregation, validation."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from rheacl.harness import validate as val
from rheacl.harness.aggregate import aggregate as run_aggregate
from rheacl.harness.cli import main as cli_main
from rheacl.harness.config import (
    ConfigError,
    RunConfig,
    from_dict,
    load_run_config,
    run_config_from_dict,
    save_run_config,
    to_dict,
)
from rheacl.harness.runner import read_jsonl, run_all_seeds, run_single_seed
from rheacl.harness.sweep import SweepSpec, load_sweep, run_sweep

TINY = {
    "scheduler": {
        "kind": "AllParallel",
        "roster": ["DoorKey-6"],
        "iter_steps": 128,
        "total_frames": 256,
    },
    "ppo": {"num_processes": 2, "frames_per_process": 64, "batch_size": 32},
    "score": {"eval_episodes_per_env": 2},
    "seeds": [1],
    "output_dir": "runs/tiny",
}


def tiny_config(**extra) -> RunConfig:
    data = json.loads(json.dumps(TINY))
    data.update(extra)
    return run_config_from_dict(data)


# -- config ---------------------------------------------------------------------


def test_defaults_materialize_and_roundtrip(tmp_path):
    cfg = run_config_from_dict({})
    path = tmp_path / "cfg.yaml"
    save_run_config(cfg, path)
    reloaded = load_run_config(path)
    assert reloaded == cfg
    # Every default is present in the serialized form.
    data = yaml.safe_load(path.read_text())
    assert data["ppo"]["discount"] == 0.99
    assert data["scheduler"]["evolution"]["para_env"] == 2
    assert data["schedule"]["decay_start"] == 500_000


def test_unknown_field_paths_are_reported():
    with pytest.raises(ConfigError, match="scheduler.evolutions"):
        run_config_from_dict({"scheduler": {"evolutions": {}}})
    with pytest.raises(ConfigError, match="ppo.lr_rate"):
        run_config_from_dict({"ppo": {"lr_rate": 0.1}})


def test_type_errors_carry_paths():
    with pytest.raises(ConfigError, match="ppo.discount"):
        run_config_from_dict({"ppo": {"discount": "fast"}})
    with pytest.raises(ConfigError, match="seeds"):
        run_config_from_dict({"seeds": "all"})


def test_validation_failures():
    with pytest.raises(ConfigError):
        run_config_from_dict({"seeds": []})
    with pytest.raises(ConfigError):
        run_config_from_dict({"seeds": [1, 1]})
    with pytest.raises(ConfigError):
        run_config_from_dict({"scheduler": {"kind": "Whatever"}})


def test_dotted_overrides():
    cfg = run_config_from_dict(dict(TINY), ["--scheduler.kind=SPCL",
                                            "ppo.lr=0.01",
                                            "seeds=[4,5]"])
    assert cfg.scheduler.kind == "SPCL"
    assert cfg.ppo.lr == 0.01
    assert cfg.seeds == [4, 5]


def test_output_root_env(monkeypatch, tmp_path):
    cfg = tiny_config()
    monkeypatch.setenv("RHEACL_OUTPUT_ROOT", str(tmp_path))
    assert cfg.resolved_output_dir() == tmp_path / "runs/tiny"
    monkeypatch.delenv("RHEACL_OUTPUT_ROOT")
    assert cfg.resolved_output_dir() == Path("runs/tiny")


# -- runner -----------------------------------------------------------------------


def test_run_single_seed_writes_all_artifacts(tmp_path):
    cfg = tiny_config()
    run_single_seed(cfg, 1, tmp_path / "r")
    for name in ("config.yaml", "log.jsonl", "log.csv", "checkpoint.npz",
                 "summary.json"):
        assert (tmp_path / "r" / name).exists(), name
    records = list(read_jsonl(tmp_path / "r" / "log.jsonl"))
    assert records[0]["type"] == "header"
    evals = [r for r in records if r["type"] == "eval"]
    assert len(evals) >= 1
    assert all("DoorKey-6" in r["returns"] for r in evals)


def test_run_is_deterministic_modulo_timestamp(tmp_path):
    cfg = tiny_config()
    run_single_seed(cfg, 1, tmp_path / "a")
    run_single_seed(cfg, 1, tmp_path / "b")

    def normalized(path):
        recs = list(read_jsonl(path / "log.jsonl"))
        recs[0].pop("started_at")
        return recs

    assert normalized(tmp_path / "a") == normalized(tmp_path / "b")
    ca = np.load(tmp_path / "a" / "checkpoint.npz")
    cb = np.load(tmp_path / "b" / "checkpoint.npz")
    assert np.array_equal(ca["params"], cb["params"])


def test_run_all_seeds_layout_and_summary(tmp_path):
    cfg = tiny_config(seeds=[1, 2])
    dirs = run_all_seeds(cfg, tmp_path / "multi")
    assert [d.name for d in dirs] == ["seed_1", "seed_2"]
    summary = (tmp_path / "multi" / "summary.csv").read_text().splitlines()
    assert summary[0] == "frames,mean,std,n"
    assert len(summary) >= 2


# -- CLI --------------------------------------------------------------------------


def test_cli_run_smoke(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(yaml.safe_dump(TINY))
    code = cli_main(["run", str(cfg_path), "--output", str(tmp_path / "out")])
    assert code == 0
    recs = list(read_jsonl(tmp_path / "out" / "seed_1" / "log.jsonl"))
    assert sum(r["type"] == "eval" for r in recs) >= 1


def test_cli_override_switches_scheduler(tmp_path):
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(yaml.safe_dump(TINY))
    out = tmp_path / "out2"
    code = cli_main(["run", str(cfg_path), "--output", str(out),
                     "--scheduler.kind=SPCL"])
    assert code == 0
    saved = yaml.safe_load((out / "seed_1" / "config.yaml").read_text())
    assert saved["scheduler"]["kind"] == "SPCL"
    recs = [r for r in read_jsonl(out / "seed_1" / "log.jsonl")
            if r.get("type") == "eval"]
    assert all(r["scheduler"] == "SPCL" for r in recs)


def test_cli_bad_config_exits_one(tmp_path):
    cfg_path = tmp_path / "bad.yaml"
    cfg_path.write_text("scheduler: {kind: Bogus}\n")
    assert cli_main(["run", str(cfg_path)]) == 1
    missing = tmp_path / "nope.yaml"
    assert cli_main(["run", str(missing)]) == 1


# -- sweep ------------------------------------------------------------------------


def sweep_dict(rows):
    return {"base": json.loads(json.dumps(TINY)), "rows": rows}


def test_sweep_rows_times_seeds_layout(tmp_path):
    base = json.loads(json.dumps(TINY))
    base["seeds"] = [1, 2]
    spec = SweepSpec(base=base,
                     rows=[{"scheduler.iter_steps": 128},
                           {"scheduler.iter_steps": 256}])
    failures = run_sweep(spec, tmp_path / "sw")
    assert failures == 0
    dirs = sorted(p.relative_to(tmp_path / "sw").as_posix()
                  for p in (tmp_path / "sw").glob("row_*/seed_*"))
    assert dirs == ["row_000/seed_1", "row_000/seed_2",
                    "row_001/seed_1", "row_001/seed_2"]
    index = (tmp_path / "sw" / "index.csv").read_text().splitlines()
    assert len(index) == 5  # header + 4 jobs


def test_sweep_failure_isolated_and_tallied(tmp_path):
    spec = SweepSpec(base=json.loads(json.dumps(TINY)),
                     rows=[{"scheduler.total_frames": 64},   # < iter_steps: invalid
                           {"scheduler.iter_steps": 128}])
    failures = run_sweep(spec, tmp_path / "sw2")
    assert failures == 1
    index = (tmp_path / "sw2" / "index.csv").read_text()
    assert "failed" in index and "ok" in index
    assert (tmp_path / "sw2" / "row_001" / "seed_1" / "log.jsonl").exists()


def test_sweep_axes_cross_product():
    spec = SweepSpec(base=json.loads(json.dumps(TINY)),
                     axes={"ppo.lr": [0.01, 0.001],
                           "scheduler.iter_steps": [128, 256, 512]})
    rows = spec.resolve_rows()
    assert len(rows) == 6


def test_sweep_needs_rows_xor_axes():
    with pytest.raises(ConfigError):
        SweepSpec(base={}, rows=[{"a": 1}], axes={"b": [1]}).validate()
    with pytest.raises(ConfigError):
        SweepSpec(base={}).validate()


def test_shipped_sweep_files_load():
    for name in ("sweeps/doorkey.yaml", "sweeps/dynamicobstacles.yaml"):
        spec = load_sweep(Path(__file__).resolve().parents[1] / name)
        rows = spec.resolve_rows()
        assert all("scheduler.iter_steps" in r for r in rows)


# -- aggregate ---------------------------------------------------------------------


def run_pair(tmp_path):
    cfg = tiny_config()
    run_single_seed(cfg, 1, tmp_path / "r1")
    run_single_seed(cfg, 2, tmp_path / "r2")
    return [tmp_path / "r1", tmp_path / "r2"]


def test_aggregate_singleton_is_identity(tmp_path):
    cfg = tiny_config()
    run_single_seed(cfg, 1, tmp_path / "solo")
    rows = run_aggregate([tmp_path / "solo"], "scheduler.kind", bucket=128)
    for frames, group, mean, std, n in rows:
        assert group == "AllParallel" and std == 0.0 and n == 1


def test_aggregate_mean_and_population_std(tmp_path):
    dirs = run_pair(tmp_path)
    # Overwrite roster_mean fields with constants to pin the arithmetic.
    for d, value in zip(dirs, (0.4, 0.6)):
        path = Path(d) / "log.jsonl"
        recs = list(read_jsonl(path))
        with open(path, "w") as fh:
            for rec in recs:
                if rec.get("type") == "eval":
                    rec["roster_mean"] = value
                    rec["frames"] = 128
                fh.write(json.dumps(rec) + "\n")
    rows = run_aggregate(dirs, "scheduler.kind", bucket=128)
    assert len(rows) == 1
    _, _, mean, std, n = rows[0]
    assert mean == pytest.approx(0.5) and std == pytest.approx(0.1) and n == 4


def test_aggregate_partition_by_group(tmp_path):
    cfg_a = tiny_config()
    run_single_seed(cfg_a, 1, tmp_path / "ga")
    cfg_b = run_config_from_dict(json.loads(json.dumps(TINY)),
                                 ["scheduler.kind=NoCurriculum"])
    run_single_seed(cfg_b, 1, tmp_path / "gb")
    rows = run_aggregate([tmp_path / "ga", tmp_path / "gb"], "scheduler.kind",
                         bucket=128)
    groups = {group for _, group, *_ in rows}
    assert groups == {"AllParallel", "NoCurriculum"}


def test_aggregate_is_permutation_invariant(tmp_path):
    dirs = run_pair(tmp_path)
    fwd = run_aggregate(dirs, "scheduler.kind", bucket=128)
    rev = run_aggregate(dirs[::-1], "scheduler.kind", bucket=128)
    assert fwd == rev


def test_aggregate_schema_mismatch_lists_offenders(tmp_path):
    good = tmp_path / "good"
    run_single_seed(tiny_config(), 1, good)
    bad = tmp_path / "bad"
    bad.mkdir()
    with pytest.raises(ConfigError, match="bad"):
        run_aggregate([good, bad], "scheduler.kind", bucket=128)


def test_cli_aggregate(tmp_path):
    dirs = run_pair(tmp_path)
    out = tmp_path / "agg.csv"
    code = cli_main(["aggregate", str(dirs[0]), str(dirs[1]),
                     "--group-by", "scheduler.kind", "--bucket", "128",
                     "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "frames,group,mean,std,n"


# -- validate ---------------------------------------------------------------------


def test_validate_complete_run_dir(tmp_path):
    cfg = tiny_config()
    run_single_seed(cfg, 1, tmp_path / "ok")
    assert val.validate_run_dir(tmp_path / "ok") == []
    (tmp_path / "ok" / "checkpoint.npz").unlink()
    problems = val.validate_run_dir(tmp_path / "ok")
    assert problems and "checkpoint.npz" in problems[0]


def test_cli_validate_run_dir_and_sweep(tmp_path):
    cfg = tiny_config()
    run_single_seed(cfg, 1, tmp_path / "run")
    root = Path(__file__).resolve().parents[1]
    assert cli_main(["validate", str(tmp_path / "run"),
                     str(root / "sweeps" / "doorkey.yaml")]) == 0
    (tmp_path / "run" / "log.csv").unlink()
    assert cli_main(["validate", str(tmp_path / "run")]) == 1
