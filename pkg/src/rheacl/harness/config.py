"""Experiment configuration: one YAML file, dotted-path CLI overrides.

Loading materializes every default, so a saved resolved config reloads to a
semantically identical RunConfig. Unknown keys fail with their full path.
"""

from __future__ import annotations

import copy
import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import get_args, get_origin, get_type_hints

import yaml

from rheacl.curriculum import ScoreConfig
from rheacl.gridworld import StepBudgetSchedule
from rheacl.ppo import PpoConfig
from rheacl.schedulers import SchedulerConfig


class ConfigError(ValueError):
    """Invalid configuration; message carries the offending field path."""


@dataclass
class RunConfig:
    scheduler: SchedulerConfig = field(default_factory=SchedulerConfig)
    ppo: PpoConfig = field(default_factory=PpoConfig)
    score: ScoreConfig = field(default_factory=ScoreConfig)
    schedule: StepBudgetSchedule = field(default_factory=StepBudgetSchedule)
    seeds: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    output_dir: str = "runs/default"

    def validate(self) -> None:
        try:
            self.scheduler.validate()
            self.ppo.validate()
            self.score.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not self.seeds:
            raise ConfigError("seeds: must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds: must be distinct")

    def resolved_output_dir(self) -> Path:
        """output_dir, rooted at $RHEACL_OUTPUT_ROOT when that is set."""
        root = os.environ.get("RHEACL_OUTPUT_ROOT")
        path = Path(self.output_dir)
        if root and not path.is_absolute():
            return Path(root) / path
        return path


# ---------------------------------------------------------------------------
# dict <-> dataclass


def to_dict(cfg) -> dict:
    return dataclasses.asdict(cfg)


def from_dict(cls, data: dict, path: str = ""):
    """Build a dataclass from a nested dict, coercing primitives and
    rejecting unknown keys with their dotted path."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path or cls.__name__}: expected a mapping, got {data!r}")
    hints = get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        where = f"{path}." if path else ""
        raise ConfigError(f"unknown config field(s): "
                          f"{', '.join(sorted(where + u for u in unknown))}")
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name not in data:
            continue
        sub_path = f"{path}.{f.name}" if path else f.name
        kwargs[f.name] = _coerce(hints[f.name], data[f.name], sub_path)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path or cls.__name__}: {exc}") from exc


def _coerce(hint, value, path: str):
    if dataclasses.is_dataclass(hint):
        return from_dict(hint, value, path)
    origin = get_origin(hint)
    if origin in (list, tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{path}: expected a list, got {value!r}")
        args = get_args(hint)
        inner = args[0] if args else None
        items = [_coerce(inner, v, f"{path}[{i}]") if inner else v
                 for i, v in enumerate(value)]
        return list(items) if origin is list else tuple(items)
    if origin is dict or hint is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected a mapping, got {value!r}")
        return dict(value)
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected a boolean, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        if isinstance(value, float):
            if not value.is_integer():
                raise ConfigError(f"{path}: expected an integer, got {value!r}")
            value = int(value)
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    return value


# ---------------------------------------------------------------------------
# files & overrides


def apply_overrides(data: dict, overrides: "list[str]") -> dict:
    """Apply ``a.b.c=value`` strings onto a nested dict (values parsed as YAML)."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like path.to.field=value")
        key, raw = item.split("=", 1)
        key = key.lstrip("-")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"override {key}: unparseable value {raw!r}") from exc
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {key}: {part} is not a mapping")
        node[parts[-1]] = value
    return data


def load_run_config(path, overrides: "list[str] | None" = None) -> RunConfig:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"bad YAML in {path}: {exc}") from exc
    return run_config_from_dict(data, overrides)


def run_config_from_dict(data: dict, overrides: "list[str] | None" = None) -> RunConfig:
    # Deep copy: overrides write into nested mappings and must never leak
    # back into the caller's dict.
    data = apply_overrides(copy.deepcopy(data), list(overrides or []))
    cfg = from_dict(RunConfig, data)
    cfg.validate()
    return cfg


def save_run_config(cfg: RunConfig, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(to_dict(cfg), fh, sort_keys=False)


def lookup_path(data: dict, dotted: str):
    """Fetch a dotted path out of a nested dict; KeyError lists the path."""
    node = data
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            raise KeyError(dotted)
        node = node[part]
    return node
