"""Shared scheduler machinery: config, the trainable interface, run logs.

Schedulers never touch PPO directly; they drive a small Trainable interface
(train, evaluate, snapshot, restore). That keeps the outer loops testable
against stub trainers with scripted rewards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from rheacl import ppo
from rheacl.curriculum import ScoreConfig
from rheacl.evolution import EvolutionConfig
from rheacl.gridworld import EnvSpec, StepBudgetSchedule
from rheacl.ppo.engine import EnvSelector, round_robin

SCHEDULER_KINDS = ("RheaCL", "RHRS", "AllParallel", "SPCL", "NoCurriculum")


@dataclass
class SchedulerConfig:
    kind: str = "RheaCL"
    roster: list[str] = field(default_factory=lambda: ["DoorKey-6", "DoorKey-8"])
    iter_steps: int = 25_000
    total_frames: int = 150_000
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    spcl_up: float = 0.85
    spcl_down: float = 0.50
    spcl_check_every: int = 25_000
    # Fast mode: commit the best candidate's after-first-step weights instead
    # of retraining that step from the epoch snapshot.
    commit_reuse_weights: bool = False
    rewards_record_mode: str = "accumulate"

    def roster_specs(self) -> list[EnvSpec]:
        return [EnvSpec.parse(e) for e in self.roster]

    def validate(self) -> None:
        if self.kind not in SCHEDULER_KINDS:
            raise ValueError(f"scheduler kind must be one of {SCHEDULER_KINDS}, "
                             f"got {self.kind!r}")
        if not self.roster:
            raise ValueError("roster must be non-empty")
        self.roster_specs()
        if self.iter_steps < 1:
            raise ValueError("iter_steps must be positive")
        if self.total_frames < self.iter_steps:
            raise ValueError("total_frames must be >= iter_steps")
        if not 0.0 < self.spcl_down < self.spcl_up <= 1.0:
            raise ValueError("need 0 < spcl_down < spcl_up <= 1")
        if self.spcl_check_every < 1:
            raise ValueError("spcl_check_every must be positive")
        self.evolution.validate()


class Trainable(Protocol):
    """What a scheduler needs from the learning substrate."""

    @property
    def frames_done(self) -> int: ...

    def snapshot(self): ...

    def restore(self, snap) -> None: ...

    def train_env_set(self, env_set, frames: int, rng: np.random.Generator) -> int:
        """Train ~frames on the env set (workers round-robin); returns frames used."""
        ...

    def train_selected(self, selector: EnvSelector, frames: int,
                       rng: np.random.Generator) -> int: ...

    def roster_returns(self, rng: np.random.Generator) -> "dict[EnvSpec, float]": ...


class PpoTrainable:
    """The real substrate: a PpoAgent plus evaluation settings."""

    def __init__(self, agent: ppo.PpoAgent, roster: "list[EnvSpec]",
                 schedule: StepBudgetSchedule, score: ScoreConfig):
        self.agent = agent
        self.roster = roster
        self.schedule = schedule
        self.score = score

    @property
    def frames_done(self) -> int:
        return self.agent.frames_done

    def snapshot(self) -> ppo.AgentSnapshot:
        return self.agent.snapshot()

    def restore(self, snap: ppo.AgentSnapshot) -> None:
        self.agent.restore(snap)

    def train_env_set(self, env_set, frames: int, rng: np.random.Generator) -> int:
        return self.train_selected(round_robin(list(env_set)), frames, rng)

    def train_selected(self, selector: EnvSelector, frames: int,
                       rng: np.random.Generator) -> int:
        return self.agent.train_segment(selector, frames, self.schedule, rng)

    def roster_returns(self, rng: np.random.Generator) -> "dict[EnvSpec, float]":
        return {
            spec: ppo.evaluate(self.agent.params, spec,
                               self.score.eval_episodes_per_env, self.schedule,
                               self.agent.frames_done, rng,
                               self.agent.config.tanh_heads)
            for spec in self.roster
        }


class RunLog:
    """Append-only evaluation record; optionally streamed to JSONL."""

    EVAL_FIELDS = ("type", "frames", "scheduler", "phase", "epoch", "generation",
                   "individual", "step_index", "curriculum", "returns",
                   "roster_mean", "candidate_frames", "committed_frames")

    def __init__(self, path=None):
        self.header: dict | None = None
        self.records: list[dict] = []
        self._fh = open(path, "w") if path is not None else None

    def set_header(self, payload: dict) -> None:
        self.header = payload
        self._emit({"type": "header", **payload})

    def record(self, **fields) -> dict:
        rec = {key: None for key in self.EVAL_FIELDS}
        rec["type"] = "eval"
        unknown = set(fields) - set(self.EVAL_FIELDS)
        if unknown:
            raise ValueError(f"unknown RunLog fields: {sorted(unknown)}")
        rec.update(fields)
        self.records.append(rec)
        self._emit(rec)
        return rec

    def _emit(self, payload: dict) -> None:
        if self._fh is not None:
            json.dump(payload, self._fh)
            self._fh.write("\n")
            self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


@dataclass
class RunResult:
    log: RunLog
    committed_frames: int
    candidate_frames: int
    # Per-epoch replay info, kept only on request (snapshot, best curriculum).
    epoch_trace: list = field(default_factory=list)


def returns_payload(returns: "dict[EnvSpec, float]") -> dict:
    return {spec.env_id: float(val) for spec, val in returns.items()}


def roster_mean(returns: "dict[EnvSpec, float]") -> float:
    return float(np.mean(list(returns.values())))
