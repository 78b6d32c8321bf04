"""Curriculum genomes, the damped curriculum score, and rewards bookkeeping.

A curriculum is an ordered list of steps; each step is a small set of
environments trained in parallel (at most ``para_env`` of them). A step's
reward is the agent's mean evaluation return over the *full* roster after
training on that step, and a curriculum's score discounts step rewards with
a dampening factor so early steps dominate:

    score = sum_j reward_j * gamma**j
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from rheacl import ppo
from rheacl.gridworld import EnvSpec, StepBudgetSchedule

CurriculumStep = tuple[EnvSpec, ...]


def make_step(envs) -> CurriculumStep:
    """Canonical step form: unique specs, sorted for stable text output."""
    unique = sorted(set(envs), key=lambda s: (s.kind, s.size))
    if not unique:
        raise ValueError("curriculum step needs at least one environment")
    return tuple(unique)


@dataclass(frozen=True)
class Curriculum:
    steps: tuple[CurriculumStep, ...]

    def __post_init__(self):
        if not self.steps:
            raise ValueError("curriculum must have at least one step")
        for step in self.steps:
            if not step:
                raise ValueError("curriculum step must be non-empty")

    def __len__(self) -> int:
        return len(self.steps)

    def __str__(self) -> str:
        return format_curriculum(self)


def format_curriculum(c: Curriculum) -> str:
    """Human-readable form, e.g. ``[(DoorKey-6|DoorKey-8), (DoorKey-8)]``."""
    return "[" + ", ".join("(" + "|".join(map(str, step)) + ")" for step in c.steps) + "]"


def parse_curriculum(text: str) -> Curriculum:
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ValueError(f"bad curriculum text {text!r}")
    steps = []
    for part in body[1:-1].split("),"):
        part = part.strip().strip("(),")
        if not part:
            continue
        steps.append(make_step(EnvSpec.parse(p) for p in part.split("|")))
    if not steps:
        raise ValueError(f"bad curriculum text {text!r}")
    return Curriculum(tuple(steps))


def curriculum_score(step_rewards, gamma: float) -> float:
    """Damped sum of per-step rewards (early steps weighted highest)."""
    rewards = list(step_rewards)
    if not rewards:
        raise ValueError("curriculum_score needs at least one step reward")
    return float(sum(r * gamma**j for j, r in enumerate(rewards)))


@dataclass
class ScoreConfig:
    gamma: float = 0.9               # dampening factor, not the RL discount
    eval_episodes_per_env: int = 10

    def validate(self) -> None:
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0,1], got {self.gamma}")
        if self.eval_episodes_per_env < 1:
            raise ValueError("eval_episodes_per_env must be >= 1")


def step_reward(params: np.ndarray, roster: "list[EnvSpec]", score_cfg: ScoreConfig,
                schedule: StepBudgetSchedule, iterations_done: int,
                rng: np.random.Generator, tanh_heads: bool = False) -> float:
    """Mean evaluation return across the whole roster."""
    if not roster:
        raise ValueError("roster must be non-empty")
    means = [
        ppo.evaluate(params, spec, score_cfg.eval_episodes_per_env, schedule,
                     iterations_done, rng, tanh_heads)
        for spec in roster
    ]
    return float(np.mean(means))


class RewardsMatrix:
    """(generations x individuals) accumulator of damped step scores.

    Entries start at zero each epoch. ``record`` accumulates by default, so
    after a full inner loop entry [g, i] holds individual i's curriculum
    score for generation g; ``record_mode="overwrite"`` keeps only the last
    recorded term instead.
    """

    def __init__(self, generations: int, population_size: int,
                 record_mode: str = "accumulate"):
        if generations < 1 or population_size < 1:
            raise ValueError("matrix dimensions must be >= 1")
        if record_mode not in ("accumulate", "overwrite"):
            raise ValueError(f"unknown record_mode {record_mode!r}")
        self.entries = np.zeros((generations, population_size), dtype=np.float64)
        self.record_mode = record_mode

    @property
    def shape(self):
        return self.entries.shape

    def record(self, gen: int, individual: int, score: float) -> "RewardsMatrix":
        if not (0 <= gen < self.entries.shape[0]) or not (0 <= individual < self.entries.shape[1]):
            raise IndexError(
                f"record({gen}, {individual}) outside matrix {self.entries.shape}")
        if self.record_mode == "accumulate":
            self.entries[gen, individual] += score
        else:
            self.entries[gen, individual] = score
        return self

    def generation_scores(self, gen: int) -> np.ndarray:
        return self.entries[gen].copy()


def best_curriculum(matrix: RewardsMatrix, population: "list[Curriculum]") -> Curriculum:
    """Curriculum with the highest final-generation entry; ties break to the
    lowest index."""
    if not population:
        raise ValueError("population must be non-empty")
    final = matrix.entries[-1, : len(population)]
    return population[int(np.argmax(final))]
