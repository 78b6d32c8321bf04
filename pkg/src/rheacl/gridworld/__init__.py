from rheacl.gridworld.env import GridState, observe, render, reset, step
from rheacl.gridworld.schedule import StepBudgetSchedule, max_steps_for
from rheacl.gridworld.solve import doorkey_solvable
from rheacl.gridworld.types import (
    CHANNEL_MAX,
    DOORKEY,
    DYNAMIC_OBSTACLES,
    ENV_KINDS,
    ENV_SIZES,
    NUM_ACTIONS,
    EnvSpec,
    EpisodeResult,
    Observation,
    success_reward,
)

__all__ = [
    "GridState",
    "observe",
    "render",
    "reset",
    "step",
    "StepBudgetSchedule",
    "max_steps_for",
    "doorkey_solvable",
    "CHANNEL_MAX",
    "DOORKEY",
    "DYNAMIC_OBSTACLES",
    "ENV_KINDS",
    "ENV_SIZES",
    "NUM_ACTIONS",
    "EnvSpec",
    "EpisodeResult",
    "Observation",
    "success_reward",
]
