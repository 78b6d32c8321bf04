"""Environment identities, cell encodings, and episode records."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DOORKEY = "DoorKey"
DYNAMIC_OBSTACLES = "DynamicObstacles"
ENV_KINDS = (DOORKEY, DYNAMIC_OBSTACLES)
ENV_SIZES = (6, 8, 10, 12)

# Cell object ids (observation channel 0). Only consistency matters: the
# policy network never sees any other encoding.
UNSEEN = 0
EMPTY = 1
WALL = 2
DOOR = 3
KEY = 4
GOAL = 5
OBSTACLE = 6
OBJECT_MAX = 6

# Color ids (channel 1): red, green, blue, purple, yellow, grey.
COLOR_MAX = 5
_COLOR_OF_OBJECT = np.array([0, 0, 5, 4, 4, 1, 2], dtype=np.uint8)

# Door state ids (channel 2): open=0, closed=1. Non-door cells carry 0.
STATE_MAX = 1

# Per-channel normalizers applied before the policy network.
CHANNEL_MAX = np.array([OBJECT_MAX, COLOR_MAX, max(STATE_MAX, 1)], dtype=np.float64)

# Actions.
LEFT, RIGHT, FORWARD, PICKUP, DROP, TOGGLE, NOOP = range(7)
NUM_ACTIONS = 7

# Directions form a clockwise cycle so RIGHT is +1 mod 4.
DIR_N, DIR_E, DIR_S, DIR_W = range(4)
DIR_VEC = ((0, -1), (1, 0), (0, 1), (-1, 0))


@dataclass(frozen=True)
class EnvSpec:
    """One environment identity: task kind plus room side length."""

    kind: str
    size: int

    def __post_init__(self):
        if self.kind not in ENV_KINDS:
            raise ValueError(f"unknown environment kind {self.kind!r}")
        if self.size not in ENV_SIZES:
            raise ValueError(f"size must be one of {ENV_SIZES}, got {self.size}")

    @property
    def default_max_steps(self) -> int:
        # DoorKey rooms need the longer hunt for the key.
        if self.kind == DOORKEY:
            return 10 * self.size * self.size
        return 4 * self.size * self.size

    @property
    def env_id(self) -> str:
        return f"{self.kind}-{self.size}"

    def __str__(self) -> str:
        return self.env_id

    @classmethod
    def parse(cls, env_id: str) -> "EnvSpec":
        try:
            kind, size = env_id.rsplit("-", 1)
            return cls(kind, int(size))
        except (ValueError, TypeError) as exc:
            raise ValueError(f"bad environment id {env_id!r}") from exc


@dataclass
class Observation:
    """Egocentric, forward-facing view: (view, view, 3) uint8 plus heading."""

    grid: np.ndarray
    direction: int


@dataclass
class EpisodeResult:
    return_: float
    taken_steps: int
    outcome: str  # goal | collision | timeout


def success_reward(taken_steps: int, max_steps: int) -> float:
    """Reward for reaching the goal: 1 - 0.9 * (takenSteps / maxSteps)."""
    return 1.0 - 0.9 * (taken_steps / max_steps)
