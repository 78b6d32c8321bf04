from rheacl.ppo.agent import (
    AgentSnapshot,
    PpoAgent,
    PpoConfig,
    UpdateStats,
    evaluate,
    run_episodes,
)
from rheacl.ppo.buffer import RolloutBuffer, compute_gae
from rheacl.ppo.engine import RolloutEngine, cycle_per_episode, round_robin
from rheacl.ppo import network

__all__ = [
    "AgentSnapshot",
    "PpoAgent",
    "PpoConfig",
    "UpdateStats",
    "evaluate",
    "run_episodes",
    "RolloutBuffer",
    "compute_gae",
    "RolloutEngine",
    "cycle_per_episode",
    "round_robin",
    "network",
]
