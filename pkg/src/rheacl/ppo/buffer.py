"""Rollout storage and generalized advantage estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class RolloutBuffer:
    """Per-frame records, laid out (time, worker). Observations stay uint8;
    they are normalized on use."""

    obs: np.ndarray        # (T, P, V, V, 3) uint8
    actions: np.ndarray    # (T, P) int64
    log_probs: np.ndarray  # (T, P)
    values: np.ndarray     # (T, P)
    rewards: np.ndarray    # (T, P)
    dones: np.ndarray      # (T, P) bool; True if the episode ended at t
    bootstrap: np.ndarray  # (P,) value of the state after the last frame
    advantages: np.ndarray | None = None
    returns: np.ndarray | None = None

    @property
    def num_frames(self) -> int:
        return self.rewards.size


def compute_gae(buffer: RolloutBuffer, discount: float, lam: float) -> RolloutBuffer:
    """GAE(lambda) backward recursion with done-masking.

    A done flag at step t cuts both the bootstrap value of the transition
    and the recursive tail, so episodes never leak into each other.
    Returns are advantages + values.
    """
    t_len, p = buffer.rewards.shape
    adv = np.zeros((t_len, p), dtype=np.float64)
    gae = np.zeros(p, dtype=np.float64)
    v_next = buffer.bootstrap
    for t in range(t_len - 1, -1, -1):
        nonterminal = 1.0 - buffer.dones[t]
        delta = buffer.rewards[t] + discount * v_next * nonterminal - buffer.values[t]
        gae = delta + discount * lam * nonterminal * gae
        adv[t] = gae
        v_next = buffer.values[t]
    buffer.advantages = adv
    buffer.returns = adv + buffer.values
    return buffer
