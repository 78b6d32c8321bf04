"""Parallel-episode rollout collection.

A RolloutEngine owns a pool of live environments, one per worker. Which
environment a worker runs is decided by a selector callback, which is how
the schedulers realize their policies: fixed round-robin over a curriculum
step's env set, per-episode cycling, or a single pinned level. Workers
auto-reset, drawing each episode's step budget from the decay schedule at
the current frame count.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from rheacl import gridworld as gw
from rheacl.ppo import network
from rheacl.ppo.buffer import RolloutBuffer
from rheacl.seeding import spawn_seed

EnvSelector = Callable[[int, int], gw.EnvSpec]  # (worker, episode) -> spec


def round_robin(pool: "list[gw.EnvSpec]") -> EnvSelector:
    """Workers partitioned over the pool by worker index (paraEnv > 1)."""
    if not pool:
        raise ValueError("environment pool must be non-empty")
    return lambda worker, episode: pool[worker % len(pool)]


def cycle_per_episode(roster: "list[gw.EnvSpec]") -> EnvSelector:
    """Each worker advances to the next roster entry after every episode."""
    if not roster:
        raise ValueError("roster must be non-empty")
    return lambda worker, episode: roster[(worker + episode) % len(roster)]


class RolloutEngine:
    def __init__(
        self,
        selector: EnvSelector,
        schedule: gw.StepBudgetSchedule,
        num_processes: int,
        frames_per_process: int,
        rng: np.random.Generator,
        frames_base: int = 0,
        tanh_heads: bool = False,
    ):
        self.selector = selector
        self.schedule = schedule
        self.num_processes = num_processes
        self.frames_per_process = frames_per_process
        self.rng = rng
        self.frames = frames_base
        self.tanh_heads = tanh_heads
        self.episode_counts = [0] * num_processes
        self.states: list[gw.GridState] = []
        self.obs = np.zeros((num_processes, network.VIEW, network.VIEW, 3), dtype=np.uint8)
        self.env_trace: list[list[gw.EnvSpec]] = [[] for _ in range(num_processes)]
        for w in range(num_processes):
            self.states.append(self._fresh_state(w))

    def _fresh_state(self, worker: int) -> gw.GridState:
        spec = self.selector(worker, self.episode_counts[worker])
        self.env_trace[worker].append(spec)
        max_steps = gw.max_steps_for(self.schedule, spec, self.frames)
        state, obs = gw.reset(spec, spawn_seed(self.rng), max_steps)
        self.obs[worker] = obs.grid
        return state

    @property
    def rollout_frames(self) -> int:
        return self.num_processes * self.frames_per_process

    def collect(self, params: np.ndarray) -> RolloutBuffer:
        """One rollout: frames_per_process steps for every worker."""
        t_len, p = self.frames_per_process, self.num_processes
        v = network.VIEW
        obs = np.zeros((t_len, p, v, v, 3), dtype=np.uint8)
        actions = np.zeros((t_len, p), dtype=np.int64)
        log_probs = np.zeros((t_len, p), dtype=np.float64)
        values = np.zeros((t_len, p), dtype=np.float64)
        rewards = np.zeros((t_len, p), dtype=np.float64)
        dones = np.zeros((t_len, p), dtype=bool)

        for t in range(t_len):
            obs[t] = self.obs
            logits, vals = network.forward_np(
                params, network.normalize_obs(self.obs), self.tanh_heads
            )
            acts, logp = network.sample_actions(logits, self.rng)
            actions[t] = acts
            log_probs[t] = logp
            values[t] = vals
            for w in range(p):
                state, ob, reward, done = gw.step(self.states[w], int(acts[w]))
                rewards[t, w] = reward
                dones[t, w] = done
                if done:
                    self.episode_counts[w] += 1
                    self.states[w] = self._fresh_state(w)
                else:
                    self.obs[w] = ob.grid
            self.frames += p

        _, bootstrap = network.forward_np(
            params, network.normalize_obs(self.obs), self.tanh_heads
        )
        return RolloutBuffer(obs, actions, log_probs, values, rewards, dones,
                             bootstrap.copy())
