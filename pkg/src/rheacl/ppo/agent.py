"""PPO: clipped-surrogate updates, evaluation, snapshots, checkpoints."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from rheacl import gridworld as gw
from rheacl import tensor as T
from rheacl.ppo import network
from rheacl.ppo.buffer import RolloutBuffer, compute_gae
from rheacl.ppo.engine import EnvSelector, RolloutEngine
from rheacl.seeding import spawn_seed
from rheacl.tensor.adam import AdamState, adam_step


@dataclass
class PpoConfig:
    batch_size: int = 256
    discount: float = 0.99
    lr: float = 0.001
    gae_lambda: float = 0.95
    entropy_coef: float = 0.01
    value_loss_coef: float = 0.5
    max_grad_norm: float = 0.5
    clip_eps: float = 0.2
    adam_eps: float = 1e-8
    adam_alpha: float = 0.99
    frames_per_process: int = 128
    update_epochs: int = 4
    num_processes: int = 16
    # The literal network description puts tanh on the actor output, which
    # caps any action's probability near 0.55 and in practice stalls
    # learning; raw logits are the working default, tanh stays available.
    tanh_heads: bool = False
    normalize_advantages: bool = True
    # Std floor for the normalization: batches with no reward signal carry
    # only critic round-off (std ~2e-3 at init), and dividing by that would
    # amplify noise to full strength and collapse the policy. One success
    # frame already lifts the batch std past 0.05.
    advantage_std_floor: float = 0.004

    def validate(self) -> None:
        if not 0.0 < self.clip_eps < 1.0:
            raise ValueError(f"clip_eps must be in (0,1), got {self.clip_eps}")
        if not 0.0 < self.discount <= 1.0:
            raise ValueError(f"discount must be in (0,1], got {self.discount}")
        if (self.frames_per_process * self.num_processes) % self.batch_size:
            raise ValueError(
                f"batch_size {self.batch_size} must divide the "
                f"{self.frames_per_process * self.num_processes} frames per rollout"
            )

    @property
    def rollout_frames(self) -> int:
        return self.frames_per_process * self.num_processes


@dataclass
class AgentSnapshot:
    """Copy of everything needed to replay training from this point."""

    params: np.ndarray
    adam: AdamState
    frames_done: int


@dataclass
class UpdateStats:
    policy_loss: float
    value_loss: float
    entropy: float
    grad_norm: float


class PpoAgent:
    def __init__(self, config: PpoConfig, rng: np.random.Generator):
        self.config = config
        self.params = network.init_params(rng)
        self.adam = AdamState(network.NUM_PARAMS, lr=config.lr,
                              alpha=config.adam_alpha, eps=config.adam_eps)
        self.frames_done = 0

    # -- persistence ---------------------------------------------------

    def snapshot(self) -> AgentSnapshot:
        return AgentSnapshot(self.params.copy(), self.adam.copy(), self.frames_done)

    def restore(self, snap: AgentSnapshot) -> None:
        self.params = snap.params.copy()
        self.adam = snap.adam.copy()
        self.frames_done = snap.frames_done

    def save(self, path) -> None:
        np.savez(
            path,
            format_version=1,
            params=self.params,
            adam_m=self.adam.m,
            adam_v=self.adam.v,
            adam_t=self.adam.t,
            frames_done=self.frames_done,
        )

    @classmethod
    def load(cls, path, config: PpoConfig) -> "PpoAgent":
        blob = np.load(path)
        if int(blob["format_version"]) != 1:
            raise ValueError(f"unsupported checkpoint version {blob['format_version']}")
        agent = cls.__new__(cls)
        agent.config = config
        agent.params = blob["params"].astype(np.float64)
        agent.adam = AdamState(agent.params.size, lr=config.lr,
                               alpha=config.adam_alpha, eps=config.adam_eps,
                               t=int(blob["adam_t"]))
        agent.adam.m = blob["adam_m"].astype(np.float64)
        agent.adam.v = blob["adam_v"].astype(np.float64)
        agent.frames_done = int(blob["frames_done"])
        return agent

    # -- learning ------------------------------------------------------

    def update(self, buffer: RolloutBuffer, rng: np.random.Generator) -> UpdateStats:
        """update_epochs passes of shuffled minibatches over the buffer."""
        cfg = self.config
        if buffer.advantages is None:
            raise ValueError("compute_gae must run before update")
        n = buffer.num_frames
        if n % cfg.batch_size:
            raise ValueError(f"batch_size {cfg.batch_size} must divide {n} frames")

        flat_obs = buffer.obs.reshape(n, *buffer.obs.shape[2:])
        flat_actions = buffer.actions.reshape(n)
        flat_logp_old = buffer.log_probs.reshape(n)
        flat_returns = buffer.returns.reshape(n)
        adv = buffer.advantages.reshape(n)
        if cfg.normalize_advantages:
            adv = normalize_advantages(adv, cfg.advantage_std_floor)

        stats = []
        for _ in range(cfg.update_epochs):
            order = rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                stats.append(self._minibatch_step(
                    flat_obs[idx], flat_actions[idx], flat_logp_old[idx],
                    adv[idx], flat_returns[idx]))
        return UpdateStats(*map(float, np.mean(stats, axis=0)))

    def _minibatch_step(self, obs_u8, actions, logp_old, adv, returns):
        cfg = self.config
        parts = build_loss(self.params, cfg, obs_u8, actions, logp_old, adv, returns)
        if not math.isfinite(float(parts["loss"].array)):
            raise FloatingPointError("non-finite PPO loss; aborting run")
        parts["tape"].backward(parts["loss"])
        grad = network.flat_grad(parts["leaves"])
        norm = float(np.linalg.norm(grad))
        if norm > cfg.max_grad_norm:
            grad *= cfg.max_grad_norm / norm
        self.params = adam_step(self.adam, self.params, grad)
        return (float(parts["policy_loss"].array), float(parts["value_loss"].array),
                float(parts["entropy"].array), norm)

    def train_segment(self, selector: EnvSelector, frames: int,
                      schedule: gw.StepBudgetSchedule,
                      rng: np.random.Generator) -> int:
        """Train for at least ``frames`` frames (whole rollouts); returns the
        exact frame count consumed."""
        engine = RolloutEngine(
            selector, schedule, self.config.num_processes,
            self.config.frames_per_process, rng,
            frames_base=self.frames_done, tanh_heads=self.config.tanh_heads)
        n_rollouts = math.ceil(frames / engine.rollout_frames)
        return self.train_rollouts(engine, n_rollouts, rng)

    def train_rollouts(self, engine: RolloutEngine, n_rollouts: int,
                       rng: np.random.Generator) -> int:
        consumed = 0
        for _ in range(n_rollouts):
            buffer = engine.collect(self.params)
            compute_gae(buffer, self.config.discount, self.config.gae_lambda)
            self.update(buffer, rng)
            consumed += buffer.num_frames
            self.frames_done = engine.frames
        return consumed


def normalize_advantages(adv: np.ndarray, std_floor: float = 1e-8) -> np.ndarray:
    """Zero-mean, unit-std per update batch (std floored, see PpoConfig)."""
    return (adv - adv.mean()) / max(float(adv.std()), std_floor)


def build_loss(params: np.ndarray, cfg: PpoConfig, obs_u8, actions, logp_old,
               adv, returns) -> dict:
    """Taped PPO loss on one minibatch.

    loss = -mean(min(ratio*A, clip(ratio, 1 +- eps)*A))
           + value_loss_coef * mean((V - R)^2) - entropy_coef * mean(H)

    Returns the tape, the parameter leaves, and every loss component.
    """
    tape = T.Tape()
    logits, value, leaves = network.forward_tape(
        tape, params, network.normalize_obs(obs_u8), cfg.tanh_heads)
    lsm = T.log_softmax(logits)
    logp_new = T.take_last(lsm, actions)
    ratio = T.exp(T.sub(logp_new, tape.constant(logp_old)))
    adv_c = tape.constant(adv)
    surr1 = T.mul(ratio, adv_c)
    surr2 = T.mul(T.clip(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps), adv_c)
    policy_loss = T.neg(T.mean_all(T.minimum(surr1, surr2)))
    value_loss = T.mean_all(T.square(T.sub(value, tape.constant(returns))))
    entropy = T.mean_all(T.entropy_last(logits))
    loss = T.add(policy_loss,
                 T.sub(T.scale(value_loss, cfg.value_loss_coef),
                       T.scale(entropy, cfg.entropy_coef)))
    return {"tape": tape, "leaves": leaves, "loss": loss,
            "policy_loss": policy_loss, "value_loss": value_loss,
            "entropy": entropy, "ratio": ratio}


def run_episodes(params: np.ndarray, spec: gw.EnvSpec, episodes: int,
                 max_steps: int, rng: np.random.Generator,
                 tanh_heads: bool = False) -> list[gw.EpisodeResult]:
    """Roll out ``episodes`` stochastic-policy episodes in lockstep."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    states = []
    obs = np.zeros((episodes, network.VIEW, network.VIEW, 3), dtype=np.uint8)
    for i in range(episodes):
        state, ob = gw.reset(spec, spawn_seed(rng), max_steps)
        states.append(state)
        obs[i] = ob.grid
    results: list[gw.EpisodeResult | None] = [None] * episodes
    active = list(range(episodes))
    returns = np.zeros(episodes)
    while active:
        logits, _ = network.forward_np(params, network.normalize_obs(obs[active]),
                                       tanh_heads)
        actions, _ = network.sample_actions(logits, rng)
        still = []
        for row, i in enumerate(active):
            state, ob, reward, done = gw.step(states[i], int(actions[row]))
            returns[i] += reward
            if done:
                results[i] = gw.EpisodeResult(returns[i], state.steps_taken,
                                              state.outcome)
            else:
                obs[i] = ob.grid
                still.append(i)
        active = still
    return results  # type: ignore[return-value]


def evaluate(params: np.ndarray, spec: gw.EnvSpec, episodes: int,
             schedule: gw.StepBudgetSchedule, iterations_done: int,
             rng: np.random.Generator, tanh_heads: bool = False) -> float:
    """Mean episode return at the schedule's current step budget."""
    max_steps = gw.max_steps_for(schedule, spec, iterations_done)
    results = run_episodes(params, spec, episodes, max_steps, rng, tanh_heads)
    return float(np.mean([r.return_ for r in results]))
