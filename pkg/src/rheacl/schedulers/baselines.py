"""Reference schedules: all-parallel cycling, self-paced, and no curriculum.

All three share the rolling-horizon runs' log schema and evaluation cadence
so their CSVs line up for aggregation.
"""

from __future__ import annotations

import numpy as np

from rheacl.curriculum import Curriculum, ScoreConfig, make_step
from rheacl.ppo.engine import cycle_per_episode, round_robin
from rheacl.schedulers.base import (
    RunLog,
    RunResult,
    SchedulerConfig,
    Trainable,
    returns_payload,
    roster_mean,
)
from rheacl.seeding import stream


def _log_eval(log, config, trainable, block, rng, text):
    returns = trainable.roster_returns(rng)
    log.record(
        frames=trainable.frames_done, scheduler=config.kind, phase="commit",
        epoch=block, generation=None, individual=None, step_index=None,
        curriculum=text, returns=returns_payload(returns),
        roster_mean=roster_mean(returns), candidate_frames=0,
        committed_frames=trainable.frames_done)
    return returns


def run_all_parallel(config: SchedulerConfig, score: ScoreConfig, seed: int,
                     trainable: Trainable, log: RunLog | None = None) -> RunResult:
    """Cycle every worker through the roster, one level per episode."""
    roster = config.roster_specs()
    log = log if log is not None else RunLog()
    text = str(Curriculum((make_step(roster),)))
    block = 0
    while trainable.frames_done < config.total_frames:
        trainable.train_selected(cycle_per_episode(roster), config.iter_steps,
                                 stream(seed, block, "train"))
        _log_eval(log, config, trainable, block, stream(seed, block, "eval"), text)
        block += 1
    return RunResult(log, trainable.frames_done, 0)


def run_spcl(config: SchedulerConfig, score: ScoreConfig, seed: int,
             trainable: Trainable, log: RunLog | None = None) -> RunResult:
    """Self-paced level selection by performance thresholds.

    Starts at the smallest level; after every check interval the level steps
    up when the agent's return there beats the upper threshold and steps
    down when it drops below the lower one, clamped to the roster."""
    roster = sorted(config.roster_specs(), key=lambda s: s.size)
    log = log if log is not None else RunLog()
    level = 0
    block = 0
    while trainable.frames_done < config.total_frames:
        current = roster[level]
        trainable.train_selected(round_robin([current]), config.spcl_check_every,
                                 stream(seed, block, "train"))
        text = str(Curriculum((make_step([current]),)))
        returns = _log_eval(log, config, trainable, block,
                            stream(seed, block, "eval"), text)
        performance = returns[current]
        if performance > config.spcl_up:
            level = min(level + 1, len(roster) - 1)
        elif performance < config.spcl_down:
            level = max(level - 1, 0)
        block += 1
    return RunResult(log, trainable.frames_done, 0)


def run_vanilla(config: SchedulerConfig, score: ScoreConfig, seed: int,
                trainable: Trainable, log: RunLog | None = None) -> RunResult:
    """Plain PPO on the largest roster level; evaluation still spans the roster."""
    roster = config.roster_specs()
    largest = max(roster, key=lambda s: s.size)
    log = log if log is not None else RunLog()
    text = str(Curriculum((make_step([largest]),)))
    block = 0
    while trainable.frames_done < config.total_frames:
        trainable.train_selected(round_robin([largest]), config.iter_steps,
                                 stream(seed, block, "train"))
        _log_eval(log, config, trainable, block, stream(seed, block, "eval"), text)
        block += 1
    return RunResult(log, trainable.frames_done, 0)
