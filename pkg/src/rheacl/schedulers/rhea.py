"""The rolling-horizon curriculum optimizer and its random-search ablation.

Each epoch: snapshot the agent, score a population of candidate curricula
(every candidate trains from the same snapshot, so scores are
order-independent), evolve between generations, then restore the snapshot
and train for real on the first step of the best curriculum. The best
curriculum also seeds the next epoch's population, shifted one step forward.

The random-search variant (RHRS) keeps the identical loop but draws every
generation's population fresh instead of evolving it.
"""

from __future__ import annotations

import numpy as np

from rheacl.curriculum import Curriculum, RewardsMatrix, ScoreConfig, best_curriculum
from rheacl.evolution import evolve, init_population
from rheacl.schedulers.base import (
    RunLog,
    RunResult,
    SchedulerConfig,
    Trainable,
    returns_payload,
    roster_mean,
)
from rheacl.seeding import stream


def run_rhea_cl(config: SchedulerConfig, score: ScoreConfig, seed: int,
                trainable: Trainable, log: RunLog | None = None,
                initial_population: "list[Curriculum] | None" = None,
                keep_epoch_trace: bool = False) -> RunResult:
    return _run_rolling_horizon(config, score, seed, trainable, log,
                                evolutionary=True,
                                initial_population=initial_population,
                                keep_epoch_trace=keep_epoch_trace)


def run_rhrs(config: SchedulerConfig, score: ScoreConfig, seed: int,
             trainable: Trainable, log: RunLog | None = None,
             keep_epoch_trace: bool = False) -> RunResult:
    return _run_rolling_horizon(config, score, seed, trainable, log,
                                evolutionary=False, initial_population=None,
                                keep_epoch_trace=keep_epoch_trace)


def _run_rolling_horizon(config, score, seed, trainable, log, evolutionary,
                         initial_population, keep_epoch_trace) -> RunResult:
    evo = config.evolution
    roster = config.roster_specs()
    log = log if log is not None else RunLog()
    candidate_frames = 0
    seed_curriculum: Curriculum | None = None
    epoch_trace = []
    epoch = 0

    while trainable.frames_done < config.total_frames:
        base_frames = trainable.frames_done
        base = trainable.snapshot()
        matrix = RewardsMatrix(evo.generations, evo.population_size,
                               config.rewards_record_mode)
        if epoch == 0 and initial_population is not None:
            if len(initial_population) != evo.population_size:
                raise ValueError("initial_population size must match population_size")
            population = list(initial_population)
        else:
            population = init_population(
                evo, roster, stream(seed, epoch, "population"), seed_curriculum
            ).individuals

        first_step_snaps = [None] * evo.population_size
        for gen in range(evo.generations):
            if evolutionary and gen > 0:
                fitness = matrix.generation_scores(gen - 1)
                population = evolve(
                    _wrap(population), fitness, evo, roster,
                    stream(seed, epoch, gen, "population")).individuals
            elif not evolutionary and gen > 0:
                population = init_population(
                    evo, roster, stream(seed, epoch, gen, "population")).individuals

            for i, curriculum in enumerate(population):
                trainable.restore(base)
                for j, env_set in enumerate(curriculum.steps):
                    used = trainable.train_env_set(
                        env_set, config.iter_steps,
                        stream(seed, epoch, gen, i, j, "train"))
                    candidate_frames += used
                    if j == 0:
                        first_step_snaps[i] = trainable.snapshot()
                    returns = trainable.roster_returns(
                        stream(seed, epoch, gen, i, j, "eval"))
                    reward_j = roster_mean(returns)
                    matrix.record(gen, i, reward_j * score.gamma**j)
                    log.record(
                        frames=base_frames, scheduler=config.kind,
                        phase="candidate", epoch=epoch, generation=gen,
                        individual=i, step_index=j, curriculum=str(curriculum),
                        returns=returns_payload(returns), roster_mean=reward_j,
                        candidate_frames=candidate_frames,
                        committed_frames=base_frames)

        best_idx = int(np.argmax(matrix.entries[-1]))
        best = best_curriculum(matrix, population)
        assert population[best_idx] == best

        if config.commit_reuse_weights and first_step_snaps[best_idx] is not None:
            trainable.restore(first_step_snaps[best_idx])
        else:
            trainable.restore(base)
            trainable.train_env_set(best.steps[0], config.iter_steps,
                                    stream(seed, epoch, "commit"))
        returns = trainable.roster_returns(stream(seed, epoch, "commit", "eval"))
        log.record(
            frames=trainable.frames_done, scheduler=config.kind, phase="commit",
            epoch=epoch, generation=None, individual=None, step_index=None,
            curriculum=str(best), returns=returns_payload(returns),
            roster_mean=roster_mean(returns), candidate_frames=candidate_frames,
            committed_frames=trainable.frames_done)

        if keep_epoch_trace:
            epoch_trace.append({"epoch": epoch, "snapshot": base, "best": best})
        seed_curriculum = best
        epoch += 1

    return RunResult(log, trainable.frames_done, candidate_frames, epoch_trace)


def _wrap(individuals):
    from rheacl.evolution import Population

    return Population(list(individuals))
