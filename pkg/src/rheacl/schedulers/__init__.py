from rheacl.schedulers.base import (
    SCHEDULER_KINDS,
    PpoTrainable,
    RunLog,
    RunResult,
    SchedulerConfig,
    Trainable,
)
from rheacl.schedulers.baselines import run_all_parallel, run_spcl, run_vanilla
from rheacl.schedulers.rhea import run_rhea_cl, run_rhrs

RUNNERS = {
    "RheaCL": run_rhea_cl,
    "RHRS": run_rhrs,
    "AllParallel": run_all_parallel,
    "SPCL": run_spcl,
    "NoCurriculum": run_vanilla,
}


def run_scheduler(config: SchedulerConfig, score, seed: int, trainable,
                  log=None, **kwargs) -> RunResult:
    """Dispatch on config.kind; kwargs pass through to the specific runner."""
    try:
        runner = RUNNERS[config.kind]
    except KeyError:
        raise ValueError(f"unknown scheduler kind {config.kind!r}") from None
    return runner(config, score, seed, trainable, log, **kwargs)


__all__ = [
    "SCHEDULER_KINDS",
    "PpoTrainable",
    "RunLog",
    "RunResult",
    "SchedulerConfig",
    "Trainable",
    "RUNNERS",
    "run_scheduler",
    "run_all_parallel",
    "run_spcl",
    "run_vanilla",
    "run_rhea_cl",
    "run_rhrs",
]
