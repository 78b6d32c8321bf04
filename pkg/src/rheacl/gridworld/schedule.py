"""Global step-budget decay.

Every environment keeps its default step budget for the first 500k training
iterations; after that the budget shrinks linearly, bottoming out at 15% of
the default. Tighter budgets punish slow solutions harder, since the success
reward decays with the fraction of the budget spent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from rheacl.gridworld.types import EnvSpec


@dataclass
class StepBudgetSchedule:
    decay_start: int = 500_000
    decay_span: int = 2_000_000
    floor: float = 0.15
    # Optional per-env overrides of the built-in defaults, keyed by env_id.
    default_overrides: dict[str, int] = field(default_factory=dict)

    def multiplier(self, iterations_done: int) -> float:
        if iterations_done < 0:
            raise ValueError("iterations_done must be >= 0")
        if iterations_done <= self.decay_start:
            return 1.0
        # Single division keeps the golden points (0.5, 0.15) float-exact.
        remaining = self.decay_span - (iterations_done - self.decay_start)
        return max(remaining / self.decay_span, self.floor)

    def default_for(self, spec: EnvSpec) -> int:
        return self.default_overrides.get(spec.env_id, spec.default_max_steps)


def max_steps_for(schedule: StepBudgetSchedule, spec: EnvSpec, iterations_done: int) -> int:
    """Current step budget for ``spec``, never below 1."""
    return max(1, round(schedule.default_for(spec) * schedule.multiplier(iterations_done)))
