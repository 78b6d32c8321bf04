"""Genetic search over curricula, plus the Sobol grid for rate sweeps.

Operators are deliberately simple and isolated so they can be swapped:
uniform per-step crossover, per-step resampling mutation, tournament
selection of size 2 with elitism.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from rheacl.curriculum import Curriculum, CurriculumStep, make_step
from rheacl.gridworld import EnvSpec


@dataclass
class EvolutionConfig:
    population_size: int = 3     # curricCount
    generations: int = 3         # nGen
    curriculum_length: int = 3   # curricLength
    mutation_rate: float = 0.5
    crossover_rate: float = 0.5
    para_env: int = 2            # max environments trained per step
    elitism_count: int = 1

    def validate(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if self.curriculum_length < 1:
            raise ValueError("curriculum_length must be >= 1")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must be in [0,1]")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover_rate must be in [0,1]")
        if self.para_env < 1:
            raise ValueError("para_env must be >= 1")
        if not 1 <= self.elitism_count < self.population_size:
            raise ValueError("elitism_count must be in [1, population_size)")


@dataclass
class Population:
    individuals: list[Curriculum]
    fitness: np.ndarray | None = None


def random_step(config: EvolutionConfig, roster: "list[EnvSpec]",
                rng: np.random.Generator) -> CurriculumStep:
    width = min(config.para_env, len(roster))
    k = int(rng.integers(1, width + 1))
    picks = rng.choice(len(roster), size=k, replace=False)
    return make_step(roster[i] for i in picks)


def random_curriculum(config: EvolutionConfig, roster: "list[EnvSpec]",
                      rng: np.random.Generator) -> Curriculum:
    return Curriculum(tuple(random_step(config, roster, rng)
                            for _ in range(config.curriculum_length)))


def init_population(config: EvolutionConfig, roster: "list[EnvSpec]",
                    rng: np.random.Generator,
                    seed_curriculum: Curriculum | None = None) -> Population:
    """Fresh population; with a seed, individual 0 is the seed rolled one
    step forward (dropped head, fresh random tail step)."""
    if not roster:
        raise ValueError("roster must be non-empty")
    individuals = []
    if seed_curriculum is not None:
        shifted = seed_curriculum.steps[1:] + (random_step(config, roster, rng),)
        individuals.append(Curriculum(shifted[-config.curriculum_length:]))
    while len(individuals) < config.population_size:
        individuals.append(random_curriculum(config, roster, rng))
    return Population(individuals)


def select(population: Population, fitness: np.ndarray,
           rng: np.random.Generator, config: EvolutionConfig):
    """Elites (copied unchanged) plus tournament-of-2 parent pairs."""
    if fitness is None or len(fitness) != len(population.individuals):
        raise ValueError("fitness must be populated for the whole population")
    order = np.argsort(-np.asarray(fitness), kind="stable")
    elites = [population.individuals[i] for i in order[: config.elitism_count]]

    def tournament() -> Curriculum:
        i, j = rng.integers(0, len(population.individuals), size=2)
        winner = i if fitness[i] >= fitness[j] else j
        return population.individuals[int(winner)]

    n_children = config.population_size - config.elitism_count
    n_pairs = (n_children + 1) // 2
    pairs = [(tournament(), tournament()) for _ in range(n_pairs)]
    return elites, pairs


def crossover(a: Curriculum, b: Curriculum, rate: float,
              rng: np.random.Generator) -> tuple[Curriculum, Curriculum]:
    """With probability ``rate``, swap each step index independently (p=0.5)."""
    if len(a) != len(b):
        raise ValueError(f"crossover needs equal lengths, got {len(a)} vs {len(b)}")
    if rng.random() >= rate:
        return a, b
    left, right = list(a.steps), list(b.steps)
    for i in range(len(left)):
        if rng.random() < 0.5:
            left[i], right[i] = right[i], left[i]
    return Curriculum(tuple(left)), Curriculum(tuple(right))


def mutate(c: Curriculum, rate: float, roster: "list[EnvSpec]",
           rng: np.random.Generator, config: EvolutionConfig) -> Curriculum:
    """Each step independently resampled with probability ``rate``."""
    steps = tuple(
        random_step(config, roster, rng) if rng.random() < rate else step
        for step in c.steps
    )
    return Curriculum(steps)


def evolve(population: Population, fitness: np.ndarray, config: EvolutionConfig,
           roster: "list[EnvSpec]", rng: np.random.Generator) -> Population:
    """One generation: selection, crossover, mutation. Size-preserving."""
    elites, pairs = select(population, fitness, rng, config)
    children: list[Curriculum] = []
    for pa, pb in pairs:
        ca, cb = crossover(pa, pb, config.crossover_rate, rng)
        children.append(mutate(ca, config.mutation_rate, roster, rng, config))
        children.append(mutate(cb, config.mutation_rate, roster, rng, config))
    next_individuals = (elites + children)[: config.population_size]
    return Population(next_individuals)


# ---------------------------------------------------------------------------
# Sobol sampling for the mutation/crossover rate sweeps


def _direction_numbers(n_bits: int) -> np.ndarray:
    """32-bit direction numbers for the first two Sobol dimensions."""
    v = np.zeros((2, n_bits), dtype=np.uint64)
    # Dimension 1: van der Corput, m_k = 1.
    for k in range(n_bits):
        v[0, k] = 1 << (31 - k)
    # Dimension 2: primitive polynomial x + 1, m_1 = 1,
    # recurrence m_k = 2*m_{k-1} XOR m_{k-1}.
    m = 1
    ms = []
    for k in range(n_bits):
        ms.append(m)
        m = (2 * m) ^ m
    for k, mk in enumerate(ms):
        v[1, k] = mk << (31 - k)
    return v


def sobol_2d(n: int, skip: int = 1) -> np.ndarray:
    """First ``n`` points of the canonical 2-D Sobol sequence.

    ``skip=1`` drops the degenerate all-zeros point, so the first returned
    point is (0.5, 0.5). Gray-code order (Antonov-Saleev construction).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    n_bits = max((n + skip).bit_length() + 1, 8)
    v = _direction_numbers(n_bits)
    out = np.zeros((n, 2), dtype=np.float64)
    state = np.zeros(2, dtype=np.uint64)
    for i in range(1, n + skip):
        c = _lowest_zero_bit(i - 1)
        state ^= v[:, c]
        if i >= skip:
            out[i - skip] = state / 2.0**32
    return out


def _lowest_zero_bit(x: int) -> int:
    c = 0
    while x & 1:
        x >>= 1
        c += 1
    return c


def sobol_rate_grid(n: int) -> list[tuple[float, float]]:
    """(mutation_rate, crossover_rate) pairs covering [0,1]^2 evenly."""
    return [(float(m), float(c)) for m, c in sobol_2d(n)]
