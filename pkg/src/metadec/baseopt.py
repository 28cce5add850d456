"""Parameterized differential evolution: the inner-level solver.

One :func:`update` call is one DE generation driven entirely by the control
object handed down from the meta level.  Selection is greedy one-to-one with
trial-wins-ties so the search can drift across plateaus; donors are clamped
to the box before crossover, so the population always stays inside it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    InvalidControlError,
    PopulationSizeError,
    StrategyArityError,
)
from .problems import ProblemInstance, evaluate_many, initialize_population


class Strategy(enum.Enum):
    RAND_1 = "rand/1"
    BEST_1 = "best/1"
    CURRENT_TO_BEST_1 = "current-to-best/1"
    RAND_2 = "rand/2"


# distinct random indices (excluding the target) each strategy draws
_ARITY = {
    Strategy.RAND_1: 3,
    Strategy.BEST_1: 2,
    Strategy.CURRENT_TO_BEST_1: 2,
    Strategy.RAND_2: 5,
}

DEFAULT_F = 0.5
DEFAULT_CR = 0.9
DEFAULT_POP_SIZE = 50


@dataclass
class BaseControl:
    """Per-generation DE control: the learned object."""

    F: float = DEFAULT_F
    CR: float = DEFAULT_CR
    strategy: Strategy = Strategy.RAND_1

    def __post_init__(self):
        if not (np.isfinite(self.F) and np.isfinite(self.CR)):
            raise InvalidControlError(f"non-finite control: F={self.F}, CR={self.CR}")
        if not (0.0 <= self.F <= 1.0 and 0.0 <= self.CR <= 1.0):
            raise InvalidControlError(
                f"F and CR must lie in [0, 1], got F={self.F}, CR={self.CR}"
            )
        if not isinstance(self.strategy, Strategy):
            raise InvalidControlError(f"unknown strategy {self.strategy!r}")


@dataclass
class BasePerformance:
    """What one generation achieved, as seen by the meta level."""

    best_f: float
    improvement: float
    evals_used: int


@dataclass(eq=False)
class BaseOptimizerState:
    population: np.ndarray
    fitness: np.ndarray
    best_x: np.ndarray
    best_f: float
    generation: int
    evals_used: int


def init(
    problem: ProblemInstance, pop_size: int, rng: np.random.Generator
) -> BaseOptimizerState:
    """Uniform population in the box, fully evaluated."""
    if pop_size < 4:
        raise PopulationSizeError(f"pop_size must be >= 4, got {pop_size}")
    population = initialize_population(problem, pop_size, rng)
    fitness = evaluate_many(problem, population)
    best = int(np.argmin(fitness))
    return BaseOptimizerState(
        population=population,
        fitness=fitness,
        best_x=population[best].copy(),
        best_f=float(fitness[best]),
        generation=0,
        evals_used=pop_size,
    )


def mutate(
    state: BaseOptimizerState,
    strategy: Strategy,
    F: float,
    target_index: int,
    rng: np.random.Generator,
    indices: tuple[int, ...] | None = None,
) -> np.ndarray:
    """Donor vector per the classical formulas.

    ``indices`` overrides the random distinct-index draw (used by tests).
    """
    pop = state.population
    n = pop.shape[0]
    k = _ARITY[strategy]
    if n - 1 < k:
        raise StrategyArityError(
            f"{strategy.value} needs {k} distinct non-target rows, population has {n}"
        )
    if indices is None:
        candidates = np.delete(np.arange(n), target_index)
        indices = rng.choice(candidates, size=k, replace=False)
    r = [pop[i] for i in indices]
    if strategy is Strategy.RAND_1:
        return r[0] + F * (r[1] - r[2])
    if strategy is Strategy.BEST_1:
        best = pop[int(np.argmin(state.fitness))]
        return best + F * (r[0] - r[1])
    if strategy is Strategy.CURRENT_TO_BEST_1:
        best = pop[int(np.argmin(state.fitness))]
        target = pop[target_index]
        return target + F * (best - target) + F * (r[0] - r[1])
    return r[0] + F * (r[1] - r[2]) + F * (r[3] - r[4])


def crossover_bin(
    target: np.ndarray,
    donor: np.ndarray,
    CR: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Binomial crossover; draws j_rand first, then one uniform per coordinate."""
    target = np.asarray(target, dtype=float)
    donor = np.asarray(donor, dtype=float)
    if target.shape != donor.shape or target.ndim != 1:
        raise DimensionError(
            f"target and donor must be equal-length vectors, got {target.shape} "
            f"and {donor.shape}"
        )
    dim = target.shape[0]
    j_rand = int(rng.integers(dim))
    draws = rng.random(dim)
    take = draws < CR
    take[j_rand] = True
    return np.where(take, donor, target)


def update(
    state: BaseOptimizerState,
    problem: ProblemInstance,
    control: BaseControl,
    rng: np.random.Generator,
) -> tuple[BaseOptimizerState, BasePerformance]:
    """One full DE generation: mutate, clamp, crossover, greedy selection.

    Mutates ``state`` in place and returns it together with the generation's
    performance summary.
    """
    if not (np.isfinite(control.F) and np.isfinite(control.CR)):
        raise InvalidControlError("control contains non-finite values")
    pop = state.population
    n, dim = pop.shape
    trials = np.empty_like(pop)
    for i in range(n):
        donor = mutate(state, control.strategy, control.F, i, rng)
        np.clip(donor, problem.lower_bound, problem.upper_bound, out=donor)
        trials[i] = crossover_bin(pop[i], donor, control.CR, rng)
    trial_fitness = evaluate_many(problem, trials)

    old_best = state.best_f
    wins = trial_fitness <= state.fitness
    pop[wins] = trials[wins]
    state.fitness[wins] = trial_fitness[wins]
    best = int(np.argmin(state.fitness))
    if state.fitness[best] <= state.best_f:
        state.best_f = float(state.fitness[best])
        state.best_x = pop[best].copy()
    state.generation += 1
    state.evals_used += n
    improvement = old_best - state.best_f
    return state, BasePerformance(
        best_f=state.best_f, improvement=improvement, evals_used=state.evals_used
    )
