"""Task environment: samples problems, featurizes search state, pays rewards.

One environment serves one replication.  All randomness (problem sampling,
population init, DE operators) flows from the single generator created at
construction, so a fixed seed makes the whole (reset, step*) sequence
bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import baseopt
from .baseopt import BaseControl, BaseOptimizerState
from .errors import ConfigurationError, EpisodeFinishedError
from .problems import ProblemInstance

OBSERVATION_LENGTH = 8
SOLVED_TOL = 1e-8
STAGNATION_TOL = 1e-12
_EPS = 1e-12


@dataclass
class EnvConfig:
    pop_size: int = baseopt.DEFAULT_POP_SIZE
    max_steps: int = 500
    mode: str = "train"  # "train": sample from pool; "test": designated instance
    solved_tol: float | None = SOLVED_TOL  # None disables early termination
    known_optimum: bool = True  # featurize error against f_opt (never the reward)

    def __post_init__(self):
        if self.max_steps < 1:
            raise ConfigurationError("max_steps must be >= 1")
        if self.mode not in ("train", "test"):
            raise ConfigurationError(f"unknown mode {self.mode!r}")


@dataclass
class Transition:
    observation: np.ndarray
    action: BaseControl
    reward: float
    next_observation: np.ndarray
    done: bool


def compute_reward(prev_best: float, new_best: float) -> float:
    """Relative improvement of the best value, clipped to [0, 1]."""
    r = (prev_best - new_best) / (abs(prev_best) + _EPS)
    return float(min(max(r, 0.0), 1.0))


def featurize(
    state: BaseOptimizerState,
    problem: ProblemInstance,
    step_index: int,
    max_steps: int,
    stagnation: int,
    last_improvement: float = 0.0,
    error_proxy: float | None = None,
) -> np.ndarray:
    """The fixed 8-feature observation.

    ``error_proxy`` defaults to the known-optimum error best_f - f_opt; the
    environment passes its own proxy in blind mode.
    """
    if error_proxy is None:
        error_proxy = max(state.best_f - problem.f_opt, 0.0)
    fitness = state.fitness
    if float(np.max(fitness) - np.min(fitness)) == 0.0:
        cv = 0.0
    else:
        cv = float(np.std(fitness)) / (abs(float(np.mean(fitness))) + _EPS)
    pop = state.population
    n = pop.shape[0]
    if n > 1:
        diff = pop[:, None, :] - pop[None, :, :]
        dist = np.sqrt(np.sum(diff**2, axis=-1))
        iu = np.triu_indices(n, k=1)
        mean_dist = float(np.mean(dist[iu]))
    else:
        mean_dist = 0.0
    diagonal = float(np.sqrt(np.sum((problem.upper_bound - problem.lower_bound) ** 2)))
    return np.array(
        [
            step_index / max_steps,
            np.log10(1.0 + max(error_proxy, 0.0)) / 10.0,
            last_improvement,
            min(cv, 1.0),
            min(mean_dist / diagonal, 1.0),
            stagnation / max_steps,
            problem.dim / 50.0,
            state.generation / max_steps,
        ]
    )


class MetaEnv:
    """Episode loop over a problem pool driving one base-optimizer."""

    def __init__(
        self,
        problems: Sequence[ProblemInstance],
        config: EnvConfig,
        seed: int | np.random.SeedSequence = 0,
    ):
        if not problems:
            raise ConfigurationError("problem pool must be non-empty")
        self.problems = list(problems)
        self.config = config
        self._rng = np.random.default_rng(seed)
        self.problem: ProblemInstance | None = None
        self.state: BaseOptimizerState | None = None
        self.step_index = 0
        self.stagnation = 0
        self.last_improvement = 0.0
        self.done = True
        self.initial_best_f = float("nan")
        self.eval_counts: dict[int, int] = {}

    # -- episode API ----------------------------------------------------

    def reset(self) -> np.ndarray:
        if self.config.mode == "train":
            idx = int(self._rng.integers(len(self.problems)))
        else:
            idx = 0
        self.problem = self.problems[idx]
        self.state = baseopt.init(self.problem, self.config.pop_size, self._rng)
        self.step_index = 0
        self.stagnation = 0
        self.last_improvement = 0.0
        self.done = False
        self.initial_best_f = self.state.best_f
        self._count_evals(self.config.pop_size)
        return self._observe()

    def step(self, action: BaseControl) -> Transition:
        if self.state is None:
            raise EpisodeFinishedError("reset() must be called before step()")
        if self.done:
            raise EpisodeFinishedError("episode already finished")
        obs = self._observe()
        prev_best = self.state.best_f
        _, perf = baseopt.update(self.state, self.problem, action, self._rng)
        reward = compute_reward(prev_best, self.state.best_f)
        self.last_improvement = reward
        if perf.improvement < STAGNATION_TOL:
            self.stagnation += 1
        else:
            self.stagnation = 0
        self.step_index += 1
        self._count_evals(self.config.pop_size)
        solved = (
            self.config.solved_tol is not None
            and self.best_error <= self.config.solved_tol
        )
        self.done = self.step_index >= self.config.max_steps or solved
        next_obs = self._observe()
        return Transition(
            observation=obs,
            action=action,
            reward=reward,
            next_observation=next_obs,
            done=self.done,
        )

    # -- views ------------------------------------------------------------

    @property
    def best_error(self) -> float:
        return max(self.state.best_f - self.problem.f_opt, 0.0)

    @property
    def initial_error(self) -> float:
        return max(self.initial_best_f - self.problem.f_opt, 0.0)

    def _observe(self) -> np.ndarray:
        if self.config.known_optimum:
            proxy = self.best_error
        else:
            # blind proxy: progress made since the episode started
            proxy = max(self.initial_best_f - self.state.best_f, 0.0)
        return featurize(
            self.state,
            self.problem,
            self.step_index,
            self.config.max_steps,
            self.stagnation,
            self.last_improvement,
            error_proxy=proxy,
        )

    def _count_evals(self, n: int) -> None:
        fid = self.problem.function_id
        self.eval_counts[fid] = self.eval_counts.get(fid, 0) + n
