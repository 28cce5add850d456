"""Problem abstraction over the BBOB2009 suite plus the seen/unseen split.

Instances are immutable and pure: identical ``(function_id, dim,
instance_seed)`` triples reproduce bitwise-identical instances, and
evaluation never mutates anything, so instances are safe to share across
concurrent replications.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import bbob
from .errors import (
    DimensionError,
    DomainError,
    InvalidDimensionError,
    InvalidFunctionError,
    InvalidSplitError,
    PopulationSizeError,
)

ALL_FUNCTION_IDS = tuple(range(1, 25))
EASY_TRAIN_UNSEEN = (1, 5, 6, 10, 15, 20)

MIN_POP_SIZE = 4  # smallest population rand/1 mutation can serve


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """A concrete black-box minimisation task with a known optimum.

    ``f_opt`` is drawn uniformly from [-100, 100]; the shifted optimum
    ``x_opt`` lies inside the box.  Evaluation is defined on all of R^D
    (out-of-box points are allowed; bound handling is the optimizer's job).
    """

    function_id: int
    dim: int
    instance_seed: int
    lower_bound: np.ndarray
    upper_bound: np.ndarray
    x_opt: np.ndarray
    f_opt: float
    _raw: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    @property
    def name(self) -> str:
        return f"BBOB_F{self.function_id}"

    def evaluate(self, x) -> float:
        return evaluate(self, x)

    def evaluate_many(self, x: np.ndarray) -> np.ndarray:
        return evaluate_many(self, x)


def make_bbob(function_id: int, dim: int, instance_seed: int) -> ProblemInstance:
    """Construct one BBOB2009 instance deterministically from its triple."""
    if function_id not in bbob.BUILDERS:
        raise InvalidFunctionError(
            f"function_id must be in 1..24, got {function_id!r}"
        )
    if not isinstance(dim, (int, np.integer)) or dim < 2:
        raise InvalidDimensionError(f"dim must be an integer >= 2, got {dim!r}")
    if instance_seed < 0:
        raise InvalidDimensionError(
            f"instance_seed must be non-negative, got {instance_seed!r}"
        )
    rng = np.random.default_rng(
        np.random.SeedSequence([int(function_id), int(dim), int(instance_seed)])
    )
    f_opt = float(rng.uniform(-100.0, 100.0))
    x_opt, raw = bbob.BUILDERS[function_id](int(dim), rng)
    x_opt = np.asarray(x_opt, dtype=float)
    lower = np.full(dim, -bbob.BOUND)
    upper = np.full(dim, bbob.BOUND)
    for arr in (x_opt, lower, upper):
        arr.flags.writeable = False
    return ProblemInstance(
        function_id=int(function_id),
        dim=int(dim),
        instance_seed=int(instance_seed),
        lower_bound=lower,
        upper_bound=upper,
        x_opt=x_opt,
        f_opt=f_opt,
        _raw=raw,
    )


def evaluate(problem: ProblemInstance, x) -> float:
    """Objective value at a single point; deterministic and finite."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != problem.dim:
        raise DimensionError(
            f"expected a vector of length {problem.dim}, got shape {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise DomainError("input contains non-finite coordinates")
    return float(problem._raw(x[None, :])[0] + problem.f_opt)


def evaluate_many(problem: ProblemInstance, x: np.ndarray) -> np.ndarray:
    """Objective values for a batch of row vectors."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != problem.dim:
        raise DimensionError(
            f"expected an (n, {problem.dim}) matrix, got shape {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise DomainError("input contains non-finite coordinates")
    return problem._raw(x) + problem.f_opt


@dataclass(frozen=True)
class ProblemSplit:
    """Partition of the 24 function ids into training (seen) and held-out."""

    seen: tuple[int, ...]
    unseen: tuple[int, ...]
    dims: tuple[int, ...]


def split_problem_set(
    mode: str,
    dims: Sequence[int],
    custom_seen: Sequence[int] | None = None,
) -> ProblemSplit:
    """Build the seen/unseen split.

    ``easy-train`` holds out F1, F5, F6, F10, F15, F20; ``all-train`` puts
    every function in the seen set; ``custom`` takes an explicit seen list.
    """
    dims = tuple(int(d) for d in dims)
    if mode == "easy-train":
        unseen = EASY_TRAIN_UNSEEN
        seen = tuple(f for f in ALL_FUNCTION_IDS if f not in unseen)
    elif mode == "all-train":
        seen = ALL_FUNCTION_IDS
        unseen = ()
    elif mode == "custom":
        if not custom_seen:
            raise InvalidSplitError("custom split requires a non-empty seen list")
        seen = tuple(sorted(set(int(f) for f in custom_seen)))
        bad = [f for f in seen if f not in ALL_FUNCTION_IDS]
        if bad:
            raise InvalidSplitError(f"function ids outside 1..24: {bad}")
        unseen = tuple(f for f in ALL_FUNCTION_IDS if f not in seen)
    else:
        raise InvalidSplitError(f"unknown split mode {mode!r}")
    return ProblemSplit(seen=seen, unseen=unseen, dims=dims)


def initialize_population(
    problem: ProblemInstance, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Uniform population inside the box, one row per individual."""
    if size < MIN_POP_SIZE:
        raise PopulationSizeError(
            f"population size must be >= {MIN_POP_SIZE}, got {size}"
        )
    return rng.uniform(
        problem.lower_bound, problem.upper_bound, size=(size, problem.dim)
    )
