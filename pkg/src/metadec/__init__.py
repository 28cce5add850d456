"""Learned per-generation control of differential evolution on BBOB2009."""

from .baseopt import BaseControl, BaseOptimizerState, BasePerformance, Strategy
from .environment import EnvConfig, MetaEnv, Transition, compute_reward, featurize
from .harness import (
    AgentModel,
    TestOptions,
    TrainOptions,
    emit_report,
    load_model,
    save_model,
    test,
    train,
)
from .metaopt import AgentSpec, build_agent, decode_action
from .problems import ProblemInstance, ProblemSplit, make_bbob, split_problem_set

__version__ = "0.1.0"

__all__ = [
    "AgentModel",
    "AgentSpec",
    "BaseControl",
    "BaseOptimizerState",
    "BasePerformance",
    "EnvConfig",
    "MetaEnv",
    "ProblemInstance",
    "ProblemSplit",
    "Strategy",
    "TestOptions",
    "TrainOptions",
    "Transition",
    "build_agent",
    "compute_reward",
    "decode_action",
    "emit_report",
    "featurize",
    "load_model",
    "make_bbob",
    "save_model",
    "split_problem_set",
    "test",
    "train",
]
