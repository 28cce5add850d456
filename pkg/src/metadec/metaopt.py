"""The three meta-optimizers and the action plumbing around them.

All agents share the same contract: ``get_action`` is a pure, deterministic
function of the agent parameters and the observation (used during testing);
``get_action_with_exploration`` adds the agent-specific exploration
behaviour; ``learn`` updates the mapping policy; ``reset`` clears episodic
state (replay, schedules) but never the learned parameters.

DQN_DE_MS picks one of four mutation strategies per generation, DDPG_DE_F
emits a scale factor, DE_DE_FCR evolves (F, CR) pairs with a meta-level DE.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .approximator import AdamState, DenseNet, adam_step, backward, forward, init_dense
from .baseopt import BaseControl, DEFAULT_CR, DEFAULT_F, Strategy
from .environment import OBSERVATION_LENGTH
from .errors import DimensionError, InvalidActionError

DQN_STRATEGIES = (
    Strategy.RAND_1,
    Strategy.BEST_1,
    Strategy.CURRENT_TO_BEST_1,
    Strategy.RAND_2,
)

DDPG_F_LOW = 0.05
DDPG_F_HIGH = 0.95


@dataclass(frozen=True)
class DiscreteSpec:
    n: int


@dataclass(frozen=True)
class BoxSpec:
    dim: int
    low: float
    high: float


@dataclass(frozen=True)
class AgentSpec:
    kind: str
    observation_length: int
    action_spec: DiscreteSpec | BoxSpec


AGENT_SPECS = {
    "dqn_de_ms": AgentSpec("dqn_de_ms", OBSERVATION_LENGTH, DiscreteSpec(4)),
    "ddpg_de_f": AgentSpec(
        "ddpg_de_f", OBSERVATION_LENGTH, BoxSpec(1, DDPG_F_LOW, DDPG_F_HIGH)
    ),
    "de_de_fcr": AgentSpec("de_de_fcr", OBSERVATION_LENGTH, BoxSpec(2, 0.0, 1.0)),
}


def decode_action(agent_kind: str, raw_action) -> BaseControl:
    """Map a raw meta-action onto the base-optimizer control."""
    if agent_kind == "dqn_de_ms":
        idx = int(raw_action)
        if idx != raw_action or not 0 <= idx < len(DQN_STRATEGIES):
            raise InvalidActionError(f"strategy index out of range: {raw_action!r}")
        return BaseControl(F=DEFAULT_F, CR=DEFAULT_CR, strategy=DQN_STRATEGIES[idx])
    if agent_kind == "ddpg_de_f":
        f = float(np.asarray(raw_action).reshape(-1)[0])
        if not DDPG_F_LOW <= f <= DDPG_F_HIGH:
            raise InvalidActionError(f"F={f} outside [{DDPG_F_LOW}, {DDPG_F_HIGH}]")
        return BaseControl(F=f, CR=DEFAULT_CR, strategy=Strategy.RAND_1)
    if agent_kind == "de_de_fcr":
        pair = np.asarray(raw_action, dtype=float).reshape(-1)
        if pair.shape[0] != 2:
            raise InvalidActionError(f"expected an (F, CR) pair, got {raw_action!r}")
        if not np.all((pair >= 0.0) & (pair <= 1.0)):
            raise InvalidActionError(f"(F, CR)={pair} outside [0, 1]^2")
        return BaseControl(F=float(pair[0]), CR=float(pair[1]), strategy=Strategy.RAND_1)
    raise InvalidActionError(f"unknown agent kind {agent_kind!r}")


class ReplayBuffer:
    """Fixed-capacity ring of transitions."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._items: list = []
        self._cursor = 0

    def __len__(self) -> int:
        return len(self._items)

    def push(self, item) -> None:
        if len(self._items) < self.capacity:
            self._items.append(item)
        else:
            self._items[self._cursor] = item
        self._cursor = (self._cursor + 1) % self.capacity

    def sample(self, rng: np.random.Generator, k: int) -> list:
        idx = rng.integers(len(self._items), size=k)
        return [self._items[i] for i in idx]

    def clear(self) -> None:
        self._items = []
        self._cursor = 0


def _check_obs(obs, expected: int) -> np.ndarray:
    obs = np.asarray(obs, dtype=float)
    if obs.ndim != 1 or obs.shape[0] != expected:
        raise DimensionError(
            f"observation must have length {expected}, got shape {obs.shape}"
        )
    return obs


def _stack_batch(batch):
    obs = np.stack([np.asarray(t[0], dtype=float) for t in batch])
    act = np.stack([np.asarray(t[1]) for t in batch])
    rew = np.array([float(t[2]) for t in batch])
    nxt = np.stack([np.asarray(t[3], dtype=float) for t in batch])
    done = np.array([1.0 if t[4] else 0.0 for t in batch])
    return obs, act, rew, nxt, done


def _interleave(grad_w, grad_b):
    out = []
    for gw, gb in zip(grad_w, grad_b):
        out.extend((gw, gb))
    return out


def _net_to_dict(net: DenseNet) -> dict:
    return {
        "activations": list(net.activations),
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
    }


def _net_from_dict(d: dict) -> DenseNet:
    return DenseNet(
        weights=[np.array(w, dtype=float) for w in d["weights"]],
        biases=[np.array(b, dtype=float) for b in d["biases"]],
        activations=tuple(d["activations"]),
    )


class DqnAgent:
    """Value-based mutation-strategy selector (DQN_DE_MS)."""

    learns_per_step = True

    def __init__(
        self,
        rng: np.random.Generator,
        hidden: tuple[int, ...] = (64, 64),
        gamma: float = 0.99,
        lr: float = 1e-3,
        replay_capacity: int = 10_000,
        batch_size: int = 64,
        eps_start: float = 1.0,
        eps_end: float = 0.05,
        exploration_horizon: int = 50_000,
        target_sync: int = 200,
    ):
        self.spec = AGENT_SPECS["dqn_de_ms"]
        n_actions = self.spec.action_spec.n
        sizes = (self.spec.observation_length, *hidden, n_actions)
        acts = ("relu",) * len(hidden) + ("identity",)
        self.net = init_dense(sizes, acts, rng)
        self.target = self.net.clone()
        self.gamma = gamma
        self.batch_size = batch_size
        self.eps_start = eps_start
        self.eps_end = eps_end
        self.exploration_horizon = exploration_horizon
        self.target_sync = target_sync
        self.replay = ReplayBuffer(replay_capacity)
        self.adam = AdamState.init_like(self.net.parameters(), lr=lr)
        self.explore_steps = 0
        self.learn_calls = 0
        self._rng = rng

    @property
    def epsilon(self) -> float:
        # linear decay over the first half of the exploration horizon
        half = max(1, self.exploration_horizon // 2)
        frac = min(self.explore_steps / half, 1.0)
        return self.eps_start + (self.eps_end - self.eps_start) * frac

    def get_action(self, obs) -> int:
        obs = _check_obs(obs, self.spec.observation_length)
        return int(np.argmax(forward(self.net, obs)))

    def get_action_with_exploration(self, obs, rng: np.random.Generator) -> int:
        eps = self.epsilon
        self.explore_steps += 1
        if rng.random() < eps:
            return int(rng.integers(self.spec.action_spec.n))
        return self.get_action(obs)

    def record(self, obs, action, reward, next_obs, done) -> None:
        self.replay.push((obs, action, reward, next_obs, done))

    def learn(self, batch=None) -> bool:
        if batch is None:
            if len(self.replay) < self.batch_size:
                return False
            batch = self.replay.sample(self._rng, self.batch_size)
        obs, act, rew, nxt, done = _stack_batch(batch)
        b = obs.shape[0]
        q_next = forward(self.target, nxt)
        y = rew + self.gamma * (1.0 - done) * q_next.max(axis=1)
        q = forward(self.net, obs)
        idx = np.arange(b)
        g = np.zeros_like(q)
        g[idx, act.astype(int)] = 2.0 * (q[idx, act.astype(int)] - y) / b
        gw, gb, _ = backward(self.net, obs, g)
        params, self.adam = adam_step(
            self.net.parameters(), _interleave(gw, gb), self.adam
        )
        self.net.set_parameters(params)
        self.learn_calls += 1
        if self.learn_calls % self.target_sync == 0:
            self.target = self.net.clone()
        return True

    def reset(self) -> None:
        self.replay.clear()
        self.explore_steps = 0

    def to_payload(self) -> dict:
        return {
            "kind": self.spec.kind,
            "net": _net_to_dict(self.net),
            "target": _net_to_dict(self.target),
            "gamma": self.gamma,
            "lr": self.adam.lr,
            "batch_size": self.batch_size,
            "eps_start": self.eps_start,
            "eps_end": self.eps_end,
            "exploration_horizon": self.exploration_horizon,
            "target_sync": self.target_sync,
            "replay_capacity": self.replay.capacity,
            "explore_steps": self.explore_steps,
            "learn_calls": self.learn_calls,
        }

    @classmethod
    def from_payload(cls, payload: dict, rng: np.random.Generator | None = None):
        rng = rng if rng is not None else np.random.default_rng(0)
        agent = cls(
            rng,
            gamma=payload["gamma"],
            lr=payload["lr"],
            replay_capacity=payload["replay_capacity"],
            batch_size=payload["batch_size"],
            eps_start=payload["eps_start"],
            eps_end=payload["eps_end"],
            exploration_horizon=payload["exploration_horizon"],
            target_sync=payload["target_sync"],
        )
        agent.net = _net_from_dict(payload["net"])
        agent.target = _net_from_dict(payload["target"])
        agent.adam = AdamState.init_like(agent.net.parameters(), lr=payload["lr"])
        agent.explore_steps = payload["explore_steps"]
        agent.learn_calls = payload["learn_calls"]
        return agent


class DdpgAgent:
    """Actor-critic scale-factor controller (DDPG_DE_F)."""

    learns_per_step = True

    def __init__(
        self,
        rng: np.random.Generator,
        hidden: tuple[int, ...] = (64, 64),
        gamma: float = 0.99,
        tau: float = 0.005,
        sigma: float = 0.1,
        lr: float = 1e-3,
        replay_capacity: int = 10_000,
        batch_size: int = 64,
    ):
        self.spec = AGENT_SPECS["ddpg_de_f"]
        box = self.spec.action_spec
        obs_len = self.spec.observation_length
        acts = ("relu",) * len(hidden) + ("identity",)
        self.actor = init_dense((obs_len, *hidden, box.dim), acts, rng)
        self.critic = init_dense((obs_len + box.dim, *hidden, 1), acts, rng)
        self.actor_target = self.actor.clone()
        self.critic_target = self.critic.clone()
        self.gamma = gamma
        self.tau = tau
        self.sigma = sigma
        self.batch_size = batch_size
        self.replay = ReplayBuffer(replay_capacity)
        self.adam_actor = AdamState.init_like(self.actor.parameters(), lr=lr)
        self.adam_critic = AdamState.init_like(self.critic.parameters(), lr=lr)
        self._rng = rng

    def _squash(self, z: np.ndarray) -> np.ndarray:
        box = self.spec.action_spec
        return box.low + (box.high - box.low) / (1.0 + np.exp(-z))

    def get_action(self, obs) -> np.ndarray:
        obs = _check_obs(obs, self.spec.observation_length)
        return self._squash(forward(self.actor, obs))

    def get_action_with_exploration(self, obs, rng: np.random.Generator) -> np.ndarray:
        box = self.spec.action_spec
        noisy = self.get_action(obs) + rng.normal(0.0, self.sigma, size=box.dim)
        return np.clip(noisy, box.low, box.high)

    def record(self, obs, action, reward, next_obs, done) -> None:
        self.replay.push((obs, action, reward, next_obs, done))

    def learn(self, batch=None) -> bool:
        if batch is None:
            if len(self.replay) < self.batch_size:
                return False
            batch = self.replay.sample(self._rng, self.batch_size)
        obs, act, rew, nxt, done = _stack_batch(batch)
        b = obs.shape[0]
        act = act.reshape(b, -1)
        box = self.spec.action_spec

        # critic: squared TD error against the target pair
        a_next = self._squash(forward(self.actor_target, nxt))
        q_next = forward(self.critic_target, np.hstack([nxt, a_next])).ravel()
        y = rew + self.gamma * (1.0 - done) * q_next
        u = np.hstack([obs, act])
        q = forward(self.critic, u).ravel()
        gout = (2.0 * (q - y) / b)[:, None]
        gw, gb, _ = backward(self.critic, u, gout)
        params, self.adam_critic = adam_step(
            self.critic.parameters(), _interleave(gw, gb), self.adam_critic
        )
        self.critic.set_parameters(params)

        # actor: ascend the critic through the squashed head
        z = forward(self.actor, obs)
        a = self._squash(z)
        u = np.hstack([obs, a])
        _, _, gu = backward(self.critic, u, np.full((b, 1), -1.0 / b))
        ga = gu[:, obs.shape[1]:]
        sig = 1.0 / (1.0 + np.exp(-z))
        gz = ga * (box.high - box.low) * sig * (1.0 - sig)
        gw, gb, _ = backward(self.actor, obs, gz)
        params, self.adam_actor = adam_step(
            self.actor.parameters(), _interleave(gw, gb), self.adam_actor
        )
        self.actor.set_parameters(params)

        # exact soft update: target = (1 - tau) * target + tau * online
        for target_net, online in (
            (self.actor_target, self.actor),
            (self.critic_target, self.critic),
        ):
            new = [
                (1.0 - self.tau) * tp + self.tau * op
                for tp, op in zip(target_net.parameters(), online.parameters())
            ]
            target_net.set_parameters(new)
        return True

    def reset(self) -> None:
        self.replay.clear()

    def to_payload(self) -> dict:
        return {
            "kind": self.spec.kind,
            "actor": _net_to_dict(self.actor),
            "critic": _net_to_dict(self.critic),
            "actor_target": _net_to_dict(self.actor_target),
            "critic_target": _net_to_dict(self.critic_target),
            "gamma": self.gamma,
            "tau": self.tau,
            "sigma": self.sigma,
            "lr": self.adam_actor.lr,
            "batch_size": self.batch_size,
            "replay_capacity": self.replay.capacity,
        }

    @classmethod
    def from_payload(cls, payload: dict, rng: np.random.Generator | None = None):
        rng = rng if rng is not None else np.random.default_rng(0)
        agent = cls(
            rng,
            gamma=payload["gamma"],
            tau=payload["tau"],
            sigma=payload["sigma"],
            lr=payload["lr"],
            replay_capacity=payload["replay_capacity"],
            batch_size=payload["batch_size"],
        )
        agent.actor = _net_from_dict(payload["actor"])
        agent.critic = _net_from_dict(payload["critic"])
        agent.actor_target = _net_from_dict(payload["actor_target"])
        agent.critic_target = _net_from_dict(payload["critic_target"])
        agent.adam_actor = AdamState.init_like(agent.actor.parameters(), lr=payload["lr"])
        agent.adam_critic = AdamState.init_like(
            agent.critic.parameters(), lr=payload["lr"]
        )
        return agent


class MetaDeAgent:
    """Meta-level DE over (F, CR) pairs (DE_DE_FCR).

    Each candidate is scored as the negative mean normalized final error over
    ``samples_per_candidate`` training episodes; once every pending candidate
    is scored, one rand/1/bin meta-generation with greedy replacement runs.
    """

    learns_per_step = False

    def __init__(
        self,
        rng: np.random.Generator,
        pop_size: int = 20,
        samples_per_candidate: int = 3,
        meta_f: float = 0.5,
        meta_cr: float = 0.9,
    ):
        self.spec = AGENT_SPECS["de_de_fcr"]
        self.pop_size = pop_size
        self.samples_per_candidate = samples_per_candidate
        self.meta_f = meta_f
        self.meta_cr = meta_cr
        self.candidates = rng.random((pop_size, 2))
        self.fitness = np.full(pop_size, -np.inf)
        self._rng = rng
        self._phase = "parents"  # then perpetual "offspring"
        self._queue: list[tuple[int, np.ndarray]] = [
            (i, self.candidates[i].copy()) for i in range(pop_size)
        ]
        self._scores: dict[int, float] = {}
        self._acc: list[float] = []
        self.meta_generation = 0
        self.best_history: list[float] = []

    # -- actions ---------------------------------------------------------

    def get_action(self, obs) -> np.ndarray:
        _check_obs(obs, self.spec.observation_length)
        return self.best_candidate.copy()

    @property
    def best_candidate(self) -> np.ndarray:
        return self.candidates[int(np.argmax(self.fitness))]

    def get_action_with_exploration(self, obs, rng: np.random.Generator) -> np.ndarray:
        _check_obs(obs, self.spec.observation_length)
        return self._queue[0][1].copy()

    def record(self, obs, action, reward, next_obs, done) -> None:
        pass  # per-episode learner; nothing to buffer per step

    # -- learning ----------------------------------------------------------

    def learn(self, episode_error_ratio: float) -> bool:
        """Record one episode's normalized final error for the pending candidate."""
        self._acc.append(-float(episode_error_ratio))
        if len(self._acc) < self.samples_per_candidate:
            return False
        slot, _ = self._queue[0]
        self._scores[slot] = float(np.mean(self._acc))
        self._acc = []
        self._queue.pop(0)
        if not self._queue:
            self._finish_round()
        return True

    def _finish_round(self) -> None:
        if self._phase == "parents":
            for slot, score in self._scores.items():
                self.fitness[slot] = score
            self._phase = "offspring"
        else:
            for slot, score in self._scores.items():
                if score >= self.fitness[slot]:  # trial wins ties
                    self.fitness[slot] = score
                    self.candidates[slot] = self._trials[slot]
            self.meta_generation += 1
        self.best_history.append(float(np.max(self.fitness)))
        self._scores = {}
        self._make_offspring()

    def _make_offspring(self) -> None:
        self._trials = {}
        n = self.pop_size
        for i in range(n):
            others = np.delete(np.arange(n), i)
            r1, r2, r3 = self._rng.choice(others, size=3, replace=False)
            donor = self.candidates[r1] + self.meta_f * (
                self.candidates[r2] - self.candidates[r3]
            )
            np.clip(donor, 0.0, 1.0, out=donor)
            j_rand = int(self._rng.integers(2))
            take = self._rng.random(2) < self.meta_cr
            take[j_rand] = True
            trial = np.where(take, donor, self.candidates[i])
            self._trials[i] = trial
            self._queue.append((i, trial.copy()))

    def reset(self) -> None:
        self._acc = []

    def to_payload(self) -> dict:
        return {
            "kind": self.spec.kind,
            "pop_size": self.pop_size,
            "samples_per_candidate": self.samples_per_candidate,
            "meta_f": self.meta_f,
            "meta_cr": self.meta_cr,
            "candidates": self.candidates.tolist(),
            "fitness": self.fitness.tolist(),
            "phase": self._phase,
            "queue": [[slot, vec.tolist()] for slot, vec in self._queue],
            "trials": {str(k): v.tolist() for k, v in getattr(self, "_trials", {}).items()},
            "meta_generation": self.meta_generation,
            "best_history": self.best_history,
        }

    @classmethod
    def from_payload(cls, payload: dict, rng: np.random.Generator | None = None):
        rng = rng if rng is not None else np.random.default_rng(0)
        agent = cls(
            rng,
            pop_size=payload["pop_size"],
            samples_per_candidate=payload["samples_per_candidate"],
            meta_f=payload["meta_f"],
            meta_cr=payload["meta_cr"],
        )
        agent.candidates = np.array(payload["candidates"], dtype=float)
        agent.fitness = np.array(payload["fitness"], dtype=float)
        agent._phase = payload["phase"]
        agent._queue = [
            (int(slot), np.array(vec, dtype=float)) for slot, vec in payload["queue"]
        ]
        agent._trials = {
            int(k): np.array(v, dtype=float) for k, v in payload["trials"].items()
        }
        agent.meta_generation = payload["meta_generation"]
        agent.best_history = list(payload["best_history"])
        agent._scores = {}
        return agent


AGENT_CLASSES = {
    "dqn_de_ms": DqnAgent,
    "ddpg_de_f": DdpgAgent,
    "de_de_fcr": MetaDeAgent,
}


def build_agent(kind: str, rng: np.random.Generator, exploration_horizon: int = 50_000):
    if kind == "dqn_de_ms":
        return DqnAgent(rng, exploration_horizon=exploration_horizon)
    if kind == "ddpg_de_f":
        return DdpgAgent(rng)
    if kind == "de_de_fcr":
        return MetaDeAgent(rng)
    raise InvalidActionError(f"unknown agent kind {kind!r}")


def agent_from_payload(payload: dict, rng: np.random.Generator | None = None):
    kind = payload.get("kind")
    if kind not in AGENT_CLASSES:
        raise InvalidActionError(f"unknown agent kind {kind!r}")
    return AGENT_CLASSES[kind].from_payload(payload, rng)
