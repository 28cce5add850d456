"""Minimal dense network with exact backpropagation and an Adam optimizer.

The network is loss-agnostic: callers supply the gradient of their loss with
respect to the network output and get back exact chain-rule gradients for
every weight and bias (plus the input gradient, which the actor-critic agent
needs to differentiate one network through another).  Everything is float64.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, NumericError


def _relu(z):
    return np.maximum(z, 0.0)


def _drelu(z):
    return np.where(z > 0.0, 1.0, 0.0)


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


_ACTIVATIONS = {
    "relu": (_relu, _drelu),
    "tanh": (np.tanh, lambda z: 1.0 - np.tanh(z) ** 2),
    "identity": (lambda z: z, lambda z: np.ones_like(z)),
    "sigmoid": (_sigmoid, lambda z: _sigmoid(z) * (1.0 - _sigmoid(z))),
}


@dataclass(eq=False)
class DenseNet:
    weights: list  # W_l with shape (fan_in, fan_out)
    biases: list  # b_l with shape (fan_out,)
    activations: tuple

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    def parameters(self) -> list:
        """Flat [W0, b0, W1, b1, ...] view (references, not copies)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def set_parameters(self, params: Sequence) -> None:
        it = iter(params)
        for i in range(len(self.weights)):
            self.weights[i] = np.asarray(next(it), dtype=float)
            self.biases[i] = np.asarray(next(it), dtype=float)

    def clone(self) -> "DenseNet":
        return DenseNet(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            activations=self.activations,
        )


def init_dense(
    layer_sizes: Sequence[int],
    activations: Sequence[str],
    rng: np.random.Generator,
) -> DenseNet:
    """Uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] initialization."""
    if len(activations) != len(layer_sizes) - 1:
        raise DimensionError("need one activation per weight layer")
    for act in activations:
        if act not in _ACTIVATIONS:
            raise DimensionError(f"unknown activation {act!r}")
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return DenseNet(weights=weights, biases=biases, activations=tuple(activations))


def forward(net: DenseNet, x: np.ndarray) -> np.ndarray:
    """Deterministic forward pass; accepts a vector or a batch of rows."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != net.weights[0].shape[0]:
        raise DimensionError(
            f"input length {x.shape[-1]} != first layer size "
            f"{net.weights[0].shape[0]}"
        )
    a = x
    for w, b, act in zip(net.weights, net.biases, net.activations):
        a = _ACTIVATIONS[act][0](a @ w + b)
    return a


def backward(
    net: DenseNet, x: np.ndarray, output_gradient: np.ndarray
) -> tuple[list, list, np.ndarray]:
    """Exact chain-rule gradients for the loss whose output gradient is given.

    Returns ``(weight_grads, bias_grads, input_grad)``.  For batched input
    the parameter gradients are summed over rows.
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(output_gradient, dtype=float)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
        g = g[None, :]
    if x.shape[-1] != net.weights[0].shape[0]:
        raise DimensionError("input length does not match first layer size")
    if g.shape != (x.shape[0], net.weights[-1].shape[1]):
        raise DimensionError(
            f"output gradient shape {g.shape} does not match "
            f"({x.shape[0]}, {net.weights[-1].shape[1]})"
        )
    # forward, caching pre-activations
    pre = []
    a = x
    acts = [a]
    for w, b, act in zip(net.weights, net.biases, net.activations):
        z = a @ w + b
        pre.append(z)
        a = _ACTIVATIONS[act][0](z)
        acts.append(a)
    # backward
    grad_w = [None] * len(net.weights)
    grad_b = [None] * len(net.weights)
    delta = g
    for layer in range(len(net.weights) - 1, -1, -1):
        delta = delta * _ACTIVATIONS[net.activations[layer]][1](pre[layer])
        grad_w[layer] = acts[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        delta = delta @ net.weights[layer].T
    grad_x = delta[0] if squeeze else delta
    return grad_w, grad_b, grad_x


@dataclass(eq=False)
class AdamState:
    m: list
    v: list
    t: int
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def init_like(cls, params: Sequence, lr: float = 1e-3, **kwargs) -> "AdamState":
        return cls(
            m=[np.zeros_like(np.asarray(p, dtype=float)) for p in params],
            v=[np.zeros_like(np.asarray(p, dtype=float)) for p in params],
            t=0,
            lr=lr,
            **kwargs,
        )


def adam_step(
    params: Sequence, grads: Sequence, state: AdamState
) -> tuple[list, AdamState]:
    """Bias-corrected adaptive-moment update: p -= lr * m_hat / sqrt(v_hat + eps).

    Raises on non-finite gradients without touching the parameters.
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise DimensionError("params, grads and moments must align")
    for p, g in zip(params, grads):
        if np.shape(p) != np.shape(g):
            raise DimensionError("gradient shape does not match parameter shape")
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite gradient")
    t = state.t + 1
    new_params, new_m, new_v = [], [], []
    c1 = 1.0 - state.beta1**t
    c2 = 1.0 - state.beta2**t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        g = np.asarray(g, dtype=float)
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g**2
        step = state.lr * (m / c1) / np.sqrt(v / c2 + state.eps)
        new_params.append(np.asarray(p, dtype=float) - step)
        new_m.append(m)
        new_v.append(v)
    new_state = AdamState(
        m=new_m, v=new_v, t=t, lr=state.lr, beta1=state.beta1,
        beta2=state.beta2, eps=state.eps,
    )
    return new_params, new_state
