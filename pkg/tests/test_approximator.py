import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metadec.approximator import (
    AdamState,
    DenseNet,
    adam_step,
    backward,
    forward,
    init_dense,
)
from metadec.errors import DimensionError, NumericError


def finite_difference_grads(net, x, gout, step=1e-5):
    """Central-difference oracle for the scalar loss L = gout . forward(x)."""

    def loss():
        return float(np.sum(np.asarray(gout) * forward(net, x)))

    grads = []
    for p in net.parameters():
        g = np.zeros_like(p)
        flat = p.ravel()
        gflat = g.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = loss()
            flat[i] = orig - step
            down = loss()
            flat[i] = orig
            gflat[i] = (up - down) / (2 * step)
        grads.append(g)
    return grads


def _max_rel_error(analytic, numeric):
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.abs(a) + np.abs(n), 1e-3)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def test_forward_zero_net_relu():
    net = DenseNet(
        weights=[np.zeros((3, 4)), np.zeros((4, 2))],
        biases=[np.zeros(4), np.zeros(2)],
        activations=("relu", "relu"),
    )
    assert np.array_equal(forward(net, np.array([1.0, -2.0, 3.0])), np.zeros(2))


def test_forward_identity_affine():
    net = DenseNet(
        weights=[np.array([[2.0]])],
        biases=[np.array([1.0])],
        activations=("identity",),
    )
    assert forward(net, np.array([3.0]))[0] == 7.0


def test_forward_wrong_length():
    net = init_dense((3, 2), ("tanh",), np.random.default_rng(0))
    with pytest.raises(DimensionError):
        forward(net, np.zeros(4))


def test_forward_deterministic_bitwise():
    rng = np.random.default_rng(1)
    net = init_dense((5, 7, 2), ("tanh", "identity"), rng)
    x = np.random.default_rng(2).normal(size=5)
    assert np.array_equal(forward(net, x), forward(net.clone(), x))


def test_backward_zero_output_gradient():
    net = init_dense((4, 5, 3), ("relu", "identity"), np.random.default_rng(0))
    gw, gb, gx = backward(net, np.ones(4), np.zeros(3))
    assert all(np.all(g == 0) for g in gw)
    assert all(np.all(g == 0) for g in gb)
    assert np.all(gx == 0)


def test_backward_closed_form_1x1():
    w, x, g = 1.7, 0.4, 2.5
    net = DenseNet(
        weights=[np.array([[w]])],
        biases=[np.array([0.3])],
        activations=("identity",),
    )
    gw, gb, gx = backward(net, np.array([x]), np.array([g]))
    assert gw[0][0, 0] == pytest.approx(g * x, abs=1e-12)
    assert gb[0][0] == pytest.approx(g, abs=1e-12)
    assert gx[0] == pytest.approx(g * w, abs=1e-12)


def test_backward_matches_finite_differences_3layer():
    rng = np.random.default_rng(7)
    net = init_dense((4, 6, 5, 2), ("tanh", "sigmoid", "identity"), rng)
    x = rng.normal(size=4)
    gout = rng.normal(size=2)
    gw, gb, _ = backward(net, x, gout)
    analytic = []
    for a, b in zip(gw, gb):
        analytic.extend((a, b))
    numeric = finite_difference_grads(net, x, gout)
    assert _max_rel_error(analytic, numeric) < 1e-4


def test_backward_batched_sums_rows():
    rng = np.random.default_rng(3)
    net = init_dense((3, 4, 2), ("tanh", "identity"), rng)
    xs = rng.normal(size=(5, 3))
    gs = rng.normal(size=(5, 2))
    gw_batch, gb_batch, gx_batch = backward(net, xs, gs)
    gw_sum = [np.zeros_like(w) for w in net.weights]
    gb_sum = [np.zeros_like(b) for b in net.biases]
    for x, g in zip(xs, gs):
        gw, gb, gx = backward(net, x, g)
        for i in range(len(gw_sum)):
            gw_sum[i] += gw[i]
            gb_sum[i] += gb[i]
    for i in range(len(gw_sum)):
        assert np.allclose(gw_batch[i], gw_sum[i])
        assert np.allclose(gb_batch[i], gb_sum[i])
    assert gx_batch.shape == xs.shape


def test_backward_shape_mismatch():
    net = init_dense((3, 2), ("identity",), np.random.default_rng(0))
    with pytest.raises(DimensionError):
        backward(net, np.zeros(3), np.zeros(5))


def test_adam_zero_gradient_fixed_point():
    params = [np.array([1.0, -2.0]), np.array([[3.0]])]
    state = AdamState.init_like(params)
    new, state2 = adam_step(params, [np.zeros(2), np.zeros((1, 1))], state)
    assert np.array_equal(new[0], params[0])
    assert np.array_equal(new[1], params[1])
    assert all(np.all(m == 0) for m in state2.m)
    assert all(np.all(v == 0) for v in state2.v)


def test_adam_first_step_closed_form():
    # with m_hat = v_hat = 1 the step is lr / sqrt(1 + eps)
    params = [np.array([0.0])]
    state = AdamState.init_like(params, lr=1e-3)
    new, state = adam_step(params, [np.array([1.0])], state)
    assert state.t == 1
    assert new[0][0] == pytest.approx(-9.99999995e-4, abs=1e-12)


def test_adam_two_step_hand_recursion():
    params = [np.array([0.0])]
    state = AdamState.init_like(params, lr=1e-3)
    new, state = adam_step(params, [np.array([1.0])], state)
    new, state = adam_step(new, [np.array([1.0])], state)
    # hand recursion with g = 1 both steps
    m = v = 0.0
    p = 0.0
    for t in (1, 2):
        m = 0.9 * m + 0.1 * 1.0
        v = 0.999 * v + 0.001 * 1.0
        mh = m / (1 - 0.9**t)
        vh = v / (1 - 0.999**t)
        p -= 1e-3 * mh / np.sqrt(vh + 1e-8)
    assert new[0][0] == pytest.approx(p, abs=1e-15)


def test_adam_nonfinite_gradient_leaves_params():
    params = [np.array([1.0])]
    state = AdamState.init_like(params)
    with pytest.raises(NumericError):
        adam_step(params, [np.array([np.nan])], state)
    assert params[0][0] == 1.0
    assert state.t == 0


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_gradcheck_random_small_nets(seed):
    rng = np.random.default_rng(seed)
    sizes = tuple(int(s) for s in rng.integers(2, 9, size=3))
    acts = tuple(rng.choice(["relu", "tanh", "identity", "sigmoid"], size=2))
    net = init_dense(sizes, acts, rng)
    x = rng.normal(size=sizes[0])
    gout = rng.normal(size=sizes[-1])
    gw, gb, _ = backward(net, x, gout)
    analytic = []
    for a, b in zip(gw, gb):
        analytic.extend((a, b))
    numeric = finite_difference_grads(net, x, gout)
    assert _max_rel_error(analytic, numeric) < 1e-4
