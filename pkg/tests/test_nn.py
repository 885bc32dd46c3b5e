import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mimgan.nn import (IDENTITY, LEAKY_RELU, SIGMOID, TANH, Activation, Layer, Mlp,
                       StaleTapeError, adam_init, adam_step, backward, forward, init_mlp,
                       load_mlp, mlp_from_json, mlp_to_json, save_mlp)
from oracles import central_diff, naive_forward, rel_error

ACTS = [LEAKY_RELU, SIGMOID, TANH, IDENTITY]


def random_net(rng):
    depth = int(rng.integers(1, 4))
    sizes = [int(s) for s in rng.integers(1, 6, size=depth + 1)]
    acts = [ACTS[int(i)] for i in rng.integers(0, 4, size=depth)]
    net = init_mlp(int(rng.integers(1 << 30)), sizes, acts)
    flat = net.get_flat()
    net.set_flat(flat + rng.normal(0, 0.3, flat.size))  # non-zero biases too
    return net


def test_init_is_deterministic_per_seed():
    a = init_mlp(1, [2, 3, 1], [TANH, SIGMOID])
    b = init_mlp(1, [2, 3, 1], [TANH, SIGMOID])
    c = init_mlp(2, [2, 3, 1], [TANH, SIGMOID])
    assert a.get_flat().tobytes() == b.get_flat().tobytes()
    assert a.get_flat().tobytes() != c.get_flat().tobytes()


def test_init_glorot_bounds_and_zero_bias():
    net = init_mlp(5, [10, 30, 1], [LEAKY_RELU, SIGMOID])
    bound = np.sqrt(6.0 / 40)
    assert np.all(np.abs(net.layers[0].weight) <= bound)
    assert all(np.all(layer.bias == 0) for layer in net.layers)


@pytest.mark.parametrize("sizes, acts", [([4], []), ([2, 3], [TANH, TANH]), ([2, 0, 1], [TANH, TANH])])
def test_init_rejects_bad_shapes(sizes, acts):
    with pytest.raises(ValueError):
        init_mlp(0, sizes, acts)


def test_mlp_rejects_unchained_layers():
    with pytest.raises(ValueError):
        Mlp([Layer(np.ones((3, 2)), np.zeros(3), TANH), Layer(np.ones((1, 4)), np.zeros(1), TANH)])


def test_identity_network():
    net = Mlp([Layer(np.eye(2), np.zeros(2), IDENTITY)])
    y, _ = forward(net, np.array([1.0, 2.0]))
    assert y.tolist() == [1.0, 2.0]


def test_zero_sigmoid_net_outputs_half():
    net = init_mlp(0, [3, 4, 1], [LEAKY_RELU, SIGMOID])
    net.set_flat(np.zeros(net.n_params))
    y, _ = forward(net, np.array([5.0, -2.0, 9.0]))
    assert y.tolist() == [0.5]


def test_forward_matches_scalar_loop_oracle():
    rng = np.random.default_rng(11)
    for _ in range(50):
        net = random_net(rng)
        x = rng.normal(size=net.input_dim)
        y, _ = forward(net, x)
        np.testing.assert_allclose(y, naive_forward(net, x), rtol=1e-12, atol=1e-14)


def test_forward_rejects_wrong_width():
    net = init_mlp(0, [3, 1], [SIGMOID])
    with pytest.raises(ValueError):
        forward(net, np.zeros(4))


def test_input_gradient_of_linear_layer_is_weight_row():
    w = np.array([[2.0, -3.0, 0.5]])
    net = Mlp([Layer(w, np.zeros(1), IDENTITY)])
    _, tape = forward(net, np.array([0.1, 0.2, 0.3]))
    _, dx = backward(net, tape, np.array([1.0]))
    assert dx.tolist() == w[0].tolist()


def test_gradients_match_finite_differences_on_100_nets():
    rng = np.random.default_rng(2024)
    worst_param = worst_input = 0.0
    for _ in range(100):
        net = random_net(rng)
        x = rng.normal(size=(3, net.input_dim))
        c = rng.normal(size=(3, net.output_dim))
        y, tape = forward(net, x)
        grads, dx = backward(net, tape, c)
        base = net.get_flat()

        def loss_params(theta):
            probe = net.copy()
            probe.set_flat(theta)
            return float(np.sum(c * forward(probe, x)[0]))

        def loss_inputs(flat_x):
            return float(np.sum(c * forward(net, flat_x.reshape(x.shape))[0]))

        worst_param = max(worst_param, rel_error(grads, central_diff(loss_params, base, 1e-5), 1e-6))
        worst_input = max(worst_input, rel_error(dx.ravel(), central_diff(loss_inputs, x.ravel(), 1e-5), 1e-6))
    assert worst_param < 1e-4
    assert worst_input < 1e-4


def test_zero_upstream_gradient_gives_zero_gradients():
    net = init_mlp(3, [4, 5, 2], [TANH, SIGMOID])
    _, tape = forward(net, np.ones((2, 4)))
    grads, dx = backward(net, tape, np.zeros((2, 2)))
    assert not grads.any() and not dx.any()


def test_stale_tape_is_rejected():
    net = init_mlp(3, [2, 1], [SIGMOID])
    _, tape = forward(net, np.ones(2))
    net.set_flat(net.get_flat() + 1.0)
    with pytest.raises(StaleTapeError):
        backward(net, tape, np.ones(1))
    other = net.copy()
    with pytest.raises(StaleTapeError):
        backward(other, forward(net, np.ones(2))[1], np.ones(1))


def test_adam_zero_gradient_keeps_params():
    state = adam_init(3, lr=0.01)
    params = np.array([1.0, -2.0, 3.0])
    new, state2 = adam_step(state, params, np.zeros(3))
    assert new.tolist() == params.tolist()
    assert state2.t == 1 and state.t == 0


def test_adam_first_step_moves_by_lr():
    params = np.array([0.5])
    new, _ = adam_step(adam_init(1, lr=0.001), params, np.array([1.0]))
    # bias correction makes the first step lr * g / (|g| + eps)
    assert abs((params - new)[0] - 0.001) < 1e-6


def test_adam_is_deterministic_and_pure():
    rng = np.random.default_rng(0)
    g = rng.normal(size=5)
    p = rng.normal(size=5)
    state = adam_init(5)
    a = adam_step(state, p, g)
    b = adam_step(state, p, g)
    assert a[0].tobytes() == b[0].tobytes()
    assert not state.m.any()


def test_adam_rejects_bad_betas():
    with pytest.raises(ValueError):
        adam_init(2, beta1=1.0)


def test_json_roundtrip_is_bitwise(tmp_path):
    rng = np.random.default_rng(9)
    net = random_net(rng)
    save_mlp(net, tmp_path / "net.json")
    back = load_mlp(tmp_path / "net.json")
    assert back.get_flat().tobytes() == net.get_flat().tobytes()
    assert back.activations == net.activations
    assert mlp_from_json(json.loads(json.dumps(mlp_to_json(net)))).layer_sizes == net.layer_sizes


def test_activation_validation():
    with pytest.raises(ValueError):
        Activation("relu6")
    with pytest.raises(ValueError):
        Activation("leaky_relu", 1.5)


@given(st.floats(-800, 800))
def test_sigmoid_never_overflows(u):
    net = Mlp([Layer(np.array([[1.0]]), np.zeros(1), SIGMOID)])
    with np.errstate(over="raise", invalid="raise"):
        y = forward(net, np.array([u]))[0][0]
    assert 0.0 <= y <= 1.0


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=2), st.integers(0, 1000))
def test_batch_rows_match_single_rows(x, seed):
    net = init_mlp(seed, [2, 4, 3], [LEAKY_RELU, TANH])
    batch = forward(net, np.array([x, x[::-1]]))[0]
    # BLAS may order the sums differently for matrices, so allow last-bit noise
    np.testing.assert_allclose(batch[0], forward(net, np.array(x))[0], rtol=1e-14, atol=1e-15)
