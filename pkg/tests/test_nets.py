import numpy as np
import pytest

from skillab.diffcore import (
    MLPSpec,
    ad,
    lstm_cell,
    lstm_init,
    mlp_apply,
    mlp_init,
    rnn_apply,
)
from skillab.errors import ConfigError


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def test_zero_weight_mlp_outputs_bias():
    spec = MLPSpec((3, 4, 2), activation="relu")
    params = {
        "W0": np.zeros((3, 4)), "b0": np.zeros(4),
        "W1": np.zeros((4, 2)), "b1": np.array([0.5, -0.5]),
    }
    out = mlp_apply(params, np.array([9.0, -3.0, 1.0]), spec)
    assert np.array_equal(out, np.array([0.5, -0.5]))
    params["b1"] = np.zeros(2)
    assert np.array_equal(mlp_apply(params, np.ones(3), spec), np.zeros(2))


def test_identity_single_layer():
    spec = MLPSpec((2, 2), activation="linear")
    params = {"W0": np.eye(2), "b0": np.zeros(2)}
    assert np.array_equal(mlp_apply(params, np.array([1.0, 2.0]), spec),
                          np.array([1.0, 2.0]))


def test_random_mlp_matches_scalar_by_scalar_reference():
    rng = np.random.default_rng(7)
    spec = MLPSpec((2, 5, 3), activation="elu")
    params = mlp_init(rng, spec)
    x = np.array([0.5, -0.5])

    # independent reference: explicit loops, no vectorized forward
    def elu(v):
        return v if v > 0 else np.expm1(v)

    h = []
    for j in range(5):
        acc = params["b0"][j]
        for i in range(2):
            acc += x[i] * params["W0"][i, j]
        h.append(elu(acc))
    ref = []
    for j in range(3):
        acc = params["b1"][j]
        for i in range(5):
            acc += h[i] * params["W1"][i, j]
        ref.append(acc)

    out = mlp_apply(params, x, spec)
    assert np.allclose(out, ref, rtol=1e-12)


def test_mlp_shape_mismatch_names_layer():
    spec = MLPSpec((3, 4, 2))
    params = mlp_init(np.random.default_rng(0), spec)
    with pytest.raises(ConfigError, match="W0"):
        mlp_apply(params, np.ones(5), spec)


def test_mlp_batched_matches_per_row():
    rng = np.random.default_rng(5)
    spec = MLPSpec((3, 6, 2), activation="relu")
    params = mlp_init(rng, spec)
    xs = rng.standard_normal((4, 3))
    batched = mlp_apply(params, xs, spec)
    rows = np.stack([mlp_apply(params, x, spec) for x in xs])
    assert np.allclose(batched, rows, rtol=1e-14)


def test_rnn_single_step_equals_one_cell():
    rng = np.random.default_rng(1)
    params = lstm_init(rng, 3, 4)
    x = rng.standard_normal(3)
    h, c = lstm_cell(params, x, np.zeros(4), np.zeros(4))
    assert np.allclose(rnn_apply(params, [x]), h)


def test_rnn_zero_weights_zero_input_constant():
    params = {"Wx": np.zeros((2, 16)), "Wh": np.zeros((4, 16)), "b": np.zeros(16)}
    out = rnn_apply(params, [np.zeros(2)])
    # all gates sigmoid(0)=0.5, candidate tanh(0)=0 -> cell 0 -> hidden 0
    assert np.array_equal(out, np.zeros(4))


def test_rnn_matches_manual_unroll():
    rng = np.random.default_rng(9)
    hidden = 3
    params = lstm_init(rng, 2, hidden)
    seq = [rng.standard_normal(2) for _ in range(4)]

    h = np.zeros(hidden)
    c = np.zeros(hidden)
    for x in seq:
        gates = x @ params["Wx"] + h @ params["Wh"] + params["b"]
        i = _sigmoid(gates[0:hidden])
        f = _sigmoid(gates[hidden:2 * hidden])
        g = np.tanh(gates[2 * hidden:3 * hidden])
        o = _sigmoid(gates[3 * hidden:4 * hidden])
        c = f * c + i * g
        h = o * np.tanh(c)

    assert np.allclose(rnn_apply(params, seq), h, rtol=1e-12)


def test_rnn_batched_matches_per_sequence():
    rng = np.random.default_rng(12)
    params = lstm_init(rng, 3, 5)
    seqs = rng.standard_normal((4, 2, 3))  # time, batch, dim
    batched = rnn_apply(params, [seqs[t] for t in range(4)])
    for b in range(2):
        single = rnn_apply(params, [seqs[t, b] for t in range(4)])
        assert np.allclose(batched[b], single, rtol=1e-12)


def test_rnn_rejects_empty_sequence():
    params = lstm_init(np.random.default_rng(0), 2, 3)
    with pytest.raises(ValueError):
        rnn_apply(params, [])


def test_rnn_gradients_match_finite_differences():
    from skillab.diffcore.gradcheck import assert_grads_close

    rng = np.random.default_rng(4)
    params = lstm_init(rng, 2, 3)
    seq = [rng.standard_normal(2) for _ in range(3)]

    def loss_fn(p):
        h = rnn_apply(p, seq)
        return ad.sum_(ad.mul(h, h))

    assert_grads_close(loss_fn, params)


def test_recurrent_init_is_orthogonal_with_zero_bias():
    params = lstm_init(np.random.default_rng(3), 4, 6)
    assert np.array_equal(params["b"], np.zeros(24))
    for k in range(4):
        block = params["Wh"][:, 6 * k:6 * (k + 1)]
        assert np.allclose(block.T @ block, np.eye(6), atol=1e-10)
