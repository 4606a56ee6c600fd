"""Feed-forward and gated-recurrent forward passes.

All apply functions take a leaf dict that may hold raw ndarrays (inference)
or lifted Tensors (training); the autodiff ops dispatch on the type.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from . import autodiff as ad

_ACTIVATIONS = {
    "elu": ad.elu,
    "relu": ad.relu,
    "tanh": ad.tanh,
    "linear": lambda x: x,
}


@dataclass(frozen=True)
class MLPSpec:
    """Layer sizes (input, hidden..., output) and hidden activation."""

    sizes: tuple
    activation: str = "elu"

    def __post_init__(self):
        if len(self.sizes) < 2:
            raise ConfigError("MLPSpec needs at least input and output sizes")
        if self.activation not in _ACTIVATIONS:
            raise ConfigError(f"unknown activation '{self.activation}'")

    @property
    def n_layers(self):
        return len(self.sizes) - 1


def mlp_init(rng, spec):
    """Fan-in-scaled uniform weights, zero biases."""
    leaves = {}
    for i, (fan_in, fan_out) in enumerate(zip(spec.sizes[:-1], spec.sizes[1:])):
        bound = 1.0 / np.sqrt(fan_in)
        leaves[f"W{i}"] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        leaves[f"b{i}"] = np.zeros(fan_out)
    return leaves


def mlp_apply(params, x, spec):
    """Forward pass; hidden layers use spec.activation, output is linear."""
    act = _ACTIVATIONS[spec.activation]
    h = x
    for i in range(spec.n_layers):
        w = params[f"W{i}"]
        in_dim = ad.value(h).shape[-1]
        w_rows = ad.value(w).shape[0]
        if in_dim != w_rows:
            raise ConfigError(
                f"layer W{i}: input has {in_dim} features, weight expects {w_rows}"
            )
        h = ad.add(ad.matmul(h, w), params[f"b{i}"])
        if i < spec.n_layers - 1:
            h = act(h)
    return h


def lstm_init(rng, in_dim, hidden):
    """Input weights fan-in uniform, recurrent weights orthogonal, zero biases.

    Gate layout along the last axis: input, forget, cell, output.
    """
    bound = 1.0 / np.sqrt(in_dim)
    w_x = rng.uniform(-bound, bound, size=(in_dim, 4 * hidden))
    blocks = []
    for _ in range(4):
        q, _ = np.linalg.qr(rng.standard_normal((hidden, hidden)))
        blocks.append(q)
    w_h = np.concatenate(blocks, axis=1)
    return {"Wx": w_x, "Wh": w_h, "b": np.zeros(4 * hidden)}


def lstm_hidden_size(params):
    return ad.value(params["Wh"]).shape[0]


def lstm_cell(params, x, h, c):
    hidden = lstm_hidden_size(params)
    in_dim = ad.value(x).shape[-1]
    expected = ad.value(params["Wx"]).shape[0]
    if in_dim != expected:
        raise ConfigError(
            f"recurrent cell: input has {in_dim} features, weight expects {expected}"
        )
    gates = ad.add(ad.add(ad.matmul(x, params["Wx"]), ad.matmul(h, params["Wh"])),
                   params["b"])
    batched = ad.value(gates).ndim == 2
    def part(k):
        sl = slice(k * hidden, (k + 1) * hidden)
        return gates[(slice(None), sl)] if batched else gates[sl]
    i = ad.sigmoid(part(0))
    f = ad.sigmoid(part(1))
    g = ad.tanh(part(2))
    o = ad.sigmoid(part(3))
    c_new = ad.add(ad.mul(f, c), ad.mul(i, g))
    h_new = ad.mul(o, ad.tanh(c_new))
    return h_new, c_new


def rnn_apply(params, sequence):
    """Run the gated recurrence over a sequence; return the final hidden state.

    `sequence` is a list of per-step inputs, each a vector or a (batch, dim)
    array/Tensor.  State starts at zero.
    """
    if len(sequence) == 0:
        raise ValueError("rnn_apply: empty sequence")
    hidden = lstm_hidden_size(params)
    first = ad.value(sequence[0])
    shape = (first.shape[0], hidden) if first.ndim == 2 else (hidden,)
    h = np.zeros(shape)
    c = np.zeros(shape)
    for x in sequence:
        h, c = lstm_cell(params, x, h, c)
    return h
