"""Central finite-difference verification of recorded gradients."""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor, backprop


def numeric_grads(loss_fn, params, h=1e-5):
    """Central-difference gradients of `loss_fn` at `params`.

    `loss_fn` maps a name->ndarray dict to a float and must be pure.
    """
    grads = {}
    base = {k: np.array(v, dtype=np.float64) for k, v in params.items()}
    for name, arr in base.items():
        g = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = loss_fn(base)
            flat[i] = orig - h
            down = loss_fn(base)
            flat[i] = orig
            gflat[i] = (up - down) / (2.0 * h)
        grads[name] = g
    return grads


def analytic_grads(loss_fn, params):
    """Recorded gradients of `loss_fn` at `params` via backprop."""
    lifted = {k: Tensor(v) for k, v in params.items()}
    loss = loss_fn(lifted)
    return backprop(loss, lifted), float(loss.data)


def max_grad_error(loss_fn, params, h=1e-5):
    """Worst relative error between recorded and numeric gradients.

    Relative error is |a - n| / (atol/rtol + |n|)-style: the returned value is
    max over elements of |a - n| / (1e-6/rtol + |n|) scaled so that a result
    <= rtol means every element satisfies |a - n| <= atol + rtol * |n| with
    atol = 1e-6.
    """
    analytic, _ = analytic_grads(loss_fn, params)
    numeric = numeric_grads(loss_fn, params, h=h)
    worst = 0.0
    for name in params:
        denom = 1e-6 / 1e-4 + np.abs(numeric[name])
        err = np.abs(analytic[name] - numeric[name]) / denom
        worst = max(worst, float(err.max()) if err.size else 0.0)
    return worst


def assert_grads_close(loss_fn, params, rtol=1e-4, atol=1e-6, h=1e-5):
    analytic, _ = analytic_grads(loss_fn, params)
    numeric = numeric_grads(loss_fn, params, h=h)
    for name in params:
        a, n = analytic[name], numeric[name]
        if not np.allclose(a, n, rtol=rtol, atol=atol):
            worst = np.abs(a - n).max()
            raise AssertionError(
                f"gradient mismatch on leaf '{name}': max abs err {worst:.3e}"
            )
