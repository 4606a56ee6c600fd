"""Adam optimizer over parameter trees."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingError
from .params import ParamTree


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    step: int = 0

    @classmethod
    def init(cls, params):
        return cls(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
            step=0,
        )


def adam_step(state, params, grads, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """One Adam update. Returns (new params, new state); inputs untouched."""
    if lr <= 0:
        raise ValueError(f"adam_step: lr must be positive, got {lr}")
    t = state.step + 1
    new_params, new_m, new_v = {}, {}, {}
    bias1 = 1.0 - beta1 ** t
    bias2 = 1.0 - beta2 ** t
    for name, p in params.items():
        g = np.asarray(grads[name])
        if g.shape != p.shape:
            raise ValueError(
                f"adam_step: gradient shape {g.shape} != param shape {p.shape}"
                f" for leaf '{name}'"
            )
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient in leaf '{name}'")
        m = beta1 * state.m[name] + (1.0 - beta1) * g
        v = beta2 * state.v[name] + (1.0 - beta2) * g * g
        m_hat = m / bias1
        v_hat = v / bias2
        new_params[name] = p - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_m[name] = m
        new_v[name] = v
    if isinstance(params, ParamTree):
        new_params = params.replaced(new_params)
    return new_params, AdamState(m=new_m, v=new_v, step=t)


def soft_update(target, source, tau):
    """Polyak interpolation: target <- (1 - tau) * target + tau * source."""
    return {k: (1.0 - tau) * target[k] + tau * source[k] for k in target}
