"""Minimal differentiable-computation kernel.

Float64 throughout; checkpoints store float32.  Forward passes are pure and
work on raw arrays (inference) or lifted Tensors (training).
"""

from . import autodiff as ad
from .autodiff import Tensor, backprop, stop_gradient
from .checkpoint import load_params, save_params
from .dists import (
    DiagGaussian,
    TanhGaussian,
    diag_gaussian_kl,
    standard_gaussian_like,
    tanh_gaussian_sample_logprob,
)
from .nets import MLPSpec, lstm_cell, lstm_init, mlp_apply, mlp_init, rnn_apply
from .optim import AdamState, adam_step, soft_update
from .params import ParamTree, prefixed, subtree

__all__ = [
    "ad",
    "Tensor",
    "backprop",
    "stop_gradient",
    "load_params",
    "save_params",
    "DiagGaussian",
    "TanhGaussian",
    "diag_gaussian_kl",
    "standard_gaussian_like",
    "tanh_gaussian_sample_logprob",
    "MLPSpec",
    "lstm_cell",
    "lstm_init",
    "mlp_apply",
    "mlp_init",
    "rnn_apply",
    "AdamState",
    "adam_step",
    "soft_update",
    "ParamTree",
    "prefixed",
    "subtree",
]
