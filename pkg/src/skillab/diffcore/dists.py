"""Diagonal-Gaussian and tanh-squashed Gaussian distributions.

Parameters may be Tensors (training) or plain arrays (inference).  The
log-std is clamped to [-10, 2] at construction.  Reductions (log-densities,
KL) sum over the last axis so batched (B, d) parameters yield (B,) values.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad

LOG_STD_MIN = -10.0
LOG_STD_MAX = 2.0
_LOG_2PI = float(np.log(2.0 * np.pi))
_LOG_2 = float(np.log(2.0))
# keeps atanh finite when squashed values sit exactly on the boundary
_ATANH_EPS = 1e-6


class DiagGaussian:
    """Independent Gaussian per dimension, parameterized by mean and log-std."""

    def __init__(self, mean, log_std):
        self.mean = mean
        self.log_std = ad.clip(log_std, LOG_STD_MIN, LOG_STD_MAX)

    @property
    def dim(self):
        return ad.value(self.mean).shape[-1]

    def detached(self):
        return DiagGaussian(ad.stop_gradient(self.mean),
                            ad.stop_gradient(self.log_std))

    def sample(self, rng):
        """Reparameterized draw: mean + std * eps with external noise."""
        eps = rng.standard_normal(ad.value(self.mean).shape)
        return ad.add(self.mean, ad.mul(ad.exp(self.log_std), eps))

    def log_prob(self, x):
        z = ad.div(ad.sub(x, self.mean), ad.exp(self.log_std))
        per_dim = ad.sub(ad.mul(ad.mul(z, z), -0.5),
                         ad.add(self.log_std, 0.5 * _LOG_2PI))
        return ad.sum_(per_dim, axis=-1)

    def kl(self, other):
        return diag_gaussian_kl(self, other)


def diag_gaussian_kl(a, b):
    """Closed-form KL(a || b), summed over the last axis."""
    if a.dim != b.dim:
        raise ValueError(f"KL dimension mismatch: {a.dim} vs {b.dim}")
    log_ratio = ad.sub(b.log_std, a.log_std)
    var_ratio = ad.exp(ad.mul(ad.sub(a.log_std, b.log_std), 2.0))
    diff = ad.sub(a.mean, b.mean)
    scaled = ad.mul(ad.mul(diff, diff),
                    ad.exp(ad.mul(b.log_std, -2.0)))
    per_dim = ad.sub(ad.add(log_ratio, ad.mul(ad.add(var_ratio, scaled), 0.5)), 0.5)
    return ad.sum_(per_dim, axis=-1)


def standard_gaussian_like(dist):
    """N(0, I) with the same shape as `dist`'s parameters."""
    shape = ad.value(dist.mean).shape
    return DiagGaussian(np.zeros(shape), np.zeros(shape))


def _tanh_log_jacobian(pre):
    # log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u)), stable for large |u|
    return ad.mul(ad.sub(ad.sub(_LOG_2, pre), ad.softplus(ad.mul(pre, -2.0))), 2.0)


# float64 tanh saturates to exactly +-1 for |x| > ~19; keep samples strictly
# inside the open interval
_SQUASH_BOUND = 1.0 - 1e-10


class TanhGaussian:
    """tanh of a DiagGaussian; samples lie strictly inside (-1, 1)."""

    def __init__(self, base):
        self.base = base

    @property
    def dim(self):
        return self.base.dim

    def mode(self):
        """Deterministic squashed mean (the evaluation-time action)."""
        return ad.clip(ad.tanh(self.base.mean), -_SQUASH_BOUND, _SQUASH_BOUND)

    def sample_with_log_prob(self, rng):
        pre = self.base.sample(rng)
        sample = ad.clip(ad.tanh(pre), -_SQUASH_BOUND, _SQUASH_BOUND)
        log_prob = ad.sub(self.base.log_prob(pre),
                          ad.sum_(_tanh_log_jacobian(pre), axis=-1))
        return sample, log_prob

    def sample(self, rng):
        return ad.clip(ad.tanh(self.base.sample(rng)),
                       -_SQUASH_BOUND, _SQUASH_BOUND)

    def log_prob(self, x):
        """Log-density of squashed values; x is clipped just inside (-1, 1)."""
        xv = np.clip(ad.value(x), -1.0 + _ATANH_EPS, 1.0 - _ATANH_EPS)
        pre = np.arctanh(xv)
        correction = np.sum(np.log1p(-(xv * xv)), axis=-1)
        return ad.sub(self.base.log_prob(pre), correction)


def tanh_gaussian_sample_logprob(dist, seed):
    """Seeded reparameterized draw from a TanhGaussian with its log-density."""
    rng = np.random.default_rng(seed)
    return dist.sample_with_log_prob(rng)
