"""Skill model: networks, training losses, and the extraction loop.

Eight trainable networks live in one parameter tree:

  encoder     skill encoder over the four key states -> Gaussian over skills
  decoder     per-state action decoder conditioned on the skill
  prior       state-conditioned skill prior
  cond_rep    skill-conditioned state representation (similarity, left side)
  state_rep   state representation (similarity, right side)
  state_enc   state encoder into the latent space
  obs_dec     observation decoder back out of the latent space
  dyn         latent-space predictor of the state after the skill completes

The similarity score of reaching s2 from s under skill z is the inner
product <cond_rep(s, z), state_rep(s2)>.

Training minimizes embedding + contrastive + target losses; skill lengths in
the dataset are relabeled every `relabel_interval` steps.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .dataset import sample_window_batch
from .diffcore import (
    AdamState,
    DiagGaussian,
    MLPSpec,
    TanhGaussian,
    ad,
    adam_step,
    backprop,
    diag_gaussian_kl,
    load_params,
    mlp_apply,
    mlp_init,
    rnn_apply,
    lstm_init,
    save_params,
    standard_gaussian_like,
)
from .diffcore.params import ParamTree, prefixed, subtree
from .errors import ConfigError, TrainingError

CHECKPOINT_KIND = "skill-model"


@dataclass(frozen=True)
class ModelConfig:
    state_dim: int
    action_dim: int
    skill_dim: int
    encoder_arch: str = "rnn"   # "rnn" follows the sequence view; "mlp" concatenates
    encoder_hidden: int = 128
    hidden: int = 256
    layers: int = 4
    activation: str = "elu"
    sim_hidden: int = 128
    sim_layers: int = 2
    sim_dim: int = 16
    latent_dim: int = 128

    def __post_init__(self):
        if self.encoder_arch not in ("rnn", "mlp"):
            raise ConfigError(f"unknown encoder_arch '{self.encoder_arch}'")
        if min(self.state_dim, self.action_dim, self.skill_dim) <= 0:
            raise ConfigError("model dims must be positive")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _hidden_stack(cfg):
    return (cfg.hidden,) * (cfg.layers - 1)


def _sim_stack(cfg):
    return (cfg.sim_hidden,) * (cfg.sim_layers - 1)


class SkillModel:
    def __init__(self, cfg, params):
        self.cfg = cfg
        self.params = params
        sd, ad_, zd = cfg.state_dim, cfg.action_dim, cfg.skill_dim
        self.specs = {
            "encoder_head": MLPSpec((cfg.encoder_hidden, 2 * zd), "linear"),
            "encoder_mlp": MLPSpec((4 * sd, *_hidden_stack(cfg), 2 * zd),
                                   cfg.activation),
            "decoder": MLPSpec((sd + zd, *_hidden_stack(cfg), 2 * ad_),
                               cfg.activation),
            "prior": MLPSpec((sd, *_hidden_stack(cfg), 2 * zd), cfg.activation),
            "cond_rep": MLPSpec((sd + zd, *_sim_stack(cfg), cfg.sim_dim), "relu"),
            "state_rep": MLPSpec((sd, *_sim_stack(cfg), cfg.sim_dim), "relu"),
            "obs_dec": MLPSpec((cfg.latent_dim, *_hidden_stack(cfg), sd),
                               cfg.activation),
            "dyn": MLPSpec((cfg.latent_dim + zd, *_hidden_stack(cfg),
                            cfg.latent_dim), cfg.activation),
        }

    @classmethod
    def init(cls, cfg, seed):
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        model = cls(cfg, None)
        leaves = {}
        if cfg.encoder_arch == "rnn":
            leaves.update(prefixed(lstm_init(rng, cfg.state_dim, cfg.encoder_hidden),
                                   "encoder"))
            leaves.update(prefixed(mlp_init(rng, model.specs["encoder_head"]),
                                   "encoder_head"))
        else:
            leaves.update(prefixed(mlp_init(rng, model.specs["encoder_mlp"]),
                                   "encoder_mlp"))
        for name in ("decoder", "prior", "cond_rep", "state_rep", "obs_dec", "dyn"):
            leaves.update(prefixed(mlp_init(rng, model.specs[name]), name))
        leaves.update(prefixed(lstm_init(rng, cfg.state_dim, cfg.latent_dim),
                               "state_enc"))
        model.params = ParamTree(leaves)
        return model

    # -- forward passes (pmap may hold raw arrays or lifted Tensors) --------

    def _pmap(self, pmap):
        return self.params.leaves if pmap is None else pmap

    def _mlp(self, pmap, name, x):
        return mlp_apply(subtree(self._pmap(pmap), name), x, self.specs[name])

    @staticmethod
    def _split_gaussian(out):
        width = ad.value(out).shape[-1] // 2
        if ad.value(out).ndim == 1:
            return DiagGaussian(out[:width], out[width:])
        return DiagGaussian(out[:, :width], out[:, width:])

    def encode_skill(self, key_states, pmap=None):
        """Gaussian over skills from the four key states, (4, sd) or (B, 4, sd)."""
        keys = np.asarray(key_states, dtype=np.float64)
        if keys.ndim == 2:
            keys = keys[None]
            squeeze = True
        else:
            squeeze = False
        if keys.ndim != 3 or keys.shape[1] != 4 or keys.shape[2] != self.cfg.state_dim:
            raise ConfigError(
                f"encode_skill expects (4, {self.cfg.state_dim}) key states, "
                f"got {np.asarray(key_states).shape}"
            )
        pmap = self._pmap(pmap)
        if self.cfg.encoder_arch == "rnn":
            h = rnn_apply(subtree(pmap, "encoder"), [keys[:, i, :] for i in range(4)])
            out = self._mlp(pmap, "encoder_head", h)
        else:
            out = self._mlp(pmap, "encoder_mlp", keys.reshape(keys.shape[0], -1))
        if squeeze:
            out = out[0]
        return self._split_gaussian(out)

    def action_dist(self, state, z, pmap=None):
        x = ad.concat([state, z], axis=-1)
        return TanhGaussian(self._split_gaussian(self._mlp(pmap, "decoder", x)))

    def prior_dist(self, state, pmap=None):
        return self._split_gaussian(self._mlp(pmap, "prior", state))

    def cond_rep(self, state, z, pmap=None):
        return self._mlp(pmap, "cond_rep", ad.concat([state, z], axis=-1))

    def state_rep(self, state, pmap=None):
        return self._mlp(pmap, "state_rep", state)

    def similarity(self, state, z, next_state, pmap=None):
        """Inner-product similarity score; sigmoid of it is the reach probability."""
        left = self.cond_rep(state, z, pmap)
        right = self.state_rep(next_state, pmap)
        return ad.sum_(ad.mul(left, right), axis=-1)

    def encode_state(self, state, pmap=None):
        return rnn_apply(subtree(self._pmap(pmap), "state_enc"), [state])

    def decode_obs(self, latent, pmap=None):
        return self._mlp(pmap, "obs_dec", latent)

    def predict_target_latent(self, state, z, pmap=None):
        h = self.encode_state(state, pmap)
        return self._mlp(pmap, "dyn", ad.concat([h, z], axis=-1))

    def predict_target_obs(self, state, z):
        """Decoded observation of the predicted post-skill state."""
        return self.decode_obs(self.predict_target_latent(state, z))

    # -- inference conveniences (plain numpy) --------------------------------

    def encode_skill_mode(self, key_states):
        """Deterministic squashed mean skill for the window."""
        return np.tanh(ad.value(self.encode_skill(key_states).mean))

    def sample_skill(self, key_states, rng):
        return np.tanh(ad.value(self.encode_skill(key_states).sample(rng)))

    def action_mean(self, state, z):
        return ad.value(self.action_dist(state, z).mode())

    def sample_action(self, state, z, rng):
        return ad.value(self.action_dist(state, z).sample(rng))

    def prior_mode(self, state):
        return np.tanh(ad.value(self.prior_dist(state).mean))

    def sample_prior_skill(self, state, rng):
        return np.tanh(ad.value(self.prior_dist(state).sample(rng)))

    # -- persistence ----------------------------------------------------------

    def save(self, prefix, extra_meta=None):
        meta = {"kind": CHECKPOINT_KIND, "config": self.cfg.to_dict()}
        if extra_meta:
            meta.update(extra_meta)
        return save_params(self.params, prefix, meta=meta)

    @classmethod
    def load(cls, prefix):
        params, meta = load_params(prefix)
        if meta.get("kind") != CHECKPOINT_KIND:
            from .errors import FormatError

            raise FormatError(
                f"field 'kind': expected '{CHECKPOINT_KIND}', got {meta.get('kind')!r}"
            )
        return cls(ModelConfig.from_dict(meta["config"]), params), meta


# ---------------------------------------------------------------------------
# training configuration and losses

@dataclass
class TrainConfig:
    bc_weight: float = 2.0
    skill_prior_weight: float = 1.0
    contrastive_weight: float = 1.0
    recon_weight: float = 1.0
    target_weight: float = 2.0
    kl_weight: float = 0.001        # weight of the KL to the fixed skill prior
    batch_size: int = 256
    max_steps: int = 100_000
    relabel_interval: int = 20_000
    threshold: float = 0.0          # relabeling similarity threshold
    min_length: int = 4
    max_length: int = 30
    lr: float = 3e-4
    scan_mode: str = "first_break"  # relabeling scan semantics

    def __post_init__(self):
        weights = (self.bc_weight, self.skill_prior_weight, self.contrastive_weight,
                   self.recon_weight, self.target_weight, self.kl_weight)
        if any(w < 0 for w in weights):
            raise ConfigError("loss weights must be >= 0")
        if self.min_length < 4:
            raise ConfigError("min_length must be >= 4 (four key states)")
        if self.min_length > self.max_length:
            raise ConfigError("min_length must be <= max_length")
        if self.relabel_interval < 1:
            raise ConfigError("relabel_interval must be >= 1")


@dataclass(frozen=True)
class LossBreakdown:
    embedding: float
    contrastive: float
    target: float
    total: float
    bc: float                  # mean action log-likelihood (higher is better)
    kl_z: float                # KL(posterior || fixed skill prior)
    skill_prior_kl: float      # KL(stopgrad posterior || learned prior)
    reconstruction: float
    target_prediction: float

    CSV_FIELDS = ("total", "embedding", "contrastive", "target", "bc", "kl_z",
                  "skill_prior_kl", "reconstruction", "target_prediction")

    def row(self):
        return [getattr(self, f) for f in self.CSV_FIELDS]

    @property
    def finite(self):
        return all(np.isfinite(v) for v in self.row())


def _encode_batch(model, pmap, batch, rng):
    q_dist = model.encode_skill(batch.keys, pmap)
    z = ad.tanh(q_dist.sample(rng))
    return q_dist, z


def embedding_loss(model, pmap, batch, cfg, q_dist=None, z=None, rng=None,
                   stopgrad_posterior=None):
    """Behavior cloning + KL to the fixed prior + learned-prior fit.

    The learned-prior KL sees a stop-gradient of the posterior: it trains
    only the prior network.  `stopgrad_posterior` lets finite-difference
    oracles hold that detached posterior fixed, which is what the
    stop-gradient means.
    """
    if q_dist is None:
        q_dist, z = _encode_batch(model, pmap, batch, rng)

    z_rows = ad.take_rows(z, batch.flat_window)
    dist = model.action_dist(batch.flat_states, z_rows, pmap)
    log_probs = dist.log_prob(batch.flat_actions)
    bc = ad.sum_(ad.mul(log_probs, batch.flat_weight))

    kl_z = ad.mean(diag_gaussian_kl(q_dist, standard_gaussian_like(q_dist)))

    prior = model.prior_dist(batch.start_states, pmap)
    frozen = q_dist.detached() if stopgrad_posterior is None else stopgrad_posterior
    sp_kl = ad.mean(diag_gaussian_kl(frozen, prior))

    loss = ad.add(
        ad.add(ad.mul(bc, -cfg.bc_weight), ad.mul(kl_z, cfg.kl_weight)),
        ad.mul(sp_kl, cfg.skill_prior_weight),
    )
    parts = {"bc": float(ad.value(bc)), "kl_z": float(ad.value(kl_z)),
             "skill_prior_kl": float(ad.value(sp_kl))}
    return loss, parts


def contrastive_loss(model, pmap, batch, cfg, q_dist=None, z=None, rng=None):
    """Binary NCE over reach similarity: one positive, one negative per window.

    The positive is the later interior key state; negatives are drawn
    uniformly from states outside the window.
    """
    if z is None:
        _, z = _encode_batch(model, pmap, batch, rng)
    left = model.cond_rep(batch.start_states, z, pmap)
    f_pos = ad.sum_(ad.mul(left, model.state_rep(batch.positives, pmap)), axis=-1)
    f_neg = ad.sum_(ad.mul(left, model.state_rep(batch.negatives, pmap)), axis=-1)
    # -log sigmoid(f+) - log(1 - sigmoid(f-)) in softplus form
    per_window = ad.add(ad.softplus(ad.mul(f_pos, -1.0)), ad.softplus(f_neg))
    return ad.mul(ad.mean(per_window), cfg.contrastive_weight)


def target_loss(model, pmap, batch, cfg, q_dist=None, z=None, rng=None):
    """Observation reconstruction plus latent post-skill state prediction."""
    if z is None:
        _, z = _encode_batch(model, pmap, batch, rng)
    h = model.encode_state(batch.start_states, pmap)
    recon_err = ad.sub(model.decode_obs(h, pmap), batch.start_states)
    recon = ad.mean(ad.sum_(ad.mul(recon_err, recon_err), axis=-1))

    h_succ = model.encode_state(batch.successors, pmap)
    pred_err = ad.sub(model._mlp(pmap, "dyn", ad.concat([h, z], axis=-1)), h_succ)
    pred = ad.mean(ad.sum_(ad.mul(pred_err, pred_err), axis=-1))

    loss = ad.add(ad.mul(recon, cfg.recon_weight), ad.mul(pred, cfg.target_weight))
    parts = {"reconstruction": float(ad.value(recon)),
             "target_prediction": float(ad.value(pred))}
    return loss, parts


def compute_losses(model, pmap, batch, cfg, rng):
    """All loss terms with one shared reparameterized skill sample."""
    q_dist, z = _encode_batch(model, pmap, batch, rng)
    emb, emb_parts = embedding_loss(model, pmap, batch, cfg, q_dist, z)
    con = contrastive_loss(model, pmap, batch, cfg, q_dist, z)
    tgt, tgt_parts = target_loss(model, pmap, batch, cfg, q_dist, z)
    total = ad.add(ad.add(emb, con), tgt)
    breakdown = LossBreakdown(
        embedding=float(ad.value(emb)),
        contrastive=float(ad.value(con)),
        target=float(ad.value(tgt)),
        total=float(ad.value(total)),
        **emb_parts,
        **tgt_parts,
    )
    return total, breakdown


class SkillTrainer:
    """Owns the model during extraction; one optimizer over all networks."""

    def __init__(self, model, dataset, cfg, seed):
        self.model = model
        self.dataset = dataset
        self.cfg = cfg
        root = np.random.SeedSequence(seed)
        batch_seq, self._relabel_seq = root.spawn(2)
        self.rng = np.random.default_rng(batch_seq)
        self.adam = AdamState.init(model.params)
        self.last_breakdown = None
        self.relabel_reports = []

    def step(self, step_index):
        """One gradient step; relabels when step_index hits the interval."""
        batch = sample_window_batch(self.dataset, self.cfg.batch_size, self.rng,
                                    self.cfg.min_length)
        lifted = self.model.params.lift()
        total, breakdown = compute_losses(self.model, lifted, batch, self.cfg,
                                          self.rng)
        if not breakdown.finite:
            raise TrainingError(
                f"non-finite loss at step {step_index}",
                last_breakdown=self.last_breakdown,
            )
        grads = backprop(total, lifted)
        self.model.params, self.adam = adam_step(
            self.adam, self.model.params, grads, self.cfg.lr)
        self.last_breakdown = breakdown
        if step_index > 0 and step_index % self.cfg.relabel_interval == 0:
            self.run_relabel_pass(step_index)
        return breakdown

    def run_relabel_pass(self, step_index):
        from .relabel import RelabelConfig, relabel_dataset

        rcfg = RelabelConfig(
            threshold=self.cfg.threshold,
            min_length=self.cfg.min_length,
            max_length=self.cfg.max_length,
            scan_mode=self.cfg.scan_mode,
        )
        rng = np.random.default_rng(self._relabel_seq.spawn(1)[0])
        report = relabel_dataset(self.model, self.dataset, rcfg, rng,
                                 pass_index=len(self.relabel_reports) + 1,
                                 step=step_index)
        self.relabel_reports.append(report)
        return report

    def run(self, steps=None, on_step=None):
        steps = self.cfg.max_steps if steps is None else steps
        for i in range(1, steps + 1):
            breakdown = self.step(i)
            if on_step is not None:
                on_step(i, breakdown)
        return self.last_breakdown
