"""Dynamic skill-length relabeling.

Each pass rewrites the per-timestep skill length: the skill for the stored
window at t is encoded deterministically, then similarity against the states
after t decides how long the skill's effect persists.  The default scan stops
at the first non-positive margin (consecutive semantics); `set_max` instead
takes the furthest state whose similarity clears the threshold, even past a
dip.  New lengths are clamped to [min_length, min(max_length, steps left)].
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import select_key_states
from .errors import ConfigError

SCAN_MODES = ("first_break", "set_max")


@dataclass(frozen=True)
class RelabelConfig:
    threshold: float = 0.0
    min_length: int = 4
    max_length: int = 30
    scan_mode: str = "first_break"
    n_sample: int | None = None  # None relabels every valid start

    def __post_init__(self):
        if self.min_length < 4:
            raise ConfigError("min_length must be >= 4")
        if self.min_length > self.max_length:
            raise ConfigError("min_length must be <= max_length")
        if self.scan_mode not in SCAN_MODES:
            raise ConfigError(f"scan_mode must be one of {SCAN_MODES}")


def new_length_from_sims(sims_after, threshold, min_length, max_length,
                         remaining, scan_mode="first_break"):
    """New skill length from similarity values at offsets 1, 2, ...

    `sims_after[k]` is the similarity of the state k+1 steps past the start;
    `remaining` is the number of steps from the start to the episode end.
    """
    above = np.asarray(sims_after) > threshold
    if scan_mode == "first_break":
        run = int(np.argmin(above)) if not above.all() else len(above)
        raw = 1 + run
    else:
        raw = int(np.nonzero(above)[0][-1]) + 2 if above.any() else 1
    return int(max(min_length, min(raw, max_length, remaining)))


def _encode_window_skill(model, states, t, length, rng):
    keys = select_key_states(t, length, rng)
    return model.encode_skill_mode(states[list(keys)].astype(np.float64))


def relabel_one(model, trajectory, t, cfg, rng):
    """New length for the start at `t`, leaving the trajectory untouched."""
    states = trajectory.states.astype(np.float64)
    n = len(states)
    enc_len = min(int(trajectory.skill_length[t]), n - t)
    if enc_len < cfg.min_length:
        raise ConfigError(f"start t={t} has fewer than {cfg.min_length} steps left")
    z = _encode_window_skill(model, states, t, enc_len, rng)
    sims = _similarity_profile(model, states[t], z, states[t + 1:])
    return new_length_from_sims(sims, cfg.threshold, cfg.min_length,
                                cfg.max_length, n - t, cfg.scan_mode)


def _similarity_profile(model, start_state, z, later_states):
    left = np.asarray(model.cond_rep(start_state, z))
    right = np.asarray(model.state_rep(later_states))
    return right @ left


@dataclass
class RelabelReport:
    pass_index: int
    step: int
    n_relabeled: int
    min_bound: int
    max_bound: int
    mean_old: float
    mean_new: float
    median_new: float
    min_new: int
    max_new: int
    mean_abs_change: float
    frac_at_min: float
    frac_at_max: float
    old_hist: dict = field(default_factory=dict)
    new_hist: dict = field(default_factory=dict)

    CSV_FIELDS = ("pass_index", "step", "n_relabeled", "min_bound", "max_bound",
                  "mean_old", "mean_new", "median_new", "min_new", "max_new",
                  "mean_abs_change", "frac_at_min", "frac_at_max")

    def row(self):
        return [getattr(self, f) for f in self.CSV_FIELDS]

    @property
    def interior_fraction(self):
        """Mass strictly between the two clamping bounds."""
        total = sum(self.new_hist.values())
        interior = sum(c for length, c in self.new_hist.items()
                       if self.min_bound < length < self.max_bound)
        return interior / total if total else 0.0


def _histogram(values):
    lengths, counts = np.unique(np.asarray(values, dtype=np.int64),
                                return_counts=True)
    return {int(l): int(c) for l, c in zip(lengths, counts)}


def relabel_dataset(model, dataset, cfg, rng=None, pass_index=1, step=0):
    """Relabel every valid start in place; returns a RelabelReport.

    Episodes are processed in order; within an episode all new lengths are
    computed from the pre-pass lengths before any are written.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    old_all, new_all = [], []
    for traj in dataset.trajectories:
        states = traj.states.astype(np.float64)
        n = len(states)
        starts = np.arange(0, n - cfg.min_length + 1, dtype=np.int64)
        if cfg.n_sample is not None and len(starts) > cfg.n_sample:
            starts = np.sort(rng.choice(starts, size=cfg.n_sample, replace=False))
        if len(starts) == 0:
            continue

        key_rows = np.empty((len(starts), 4, states.shape[1]))
        for i, t in enumerate(starts):
            enc_len = min(int(traj.skill_length[t]), n - t)
            keys = select_key_states(int(t), enc_len, rng)
            key_rows[i] = states[list(keys)]
        z = model.encode_skill_mode(key_rows)

        left = np.asarray(model.cond_rep(states[starts], z))
        right = np.asarray(model.state_rep(states))
        sims = left @ right.T  # (starts, T)

        new_lengths = traj.skill_length.copy()
        for i, t in enumerate(starts):
            t = int(t)
            new_lengths[t] = new_length_from_sims(
                sims[i, t + 1:], cfg.threshold, cfg.min_length, cfg.max_length,
                n - t, cfg.scan_mode)
            old_all.append(int(traj.skill_length[t]))
            new_all.append(int(new_lengths[t]))
        traj.skill_length[:] = new_lengths
    dataset.lengths_changed()

    old = np.asarray(old_all, dtype=np.float64)
    new = np.asarray(new_all, dtype=np.float64)
    return RelabelReport(
        pass_index=pass_index,
        step=step,
        n_relabeled=len(new_all),
        min_bound=cfg.min_length,
        max_bound=cfg.max_length,
        mean_old=float(old.mean()),
        mean_new=float(new.mean()),
        median_new=float(np.median(new)),
        min_new=int(new.min()),
        max_new=int(new.max()),
        mean_abs_change=float(np.abs(new - old).mean()),
        frac_at_min=float((new == cfg.min_length).mean()),
        frac_at_max=float((new == cfg.max_length).mean()),
        old_hist=_histogram(old_all),
        new_hist=_histogram(new_all),
    )


def write_report_csv(reports, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RelabelReport.CSV_FIELDS)
        for report in reports:
            writer.writerow(report.row())


def write_length_histogram_csv(report, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["length", "count"])
        for length in sorted(report.new_hist):
            writer.writerow([length, report.new_hist[length]])
