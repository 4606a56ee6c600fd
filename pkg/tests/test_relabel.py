import numpy as np
import pytest
from conftest import tiny_model_config, toy_dataset, zero_leaves

from skillab.errors import ConfigError
from skillab.relabel import (
    RelabelConfig,
    new_length_from_sims,
    relabel_dataset,
    relabel_one,
)
from skillab.skillmodel import SkillModel


def _constant_similarity_model(value):
    """Zero-weight similarity nets biased so every score equals `value`."""
    model = SkillModel.init(tiny_model_config(), seed=0)
    zero_leaves(model, ["cond_rep", "state_rep"])
    model.params["cond_rep/b1"][0] = 1.0
    model.params["state_rep/b1"][0] = value
    return model


# -- pure scan semantics ------------------------------------------------------

def test_scripted_similarity_table_yields_exact_length():
    # similarity positive for offsets 1..7, non-positive at 8
    sims = np.array([1.0] * 7 + [-1.0] + [1.0] * 5)
    out = new_length_from_sims(sims, threshold=0.0, min_length=4, max_length=30,
                               remaining=50)
    assert out == 8


def test_always_negative_scan_clamps_to_min():
    sims = np.full(20, -1.0)
    assert new_length_from_sims(sims, 0.0, 4, 30, remaining=21) == 4


def test_always_positive_scan_clamps_to_max():
    sims = np.full(100, 1.0)
    assert new_length_from_sims(sims, 0.0, 4, 30, remaining=101) == 30


def test_episode_boundary_caps_growth():
    sims = np.full(10, 1.0)
    assert new_length_from_sims(sims, 0.0, 4, 30, remaining=11) == 11


def test_infinite_threshold_collapses_to_min():
    sims = np.full(30, 5.0)
    assert new_length_from_sims(sims, np.inf, 4, 30, remaining=31) == 4


def test_similarities_beyond_break_never_matter():
    rng = np.random.default_rng(0)
    base = np.array([2.0, 2.0, 2.0, -0.5])
    for _ in range(20):
        tail = rng.uniform(-5, 5, size=10)
        out = new_length_from_sims(np.concatenate([base, tail]), 0.0, 4, 30, 40)
        assert out == new_length_from_sims(base, 0.0, 4, 30, 40) == 4


def test_set_max_scans_past_dips():
    sims = np.array([1.0, -1.0, 1.0, 1.0, 1.0, 1.0, 1.0, -1.0])
    first = new_length_from_sims(sims, 0.0, 4, 30, 40, scan_mode="first_break")
    setmax = new_length_from_sims(sims, 0.0, 4, 30, 40, scan_mode="set_max")
    assert first == 4   # breaks at offset 2, raw length 2, clamped up
    assert setmax == 8  # furthest positive offset is 7


def test_threshold_monotonicity_pointwise_pure():
    rng = np.random.default_rng(3)
    for _ in range(200):
        sims = rng.uniform(-1, 1, size=25)
        lengths = [
            new_length_from_sims(sims, eps, 4, 30, 26)
            for eps in (-0.5, -0.1, 0.0, 0.1, 0.5)
        ]
        assert all(a >= b for a, b in zip(lengths, lengths[1:]))


# -- single-start relabeling through the model -------------------------------

def test_relabel_one_immediate_break_hits_min_bound():
    model = _constant_similarity_model(-1.0)
    ds = toy_dataset(lengths=(40,))
    cfg = RelabelConfig()
    assert relabel_one(model, ds.trajectories[0], 0, cfg,
                       np.random.default_rng(0)) == 4


def test_relabel_one_never_breaks_hits_max_bound():
    model = _constant_similarity_model(1.0)
    ds = toy_dataset(lengths=(60,))
    cfg = RelabelConfig()
    assert relabel_one(model, ds.trajectories[0], 0, cfg,
                       np.random.default_rng(0)) == 30


def test_relabel_one_rejects_tail_start():
    model = _constant_similarity_model(1.0)
    ds = toy_dataset(lengths=(10,))
    with pytest.raises(ConfigError):
        relabel_one(model, ds.trajectories[0], 8, RelabelConfig(),
                    np.random.default_rng(0))


# -- whole-dataset passes -----------------------------------------------------

def test_pass_respects_bounds_everywhere():
    model = SkillModel.init(tiny_model_config(), seed=1)
    ds = toy_dataset(lengths=(50, 37, 44), seed=2)
    relabel_dataset(model, ds, RelabelConfig(), np.random.default_rng(0))
    for traj in ds.trajectories:
        n = len(traj)
        for t in range(n - 4 + 1):
            assert 4 <= traj.skill_length[t] <= min(30, n - t)


def test_pass_is_deterministic_under_seed():
    model = SkillModel.init(tiny_model_config(), seed=1)
    ds1 = toy_dataset(lengths=(40, 40), seed=2)
    ds2 = toy_dataset(lengths=(40, 40), seed=2)
    r1 = relabel_dataset(model, ds1, RelabelConfig(), np.random.default_rng(9))
    r2 = relabel_dataset(model, ds2, RelabelConfig(), np.random.default_rng(9))
    for a, b in zip(ds1.trajectories, ds2.trajectories):
        assert np.array_equal(a.skill_length, b.skill_length)
    assert r1.new_hist == r2.new_hist


def test_equal_bounds_force_fixpoint_over_two_passes():
    model = SkillModel.init(tiny_model_config(), seed=1)
    ds = toy_dataset(lengths=(40, 40), skill_length=10, seed=0)
    cfg = RelabelConfig(min_length=10, max_length=10)
    for _ in range(2):
        relabel_dataset(model, ds, cfg, np.random.default_rng(1))
        for traj in ds.trajectories:
            assert np.all(traj.skill_length[:len(traj) - 9] == 10)


def test_infinite_threshold_pass_collapses_all_to_min():
    model = SkillModel.init(tiny_model_config(), seed=1)
    ds = toy_dataset(lengths=(40,), seed=3)
    cfg = RelabelConfig(threshold=np.inf)
    report = relabel_dataset(model, ds, cfg, np.random.default_rng(0))
    assert np.all(ds.trajectories[0].skill_length[:37] == 4)
    assert report.frac_at_min == 1.0


def test_raising_threshold_never_lengthens_any_skill():
    model = SkillModel.init(tiny_model_config(), seed=4)
    low, high = -0.05, 0.05
    ds_low = toy_dataset(lengths=(45, 45), seed=5)
    ds_high = toy_dataset(lengths=(45, 45), seed=5)
    relabel_dataset(model, ds_low, RelabelConfig(threshold=low),
                    np.random.default_rng(2))
    relabel_dataset(model, ds_high, RelabelConfig(threshold=high),
                    np.random.default_rng(2))
    for a, b in zip(ds_low.trajectories, ds_high.trajectories):
        assert np.all(b.skill_length <= a.skill_length)


def test_change_bound_per_pass():
    model = SkillModel.init(tiny_model_config(), seed=6)
    ds = toy_dataset(lengths=(50, 50), skill_length=10, seed=7)
    cfg = RelabelConfig()
    old = [t.skill_length.copy() for t in ds.trajectories]
    relabel_dataset(model, ds, cfg, np.random.default_rng(3))
    for before, traj in zip(old, ds.trajectories):
        assert np.all(np.abs(traj.skill_length - before)
                      <= cfg.max_length - cfg.min_length)


def test_report_statistics_are_consistent():
    model = SkillModel.init(tiny_model_config(), seed=8)
    ds = toy_dataset(lengths=(30, 25), seed=9)
    report = relabel_dataset(model, ds, RelabelConfig(), np.random.default_rng(4))
    assert report.n_relabeled == sum(report.new_hist.values())
    assert report.min_new == min(report.new_hist)
    assert report.max_new == max(report.new_hist)
    mean_new = sum(l * c for l, c in report.new_hist.items()) / report.n_relabeled
    assert np.isclose(report.mean_new, mean_new)
    assert 0.0 <= report.interior_fraction <= 1.0


def test_overrunning_tail_starts_become_valid_after_pass():
    model = _constant_similarity_model(1.0)
    ds = toy_dataset(lengths=(12,), skill_length=10)
    assert len(ds.valid_starts()[1]) == 3  # only t<=2 fit initially
    relabel_dataset(model, ds, RelabelConfig(), np.random.default_rng(0))
    # every start with >= 4 steps remaining now owns a fitting window
    assert len(ds.valid_starts()[1]) == 9


def test_scan_mode_validation():
    with pytest.raises(ConfigError):
        RelabelConfig(scan_mode="nonsense")
    with pytest.raises(ConfigError):
        RelabelConfig(min_length=3)
