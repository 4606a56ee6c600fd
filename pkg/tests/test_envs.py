import numpy as np
import pytest
from scipy import stats

from skillab import envs
from skillab.envs.gripper import OBJECT_BOX, GripperEnv
from skillab.envs.pointmaze import PointMazeEnv
from skillab.envs.scripted import TIERS, run_scripted_episode
from skillab.errors import DataError


def test_maze_reset_is_start_cell_center_at_rest():
    env = PointMazeEnv("medium")
    state = env.reset(0)
    r, c = env.start_cell
    assert np.array_equal(state.obs, np.array([c + 0.5, r + 0.5, 0.0, 0.0]))


def test_gripper_reset_deterministic_per_seed():
    env = GripperEnv()
    assert np.array_equal(env.reset(7).obs, env.reset(7).obs)
    assert not np.array_equal(env.reset(7).obs, env.reset(8).obs)


def test_gripper_object_spawn_covers_box_uniformly():
    env = GripperEnv()
    (x_lo, x_hi), (y_lo, y_hi) = OBJECT_BOX
    pts = np.array([env.reset(seed).obs[3:5] for seed in range(1000)])
    assert np.all(pts[:, 0] >= x_lo) and np.all(pts[:, 0] <= x_hi)
    assert np.all(pts[:, 1] >= y_lo) and np.all(pts[:, 1] <= y_hi)
    # 4x4 histogram chi-square against uniform
    xbins = np.linspace(x_lo, x_hi, 5)
    ybins = np.linspace(y_lo, y_hi, 5)
    counts, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=[xbins, ybins])
    chi2 = ((counts - 62.5) ** 2 / 62.5).sum()
    assert chi2 < stats.chi2.ppf(0.9999, 15)


def test_zero_action_from_rest_keeps_position():
    env = PointMazeEnv("medium")
    state = env.reset(0)
    new, reward, done = env.step(state, np.zeros(2))
    assert np.array_equal(new.obs[:2], state.obs[:2])
    assert reward == 0.0 and not done


def test_wall_push_clamps_at_face_and_zeros_velocity():
    env = PointMazeEnv("medium")
    state = env.reset(0)
    # start cell (1,1); pushing left (-x) runs into the border wall at x=1
    for _ in range(10):
        state, _, _ = env.step(state, np.array([-1.0, 0.0]))
    x, y, vx, vy = state.obs
    assert abs(x - 1.0) < 1e-3
    assert vx == 0.0
    assert not env._is_wall(x, y)


def test_transitions_are_deterministic_functions_of_state_action():
    env = GripperEnv()
    state = env.reset(3)
    a = np.array([0.4, -0.2, 1.0])
    out1 = env.step(state.copy(), a)
    out2 = env.step(state.copy(), a)
    assert np.array_equal(out1[0].obs, out2[0].obs)
    assert out1[1] == out2[1] and out1[2] == out2[2]


def test_scripted_expert_reaches_goal_with_full_reward():
    env = GripperEnv()
    rng = np.random.default_rng(0)
    _, _, success, _ = run_scripted_episode(env, TIERS["expert"], rng, env_seed=0)
    assert success


@pytest.mark.parametrize("name", envs.ENV_NAMES)
def test_episode_reward_is_sparse_and_bounded(name):
    env = envs.make(name)
    rng = np.random.default_rng(1)
    state = env.reset(4)
    total = 0.0
    done = False
    while not done:
        state, reward, done = env.step(state, rng.uniform(-1, 1, env.spec.action_dim))
        assert 0.0 <= reward <= 1.0
        total += reward
    assert total <= 1.0 + 1e-9


def test_expert_navigator_success_rate_over_seeded_episodes():
    env = PointMazeEnv("medium")
    wins = 0
    for seed in range(100):
        rng = np.random.default_rng(9000 + seed)
        _, _, success, _ = run_scripted_episode(env, TIERS["expert"], rng, env_seed=seed)
        wins += success
    assert wins >= 95


def test_termination_features_are_the_declared_indices():
    assert envs.make("pointmaze-medium").spec.termination_features == (0, 1)
    assert envs.make("gripper").spec.termination_features == (0, 1, 2)
    assert envs.make("kitchen4").spec.termination_features == (0, 1, 2)


def test_generate_dataset_sets_uniform_initial_length():
    env = envs.make("gripper")
    ds = envs.generate_dataset(env, "expert", episodes=1, seed=0)
    assert ds.n_episodes == 1
    assert np.all(ds.trajectories[0].skill_length == 10)
    assert len(ds.trajectories[0].states) == len(ds.trajectories[0].actions)


def test_generate_dataset_deterministic_under_seed():
    env = envs.make("pointmaze-medium")
    a = envs.generate_dataset(env, "mixed", episodes=6, seed=42)
    b = envs.generate_dataset(env, "mixed", episodes=6, seed=42)
    assert a.n_episodes == b.n_episodes
    for ta, tb in zip(a.trajectories, b.trajectories):
        assert np.array_equal(ta.states, tb.states)
        assert np.array_equal(ta.actions, tb.actions)


def test_replay_tier_reaches_goal_less_often_than_expert():
    env = envs.make("gripper")
    expert = envs.generate_dataset(env, "expert", episodes=100, seed=7)
    replay = envs.generate_dataset(env, "replay", episodes=100, seed=7)
    assert replay.provenance["goal_reach_fraction"] \
        < expert.provenance["goal_reach_fraction"]


def test_generate_dataset_rejects_zero_episodes():
    env = envs.make("gripper")
    with pytest.raises(DataError):
        envs.generate_dataset(env, "expert", episodes=0, seed=0)


def test_bfs_paths_exist_and_are_long():
    assert len(PointMazeEnv("medium").bfs_path()) >= 15
    assert len(PointMazeEnv("large").bfs_path()) >= 25


def test_velocity_stays_bounded():
    env = PointMazeEnv("medium")
    state = env.reset(0)
    rng = np.random.default_rng(2)
    for _ in range(100):
        state, _, done = env.step(state, rng.uniform(-1, 1, 2))
        assert np.all(np.abs(state.obs[2:]) <= 2.0)
        if done:
            break


def test_gripper_holding_requires_grip_and_proximity():
    env = GripperEnv()
    state = env.reset(0)
    # close the grip far from the object: no grasp
    state, _, _ = env.step(state, np.array([0.0, 0.0, 1.0]))
    assert state.obs[5] == 0.0
    # drive to the object with the grip closed; grasp happens within reach
    for _ in range(60):
        gx, gy, _, ox, oy, _ = state.obs
        move = np.clip((np.array([ox, oy]) - np.array([gx, gy])) / 0.03, -1, 1)
        state, _, _ = env.step(state, np.array([move[0], move[1], 1.0]))
        if state.obs[5] > 0.5:
            break
    assert state.obs[5] == 1.0
    assert np.hypot(state.obs[0] - state.obs[3], state.obs[1] - state.obs[4]) <= 0.05
