"""Scripted controllers and noise tiers for offline data collection.

Tiers mirror the usual offline-RL quality ladder:
  expert  scripted controller plus small Gaussian action noise
  replay  expert control interleaved with random-walk segments
  mixed   half the episodes expert, half replay
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gripper import GripperEnv, Kitchen4Env
from .pointmaze import PointMazeEnv


@dataclass(frozen=True)
class NoiseProfile:
    kind: str
    action_noise_std: float = 0.05
    segment_prob: float = 0.0          # chance a control segment is a random walk
    segment_len: tuple = (5, 20)

    def __post_init__(self):
        if self.action_noise_std < 0:
            raise ValueError("action_noise_std must be >= 0")
        if not 0.0 <= self.segment_prob <= 1.0:
            raise ValueError("segment_prob must be in [0, 1]")


TIERS = {
    "expert": NoiseProfile("expert", action_noise_std=0.05, segment_prob=0.0),
    "mixed": NoiseProfile("mixed", action_noise_std=0.05, segment_prob=0.45,
                          segment_len=(8, 24)),
    "replay": NoiseProfile("replay", action_noise_std=0.05, segment_prob=0.45,
                           segment_len=(8, 24)),
}


class MazeNavigator:
    """Waypoint follower along the BFS cell path."""

    WAYPOINT_RADIUS = 0.4
    CRUISE_SPEED = 1.6

    def __init__(self, env):
        self.env = env
        self.path_xy = [np.array([c + 0.5, r + 0.5]) for r, c in env.bfs_path()]
        self.goal_xy = env.goal_xy

    def reset(self):
        self._next = 1  # path[0] is the start cell

    def action(self, obs):
        pos = obs[:2]
        vel = obs[2:4]
        # recover after being knocked off-path: re-target near the closest cell
        if np.linalg.norm(self.path_xy[self._next] - pos) > 1.5:
            nearest = min(range(len(self.path_xy)),
                          key=lambda i: np.linalg.norm(self.path_xy[i] - pos))
            self._next = min(nearest + 1, len(self.path_xy) - 1)
        while self._next < len(self.path_xy) - 1 and \
                np.linalg.norm(self.path_xy[self._next] - pos) < self.WAYPOINT_RADIUS:
            self._next += 1
        target = self.path_xy[self._next]
        to_target = target - pos
        dist = np.linalg.norm(to_target)
        speed = self.CRUISE_SPEED if self._next < len(self.path_xy) - 1 \
            else min(self.CRUISE_SPEED, 2.0 * dist)
        desired = to_target / max(dist, 1e-9) * speed
        return np.clip(2.0 * (desired - vel), -1.0, 1.0)


class PickPlaceController:
    """Move over the object, close the grip, carry to the target."""

    def __init__(self, env):
        self.env = env

    def reset(self):
        pass

    def action(self, obs):
        from .gripper import MOVE

        gx, gy = obs[0], obs[1]
        ox, oy = obs[3], obs[4]
        holding = obs[5] > 0.5
        if holding:
            goal = self.env.target
            grip_cmd = 1.0
        else:
            goal = np.array([ox, oy])
            grip_cmd = 1.0 if np.hypot(gx - ox, gy - oy) <= 0.03 else -1.0
        move = np.clip((goal - np.array([gx, gy])) / MOVE, -1.0, 1.0)
        return np.array([move[0], move[1], grip_cmd])


class StationController:
    """Visit the nearest unpressed station; press when in range."""

    def __init__(self, env):
        self.env = env

    def reset(self):
        pass

    def action(self, obs):
        from .gripper import MOVE, STATION_RADIUS

        pos = obs[:2]
        flags = obs[3:]
        todo = [s for i, s in enumerate(self.env.stations) if flags[i] < 0.5]
        if not todo:
            return np.zeros(3)
        goal = min(todo, key=lambda s: np.linalg.norm(s - pos))
        dist = np.linalg.norm(goal - pos)
        grip_cmd = 1.0 if dist <= STATION_RADIUS * 0.8 else -1.0
        move = np.clip((goal - pos) / MOVE, -1.0, 1.0)
        return np.array([move[0], move[1], grip_cmd])


def scripted_policy(env):
    if isinstance(env, PointMazeEnv):
        return MazeNavigator(env)
    if isinstance(env, GripperEnv):
        return PickPlaceController(env)
    if isinstance(env, Kitchen4Env):
        return StationController(env)
    raise ValueError(f"no scripted policy for {type(env).__name__}")


def scripted_action(policy, obs, noise, rng):
    """One noisy control action; random-walk segments are handled upstream."""
    a = policy.action(obs)
    if noise.action_noise_std > 0:
        a = a + rng.normal(0.0, noise.action_noise_std, size=a.shape)
    return np.clip(a, -1.0, 1.0)


def run_scripted_episode(env, noise, rng, env_seed):
    """Roll one episode; returns (states, actions, success, steps).

    Control alternates between segments.  At each segment boundary the next
    segment is a random walk with probability `noise.segment_prob`, else
    scripted control; segment lengths are uniform in `noise.segment_len`.
    """
    policy = scripted_policy(env)
    policy.reset()
    state = env.reset(env_seed)
    states, actions = [], []
    remaining, random_walk = 0, False
    done = False
    while not done:
        if remaining == 0:
            random_walk = noise.segment_prob > 0 and rng.random() < noise.segment_prob
            lo, hi = noise.segment_len
            remaining = int(rng.integers(lo, hi + 1))
        if random_walk:
            a = rng.uniform(-1.0, 1.0, size=env.spec.action_dim)
        else:
            a = scripted_action(policy, state.obs, noise, rng)
        remaining -= 1
        states.append(state.obs)
        actions.append(a)
        state, _, done = env.step(state, a)
    return np.array(states), np.array(actions), env.is_success(state), state.t
