"""Planar gripper tasks: pick-and-place and a four-station variant.

GripperEnv state: (gx, gy, grip, ox, oy, holding).  The gripper moves in a
unit workspace; closing the grip within reach of the object grasps it, after
which the object follows the gripper until released.

Kitchen4Env state: (gx, gy, grip, done1..done4).  Four stations toggle when
pressed (grip closed within the station radius); each new toggle pays 0.25,
in any order.
"""

from __future__ import annotations

import numpy as np

from .core import EnvSpec, EnvState, clip_action

MOVE = 0.03
GRIP_RATE = 0.25
GRASP_RADIUS = 0.05
GOAL_RADIUS = 0.02

OBJECT_BOX = ((0.2, 0.6), (0.2, 0.6))
TARGET_XY = (0.85, 0.85)
GRIPPER_START = (0.1, 0.1)


class GripperEnv:
    def __init__(self):
        self.spec = EnvSpec(
            name="gripper",
            state_dim=6,
            action_dim=3,
            termination_features=(0, 1, 2),
            distance_threshold=GOAL_RADIUS,
            max_steps=120,
        )
        self.target = np.array(TARGET_XY)

    def reset(self, seed=0):
        rng = np.random.default_rng(seed)
        (x_lo, x_hi), (y_lo, y_hi) = OBJECT_BOX
        ox = rng.uniform(x_lo, x_hi)
        oy = rng.uniform(y_lo, y_hi)
        obs = np.array([GRIPPER_START[0], GRIPPER_START[1], 0.0, ox, oy, 0.0])
        return EnvState(obs=obs)

    def step(self, state, action):
        a = clip_action(action, 3)
        gx, gy, grip, ox, oy, holding = state.obs
        gx = float(np.clip(gx + MOVE * a[0], 0.0, 1.0))
        gy = float(np.clip(gy + MOVE * a[1], 0.0, 1.0))
        grip = float(np.clip(grip + GRIP_RATE * a[2], 0.0, 1.0))

        if holding < 0.5 and grip > 0.5 \
                and np.hypot(gx - ox, gy - oy) <= GRASP_RADIUS:
            holding = 1.0
        elif holding > 0.5 and grip <= 0.5:
            holding = 0.0
        if holding > 0.5:
            ox, oy = gx, gy

        obs = np.array([gx, gy, grip, ox, oy, holding])
        t = state.t + 1
        reached = np.hypot(ox - self.target[0], oy - self.target[1]) <= GOAL_RADIUS
        reward = 1.0 if (reached and state.reward_total < 1.0) else 0.0
        done = reached or t >= self.spec.max_steps
        return EnvState(obs=obs, t=t, reward_total=state.reward_total + reward), reward, done

    def is_success(self, state):
        return state.reward_total >= 1.0


STATIONS = ((0.15, 0.85), (0.85, 0.85), (0.85, 0.15), (0.5, 0.5))
STATION_RADIUS = 0.1
KITCHEN_START = (0.15, 0.15)


class Kitchen4Env:
    """Visit/press four stations in any order; reward 0.25 per new station."""

    def __init__(self):
        self.spec = EnvSpec(
            name="kitchen4",
            state_dim=7,
            action_dim=3,
            termination_features=(0, 1, 2),
            distance_threshold=STATION_RADIUS,
            max_steps=160,
        )
        self.stations = np.array(STATIONS)

    def reset(self, seed=0):
        del seed
        obs = np.array([KITCHEN_START[0], KITCHEN_START[1], 0.0, 0.0, 0.0, 0.0, 0.0])
        return EnvState(obs=obs)

    def step(self, state, action):
        a = clip_action(action, 3)
        gx, gy, grip = state.obs[0], state.obs[1], state.obs[2]
        flags = state.obs[3:].copy()
        gx = float(np.clip(gx + MOVE * a[0], 0.0, 1.0))
        gy = float(np.clip(gy + MOVE * a[1], 0.0, 1.0))
        grip = float(np.clip(grip + GRIP_RATE * a[2], 0.0, 1.0))

        reward = 0.0
        if grip > 0.5:
            for i, (sx, sy) in enumerate(self.stations):
                if flags[i] < 0.5 and np.hypot(gx - sx, gy - sy) <= STATION_RADIUS:
                    flags[i] = 1.0
                    reward += 0.25

        obs = np.concatenate([[gx, gy, grip], flags])
        t = state.t + 1
        done = bool(np.all(flags > 0.5)) or t >= self.spec.max_steps
        return EnvState(obs=obs, t=t, reward_total=state.reward_total + reward), reward, done

    def is_success(self, state):
        return state.reward_total >= 1.0 - 1e-9
