"""Desk-scale environments and scripted data collectors."""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from .core import EnvSpec, EnvState
from .gripper import GripperEnv, Kitchen4Env
from .pointmaze import PointMazeEnv
from .scripted import (
    TIERS,
    NoiseProfile,
    run_scripted_episode,
    scripted_action,
    scripted_policy,
)

GENERATOR_VERSION = 1
INITIAL_SKILL_LENGTH = 10
MIN_EPISODE_STEPS = 5  # shorter episodes cannot host a minimum-length window

ENV_NAMES = ("pointmaze-medium", "pointmaze-large", "gripper", "kitchen4")


def make(name):
    if name == "pointmaze-medium":
        return PointMazeEnv("medium")
    if name == "pointmaze-large":
        return PointMazeEnv("large")
    if name == "gripper":
        return GripperEnv()
    if name == "kitchen4":
        return Kitchen4Env()
    raise ValueError(f"unknown env '{name}' (choose from {ENV_NAMES})")


def generate_dataset(env, tier, episodes, seed,
                     initial_skill_length=INITIAL_SKILL_LENGTH):
    """Collect scripted episodes into a dataset with uniform skill lengths.

    The mixed tier alternates expert and replay episodes.  Episodes too short
    to host a skill window are dropped.
    """
    from ..dataset import Trajectory, TrajectoryDataset  # avoids an import cycle

    if episodes < 1:
        raise DataError("generate_dataset needs episodes >= 1")
    if tier not in TIERS:
        raise DataError(f"unknown tier '{tier}' (choose from {sorted(TIERS)})")

    root = np.random.SeedSequence(seed)
    children = root.spawn(episodes)
    trajectories = []
    successes = 0
    total_steps = 0
    for e in range(episodes):
        if tier == "mixed":
            profile = TIERS["expert"] if e % 2 == 0 else TIERS["replay"]
        else:
            profile = TIERS[tier]
        rng = np.random.default_rng(children[e])
        states, actions, success, steps = run_scripted_episode(
            env, profile, rng, env_seed=children[e].spawn(1)[0])
        if len(states) < MIN_EPISODE_STEPS:
            continue
        trajectories.append(Trajectory(
            states=states,
            actions=actions,
            skill_length=np.full(len(states), initial_skill_length, dtype=np.int32),
        ))
        successes += int(success)
        total_steps += steps
    if not trajectories:
        raise DataError("no usable episodes were generated")
    provenance = {
        "seed": int(seed),
        "tier": tier,
        "episodes_requested": int(episodes),
        "episodes_kept": len(trajectories),
        "generator_version": GENERATOR_VERSION,
        "initial_skill_length": int(initial_skill_length),
        "goal_reach_fraction": successes / episodes,
        "mean_steps": total_steps / episodes,
    }
    return TrajectoryDataset(trajectories=trajectories, env_spec=env.spec,
                             provenance=provenance)
