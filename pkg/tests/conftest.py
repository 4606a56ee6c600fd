import numpy as np
import pytest

from skillab.dataset import Trajectory, TrajectoryDataset
from skillab.envs.core import EnvSpec
from skillab.skillmodel import ModelConfig, SkillModel


def tiny_model_config(state_dim=3, action_dim=2, skill_dim=2):
    """Under 1000 parameters total, for finite-difference checks."""
    return ModelConfig(
        state_dim=state_dim,
        action_dim=action_dim,
        skill_dim=skill_dim,
        encoder_arch="rnn",
        encoder_hidden=6,
        hidden=8,
        layers=2,
        sim_hidden=8,
        sim_layers=2,
        sim_dim=4,
        latent_dim=5,
    )


def toy_env_spec(state_dim=3, action_dim=2):
    return EnvSpec(name="toy", state_dim=state_dim, action_dim=action_dim,
                   termination_features=(0, 1), distance_threshold=0.5,
                   max_steps=100)


def toy_dataset(lengths=(24, 20), skill_length=8, seed=0, state_dim=3,
                action_dim=2):
    rng = np.random.default_rng(seed)
    trajs = [
        Trajectory(
            states=rng.standard_normal((n, state_dim)),
            actions=np.clip(rng.standard_normal((n, action_dim)) * 0.5, -1, 1),
            skill_length=np.full(n, skill_length, dtype=np.int32),
        )
        for n in lengths
    ]
    return TrajectoryDataset(trajectories=trajs,
                             env_spec=toy_env_spec(state_dim, action_dim))


@pytest.fixture
def tiny_model():
    return SkillModel.init(tiny_model_config(), seed=0)


def zero_leaves(model, prefixes):
    """Zero every leaf under the given net prefixes, in place."""
    for name, arr in model.params.items():
        if any(name.startswith(p + "/") for p in prefixes):
            arr[:] = 0.0
    return model
