"""Environment contracts shared by the desk-scale tasks.

Environments are value-semantic physics definitions: `reset(seed)` is the
only place randomness enters, and `step(state, action)` is a deterministic
function of its arguments.  Episode bookkeeping (step count, goal latch)
travels inside `EnvState`, not inside the environment object.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass(frozen=True)
class EnvSpec:
    """Declarative description consumed by datasets and controllers."""

    name: str
    state_dim: int
    action_dim: int
    termination_features: tuple
    distance_threshold: float
    max_steps: int

    def __post_init__(self):
        if self.state_dim <= 0 or self.action_dim <= 0:
            raise ValueError("EnvSpec dims must be positive")
        if self.distance_threshold <= 0:
            raise ValueError("EnvSpec distance_threshold must be positive")
        if any(i < 0 or i >= self.state_dim for i in self.termination_features):
            raise ValueError("termination feature index out of range")

    def to_dict(self):
        d = asdict(self)
        d["termination_features"] = list(self.termination_features)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            name=d["name"],
            state_dim=int(d["state_dim"]),
            action_dim=int(d["action_dim"]),
            termination_features=tuple(int(i) for i in d["termination_features"]),
            distance_threshold=float(d["distance_threshold"]),
            max_steps=int(d["max_steps"]),
        )


@dataclass
class EnvState:
    """Observation plus the episode bookkeeping the env needs for `done`."""

    obs: np.ndarray
    t: int = 0
    reward_total: float = 0.0

    def copy(self):
        return EnvState(self.obs.copy(), self.t, self.reward_total)


def clip_action(action, dim):
    action = np.asarray(action, dtype=np.float64).reshape(dim)
    return np.clip(action, -1.0, 1.0)
