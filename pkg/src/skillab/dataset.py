"""Trajectory storage, skill-window sampling, and the on-disk format.

A dataset is a list of trajectories; each trajectory carries aligned state
and action arrays plus a per-timestep skill length.  Skill windows are
summarized by four key states: the window's first and last states and two
randomly drawn interior states.

On disk a dataset is `<name>.manifest.json` plus `<name>.blob`: the manifest
records dims, per-episode lengths and byte offsets; the blob stores states
and actions as little-endian float32 and skill lengths as little-endian
int32.  Round-trips are bit-exact.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .envs.core import EnvSpec
from .errors import DataError, FormatError

FORMAT = "skillab-traj-v1"
DEFAULT_MIN_LENGTH = 4


@dataclass
class Trajectory:
    states: np.ndarray        # (T, state_dim) float32
    actions: np.ndarray       # (T, action_dim) float32
    skill_length: np.ndarray  # (T,) int32

    def __post_init__(self):
        self.states = np.ascontiguousarray(self.states, dtype=np.float32)
        self.actions = np.ascontiguousarray(self.actions, dtype=np.float32)
        self.skill_length = np.ascontiguousarray(self.skill_length, dtype=np.int32)
        if len(self.states) != len(self.actions) or len(self.states) != len(self.skill_length):
            raise DataError("trajectory arrays are not length-aligned")

    def __len__(self):
        return len(self.states)


@dataclass
class TrajectoryDataset:
    trajectories: list
    env_spec: EnvSpec
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.trajectories:
            raise DataError("dataset has no trajectories")
        sd, ad_ = self.env_spec.state_dim, self.env_spec.action_dim
        for i, traj in enumerate(self.trajectories):
            if traj.states.shape[1] != sd or traj.actions.shape[1] != ad_:
                raise DataError(f"episode {i} dims do not match the env spec")
        self._start_cache = {}
        self._version = 0
        lengths = np.array([len(t) for t in self.trajectories], dtype=np.int64)
        self._cum_lengths = np.concatenate([[0], np.cumsum(lengths)])

    @property
    def n_episodes(self):
        return len(self.trajectories)

    @property
    def n_states(self):
        return int(self._cum_lengths[-1])

    @property
    def cum_lengths(self):
        """Cumulative episode lengths with a leading zero; episodes are fixed."""
        return self._cum_lengths

    def lengths_changed(self):
        """Invalidate sampling caches after a relabeling pass."""
        self._version += 1
        self._start_cache.clear()

    def valid_starts(self, min_length=DEFAULT_MIN_LENGTH):
        """(episode, t) pairs whose stored window fits the episode.

        A start is valid when its stored skill length is at least
        `min_length` and the whole window lies inside the episode.
        """
        if min_length not in self._start_cache:
            eps, ts = [], []
            for e, traj in enumerate(self.trajectories):
                t_arr = np.arange(len(traj), dtype=np.int64)
                ok = (traj.skill_length >= min_length) \
                    & (t_arr + traj.skill_length <= len(traj))
                if ok.any():
                    eps.append(np.full(int(ok.sum()), e, dtype=np.int64))
                    ts.append(t_arr[ok])
            if not eps:
                raise DataError("no valid skill-window starts in dataset")
            self._start_cache[min_length] = (np.concatenate(eps), np.concatenate(ts))
        return self._start_cache[min_length]

    def encoding_length(self, episode, t, min_length=DEFAULT_MIN_LENGTH):
        """Stored skill length truncated at the episode boundary.

        Relabeling encodes the pre-relabel window through this, so starts
        whose stored window overruns the episode can still be relabeled.
        """
        traj = self.trajectories[episode]
        length = int(min(traj.skill_length[t], len(traj) - t))
        if length < min_length:
            raise DataError(
                f"window at episode {episode}, t={t} has only {length} steps"
            )
        return length


@dataclass(frozen=True)
class SkillWindow:
    episode: int
    start: int
    length: int
    keys: tuple  # (t, t+a, t+b, t+length-1), strictly increasing

    def __post_init__(self):
        k = self.keys
        if not (k[0] < k[1] < k[2] < k[3]):
            raise DataError(f"key indices not strictly increasing: {k}")
        if k[0] != self.start or k[3] != self.start + self.length - 1:
            raise DataError("key indices do not frame the window")


def select_key_states(t, length, rng):
    """The four key indices: ends plus two interior draws, sorted.

    The interior offsets are uniform without replacement over 1..length-2.
    """
    if length < 4:
        raise DataError(f"skill window needs length >= 4, got {length}")
    a = int(rng.integers(1, length - 1))
    b = int(rng.integers(1, length - 2))
    if b >= a:
        b += 1
    a, b = (a, b) if a < b else (b, a)
    return (t, t + a, t + b, t + length - 1)


def sample_skill_window(dataset, rng, min_length=DEFAULT_MIN_LENGTH):
    """Uniform draw over all valid (episode, start) pairs."""
    eps, ts = dataset.valid_starts(min_length)
    i = int(rng.integers(len(eps)))
    episode, t = int(eps[i]), int(ts[i])
    length = int(dataset.trajectories[episode].skill_length[t])
    return SkillWindow(episode, t, length, select_key_states(t, length, rng))


def sample_negative_index(dataset, window, rng):
    """(episode, index) of a state uniform over everything outside the window."""
    cum = dataset.cum_lengths
    total = int(cum[-1])
    excluded = window.length
    if total - excluded <= 0:
        raise DataError("dataset has no states outside the anchor window")
    flat = int(rng.integers(total - excluded))
    window_lo = int(cum[window.episode]) + window.start
    if flat >= window_lo:
        flat += excluded
    episode = int(np.searchsorted(cum, flat, side="right") - 1)
    return episode, int(flat - cum[episode])


def sample_negative(dataset, window, rng):
    episode, idx = sample_negative_index(dataset, window, rng)
    return dataset.trajectories[episode].states[idx]


@dataclass
class WindowBatch:
    """Everything one training step consumes, gathered into flat arrays."""

    windows: list
    keys: np.ndarray          # (B, 4, state_dim)
    start_states: np.ndarray  # (B, state_dim)
    positives: np.ndarray     # (B, state_dim) the later interior key state
    negatives: np.ndarray     # (B, state_dim)
    successors: np.ndarray    # (B, state_dim) state after the window
    flat_states: np.ndarray   # (M, state_dim) all in-window states
    flat_actions: np.ndarray  # (M, action_dim)
    flat_window: np.ndarray   # (M,) row -> batch index
    flat_weight: np.ndarray   # (M,) 1 / (B * window length)

    @property
    def size(self):
        return len(self.windows)


def sample_window_batch(dataset, batch_size, rng, min_length=DEFAULT_MIN_LENGTH):
    windows = [sample_skill_window(dataset, rng, min_length) for _ in range(batch_size)]
    sd = dataset.env_spec.state_dim

    keys = np.empty((batch_size, 4, sd))
    positives = np.empty((batch_size, sd))
    negatives = np.empty((batch_size, sd))
    successors = np.empty((batch_size, sd))
    flat_states, flat_actions, flat_window, flat_weight = [], [], [], []
    for i, w in enumerate(windows):
        traj = dataset.trajectories[w.episode]
        keys[i] = traj.states[list(w.keys)]
        positives[i] = traj.states[w.keys[2]]
        negatives[i] = sample_negative(dataset, w, rng)
        # window ending at the episode's final index reuses that final state
        succ = min(w.start + w.length, len(traj) - 1)
        successors[i] = traj.states[succ]
        sl = slice(w.start, w.start + w.length)
        flat_states.append(traj.states[sl])
        flat_actions.append(traj.actions[sl])
        flat_window.append(np.full(w.length, i, dtype=np.int64))
        flat_weight.append(np.full(w.length, 1.0 / (batch_size * w.length)))

    return WindowBatch(
        windows=windows,
        keys=keys,
        start_states=keys[:, 0, :],
        positives=positives,
        negatives=negatives,
        successors=successors,
        flat_states=np.concatenate(flat_states).astype(np.float64),
        flat_actions=np.concatenate(flat_actions).astype(np.float64),
        flat_window=np.concatenate(flat_window),
        flat_weight=np.concatenate(flat_weight),
    )


# ---------------------------------------------------------------------------
# on-disk format

def _atomic_write(path, data):
    tmp = path.with_name(path.name + ".tmp")
    if isinstance(data, bytes):
        tmp.write_bytes(data)
    else:
        tmp.write_text(data)
    os.replace(tmp, path)


def save_dataset(dataset, prefix):
    """Write `<prefix>.manifest.json` + `<prefix>.blob`."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    states = np.concatenate([t.states for t in dataset.trajectories])
    actions = np.concatenate([t.actions for t in dataset.trajectories])
    lengths = np.concatenate([t.skill_length for t in dataset.trajectories])

    states_raw = np.ascontiguousarray(states, dtype="<f4").tobytes()
    actions_raw = np.ascontiguousarray(actions, dtype="<f4").tobytes()
    lengths_raw = np.ascontiguousarray(lengths, dtype="<i4").tobytes()
    sections = {
        "states": {"dtype": "<f4", "offset": 0, "nbytes": len(states_raw)},
        "actions": {"dtype": "<f4", "offset": len(states_raw),
                    "nbytes": len(actions_raw)},
        "skill_length": {"dtype": "<i4",
                         "offset": len(states_raw) + len(actions_raw),
                         "nbytes": len(lengths_raw)},
    }
    manifest = {
        "format": FORMAT,
        "env_spec": dataset.env_spec.to_dict(),
        "provenance": dataset.provenance,
        "episode_lengths": [len(t) for t in dataset.trajectories],
        "sections": sections,
        "total_bytes": len(states_raw) + len(actions_raw) + len(lengths_raw),
    }
    _atomic_write(prefix.with_suffix(".blob"),
                  states_raw + actions_raw + lengths_raw)
    _atomic_write(prefix.with_suffix(".manifest.json"),
                  json.dumps(manifest, indent=2, sort_keys=True))
    return prefix


def load_dataset(prefix):
    prefix = Path(prefix)
    manifest_path = prefix.with_suffix(".manifest.json")
    blob_path = prefix.with_suffix(".blob")
    if not manifest_path.exists():
        raise FileNotFoundError(str(manifest_path))
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"unreadable manifest {manifest_path}: {e}") from e
    if manifest.get("format") != FORMAT:
        raise FormatError(
            f"field 'format': expected '{FORMAT}', got {manifest.get('format')!r}"
        )
    env_spec = EnvSpec.from_dict(manifest["env_spec"])
    episode_lengths = [int(n) for n in manifest["episode_lengths"]]
    total_states = sum(episode_lengths)

    blob = blob_path.read_bytes() if blob_path.exists() else None
    if blob is None:
        raise FileNotFoundError(str(blob_path))
    if len(blob) != manifest.get("total_bytes"):
        raise FormatError(
            f"field 'total_bytes': manifest says {manifest.get('total_bytes')}, "
            f"blob has {len(blob)}"
        )

    def section(name, dtype, count):
        info = manifest["sections"][name]
        if info["dtype"] != dtype:
            raise FormatError(f"section '{name}': unexpected dtype {info['dtype']}")
        expected = count * 4
        if info["nbytes"] != expected:
            raise FormatError(
                f"section '{name}': episode lengths imply {expected} bytes, "
                f"manifest says {info['nbytes']}"
            )
        if info["offset"] + info["nbytes"] > len(blob):
            raise FormatError(f"section '{name}': blob truncated")
        return np.frombuffer(blob, dtype=dtype, count=count, offset=info["offset"])

    states = section("states", "<f4", total_states * env_spec.state_dim)
    actions = section("actions", "<f4", total_states * env_spec.action_dim)
    lengths = section("skill_length", "<i4", total_states)

    states = states.reshape(total_states, env_spec.state_dim)
    actions = actions.reshape(total_states, env_spec.action_dim)

    trajectories = []
    offset = 0
    for n in episode_lengths:
        trajectories.append(Trajectory(
            states=states[offset:offset + n].copy(),
            actions=actions[offset:offset + n].copy(),
            skill_length=lengths[offset:offset + n].copy(),
        ))
        offset += n
    return TrajectoryDataset(trajectories=trajectories, env_spec=env_spec,
                             provenance=manifest.get("provenance", {}))
