"""Named parameter containers."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .autodiff import Tensor


class ParamTree:
    """A flat mapping of unique leaf names to float64 arrays.

    Shapes are fixed at construction; values must be finite.  Trees are
    treated as immutable values by the optimizer: updates produce new trees.
    """

    def __init__(self, leaves):
        tree = {}
        for name, arr in leaves.items():
            if name in tree:
                raise ConfigError(f"duplicate parameter leaf '{name}'")
            arr = np.asarray(arr, dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise ConfigError(f"non-finite values in parameter leaf '{name}'")
            tree[name] = arr
        self._leaves = tree

    @property
    def leaves(self):
        return self._leaves

    def __getitem__(self, name):
        return self._leaves[name]

    def __contains__(self, name):
        return name in self._leaves

    def __iter__(self):
        return iter(self._leaves)

    def __len__(self):
        return len(self._leaves)

    def keys(self):
        return self._leaves.keys()

    def items(self):
        return self._leaves.items()

    def copy(self):
        return ParamTree({k: v.copy() for k, v in self._leaves.items()})

    @property
    def n_params(self):
        return sum(v.size for v in self._leaves.values())

    def lift(self):
        """Wrap every leaf in a Tensor for a recorded forward pass."""
        return {name: Tensor(arr) for name, arr in self._leaves.items()}

    def replaced(self, new_values):
        """New tree with the same leaf names and shapes, new values."""
        out = {}
        for name, arr in self._leaves.items():
            new = np.asarray(new_values[name], dtype=np.float64)
            if new.shape != arr.shape:
                raise ConfigError(
                    f"shape change for leaf '{name}': {arr.shape} -> {new.shape}"
                )
            out[name] = new
        return ParamTree(out)


def prefixed(leaves, prefix):
    """Namespace a leaf dict under `prefix/`."""
    return {f"{prefix}/{k}": v for k, v in leaves.items()}


def subtree(mapping, prefix):
    """The leaves under `prefix/`, with the prefix stripped.

    Works on ParamTree, raw dicts, and lifted Tensor dicts alike.
    """
    items = mapping.items() if not isinstance(mapping, ParamTree) else mapping.items()
    head = prefix + "/"
    out = {k[len(head):]: v for k, v in items if k.startswith(head)}
    if not out:
        raise ConfigError(f"no parameter leaves under prefix '{prefix}'")
    return out
