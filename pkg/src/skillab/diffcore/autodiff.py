"""Reverse-mode automatic differentiation over numpy arrays.

A `Tensor` wraps a float64 ndarray and records the operation that produced
it; calling `backward()` on a scalar sweeps the recorded graph in reverse
topological order and accumulates gradients into `.grad`.

Every op in this module also accepts plain ndarrays / floats.  When no
argument is a Tensor the op returns a plain numpy result without recording
anything — that is the inference fast path, so forward-pass code can be
written once and used both for training and for rollouts.
"""

from __future__ import annotations

import numpy as np


class Tensor:
    __slots__ = ("data", "grad", "_parents", "_backward")

    def __init__(self, data, _parents=(), _backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self):
        return float(self.data)

    def detach(self):
        """The underlying value, cut loose from the graph."""
        return self.data

    def backward(self):
        if self.data.size != 1:
            raise ValueError(
                f"backward() needs a scalar, got shape {self.data.shape}"
            )
        order = _toposort(self)
        for node in order:
            node.grad = None
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, p):
        return power(self, p)

    def __neg__(self):
        return mul(self, -1.0)

    def __getitem__(self, idx):
        return getitem(self, idx)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"


def _toposort(root):
    order, visited, stack = [], set(), [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    return order


def _accum(t, g):
    # copy on first write: g may be shared with another parent's gradient
    if t.grad is None:
        t.grad = np.array(g)
    else:
        t.grad += g


def _unbroadcast(g, shape):
    """Sum `g` down to `shape`, undoing numpy broadcasting."""
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


def is_tensor(x):
    return isinstance(x, Tensor)


def value(x):
    """Raw ndarray behind `x`, whether Tensor or array-like."""
    return x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


def stop_gradient(x):
    """Value of `x` with no path back into the graph."""
    return x.data if isinstance(x, Tensor) else x


def _any_tensor(*xs):
    return any(isinstance(x, Tensor) for x in xs)


# ---------------------------------------------------------------------------
# arithmetic

def add(a, b):
    if not _any_tensor(a, b):
        return np.add(a, b)
    da, db = value(a), value(b)
    parents = tuple(x for x in (a, b) if isinstance(x, Tensor))

    def bw(g):
        if isinstance(a, Tensor):
            _accum(a, _unbroadcast(g, da.shape))
        if isinstance(b, Tensor):
            _accum(b, _unbroadcast(g, db.shape))

    return Tensor(da + db, parents, bw)


def sub(a, b):
    if not _any_tensor(a, b):
        return np.subtract(a, b)
    da, db = value(a), value(b)
    parents = tuple(x for x in (a, b) if isinstance(x, Tensor))

    def bw(g):
        if isinstance(a, Tensor):
            _accum(a, _unbroadcast(g, da.shape))
        if isinstance(b, Tensor):
            _accum(b, _unbroadcast(-g, db.shape))

    return Tensor(da - db, parents, bw)


def mul(a, b):
    if not _any_tensor(a, b):
        return np.multiply(a, b)
    da, db = value(a), value(b)
    parents = tuple(x for x in (a, b) if isinstance(x, Tensor))

    def bw(g):
        if isinstance(a, Tensor):
            _accum(a, _unbroadcast(g * db, da.shape))
        if isinstance(b, Tensor):
            _accum(b, _unbroadcast(g * da, db.shape))

    return Tensor(da * db, parents, bw)


def div(a, b):
    if not _any_tensor(a, b):
        return np.divide(a, b)
    da, db = value(a), value(b)
    parents = tuple(x for x in (a, b) if isinstance(x, Tensor))

    def bw(g):
        if isinstance(a, Tensor):
            _accum(a, _unbroadcast(g / db, da.shape))
        if isinstance(b, Tensor):
            _accum(b, _unbroadcast(-g * da / (db * db), db.shape))

    return Tensor(da / db, parents, bw)


def power(a, p):
    """Elementwise a**p for a constant scalar exponent p."""
    if not isinstance(p, (int, float)):
        raise TypeError("power() exponent must be a python scalar")
    if not isinstance(a, Tensor):
        return np.power(a, p)
    da = a.data

    def bw(g):
        _accum(a, g * p * np.power(da, p - 1))

    return Tensor(np.power(da, p), (a,), bw)


def matmul(a, b):
    if not _any_tensor(a, b):
        return np.matmul(a, b)
    da, db = value(a), value(b)
    if da.ndim > 2 or db.ndim > 2:
        raise ValueError("matmul supports 1-D and 2-D operands only")
    parents = tuple(x for x in (a, b) if isinstance(x, Tensor))

    def bw(g):
        if isinstance(a, Tensor):
            if da.ndim == 1 and db.ndim == 1:
                _accum(a, g * db)
            elif db.ndim == 1:
                _accum(a, np.outer(g, db))
            else:
                _accum(a, g @ db.T)
        if isinstance(b, Tensor):
            if da.ndim == 1 and db.ndim == 1:
                _accum(b, g * da)
            elif da.ndim == 1:
                _accum(b, np.outer(da, g))
            else:
                _accum(b, da.T @ g)

    return Tensor(da @ db, parents, bw)


# ---------------------------------------------------------------------------
# elementwise nonlinearities

def exp(a):
    if not isinstance(a, Tensor):
        return np.exp(a)
    out = np.exp(a.data)

    def bw(g):
        _accum(a, g * out)

    return Tensor(out, (a,), bw)


def log(a):
    if not isinstance(a, Tensor):
        return np.log(a)

    def bw(g):
        _accum(a, g / a.data)

    return Tensor(np.log(a.data), (a,), bw)


def sqrt(a):
    if not isinstance(a, Tensor):
        return np.sqrt(a)
    out = np.sqrt(a.data)

    def bw(g):
        _accum(a, g / (2.0 * out))

    return Tensor(out, (a,), bw)


def tanh(a):
    if not isinstance(a, Tensor):
        return np.tanh(a)
    out = np.tanh(a.data)

    def bw(g):
        _accum(a, g * (1.0 - out * out))

    return Tensor(out, (a,), bw)


def _sigmoid_np(x):
    # exp(-softplus(-x)): stable for large |x| in one vectorized pass
    return np.exp(-np.logaddexp(0.0, -x))


def sigmoid(a):
    if not isinstance(a, Tensor):
        return _sigmoid_np(np.asarray(a, dtype=np.float64))
    out = _sigmoid_np(a.data)

    def bw(g):
        _accum(a, g * out * (1.0 - out))

    return Tensor(out, (a,), bw)


def softplus(a):
    """log(1 + e^x), computed stably."""
    if not isinstance(a, Tensor):
        return np.logaddexp(0.0, a)
    da = a.data

    def bw(g):
        _accum(a, g * _sigmoid_np(da))

    return Tensor(np.logaddexp(0.0, da), (a,), bw)


def relu(a):
    if not isinstance(a, Tensor):
        return np.maximum(a, 0.0)
    da = a.data

    def bw(g):
        _accum(a, g * (da > 0))

    return Tensor(np.maximum(da, 0.0), (a,), bw)


def elu(a):
    if not isinstance(a, Tensor):
        a = np.asarray(a, dtype=np.float64)
        return np.where(a > 0, a, np.expm1(a))
    da = a.data
    out = np.where(da > 0, da, np.expm1(da))

    def bw(g):
        _accum(a, g * np.where(da > 0, 1.0, out + 1.0))

    return Tensor(out, (a,), bw)


def clip(a, lo, hi):
    """Clamp values to [lo, hi]; gradient passes only where unclipped."""
    if not isinstance(a, Tensor):
        return np.clip(a, lo, hi)
    da = a.data
    mask = (da >= lo) & (da <= hi)

    def bw(g):
        _accum(a, g * mask)

    return Tensor(np.clip(da, lo, hi), (a,), bw)


# ---------------------------------------------------------------------------
# reductions and shape ops

def sum_(a, axis=None):
    if not isinstance(a, Tensor):
        return np.sum(a, axis=axis)
    da = a.data

    def bw(g):
        if axis is None:
            _accum(a, np.broadcast_to(g, da.shape).copy())
        else:
            _accum(a, np.broadcast_to(np.expand_dims(g, axis), da.shape).copy())

    return Tensor(np.sum(da, axis=axis), (a,), bw)


def mean(a, axis=None):
    da = value(a)
    n = da.size if axis is None else da.shape[axis]
    return div(sum_(a, axis=axis), float(n))


def getitem(a, idx):
    if not isinstance(a, Tensor):
        return np.asarray(a)[idx]
    da = a.data

    def bw(g):
        buf = np.zeros_like(da)
        if isinstance(idx, np.ndarray) or (
            isinstance(idx, tuple) and any(isinstance(i, np.ndarray) for i in idx)
        ):
            np.add.at(buf, idx, g)
        else:
            buf[idx] = g
        _accum(a, buf)

    return Tensor(da[idx], (a,), bw)


def take_rows(a, indices):
    """Row gather a[indices]; repeated indices accumulate on backward."""
    indices = np.asarray(indices)
    return getitem(a, indices) if isinstance(a, Tensor) else np.asarray(a)[indices]


def concat(parts, axis=-1):
    if not any(isinstance(p, Tensor) for p in parts):
        return np.concatenate(parts, axis=axis)
    datas = [value(p) for p in parts]
    sizes = [d.shape[axis] for d in datas]
    offsets = np.cumsum([0] + sizes)
    parents = tuple(p for p in parts if isinstance(p, Tensor))

    def bw(g):
        for p, d, start, stop in zip(parts, datas, offsets[:-1], offsets[1:]):
            if isinstance(p, Tensor):
                sl = [slice(None)] * d.ndim
                sl[axis] = slice(start, stop)
                _accum(p, g[tuple(sl)])

    return Tensor(np.concatenate(datas, axis=axis), parents, bw)


def reshape(a, shape):
    if not isinstance(a, Tensor):
        return np.reshape(a, shape)
    da = a.data

    def bw(g):
        _accum(a, g.reshape(da.shape))

    return Tensor(da.reshape(shape), (a,), bw)


# ---------------------------------------------------------------------------

def backprop(loss, leaves):
    """Gradients of a recorded scalar `loss` w.r.t. named leaf Tensors.

    Leaves that the loss does not reach get zero gradients.
    """
    if not isinstance(loss, Tensor):
        raise ValueError("backprop() needs a recorded Tensor loss")
    loss.backward()
    return {
        name: (t.grad if t.grad is not None else np.zeros_like(t.data))
        for name, t in leaves.items()
    }
