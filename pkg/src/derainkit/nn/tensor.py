"""Minimal reverse-mode autodiff over numpy arrays.

Tensors are (batch, channels, height, width) or scalar; backward() walks
the recorded graph in reverse topological order. Every forward op checks
its output for NaN/Inf and raises, per the engine contract.
"""

from __future__ import annotations

import numpy as np

from .. import _kernels


class Tensor:
    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        if not np.all(np.isfinite(self.data)):
            raise FloatingPointError("non-finite tensor values")
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    def zero_grad(self):
        self.grad = None

    def _accumulate(self, g: np.ndarray):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar output")
        topo: list[Tensor] = []
        seen = set()

        def visit(t: Tensor):
            if id(t) in seen:
                return
            seen.add(id(t))
            for p in t._parents:
                visit(p)
            topo.append(t)

        visit(self)
        self.grad = np.ones_like(self.data)
        for t in reversed(topo):
            if t._backward is not None:
                t._backward()

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return scale(self, -1.0)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def _make(data, parents, backward):
    out = Tensor(data)
    if any(p.requires_grad or p._parents for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum gradient over axes that were broadcast in the forward pass."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def add(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data + b.data

    def backward():
        a._accumulate(_unbroadcast(out.grad, a.data.shape))
        b._accumulate(_unbroadcast(out.grad, b.data.shape))

    out = _make(out_data, (a, b), backward)
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data - b.data

    def backward():
        a._accumulate(_unbroadcast(out.grad, a.data.shape))
        b._accumulate(-_unbroadcast(out.grad, b.data.shape))

    out = _make(out_data, (a, b), backward)
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data * b.data

    def backward():
        a._accumulate(_unbroadcast(out.grad * b.data, a.data.shape))
        b._accumulate(_unbroadcast(out.grad * a.data, b.data.shape))

    out = _make(out_data, (a, b), backward)
    return out


def scale(a: Tensor, k: float) -> Tensor:
    def backward():
        a._accumulate(k * out.grad)

    out = _make(a.data * k, (a,), backward)
    return out


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0

    def backward():
        a._accumulate(out.grad * mask)

    out = _make(np.where(mask, a.data, 0.0), (a,), backward)
    return out


def sigmoid(a: Tensor) -> Tensor:
    s = 1.0 / (1.0 + np.exp(-a.data))

    def backward():
        a._accumulate(out.grad * s * (1.0 - s))

    out = _make(s, (a,), backward)
    return out


def conv2d(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Stride-1 same-padding convolution, kernel 1 or 3 (any odd k)."""
    if x.data.ndim != 4:
        raise ValueError("conv2d expects (N, C, H, W) input")
    if w.data.shape[1] != x.data.shape[1]:
        raise ValueError(
            f"channel mismatch: input has {x.data.shape[1]}, "
            f"weights expect {w.data.shape[1]}"
        )
    k = w.data.shape[2]
    out_data = _kernels.conv2d_forward(x.data, w.data, b.data)

    def backward():
        x._accumulate(_kernels.conv2d_backward_input(out.grad, w.data))
        gw, gb = _kernels.conv2d_backward_weights(out.grad, x.data, k)
        w._accumulate(gw)
        b._accumulate(gb)

    out = _make(out_data, (x, w, b), backward)
    return out


def global_avg_pool(a: Tensor) -> Tensor:
    """(N, C, H, W) -> (N, C, 1, 1) spatial mean."""
    n, c, h, w = a.data.shape
    out_data = a.data.mean(axis=(2, 3), keepdims=True)

    def backward():
        a._accumulate(np.broadcast_to(out.grad / (h * w), a.data.shape))

    out = _make(out_data, (a,), backward)
    return out


def channel_max(a: Tensor) -> Tensor:
    """(N, C, H, W) -> (N, 1, H, W); gradient routed to the first argmax."""
    idx = a.data.argmax(axis=1, keepdims=True)
    out_data = np.take_along_axis(a.data, idx, axis=1)

    def backward():
        g = np.zeros_like(a.data)
        np.put_along_axis(g, idx, out.grad, axis=1)
        a._accumulate(g)

    out = _make(out_data, (a,), backward)
    return out


def channel_mean(a: Tensor) -> Tensor:
    """(N, C, H, W) -> (N, 1, H, W)."""
    c = a.data.shape[1]
    out_data = a.data.mean(axis=1, keepdims=True)

    def backward():
        a._accumulate(np.broadcast_to(out.grad / c, a.data.shape))

    out = _make(out_data, (a,), backward)
    return out


def concat_channels(a: Tensor, b: Tensor) -> Tensor:
    ca = a.data.shape[1]
    out_data = np.concatenate([a.data, b.data], axis=1)

    def backward():
        a._accumulate(out.grad[:, :ca])
        b._accumulate(out.grad[:, ca:])

    out = _make(out_data, (a, b), backward)
    return out


def tsum(a: Tensor) -> Tensor:
    """Sum of all elements, as a scalar tensor."""

    def backward():
        a._accumulate(np.broadcast_to(out.grad, a.data.shape))

    out = _make(a.data.sum(), (a,), backward)
    return out


def l1_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Mean absolute error over every element of the batch."""
    if pred.data.shape != target.data.shape:
        raise ValueError(
            f"shape mismatch: {pred.data.shape} vs {target.data.shape}"
        )
    diff = pred.data - target.data
    n = diff.size

    def backward():
        g = out.grad * np.sign(diff) / n
        pred._accumulate(g)
        target._accumulate(-g)

    out = _make(np.abs(diff).mean(), (pred, target), backward)
    return out
