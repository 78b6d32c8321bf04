"""Reverse-mode automatic differentiation over dense float64 arrays.

Just enough machinery for a small convolutional actor-critic: a Tape records
primitive ops in execution order, ``Tape.backward`` replays them once in
reverse. No broadcasting beyond scalar constants, no graph surgery. Image
tensors are (N, H, W, C); everything is float64 so finite-difference checks
can be tight.
"""

from __future__ import annotations

import numpy as np

from rheacl.tensor import kernels


class Tensor:
    """A node value: numpy array plus gradient slot."""

    __slots__ = ("array", "requires_grad", "grad", "tape")

    def __init__(self, array: np.ndarray, requires_grad: bool, tape: "Tape | None"):
        self.array = array
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.tape = tape

    @property
    def shape(self):
        return self.array.shape

    @property
    def data(self) -> np.ndarray:
        """Flat row-major view of the values."""
        return self.array.reshape(-1)


class Tape:
    """Ordered record of primitive ops; topological by construction."""

    def __init__(self):
        self._nodes: list[tuple[Tensor, tuple[Tensor, ...], object]] = []
        self._consumed = False

    def leaf(self, array, requires_grad: bool = False) -> Tensor:
        arr = np.asarray(array, dtype=np.float64)
        if arr.ndim and not arr.flags["C_CONTIGUOUS"]:
            arr = np.ascontiguousarray(arr)  # keeps 0-d shapes intact
        return Tensor(arr, requires_grad, self)

    def constant(self, array) -> Tensor:
        return self.leaf(array, requires_grad=False)

    def _record(self, out_array, parents, backward_fn) -> Tensor:
        if self._consumed:
            raise RuntimeError("tape already consumed by backward()")
        requires = any(p.requires_grad for p in parents)
        out = Tensor(np.asarray(out_array, dtype=np.float64), requires, self)
        if requires:
            self._nodes.append((out, tuple(parents), backward_fn))
        return out

    def backward(self, loss: Tensor) -> None:
        """Accumulate gradients of a scalar ``loss`` into every leaf's .grad."""
        if loss.array.shape != ():
            raise ValueError(f"backward needs a scalar loss, got shape {loss.array.shape}")
        if self._consumed:
            raise RuntimeError("tape already consumed by backward()")
        loss.grad = np.ones((), dtype=np.float64)
        for out, parents, backward_fn in reversed(self._nodes):
            if out.grad is None:
                continue
            gparents = backward_fn(out.grad)
            for parent, g in zip(parents, gparents):
                if g is None or not parent.requires_grad:
                    continue
                if parent.grad is None:
                    parent.grad = g.copy() if isinstance(g, np.ndarray) else np.asarray(g)
                else:
                    parent.grad += g
        self._nodes.clear()
        self._consumed = True

    def gradient(self, loss: Tensor, leaves: "list[Tensor]") -> list[np.ndarray]:
        self.backward(loss)
        return [
            leaf.grad if leaf.grad is not None else np.zeros_like(leaf.array)
            for leaf in leaves
        ]


def _tape_of(*tensors: Tensor) -> Tape:
    for t in tensors:
        if t.tape is not None:
            return t.tape
    raise ValueError("no tape attached to operands")


# ---------------------------------------------------------------------------
# elementwise ops


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape(a, b)
    return _tape_of(a, b)._record(a.array + b.array, (a, b), lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape(a, b)
    return _tape_of(a, b)._record(a.array - b.array, (a, b), lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape(a, b)
    av, bv = a.array, b.array
    return _tape_of(a, b)._record(av * bv, (a, b), lambda g: (g * bv, g * av))


def scale(a: Tensor, k: float) -> Tensor:
    k = float(k)
    return _tape_of(a)._record(a.array * k, (a,), lambda g: (g * k,))


def neg(a: Tensor) -> Tensor:
    return scale(a, -1.0)


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.array)
    return _tape_of(a)._record(out, (a,), lambda g: (g * out,))


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.array)
    return _tape_of(a)._record(out, (a,), lambda g: (g * (1.0 - out * out),))


def relu(a: Tensor) -> Tensor:
    keep = a.array > 0.0
    return _tape_of(a)._record(np.maximum(a.array, 0.0), (a,), lambda g: (g * keep,))


def square(a: Tensor) -> Tensor:
    av = a.array
    return _tape_of(a)._record(av * av, (a,), lambda g: (2.0 * g * av,))


def minimum(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape(a, b)
    take_a = a.array <= b.array  # ties route to the first argument
    out = np.where(take_a, a.array, b.array)
    return _tape_of(a, b)._record(
        out, (a, b), lambda g: (g * take_a, g * ~take_a)
    )


def clip(a: Tensor, lo: float, hi: float) -> Tensor:
    out = np.clip(a.array, lo, hi)
    inside = (a.array >= lo) & (a.array <= hi)
    return _tape_of(a)._record(out, (a,), lambda g: (g * inside,))


# ---------------------------------------------------------------------------
# reductions & shape


def sum_all(a: Tensor) -> Tensor:
    shape = a.array.shape
    return _tape_of(a)._record(
        a.array.sum(), (a,), lambda g: (np.full(shape, g, dtype=np.float64),)
    )


def mean_all(a: Tensor) -> Tensor:
    shape = a.array.shape
    n = a.array.size
    return _tape_of(a)._record(
        a.array.mean(), (a,), lambda g: (np.full(shape, g / n, dtype=np.float64),)
    )


def sum_last(a: Tensor) -> Tensor:
    """Sum along the last axis."""
    k = a.array.shape[-1]
    return _tape_of(a)._record(
        a.array.sum(axis=-1),
        (a,),
        lambda g: (np.repeat(g[..., None], k, axis=-1),),
    )


def reshape(a: Tensor, shape) -> Tensor:
    old = a.array.shape
    return _tape_of(a)._record(
        a.array.reshape(shape), (a,), lambda g: (g.reshape(old),)
    )


# ---------------------------------------------------------------------------
# neural-net ops


def linear(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Affine map: (N,n) @ (n,m) + (m,). Also accepts a single (n,) vector."""
    xv = x.array
    single = xv.ndim == 1
    if single:
        xv = xv[None, :]
    if xv.shape[1] != w.array.shape[0] or w.array.shape[1] != b.array.shape[0]:
        raise ValueError(
            f"linear shape mismatch: x{xv.shape} w{w.array.shape} b{b.array.shape}"
        )
    out = xv @ w.array + b.array
    if single:
        out = out[0]

    def backward(g):
        gv = g[None, :] if single else g
        gx = gv @ w.array.T
        gw = xv.T @ gv
        gb = gv.sum(axis=0)
        return (gx[0] if single else gx, gw, gb)

    return _tape_of(x, w, b)._record(out, (x, w, b), backward)


def log_softmax(a: Tensor) -> Tensor:
    """Log-softmax along the last axis."""
    z = a.array - a.array.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=-1, keepdims=True))
    out = z - lse
    probs = np.exp(out)
    return _tape_of(a)._record(
        out, (a,), lambda g: (g - probs * g.sum(axis=-1, keepdims=True),)
    )


def entropy_last(a: Tensor) -> Tensor:
    """Shannon entropy of softmax rows, via H = lse(z) - sum(p * z).

    This form is exact for uniform logits (sum(p * 0) is exactly 0), which a
    plain -sum(p * log p) is not.
    """
    z = a.array - a.array.max(axis=-1, keepdims=True)
    ez = np.exp(z)
    sez = ez.sum(axis=-1, keepdims=True)
    probs = ez / sez
    out = np.log(sez)[..., 0] + a.array.max(axis=-1) - (probs * a.array).sum(axis=-1)

    def backward(g):
        # dH/dz_k = -p_k * (z_k - sum_j p_j z_j) = -p_k * (z_k - E[z])
        ez_mean = (probs * a.array).sum(axis=-1, keepdims=True)
        return (-g[..., None] * probs * (a.array - ez_mean),)

    return _tape_of(a)._record(out, (a,), backward)


def take_last(a: Tensor, indices: np.ndarray) -> Tensor:
    """Pick one entry along the last axis per row: out[i] = a[i, indices[i]]."""
    idx = np.asarray(indices, dtype=np.int64)
    rows = np.arange(a.array.shape[0])
    out = a.array[rows, idx]
    shape = a.array.shape

    def backward(g):
        ga = np.zeros(shape, dtype=np.float64)
        ga[rows, idx] = g
        return (ga,)

    return _tape_of(a)._record(out, (a,), backward)


def conv2d(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Valid cross-correlation, stride 1, batched (N,H,W,Ci) input.

    A single (H,W,Ci) sample is accepted and returned without the batch axis.
    """
    xv = x.array
    single = xv.ndim == 3
    if single:
        xv = xv[None]
    if xv.ndim != 4 or w.array.ndim != 4 or xv.shape[3] != w.array.shape[2]:
        raise ValueError(f"conv2d shape mismatch: x{x.array.shape} w{w.array.shape}")
    if xv.shape[1] < w.array.shape[0] or xv.shape[2] < w.array.shape[1]:
        raise ValueError(f"conv2d input smaller than kernel: x{x.array.shape}")
    if w.array.shape[3] != b.array.shape[0]:
        raise ValueError(f"conv2d bias mismatch: w{w.array.shape} b{b.array.shape}")
    xv = np.ascontiguousarray(xv)
    out = kernels.conv2d_forward(xv, w.array, b.array)
    if single:
        out = out[0]

    def backward(g):
        gv = np.ascontiguousarray(g[None] if single else g)
        gx, gw, gb = kernels.conv2d_backward(xv, w.array, gv, x.requires_grad)
        if gx is not None and single:
            gx = gx[0]
        return (gx, gw, gb)

    return _tape_of(x, w, b)._record(out, (x, w, b), backward)


def maxpool2(x: Tensor) -> Tensor:
    """2x2 max pool with floor(H/2) x floor(W/2) output; ties route the
    gradient to the first element in row-major window order."""
    xv = x.array
    single = xv.ndim == 3
    if single:
        xv = xv[None]
    if xv.shape[1] < 2 or xv.shape[2] < 2:
        raise ValueError(f"maxpool2 needs H,W >= 2, got {x.array.shape}")
    xv = np.ascontiguousarray(xv)
    out, argmax = kernels.maxpool2_forward(xv)
    shape = xv.shape
    if single:
        out = out[0]

    def backward(g):
        gv = np.ascontiguousarray(g[None] if single else g)
        gx = kernels.maxpool2_backward(argmax, gv, shape)
        return (gx[0] if single else gx,)

    return _tape_of(x)._record(out, (x,), backward)


def _check_same_shape(a: Tensor, b: Tensor) -> None:
    if a.array.shape != b.array.shape:
        raise ValueError(f"shape mismatch: {a.array.shape} vs {b.array.shape}")
