"""The actor-critic network over a flat parameter vector.

Architecture: 2x2 conv (3->16), ReLU, 2x2 max pool, 2x2 conv (16->64), ReLU,
flatten to 64, then linear heads (actor 64->7, critic 64->1), optionally
tanh-wrapped (see PpoConfig.tanh_heads). The 5x5x3 integer observation is
scaled to [0,1] per channel before the first conv. Two forward paths share
the same kernels: a plain-NumPy one for rollouts and a taped one for
gradients; both produce identical values.
"""

from __future__ import annotations

import numpy as np

from rheacl import tensor as T
from rheacl.tensor import kernels
from rheacl.gridworld.types import CHANNEL_MAX, NUM_ACTIONS

VIEW = 5

_LAYOUT = (
    ("conv1.w", (2, 2, 3, 16)),
    ("conv1.b", (16,)),
    ("conv2.w", (2, 2, 16, 64)),
    ("conv2.b", (64,)),
    ("actor.w", (64, NUM_ACTIONS)),
    ("actor.b", (NUM_ACTIONS,)),
    ("critic.w", (64, 1)),
    ("critic.b", (1,)),
)


def param_slices() -> dict[str, tuple[slice, tuple[int, ...]]]:
    out = {}
    offset = 0
    for name, shape in _LAYOUT:
        n = int(np.prod(shape))
        out[name] = (slice(offset, offset + n), shape)
        offset += n
    return out


_SLICES = param_slices()
NUM_PARAMS = max(s.stop for s, _ in _SLICES.values())


def views(params: np.ndarray) -> dict[str, np.ndarray]:
    """Named reshaped views into the flat vector (no copies)."""
    if params.shape != (NUM_PARAMS,):
        raise ValueError(f"expected parameter vector of length {NUM_PARAMS}")
    return {name: params[s].reshape(shape) for name, (s, shape) in _SLICES.items()}


def _orthogonal(shape, gain: float, rng: np.random.Generator) -> np.ndarray:
    """Semi-orthogonal matrix reshaped to ``shape`` (fan-in x fan-out)."""
    rows = int(np.prod(shape[:-1]))
    cols = shape[-1]
    a = rng.normal(size=(max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols].reshape(shape)


def init_params(rng: np.random.Generator) -> np.ndarray:
    """Orthogonal weights, zero biases. Convs carry the ReLU gain; both
    heads start near zero so early advantages reflect rewards, not init
    noise."""
    params = np.zeros(NUM_PARAMS, dtype=np.float64)
    v = views(params)
    v["conv1.w"][...] = _orthogonal(v["conv1.w"].shape, np.sqrt(2.0), rng)
    v["conv2.w"][...] = _orthogonal(v["conv2.w"].shape, np.sqrt(2.0), rng)
    v["actor.w"][...] = _orthogonal(v["actor.w"].shape, 0.01, rng)
    v["critic.w"][...] = _orthogonal(v["critic.w"].shape, 0.01, rng)
    return params


def normalize_obs(obs: np.ndarray) -> np.ndarray:
    """uint8 (..., V, V, 3) -> float64 scaled to [0, 1] per channel."""
    return np.ascontiguousarray(obs.astype(np.float64) / CHANNEL_MAX)


def forward_np(params: np.ndarray, obs: np.ndarray, tanh_heads: bool = False):
    """Gradient-free forward pass. obs: normalized float64 (N, V, V, 3).

    Returns (logits (N,7), values (N,)). Aborts on non-finite activations.
    """
    v = views(params)
    h = kernels.conv2d_forward(obs, v["conv1.w"], v["conv1.b"])
    np.maximum(h, 0.0, out=h)
    h, _ = kernels.maxpool2_forward(h)
    h = kernels.conv2d_forward(h, v["conv2.w"], v["conv2.b"])
    np.maximum(h, 0.0, out=h)
    h = h.reshape(h.shape[0], -1)
    logits = h @ v["actor.w"] + v["actor.b"]
    value = (h @ v["critic.w"] + v["critic.b"])[:, 0]
    if tanh_heads:
        logits = np.tanh(logits)
        value = np.tanh(value)
    if not (np.isfinite(logits).all() and np.isfinite(value).all()):
        raise FloatingPointError("non-finite activation in policy forward pass")
    return logits, value


def forward_tape(tape: T.Tape, params: np.ndarray, obs: np.ndarray,
                 tanh_heads: bool = False):
    """Taped forward pass for gradient computation.

    Returns (logits, values, leaves) where ``leaves`` maps names to the
    parameter leaf tensors whose .grad fields backward() will fill.
    """
    v = views(params)
    leaves = {name: tape.leaf(arr, requires_grad=True) for name, arr in v.items()}
    x = tape.constant(obs)
    h = T.relu(T.conv2d(x, leaves["conv1.w"], leaves["conv1.b"]))
    h = T.maxpool2(h)
    h = T.relu(T.conv2d(h, leaves["conv2.w"], leaves["conv2.b"]))
    n = h.array.shape[0]
    h = T.reshape(h, (n, 64))
    logits = T.linear(h, leaves["actor.w"], leaves["actor.b"])
    value = T.reshape(T.linear(h, leaves["critic.w"], leaves["critic.b"]), (n,))
    if tanh_heads:
        logits = T.tanh(logits)
        value = T.tanh(value)
    return logits, value, leaves


def flat_grad(leaves: dict) -> np.ndarray:
    """Concatenate per-leaf gradients back into flat-vector order."""
    grad = np.zeros(NUM_PARAMS, dtype=np.float64)
    out = views(grad)
    for name, leaf in leaves.items():
        if leaf.grad is not None:
            out[name][...] = leaf.grad
    return grad


def sample_actions(logits: np.ndarray, rng: np.random.Generator):
    """Sample from softmax rows via inverse CDF; returns (actions, log_probs)."""
    z = logits - logits.max(axis=1, keepdims=True)
    ez = np.exp(z)
    probs = ez / ez.sum(axis=1, keepdims=True)
    u = rng.random(logits.shape[0])
    actions = (probs.cumsum(axis=1) < u[:, None]).sum(axis=1)
    actions = np.minimum(actions, logits.shape[1] - 1)
    logp = log_softmax_np(logits)[np.arange(logits.shape[0]), actions]
    return actions.astype(np.int64), logp


def log_softmax_np(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))
