"""Adam optimizer over a flat parameter vector."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    """Moment estimates plus step counter.

    ``alpha`` is the second-moment decay (the smoothing factor of the
    training configuration); beta1 stays at the conventional 0.9.
    """

    size: int
    lr: float = 0.001
    alpha: float = 0.99
    beta1: float = 0.9
    eps: float = 1e-8
    t: int = 0
    m: np.ndarray = field(init=False)
    v: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        self.m = np.zeros(self.size, dtype=np.float64)
        self.v = np.zeros(self.size, dtype=np.float64)

    def copy(self) -> "AdamState":
        dup = AdamState(self.size, self.lr, self.alpha, self.beta1, self.eps, self.t)
        dup.m = self.m.copy()
        dup.v = self.v.copy()
        return dup


def adam_step(state: AdamState, params: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """One Adam update; returns the new parameter vector.

    Raises on non-finite gradients rather than poisoning the moments.
    """
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ValueError(
            f"adam_step size mismatch: params{params.shape} grads{grads.shape} "
            f"state({state.size},)"
        )
    if not np.all(np.isfinite(grads)):
        raise FloatingPointError("non-finite gradient in adam_step")
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    state.v = state.alpha * state.v + (1.0 - state.alpha) * grads * grads
    m_hat = state.m / (1.0 - state.beta1**state.t)
    v_hat = state.v / (1.0 - state.alpha**state.t)
    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
