"""Plain Adam over a flat parameter vector, with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


@dataclass
class AdamState:
    """Moment accumulators; create with :meth:`fresh` sized to the parameters."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = BETA1
    beta2: float = BETA2
    epsilon: float = EPSILON

    @classmethod
    def fresh(cls, size: int) -> "AdamState":
        return cls(m=np.zeros(size), v=np.zeros(size))

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=np.float64).reshape(-1)
        self.v = np.asarray(self.v, dtype=np.float64).reshape(-1)
        if self.m.size != self.v.size:
            raise ValueError("moment vectors must have equal length")
        if np.any(self.v < 0):
            raise ValueError("second-moment entries must be non-negative")
        if self.step < 0:
            raise ValueError("step count must be non-negative")


def adam_step(
    state: AdamState,
    params: np.ndarray,
    grads: np.ndarray,
    lr: float,
) -> tuple[AdamState, np.ndarray]:
    """One Adam update; returns the advanced state and updated parameters.

    m <- b1*m + (1-b1)*g;  v <- b2*v + (1-b2)*g^2;
    p <- p - lr * m_hat / (sqrt(v_hat) + eps)  with bias-corrected moments.
    """
    params = np.asarray(params, dtype=np.float64).reshape(-1)
    grads = np.asarray(grads, dtype=np.float64).reshape(-1)
    if params.size != grads.size or params.size != state.m.size:
        raise ValueError(
            f"length mismatch: {params.size} params, {grads.size} grads, {state.m.size} moments"
        )
    if lr <= 0:
        raise ValueError("learning rate must be positive")

    step = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    v = state.beta2 * state.v + (1.0 - state.beta2) * grads * grads
    m_hat = m / (1.0 - state.beta1 ** step)
    v_hat = v / (1.0 - state.beta2 ** step)
    updated = params - lr * m_hat / (np.sqrt(v_hat) + state.epsilon)

    new_state = AdamState(
        m=m, v=v, step=step,
        beta1=state.beta1, beta2=state.beta2, epsilon=state.epsilon,
    )
    return new_state, updated
