"""Adam with bias correction, on flat parameter vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class AdamState:
    lr: float
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def create(cls, num_params: int, lr: float) -> "AdamState":
        return cls(lr=lr, m=np.zeros(num_params), v=np.zeros(num_params))


def adam_step(params: np.ndarray, grads: np.ndarray,
              state: AdamState) -> tuple[np.ndarray, AdamState]:
    """One update: returns the new parameter vector and the advanced
    state (moments updated in place, step count incremented)."""
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ValueError("params, grads, and optimizer state must share one shape")
    if not (np.all(np.isfinite(params)) and np.all(np.isfinite(grads))):
        raise ValueError("adam_step requires finite params and grads")

    state.step += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads**2
    m_hat = state.m / (1.0 - state.beta1**state.step)
    v_hat = state.v / (1.0 - state.beta2**state.step)
    updated = params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return updated, state
