"""Adam with bias correction and the cosine learning-rate schedule."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Tensor

ADAM_EPS = 1e-8


@dataclass
class OptimizerState:
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)
    beta1: float = 0.9
    beta2: float = 0.99
    lr: float = 2e-4


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: OptimizerState,
    lr: float | None = None,
) -> None:
    """One bias-corrected Adam update, in place."""
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    if lr is not None:
        state.lr = lr
    state.step += 1
    b1, b2, t = state.beta1, state.beta2, state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        p -= state.lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


class Adam:
    """Tensor-facing wrapper over adam_step."""

    def __init__(self, params: list[Tensor], lr: float = 2e-4,
                 beta1: float = 0.9, beta2: float = 0.99):
        self.params = params
        self.state = OptimizerState(beta1=beta1, beta2=beta2, lr=lr)

    def step(self, lr: float | None = None) -> None:
        arrays = [p.data for p in self.params]
        grads = [
            p.grad if p.grad is not None else np.zeros_like(p.data)
            for p in self.params
        ]
        adam_step(arrays, grads, self.state, lr=lr)


def cosine_lr(step: int, total_steps: int, lr_max: float, lr_min: float) -> float:
    """Half-cosine decay from lr_max at step 0 to lr_min at total_steps."""
    if not 0 <= step <= total_steps:
        raise ValueError(f"step {step} out of range [0, {total_steps}]")
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + np.cos(np.pi * step / total_steps))
