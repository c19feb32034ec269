from typing import List, Sequence

import numpy as np


class Adam:
    """Adam over a list of parameter arrays, updated in place."""

    def __init__(self, params: Sequence[np.ndarray], beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: List[np.ndarray] = [np.zeros_like(p) for p in params]
        self.v: List[np.ndarray] = [np.zeros_like(p) for p in params]

    def step(self, params: List[np.ndarray], grads: Sequence[np.ndarray], lr: float):
        self.t += 1
        bias1 = 1.0 - self.beta1 ** self.t
        bias2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)


def step_decay(learning_rate: float, decay_factor: float, decay_period_epochs: int, epoch: int) -> float:
    """Learning rate in effect during a zero-based epoch."""
    return learning_rate * decay_factor ** (epoch // decay_period_epochs)
