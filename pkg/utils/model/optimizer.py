"""
Adam with bias correction over named parameter tensors.
"""

from __future__ import annotations
from typing import Dict

import numpy as np

from utils.model.config import DEFAULT_BETA1, DEFAULT_BETA2, DEFAULT_EPS, DEFAULT_LR


class Adam:
    def __init__(self, lr: float = DEFAULT_LR, beta1: float = DEFAULT_BETA1, beta2: float = DEFAULT_BETA2,
                 eps: float = DEFAULT_EPS):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        """Update `params` in place."""
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        step_size = self.lr / bc1

        for k in params:
            g = grads[k]
            if k not in self.m:
                self.m[k] = np.zeros_like(params[k])
                self.v[k] = np.zeros_like(params[k])

            self.m[k] *= self.beta1
            self.m[k] += (1.0 - self.beta1) * g
            self.v[k] *= self.beta2
            self.v[k] += (1.0 - self.beta2) * (g * g)

            denom = np.sqrt(self.v[k] / bc2) + self.eps
            params[k] -= step_size * self.m[k] / denom
