"""Adam optimizer over named parameter dicts."""

from __future__ import annotations

import numpy as np


class Adam:
    """Standard Adam with bias correction; moments are float32 like the params."""

    def __init__(self, param_shapes: dict, lr: float = 3e-4,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros(s, dtype=np.float32) for k, s in param_shapes.items()}
        self.v = {k: np.zeros(s, dtype=np.float32) for k, s in param_shapes.items()}

    def step(self, params: dict, grads: dict) -> None:
        """One in-place update; missing grads leave those params untouched."""
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for name, g in grads.items():
            g = g.astype(np.float32, copy=False)
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            mhat = m / bc1
            vhat = v / bc2
            params[name] -= (self.lr * mhat / (np.sqrt(vhat) + self.eps)).astype(np.float32)

    def state_dict(self) -> dict:
        state = {"t": np.int64(self.t)}
        for k in self.m:
            state[f"m.{k}"] = self.m[k]
            state[f"v.{k}"] = self.v[k]
        return state

    def load_state_dict(self, state: dict) -> None:
        self.t = int(state["t"])
        for k in self.m:
            self.m[k] = state[f"m.{k}"].astype(np.float32)
            self.v[k] = state[f"v.{k}"].astype(np.float32)
