"""Hybrid action sampling and exact log-probabilities.

The continuous pair is produced by squashing a Gaussian sample through tanh
and an affine map onto the command box:

    v = 0.3 * (1 + tanh xi_1)   in (0, 0.6)
    w = 0.9 * tanh xi_2         in (-0.9, 0.9)

so the density carries both the tanh and the affine-scale corrections. The
discrete code is drawn from the softmax over the logits head; the hybrid
log-probability is the sum of both parts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dialogue import ROBOT_CODES, ROBOT_CODES_2D, IntentCode

V_SCALE = 0.3     # v = V_SCALE * (1 + u1)
W_SCALE = 0.9     # w = W_SCALE * u2
_LOG_SCALES = math.log(V_SCALE) + math.log(W_SCALE)
LOG_2PI = math.log(2.0 * math.pi)


class TrainingDivergence(RuntimeError):
    """Actor emitted non-finite outputs; training should abort loudly."""


def action_codes(n_codes: int) -> tuple[IntentCode, ...]:
    if n_codes == 4:
        return ROBOT_CODES
    if n_codes == 2:
        return ROBOT_CODES_2D
    raise ValueError(f"unsupported discrete action-space size {n_codes}")


@dataclass
class HybridAction:
    code: IntentCode
    code_index: int
    v: float
    w: float
    pre_squash: np.ndarray      # xi = mu + eps * sigma
    log_prob: float


def squash(xi: np.ndarray) -> np.ndarray:
    """Map pre-squash samples (..., 2) to (v, w) commands."""
    u = np.tanh(xi)
    out = np.empty_like(u)
    out[..., 0] = V_SCALE * (1.0 + u[..., 0])
    out[..., 1] = W_SCALE * u[..., 1]
    return out


def normalized_from_command(v, w):
    """Inverse affine map onto (-1, 1)^2: the critic's continuous-action input."""
    return np.stack([np.asarray(v) / V_SCALE - 1.0, np.asarray(w) / W_SCALE], axis=-1)


def log_tanh_jacobian(xi: np.ndarray) -> np.ndarray:
    """log(1 - tanh(xi)^2), computed stably for large |xi|."""
    a = np.abs(xi)
    return math.log(4.0) - 2.0 * (a + np.log1p(np.exp(-2.0 * a)))


def log_prob_continuous(xi: np.ndarray, mu: np.ndarray, logsig: np.ndarray) -> np.ndarray:
    """log pi(v, w) for xi of shape (..., 2); includes tanh and affine corrections."""
    sigma = np.exp(logsig)
    z = (xi - mu) / sigma
    gauss = -0.5 * z * z - logsig - 0.5 * LOG_2PI
    corr = log_tanh_jacobian(xi)
    return (gauss - corr).sum(axis=-1) - _LOG_SCALES


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def sample_action(
    actor_out: tuple[np.ndarray, np.ndarray, np.ndarray],
    mode: str,
    rng: np.random.Generator | None,
    codes: tuple[IntentCode, ...] = ROBOT_CODES,
) -> HybridAction:
    """Draw one hybrid action from per-sample actor outputs (1D arrays).

    mode "stochastic" samples code and xi; "deterministic" takes the argmax
    code and the mean. Non-finite actor outputs raise TrainingDivergence.
    """
    logits, mu, logsig = (np.asarray(a, dtype=np.float64).reshape(-1) for a in actor_out)
    if not (np.isfinite(logits).all() and np.isfinite(mu).all() and np.isfinite(logsig).all()):
        raise TrainingDivergence("actor produced non-finite outputs")
    logp_d = log_softmax(logits)
    if mode == "deterministic":
        idx = int(np.argmax(logits))
        xi = mu.copy()
    elif mode == "stochastic":
        if rng is None:
            raise ValueError("stochastic sampling needs an rng")
        idx = int(rng.choice(len(logits), p=np.exp(logp_d)))
        xi = mu + rng.standard_normal(2) * np.exp(logsig)
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    vw = squash(xi)
    logp = float(logp_d[idx] + log_prob_continuous(xi, mu, logsig))
    return HybridAction(
        code=codes[idx],
        code_index=idx,
        v=float(vw[0]),
        w=float(vw[1]),
        pre_squash=xi,
        log_prob=logp,
    )


class Policy:
    """Inference-time wrapper: observation in, hybrid action out."""

    def __init__(self, model, params: dict, n_codes: int):
        self.model = model
        self.params = params
        self.codes = action_codes(n_codes)

    def actor_out(self, obs):
        grid = np.ascontiguousarray(obs.grid.transpose(1, 2, 0))[None]
        vec = obs.vector[None].astype(np.float32)
        s, _ = self.model.encode(grid, vec, self.params, want_tape=False)
        (logits, mu, logsig), _ = self.model.actor_heads(s, self.params, want_tape=False)
        return logits[0], mu[0], logsig[0]

    def act(self, obs, mode: str = "deterministic", rng: np.random.Generator | None = None) -> HybridAction:
        return sample_action(self.actor_out(obs), mode, rng, self.codes)
