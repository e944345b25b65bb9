"""Hybrid soft actor-critic updates.

Per update step, on one uniformly sampled batch:

* targets: sample one continuous action at the next state, take the
  minimum of the target critic heads over both critics, and close the
  discrete expectation analytically over the code distribution, adding both
  entropy terms with their own temperatures;
* critic: MSE of each critic's Q at the taken code against the target, one
  Adam step over the critic heads and the shared observation encoder, then a
  polyak refresh of the target heads;
* actor: reparameterized hybrid policy loss with the analytic discrete
  expectation (gradients assembled in closed form through the tanh/affine
  squash and the critics' input gradients); the encoder output is treated as
  a constant here;
* temperatures: dual log-parameterized temperatures driven toward separate
  discrete and continuous entropy targets.

Rewards are scaled by a constant inside the critic target only; logged
rewards and returns are never scaled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..nn import Adam
from ..nn.checkpoint import load_arrays, save_arrays
from .model import HsacModel, ModelSpec
from .policy import (
    TrainingDivergence,
    log_prob_continuous,
    log_softmax,
)
from .replay import ReplayBuffer


@dataclass
class HsacConfig:
    gamma: float = 0.99
    tau: float = 0.005
    lr: float = 3e-4
    batch_size: int = 256
    buffer_capacity: int = 100_000
    warmup_steps: int = 1000
    updates_per_step: int = 1
    reward_scale: float = 0.01
    target_entropy_c: float = -2.0
    target_entropy_d_factor: float = 0.3    # target H_d = factor * ln(n_codes)
    init_alpha: float = 0.1


@dataclass
class UpdateContext:
    """Shared per-batch intermediates so the three updates reuse one encoding."""

    batch: dict
    s: np.ndarray
    enc_tape: tuple
    entropy_d: float | None = None
    entropy_c: float | None = None
    q_mean: float = 0.0


@dataclass
class UpdateMetrics:
    critic_loss: float
    actor_loss: float
    alpha_d: float
    alpha_c: float
    entropy_d: float
    entropy_c: float
    q_mean: float


class Trainer:
    def __init__(self, spec: ModelSpec, cfg: HsacConfig, seed: int):
        self.spec = spec
        self.cfg = cfg
        self.model = HsacModel(spec)
        self.params = self.model.init_params(seed)
        self.target = self.model.init_target(self.params)
        critic_keys = self.model.encoder_keys(self.params) + self.model.critic_head_keys(self.params)
        actor_keys = self.model.actor_keys(self.params)
        shapes = {k: self.params[k].shape for k in self.params}
        self.critic_opt = Adam({k: shapes[k] for k in critic_keys}, lr=cfg.lr)
        self.actor_opt = Adam({k: shapes[k] for k in actor_keys}, lr=cfg.lr)
        self.log_alpha_d = np.array([math.log(cfg.init_alpha)], dtype=np.float64)
        self.log_alpha_c = np.array([math.log(cfg.init_alpha)], dtype=np.float64)
        self.alpha_d_opt = Adam({"log_alpha_d": (1,)}, lr=cfg.lr)
        self.alpha_c_opt = Adam({"log_alpha_c": (1,)}, lr=cfg.lr)
        self.target_entropy_d = cfg.target_entropy_d_factor * math.log(spec.n_codes)
        self.target_entropy_c = cfg.target_entropy_c
        self.rng_update = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 1))))
        self.buffer = ReplayBuffer(cfg.buffer_capacity, spec.grid_size, spec.vector_dim)
        self.update_count = 0

    @property
    def alpha_d(self) -> float:
        return float(np.exp(self.log_alpha_d[0]))

    @property
    def alpha_c(self) -> float:
        return float(np.exp(self.log_alpha_c[0]))

    # -- shared plumbing -----------------------------------------------------

    def prepare(self, batch: dict) -> UpdateContext:
        s, tape = self.model.encode(batch["grid"], batch["vec"], self.params, want_tape=True)
        return UpdateContext(batch=batch, s=s, enc_tape=tape)

    def _sample_continuous(self, mu, logsig):
        eps = self.rng_update.standard_normal(mu.shape).astype(mu.dtype)
        sigma = np.exp(logsig)
        xi = mu + eps * sigma
        return xi, np.tanh(xi), eps, sigma

    # -- targets ---------------------------------------------------------------

    def soft_value(self, next_grid: np.ndarray, next_vec: np.ndarray) -> np.ndarray:
        """Entropy-regularized state value of next observations (no gradients).

        One continuous sample per state; analytic expectation over codes using
        the per-code target critic heads.
        """
        s, _ = self.model.encode(next_grid, next_vec, self.params, want_tape=False)
        (logits, mu, logsig), _ = self.model.actor_heads(s, self.params, want_tape=False)
        xi, u, _, _ = self._sample_continuous(mu, logsig)
        logp_c = log_prob_continuous(xi, mu, logsig)
        logp_d = log_softmax(logits)
        pi_d = np.exp(logp_d)
        q1, _ = self.model.critic(s, u, self.target, "q1", want_tape=False)
        q2, _ = self.model.critic(s, u, self.target, "q2", want_tape=False)
        qmin = np.minimum(q1, q2)
        v = (pi_d * (qmin - self.alpha_d * logp_d)).sum(axis=1) - self.alpha_c * logp_c
        return v

    def compute_targets(self, batch: dict) -> np.ndarray:
        v = self.soft_value(batch["next_grid"], batch["next_vec"])
        r = batch["reward"] * self.cfg.reward_scale
        return r + self.cfg.gamma * batch["bootstrap"] * v

    # -- the three updates -------------------------------------------------------

    def critic_loss_and_grads(self, batch: dict, y: np.ndarray, params: dict,
                              s: np.ndarray, enc_tape) -> tuple[float, float, dict, bytes]:
        """Both critic MSE losses with gradients for heads and encoder (pure)."""
        b = y.shape[0]
        idx = np.arange(b)
        code = batch["code"]
        a = batch["a_norm"].astype(s.dtype)
        losses = []
        grads = {}
        sig = self.model.encoder_signature(enc_tape)
        ds_total = np.zeros_like(s)
        for which in ("q1", "q2"):
            q, tape = self.model.critic(s, a, params, which, want_tape=True)
            delta = q[idx, code] - y
            losses.append(float(np.mean(delta * delta)))
            dq = np.zeros_like(q)
            dq[idx, code] = 2.0 * delta / b
            g, (ds, _) = self.model.critic_backward(tape, dq, params, which, need_dx=True)
            grads.update(g)
            ds_total += ds
            sig += self.model.critic_signature(tape, which)
        grads.update(self.model.encode_backward(enc_tape, ds_total, params))
        return losses[0], losses[1], grads, sig

    def critic_update(self, batch: dict, ctx: UpdateContext | None = None) -> tuple[float, float]:
        """One soft Q step on both critics (and the encoder), plus polyak targets."""
        ctx = ctx or self.prepare(batch)
        y = self.compute_targets(batch)
        l1, l2, grads, _ = self.critic_loss_and_grads(batch, y, self.params, ctx.s, ctx.enc_tape)
        if not (math.isfinite(l1) and math.isfinite(l2)):
            raise TrainingDivergence(f"critic loss non-finite: {l1}, {l2}")
        self.critic_opt.step(self.params, grads)
        tau = self.cfg.tau
        for k in self.target:
            self.target[k] += tau * (self.params[k] - self.target[k])
        return l1, l2

    def actor_loss_and_grads(self, s: np.ndarray, params: dict, eps: np.ndarray
                             ) -> tuple[float, dict, bytes, dict]:
        """Actor loss and gradients wrt the actor heads for a frozen noise draw.

        The fused state s is a constant (the encoder belongs to the critic
        optimizer); critic parameters contribute only through their input
        gradients. Pure: no optimizer step, no rng draw.
        """
        b = s.shape[0]
        (logits, mu, logsig), tape_a = self.model.actor_heads(s, params, want_tape=True)
        if not np.isfinite(logits).all() or not np.isfinite(mu).all():
            raise TrainingDivergence("actor heads produced non-finite outputs")
        sigma = np.exp(logsig)
        xi = mu + eps * sigma
        u = np.tanh(xi)
        logp_c = log_prob_continuous(xi, mu, logsig)
        logp_d = log_softmax(logits)
        pi_d = np.exp(logp_d)

        q1, t1 = self.model.critic(s, u, params, "q1", want_tape=True)
        q2, t2 = self.model.critic(s, u, params, "q2", want_tape=True)
        qmin = np.minimum(q1, q2)
        use1 = q1 <= q2

        alpha_d, alpha_c = self.alpha_d, self.alpha_c
        f = alpha_d * logp_d - qmin
        loss = float(np.mean((pi_d * f).sum(axis=1) + alpha_c * logp_c))

        # d loss / d logits: pi_k (f_k - E_pi[f]) per sample
        e_f = (pi_d * f).sum(axis=1, keepdims=True)
        dlogits = pi_d * (f - e_f) / b
        # d loss / d u through the min of the critics
        g = pi_d / b
        _, (_, da1) = self.model.critic_backward(t1, -g * use1, params, "q1", need_dx=True)
        _, (_, da2) = self.model.critic_backward(t2, -g * (~use1), params, "q2", need_dx=True)
        du = da1 + da2
        # chain through u = tanh(xi) and the entropy term's direct xi-dependence
        dxi = du * (1.0 - u * u) + (alpha_c / b) * 2.0 * u
        dmu = dxi
        dlogsig = dxi * eps * sigma - (alpha_c / b)
        grads = self.model.actor_backward(tape_a, dlogits, dmu, dlogsig, params)
        sig = (self.model.actor_signature(tape_a)
               + self.model.critic_signature(t1, "q1")
               + self.model.critic_signature(t2, "q2"))
        stats = {
            "entropy_d": float(np.mean(-(pi_d * logp_d).sum(axis=1))),
            "entropy_c": float(np.mean(-logp_c)),
            "q_mean": float(qmin.mean()),
        }
        return loss, grads, sig, stats

    def actor_update(self, batch: dict, ctx: UpdateContext | None = None) -> float:
        """Reparameterized policy step; encoder features are constants here."""
        ctx = ctx or self.prepare(batch)
        eps = self.rng_update.standard_normal((ctx.s.shape[0], 2)).astype(ctx.s.dtype)
        loss, grads, _, stats = self.actor_loss_and_grads(ctx.s, self.params, eps)
        if not math.isfinite(loss):
            raise TrainingDivergence("actor loss non-finite")
        self.actor_opt.step(self.params, grads)
        ctx.entropy_d = stats["entropy_d"]
        ctx.entropy_c = stats["entropy_c"]
        ctx.q_mean = stats["q_mean"]
        return loss

    def temperature_update(self, batch: dict, ctx: UpdateContext | None = None) -> tuple[float, float]:
        """Drive both temperatures toward their entropy targets."""
        if ctx is None or ctx.entropy_d is None:
            ctx = ctx or self.prepare(batch)
            (logits, mu, logsig), _ = self.model.actor_heads(ctx.s, self.params, want_tape=False)
            xi, _, _, _ = self._sample_continuous(mu, logsig)
            logp_d = log_softmax(logits)
            pi_d = np.exp(logp_d)
            ctx.entropy_d = float(np.mean(-(pi_d * logp_d).sum(axis=1)))
            ctx.entropy_c = float(np.mean(-log_prob_continuous(xi, mu, logsig)))
        g_d = self.alpha_d * (ctx.entropy_d - self.target_entropy_d)
        g_c = self.alpha_c * (ctx.entropy_c - self.target_entropy_c)
        self.alpha_d_opt.step({"log_alpha_d": self.log_alpha_d}, {"log_alpha_d": np.array([g_d])})
        self.alpha_c_opt.step({"log_alpha_c": self.log_alpha_c}, {"log_alpha_c": np.array([g_c])})
        return self.alpha_d, self.alpha_c

    def update(self, rng_sample: np.random.Generator) -> UpdateMetrics:
        """One full update on a fresh uniform batch."""
        batch = self.buffer.sample(self.cfg.batch_size, rng_sample)
        ctx = self.prepare(batch)
        l1, l2 = self.critic_update(batch, ctx)
        actor_loss = self.actor_update(batch, ctx)
        self.temperature_update(batch, ctx)
        self.update_count += 1
        return UpdateMetrics(
            critic_loss=0.5 * (l1 + l2),
            actor_loss=actor_loss,
            alpha_d=self.alpha_d,
            alpha_c=self.alpha_c,
            entropy_d=ctx.entropy_d,
            entropy_c=ctx.entropy_c,
            q_mean=ctx.q_mean,
        )

    # -- persistence -------------------------------------------------------------

    def save_checkpoint(self, path: str) -> None:
        arrays = {f"param.{k}": v for k, v in self.params.items()}
        arrays.update({f"target.{k}": v for k, v in self.target.items()})
        arrays["alpha.log_alpha_d"] = self.log_alpha_d
        arrays["alpha.log_alpha_c"] = self.log_alpha_c
        arrays["meta.n_codes"] = np.int64(self.spec.n_codes)
        arrays["meta.grid_size"] = np.int64(self.spec.grid_size)
        arrays["meta.vector_dim"] = np.int64(self.spec.vector_dim)
        save_arrays(path, arrays)

    def load_checkpoint_arrays(self, arrays: dict) -> None:
        for k in self.params:
            self.params[k] = arrays[f"param.{k}"].copy()
        for k in self.target:
            self.target[k] = arrays[f"target.{k}"].copy()
        self.log_alpha_d = arrays["alpha.log_alpha_d"].astype(np.float64).copy()
        self.log_alpha_c = arrays["alpha.log_alpha_c"].astype(np.float64).copy()

    def opt_state(self) -> dict:
        state = {}
        for name, opt in (("critic", self.critic_opt), ("actor", self.actor_opt),
                          ("alpha_d", self.alpha_d_opt), ("alpha_c", self.alpha_c_opt)):
            for k, v in opt.state_dict().items():
                state[f"opt.{name}.{k}"] = v
        state["update_count"] = np.int64(self.update_count)
        return state

    def load_opt_state(self, state: dict) -> None:
        for name, opt in (("critic", self.critic_opt), ("actor", self.actor_opt),
                          ("alpha_d", self.alpha_d_opt), ("alpha_c", self.alpha_c_opt)):
            sub = {k[len(f"opt.{name}.") :]: v for k, v in state.items() if k.startswith(f"opt.{name}.")}
            opt.load_state_dict(sub)
        self.update_count = int(state["update_count"])


def checkpoint_model_spec(arrays: dict) -> ModelSpec:
    """Model geometry recorded inside a checkpoint file."""
    return ModelSpec(
        n_codes=int(arrays["meta.n_codes"]),
        grid_size=int(arrays["meta.grid_size"]),
        vector_dim=int(arrays["meta.vector_dim"]),
    )


def load_policy_params(path: str) -> tuple[ModelSpec, dict]:
    arrays = load_arrays(path)
    spec = checkpoint_model_spec(arrays)
    params = {k[len("param.") :]: v for k, v in arrays.items() if k.startswith("param.")}
    return spec, params
