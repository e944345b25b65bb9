"""Network graphs for the hybrid actor-critic.

One shared observation encoder (conv stack over the 4-channel grid, then a
dense fusion layer over [image features, goal history, condition vector])
feeds both the actor and the twin critics. The encoder is trained by the
critic loss only; the actor consumes its features as constants. Target copies
exist for the critic heads alone, refreshed by polyak averaging.

The actor trunk produces three heads: interaction-code logits, the continuous
mean, and the clamped log standard deviation. Each critic consumes the fused
state plus the normalized continuous action and emits one Q-value per
interaction code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nn import Clip, Conv2d, Dense, Flatten, MaxPool2, Network, Relu


@dataclass(frozen=True)
class ModelSpec:
    n_codes: int = 4
    grid_channels: int = 4
    grid_size: int = 48
    vector_dim: int = 16          # 9 goal-history numbers + 7 condition slots
    img_dim: int = 512
    state_dim: int = 512
    trunk_dim: int = 256
    critic_hidden: int = 256
    logsig_lo: float = -20.0
    logsig_hi: float = 2.0


class HsacModel:
    def __init__(self, spec: ModelSpec):
        self.spec = spec
        g = spec.grid_size
        self.img = Network(
            [
                Conv2d("img.c1", spec.grid_channels, 16, kernel=5, stride=2, pad=2),
                Relu("img.r1"),
                MaxPool2("img.p1"),
                Conv2d("img.c2", 16, 32, kernel=3, stride=1, pad=1),
                Relu("img.r2"),
                MaxPool2("img.p2"),
                Conv2d("img.c3", 32, 32, kernel=3, stride=1, pad=1),
                Relu("img.r3"),
                MaxPool2("img.p3"),
                Flatten("img.flat"),
            ],
            (g, g, spec.grid_channels),
        )
        flat_dim = self.img.output_shape[0]
        self.img_fc = Network(
            [Dense("img.fc", flat_dim, spec.img_dim, init="he"), Relu("img.fc_r")],
            (flat_dim,),
        )
        self.state = Network(
            [
                Dense("state.fc", spec.img_dim + spec.vector_dim, spec.state_dim, init="he"),
                Relu("state.r"),
            ],
            (spec.img_dim + spec.vector_dim,),
        )
        self.trunk = Network(
            [Dense("actor.trunk", spec.state_dim, spec.trunk_dim, init="he"), Relu("actor.trunk_r")],
            (spec.state_dim,),
        )
        self.head_logits = Network(
            [Dense("actor.logits", spec.trunk_dim, spec.n_codes, init="xavier")], (spec.trunk_dim,)
        )
        self.head_mu = Network(
            [Dense("actor.mu", spec.trunk_dim, 2, init="xavier")], (spec.trunk_dim,)
        )
        self.head_logsig = Network(
            [
                Dense("actor.logsig", spec.trunk_dim, 2, init="xavier"),
                Clip("actor.logsig_clip", spec.logsig_lo, spec.logsig_hi),
            ],
            (spec.trunk_dim,),
        )
        self.critics = {
            name: Network(
                [
                    Dense(f"{name}.fc1", spec.state_dim + 2, spec.critic_hidden, init="he"),
                    Relu(f"{name}.r1"),
                    Dense(f"{name}.fc2", spec.critic_hidden, spec.critic_hidden, init="he"),
                    Relu(f"{name}.r2"),
                    Dense(f"{name}.out", spec.critic_hidden, spec.n_codes, init="xavier"),
                ],
                (spec.state_dim + 2,),
            )
            for name in ("q1", "q2")
        }

    # -- parameter management ------------------------------------------------

    def _networks(self):
        yield self.img
        yield self.img_fc
        yield self.state
        yield self.trunk
        yield self.head_logits
        yield self.head_mu
        yield self.head_logsig
        yield self.critics["q1"]
        yield self.critics["q2"]

    def param_shapes(self) -> dict:
        shapes = {}
        for net in self._networks():
            shapes.update(net.param_shapes())
        return shapes

    def init_params(self, seed: int) -> dict:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 0xA11C))))
        params = {}
        for net in self._networks():
            params.update(net.init_params(rng))
        return params

    @staticmethod
    def encoder_keys(params: dict) -> list[str]:
        return [k for k in params if k.startswith(("img.", "state."))]

    @staticmethod
    def actor_keys(params: dict) -> list[str]:
        return [k for k in params if k.startswith("actor.")]

    @staticmethod
    def critic_head_keys(params: dict) -> list[str]:
        return [k for k in params if k.startswith(("q1.", "q2."))]

    def init_target(self, params: dict) -> dict:
        return {k: params[k].copy() for k in self.critic_head_keys(params)}

    # -- composite passes ------------------------------------------------------

    def encode(self, grid: np.ndarray, vec: np.ndarray, params: dict, want_tape: bool = True):
        """Fused state from grid + flat features; tape covers all three stages."""
        feats, t1 = self.img.forward(grid, params, want_tape)
        s_img, t2 = self.img_fc.forward(feats, params, want_tape)
        x = np.concatenate([s_img, vec], axis=1)
        s, t3 = self.state.forward(x, params, want_tape)
        tape = (t1, t2, t3) if want_tape else None
        return s, tape

    def encode_backward(self, tape, ds: np.ndarray, params: dict) -> dict:
        t1, t2, t3 = tape
        grads, dx = self.state.backward(t3, ds, params, need_dx=True)
        d_img = dx[:, : self.spec.img_dim]
        g2, dfeats = self.img_fc.backward(t2, d_img, params, need_dx=True)
        grads.update(g2)
        g1, _ = self.img.backward(t1, dfeats, params, need_dx=False)
        grads.update(g1)
        return grads

    def encoder_signature(self, tape) -> bytes:
        t1, t2, t3 = tape
        return self.img.signature(t1) + self.img_fc.signature(t2) + self.state.signature(t3)

    def actor_heads(self, s: np.ndarray, params: dict, want_tape: bool = True):
        h, t_tr = self.trunk.forward(s, params, want_tape)
        logits, t_lo = self.head_logits.forward(h, params, want_tape)
        mu, t_mu = self.head_mu.forward(h, params, want_tape)
        logsig, t_ls = self.head_logsig.forward(h, params, want_tape)
        tape = (t_tr, t_lo, t_mu, t_ls) if want_tape else None
        return (logits, mu, logsig), tape

    def actor_backward(self, tape, dlogits, dmu, dlogsig, params: dict) -> dict:
        t_tr, t_lo, t_mu, t_ls = tape
        g_lo, dh1 = self.head_logits.backward(t_lo, dlogits, params, need_dx=True)
        g_mu, dh2 = self.head_mu.backward(t_mu, dmu, params, need_dx=True)
        g_ls, dh3 = self.head_logsig.backward(t_ls, dlogsig, params, need_dx=True)
        grads = {**g_lo, **g_mu, **g_ls}
        g_tr, _ = self.trunk.backward(t_tr, dh1 + dh2 + dh3, params, need_dx=False)
        grads.update(g_tr)
        return grads

    def actor_signature(self, tape) -> bytes:
        t_tr, t_lo, t_mu, t_ls = tape
        return (
            self.trunk.signature(t_tr)
            + self.head_logits.signature(t_lo)
            + self.head_mu.signature(t_mu)
            + self.head_logsig.signature(t_ls)
        )

    def critic(self, s: np.ndarray, a: np.ndarray, params: dict, which: str, want_tape: bool = True):
        """Q-values of all interaction codes given the normalized continuous action."""
        x = np.concatenate([s, a], axis=1)
        return self.critics[which].forward(x, params, want_tape)

    def critic_backward(self, tape, dq: np.ndarray, params: dict, which: str, need_dx: bool = True):
        grads, dx = self.critics[which].backward(tape, dq, params, need_dx=need_dx)
        if not need_dx:
            return grads, (None, None)
        return grads, (dx[:, : self.spec.state_dim], dx[:, self.spec.state_dim :])

    def critic_signature(self, tape, which: str) -> bytes:
        return self.critics[which].signature(tape)
