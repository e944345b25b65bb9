"""A hand-parameterized checkpoint with known, testable behavior.

The weights implement a simple feedback law through the ordinary network
stack: steer toward the goal at near-full speed, halt when the active
condition is a stop-family request, announce and perform the matching
interaction code on any pedestrian request, and veer toward the demanded
side on margin-family requests. It exists so session and protocol tests can
run against a deterministic, training-free policy, and so a live demo has a
responsive robot out of the box.
"""

from __future__ import annotations

import math

import numpy as np

from ..nn.checkpoint import save_arrays
from .model import HsacModel, ModelSpec

# vector slot layout: 3 history triples (distance, bearing, alignment), then
# the 7 condition slots [none, ask-stop, ask-margin-left, ask-margin-right,
# claim-priority, warn-left, warn-right]
_BEAR = 7            # newest bearing
_ASK_STOP = 10
_ASK_ML = 11
_ASK_MR = 12
_CLAIM = 13
_WARN_L = 14
_WARN_R = 15

# dedicated fused-state units
_U_BEAR_POS, _U_BEAR_NEG = 1, 2
_U_ASK_STOP, _U_ASK_ML, _U_ASK_MR, _U_CLAIM, _U_WARN_L, _U_WARN_R = 3, 4, 5, 6, 7, 8


def build_demo_params(spec: ModelSpec) -> dict:
    model = HsacModel(spec)
    params = {k: np.zeros(s, dtype=np.float32) for k, s in model.param_shapes().items()}

    img_dim = spec.img_dim
    w_state = params["state.fc.W"]
    w_state[img_dim + _BEAR, _U_BEAR_POS] = 1.0
    w_state[img_dim + _BEAR, _U_BEAR_NEG] = -1.0
    for vec_slot, unit in (
        (_ASK_STOP, _U_ASK_STOP),
        (_ASK_ML, _U_ASK_ML),
        (_ASK_MR, _U_ASK_MR),
        (_CLAIM, _U_CLAIM),
        (_WARN_L, _U_WARN_L),
        (_WARN_R, _U_WARN_R),
    ):
        w_state[img_dim + vec_slot, unit] = 1.0

    w_trunk = params["actor.trunk.W"]
    for i in range(1, 9):
        w_trunk[i, i] = 1.0

    # code columns follow ROBOT_CODES order: none, stop, margin-right, margin-left
    w_logits = params["actor.logits.W"]
    b_logits = params["actor.logits.b"]
    b_logits[0] = 1.0
    b_logits[1:] = -2.0
    w_logits[_U_ASK_STOP, 1] = 10.0
    w_logits[_U_CLAIM, 1] = 10.0
    if spec.n_codes == 4:
        w_logits[_U_ASK_MR, 2] = 10.0
        w_logits[_U_WARN_L, 2] = 10.0
        w_logits[_U_ASK_ML, 3] = 10.0
        w_logits[_U_WARN_R, 3] = 10.0

    w_mu = params["actor.mu.W"]
    b_mu = params["actor.mu.b"]
    b_mu[0] = 1.5                                   # cruise near full speed
    w_mu[_U_ASK_STOP, 0] = -8.0                     # halt on stop-family demands
    w_mu[_U_CLAIM, 0] = -8.0
    w_mu[_U_BEAR_POS, 1] = 2.0                      # steer toward the goal
    w_mu[_U_BEAR_NEG, 1] = -2.0
    w_mu[_U_ASK_ML, 1] = 2.5                        # veer to the demanded side
    w_mu[_U_WARN_R, 1] = 2.5
    w_mu[_U_ASK_MR, 1] = -2.5
    w_mu[_U_WARN_L, 1] = -2.5

    params["actor.logsig.b"][:] = -5.0
    return params


def save_demo_checkpoint(path: str, n_codes: int = 4, grid_size: int = 48) -> ModelSpec:
    spec = ModelSpec(n_codes=n_codes, grid_size=grid_size)
    model = HsacModel(spec)
    params = build_demo_params(spec)
    arrays = {f"param.{k}": v for k, v in params.items()}
    arrays.update({f"target.{k}": v.copy() for k, v in model.init_target(params).items()})
    arrays["alpha.log_alpha_d"] = np.array([math.log(0.1)])
    arrays["alpha.log_alpha_c"] = np.array([math.log(0.1)])
    arrays["meta.n_codes"] = np.int64(spec.n_codes)
    arrays["meta.grid_size"] = np.int64(spec.grid_size)
    arrays["meta.vector_dim"] = np.int64(spec.vector_dim)
    save_arrays(path, arrays)
    return spec
