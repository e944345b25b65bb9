"""Central finite-difference verification of analytic gradients.

The loss callable must return ``(loss, grads, signature)`` where signature is
the network's decision pattern (relu signs, pool argmax, clip masks). A
coordinate whose +/- h probes land on different decision patterns sits on a
non-smooth point of the piecewise-smooth loss; the finite-difference quotient
is meaningless there, so the coordinate is skipped and counted. Checks should
run with float64 parameters; truncation error of the central quotient is then
~h^2 and the 1e-4 default tolerance is comfortably achievable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class GradCheckReport:
    max_rel_error: float
    checked: int
    skipped_nonsmooth: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.checked > 0 and self.max_rel_error <= self.tolerance


def grad_check(
    loss_and_grad,
    params: dict,
    tolerance: float = 1e-4,
    h: float = 1e-4,
    rng: np.random.Generator | None = None,
    coords_per_param: int = 8,
) -> GradCheckReport:
    """Compare analytic gradients against central finite differences.

    Every parameter array is probed at ``coords_per_param`` random coordinates
    (all coordinates for small arrays). Relative error uses the customary
    max(1, |a|, |fd|) normalizer.
    """
    rng = rng or np.random.default_rng(0)
    params = {k: v.astype(np.float64).copy() for k, v in params.items()}
    _, grads, sig0 = loss_and_grad(params)

    max_err = 0.0
    checked = 0
    skipped = 0
    for name, arr in params.items():
        flat = arr.reshape(-1)
        n = flat.size
        if n <= coords_per_param:
            coords = np.arange(n)
        else:
            coords = rng.choice(n, size=coords_per_param, replace=False)
        g_flat = np.asarray(grads[name], dtype=np.float64).reshape(-1)
        for c in coords:
            orig = flat[c]
            flat[c] = orig + h
            lp, _, sp = loss_and_grad(params)
            flat[c] = orig - h
            lm, _, sm = loss_and_grad(params)
            flat[c] = orig
            if sp != sig0 or sm != sig0:
                skipped += 1
                continue
            fd = (lp - lm) / (2.0 * h)
            a = g_flat[c]
            err = abs(a - fd) / max(1.0, abs(a), abs(fd))
            max_err = max(max_err, err)
            checked += 1
    return GradCheckReport(max_rel_error=max_err, checked=checked,
                           skipped_nonsmooth=skipped, tolerance=tolerance)


def network_loss(net, x: np.ndarray, weight: np.ndarray | None = None):
    """Weighted-sum-of-outputs loss closure over a Network, for grad_check."""

    def fn(params):
        y, tape = net.forward(x.astype(np.float64), params)
        w = np.ones_like(y) if weight is None else weight
        loss = float((y * w).sum())
        grads, _ = net.backward(tape, w.astype(np.float64), params)
        return loss, grads, net.signature(tape)

    return fn
