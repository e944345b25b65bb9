"""Minimal differentiable layers over numpy arrays.

Each layer is a stateless descriptor: parameters live in plain dicts keyed by
"<layer name>.<array>". ``forward`` returns the output plus a cache consumed by
``backward``, which produces parameter gradients and (optionally) the input
gradient. Layers also expose a decision ``signature`` (relu sign pattern,
pooling argmax, clip saturation mask) so finite-difference checks can detect
when a perturbation crossed a non-smooth point.

All shapes are batched: vectors are (B, n), images (B, C, H, W).
"""

from __future__ import annotations

import math
import warnings

import numpy as np

try:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        import numba

    @numba.njit(parallel=True, cache=True)
    def _im2col_jit(xp, cols, k, s, oh, ow):  # pragma: no cover - exercised via Conv2d
        b_n, _, _, c_n = xp.shape
        for b in numba.prange(b_n):
            for p in range(oh):
                for q in range(ow):
                    for i in range(k):
                        for j in range(k):
                            for c in range(c_n):
                                cols[b, p, q, i, j, c] = xp[b, p * s + i, q * s + j, c]

    @numba.njit(parallel=True, cache=True)
    def _col2im_jit(dcols, dxp, k, s, oh, ow):  # pragma: no cover
        b_n, _, _, c_n = dxp.shape
        for b in numba.prange(b_n):
            for p in range(oh):
                for q in range(ow):
                    for i in range(k):
                        for j in range(k):
                            for c in range(c_n):
                                dxp[b, p * s + i, q * s + j, c] += dcols[b, p, q, i, j, c]

    @numba.njit(parallel=True, cache=True)
    def _pool_fwd_jit(x, y, idx):  # pragma: no cover
        b_n, h2, w2, c_n = y.shape
        for b in numba.prange(b_n):
            for p in range(h2):
                for q in range(w2):
                    for c in range(c_n):
                        v0 = x[b, 2 * p, 2 * q, c]
                        v1 = x[b, 2 * p, 2 * q + 1, c]
                        v2 = x[b, 2 * p + 1, 2 * q, c]
                        v3 = x[b, 2 * p + 1, 2 * q + 1, c]
                        best, k = v0, 0
                        if v1 > best:
                            best, k = v1, 1
                        if v2 > best:
                            best, k = v2, 2
                        if v3 > best:
                            best, k = v3, 3
                        y[b, p, q, c] = best
                        idx[b, p, q, c] = k

    @numba.njit(parallel=True, cache=True)
    def _pool_bwd_jit(dy, idx, dx):  # pragma: no cover
        b_n, h2, w2, c_n = dy.shape
        for b in numba.prange(b_n):
            for p in range(h2):
                for q in range(w2):
                    for c in range(c_n):
                        k = idx[b, p, q, c]
                        dx[b, 2 * p + k // 2, 2 * q + k % 2, c] = dy[b, p, q, c]

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


class ShapeError(ValueError):
    pass


def he_uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    limit = math.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(np.float32)


def xavier_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(np.float32)


class Dense:
    def __init__(self, name: str, in_dim: int, out_dim: int, init: str = "he"):
        self.name = name
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.init = init

    def param_shapes(self):
        return {f"{self.name}.W": (self.in_dim, self.out_dim), f"{self.name}.b": (self.out_dim,)}

    def init_params(self, rng):
        shape = (self.in_dim, self.out_dim)
        if self.init == "he":
            w = he_uniform(rng, shape, self.in_dim)
        else:
            w = xavier_uniform(rng, shape, self.in_dim, self.out_dim)
        return {f"{self.name}.W": w, f"{self.name}.b": np.zeros(self.out_dim, dtype=np.float32)}

    def infer_shape(self, shape):
        if len(shape) != 1 or shape[0] != self.in_dim:
            raise ShapeError(f"{self.name}: expected ({self.in_dim},), got {shape}")
        return (self.out_dim,)

    def forward(self, x, params):
        y = x @ params[f"{self.name}.W"] + params[f"{self.name}.b"]
        return y, (x,)

    def backward(self, dy, cache, params, need_dx=True):
        (x,) = cache
        grads = {
            f"{self.name}.W": x.T @ dy,
            f"{self.name}.b": dy.sum(axis=0),
        }
        dx = dy @ params[f"{self.name}.W"].T if need_dx else None
        return dx, grads

    def signature(self, cache):
        return b""


class Conv2d:
    """2D convolution via im2col on channels-last (B, H, W, C) tensors.

    Channels-last keeps every im2col copy contiguous on CPU. The weight is
    stored as (kh, kw, in_ch, out_ch) so the column matrix multiplies it
    without any layout shuffle.
    """

    def __init__(self, name: str, in_ch: int, out_ch: int, kernel: int, stride: int = 1, pad: int = 0):
        self.name = name
        self.in_ch = in_ch
        self.out_ch = out_ch
        self.k = kernel
        self.stride = stride
        self.pad = pad

    def param_shapes(self):
        return {
            f"{self.name}.W": (self.k, self.k, self.in_ch, self.out_ch),
            f"{self.name}.b": (self.out_ch,),
        }

    def init_params(self, rng):
        fan_in = self.in_ch * self.k * self.k
        w = he_uniform(rng, (self.k, self.k, self.in_ch, self.out_ch), fan_in)
        return {f"{self.name}.W": w, f"{self.name}.b": np.zeros(self.out_ch, dtype=np.float32)}

    def out_hw(self, h, w):
        oh = (h + 2 * self.pad - self.k) // self.stride + 1
        ow = (w + 2 * self.pad - self.k) // self.stride + 1
        if oh <= 0 or ow <= 0:
            raise ShapeError(f"{self.name}: kernel does not fit input {h}x{w}")
        return oh, ow

    def infer_shape(self, shape):
        if len(shape) != 3 or shape[2] != self.in_ch:
            raise ShapeError(f"{self.name}: expected (H, W, C={self.in_ch}), got {shape}")
        oh, ow = self.out_hw(shape[0], shape[1])
        return (oh, ow, self.out_ch)

    def _im2col(self, xp, oh, ow):
        b, c = xp.shape[0], xp.shape[3]
        s = self.stride
        cols = np.empty((b, oh, ow, self.k, self.k, c), dtype=xp.dtype)
        if _HAVE_NUMBA:
            _im2col_jit(xp, cols, self.k, s, oh, ow)
        else:
            for i in range(self.k):
                for j in range(self.k):
                    cols[:, :, :, i, j, :] = xp[:, i : i + s * oh : s, j : j + s * ow : s, :]
        return cols.reshape(b * oh * ow, self.k * self.k * c)

    def forward(self, x, params):
        b, h, w, c = x.shape
        oh, ow = self.out_hw(h, w)
        p = self.pad
        xp = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0))) if p else x
        cols = self._im2col(xp, oh, ow)
        wmat = params[f"{self.name}.W"].reshape(-1, self.out_ch)
        y = cols @ wmat + params[f"{self.name}.b"]
        return y.reshape(b, oh, ow, self.out_ch), (cols, (b, h, w, oh, ow))

    def backward(self, dy, cache, params, need_dx=True):
        cols, (b, h, w, oh, ow) = cache
        dy2 = dy.reshape(b * oh * ow, self.out_ch)
        grads = {
            f"{self.name}.W": (cols.T @ dy2).reshape(self.k, self.k, self.in_ch, self.out_ch),
            f"{self.name}.b": dy2.sum(axis=0),
        }
        dx = None
        if need_dx:
            wmat = params[f"{self.name}.W"].reshape(-1, self.out_ch)
            dcols = (dy2 @ wmat.T).reshape(b, oh, ow, self.k, self.k, self.in_ch)
            p, s = self.pad, self.stride
            dxp = np.zeros((b, h + 2 * p, w + 2 * p, self.in_ch), dtype=dy.dtype)
            if _HAVE_NUMBA:
                _col2im_jit(dcols, dxp, self.k, s, oh, ow)
            else:
                for i in range(self.k):
                    for j in range(self.k):
                        dxp[:, i : i + s * oh : s, j : j + s * ow : s, :] += dcols[:, :, :, i, j, :]
            dx = dxp[:, p : p + h, p : p + w, :] if p else dxp
        return dx, grads

    def signature(self, cache):
        return b""


class MaxPool2:
    """2x2 max pooling with stride 2 on (B, H, W, C); ties take the first slot.

    Window order for the tie-break is (top-left, top-right, bottom-left,
    bottom-right); the backward pass routes the gradient to exactly that cell.
    """

    def __init__(self, name: str):
        self.name = name

    def param_shapes(self):
        return {}

    def init_params(self, rng):
        return {}

    def infer_shape(self, shape):
        if len(shape) != 3 or shape[0] % 2 or shape[1] % 2:
            raise ShapeError(f"{self.name}: needs (even H, even W, C), got {shape}")
        return (shape[0] // 2, shape[1] // 2, shape[2])

    def forward(self, x, params):
        b, h, w, c = x.shape
        y = np.empty((b, h // 2, w // 2, c), dtype=x.dtype)
        idx = np.empty((b, h // 2, w // 2, c), dtype=np.uint8)
        if _HAVE_NUMBA:
            _pool_fwd_jit(x, y, idx)
        else:
            win = x.reshape(b, h // 2, 2, w // 2, 2, c)
            m01 = np.maximum(win[:, :, 0, :, 0], win[:, :, 0, :, 1])
            m23 = np.maximum(win[:, :, 1, :, 0], win[:, :, 1, :, 1])
            np.maximum(m01, m23, out=y)
            idx[:] = 3
            idx[win[:, :, 1, :, 0] == y] = 2
            idx[win[:, :, 0, :, 1] == y] = 1
            idx[win[:, :, 0, :, 0] == y] = 0
        return y, (idx, (b, h, w))

    def backward(self, dy, cache, params, need_dx=True):
        idx, (b, h, w) = cache
        if not need_dx:
            return None, {}
        dx = np.zeros((b, h, w, dy.shape[-1]), dtype=dy.dtype)
        if _HAVE_NUMBA:
            _pool_bwd_jit(np.ascontiguousarray(dy), idx, dx)
        else:
            dwin = dx.reshape(b, h // 2, 2, w // 2, 2, dy.shape[-1])
            for slot, (i, j) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
                mask = idx == slot
                dwin[:, :, i, :, j][mask] = dy[mask]
        return dx, {}

    def signature(self, cache):
        idx, _ = cache
        return idx.tobytes()


class Relu:
    def __init__(self, name: str):
        self.name = name

    def param_shapes(self):
        return {}

    def init_params(self, rng):
        return {}

    def infer_shape(self, shape):
        return shape

    def forward(self, x, params):
        mask = x > 0
        return x * mask, (mask,)

    def backward(self, dy, cache, params, need_dx=True):
        (mask,) = cache
        return (dy * mask if need_dx else None), {}

    def signature(self, cache):
        (mask,) = cache
        return np.packbits(mask.reshape(-1)).tobytes()


class Tanh:
    def __init__(self, name: str):
        self.name = name

    def param_shapes(self):
        return {}

    def init_params(self, rng):
        return {}

    def infer_shape(self, shape):
        return shape

    def forward(self, x, params):
        y = np.tanh(x)
        return y, (y,)

    def backward(self, dy, cache, params, need_dx=True):
        (y,) = cache
        return (dy * (1.0 - y * y) if need_dx else None), {}

    def signature(self, cache):
        return b""


class Softmax:
    """Row-wise softmax over the last axis."""

    def __init__(self, name: str):
        self.name = name

    def param_shapes(self):
        return {}

    def init_params(self, rng):
        return {}

    def infer_shape(self, shape):
        return shape

    def forward(self, x, params):
        z = x - x.max(axis=-1, keepdims=True)
        e = np.exp(z)
        y = e / e.sum(axis=-1, keepdims=True)
        return y, (y,)

    def backward(self, dy, cache, params, need_dx=True):
        (y,) = cache
        if not need_dx:
            return None, {}
        dot = (dy * y).sum(axis=-1, keepdims=True)
        return y * (dy - dot), {}

    def signature(self, cache):
        return b""


class Clip:
    """Hard clamp with zero gradient outside [lo, hi]."""

    def __init__(self, name: str, lo: float, hi: float):
        self.name = name
        self.lo = lo
        self.hi = hi

    def param_shapes(self):
        return {}

    def init_params(self, rng):
        return {}

    def infer_shape(self, shape):
        return shape

    def forward(self, x, params):
        inside = (x > self.lo) & (x < self.hi)
        return np.clip(x, self.lo, self.hi), (inside,)

    def backward(self, dy, cache, params, need_dx=True):
        (inside,) = cache
        return (dy * inside if need_dx else None), {}

    def signature(self, cache):
        (inside,) = cache
        return np.packbits(inside.reshape(-1)).tobytes()


class Flatten:
    def __init__(self, name: str):
        self.name = name

    def param_shapes(self):
        return {}

    def init_params(self, rng):
        return {}

    def infer_shape(self, shape):
        n = 1
        for s in shape:
            n *= s
        return (n,)

    def forward(self, x, params):
        return x.reshape(x.shape[0], -1), (x.shape,)

    def backward(self, dy, cache, params, need_dx=True):
        (shape,) = cache
        return (dy.reshape(shape) if need_dx else None), {}

    def signature(self, cache):
        return b""
