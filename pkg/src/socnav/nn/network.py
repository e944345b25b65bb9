"""Layer chains with shape validation, taped forward, and exact backward."""

from __future__ import annotations

import numpy as np

from .layers import ShapeError


class Network:
    """An ordered chain of layers acting on a single input tensor.

    ``input_shape`` is the per-sample shape (no batch axis). Validation runs at
    construction: every intermediate shape is computed and mismatches raise
    immediately rather than at runtime.
    """

    def __init__(self, layers: list, input_shape: tuple[int, ...]):
        self.layers = layers
        self.input_shape = tuple(input_shape)
        self.shapes = [self.input_shape]
        shape = self.input_shape
        names = set()
        for layer in layers:
            if layer.name in names:
                raise ShapeError(f"duplicate layer name {layer.name}")
            names.add(layer.name)
            shape = layer.infer_shape(shape)
            self.shapes.append(shape)
        self.output_shape = shape

    def param_shapes(self) -> dict:
        shapes = {}
        for layer in self.layers:
            shapes.update(layer.param_shapes())
        return shapes

    def init_params(self, rng: np.random.Generator) -> dict:
        params = {}
        for layer in self.layers:
            params.update(layer.init_params(rng))
        return params

    def forward(self, x: np.ndarray, params: dict, want_tape: bool = True):
        """Run the chain; returns (output, tape). tape is None when not requested."""
        if tuple(x.shape[1:]) != self.input_shape:
            raise ShapeError(f"input shape {x.shape[1:]} != expected {self.input_shape}")
        tape = [] if want_tape else None
        for layer in self.layers:
            x, cache = layer.forward(x, params)
            if want_tape:
                tape.append(cache)
        return x, tape

    def backward(self, tape: list, dy: np.ndarray, params: dict, need_dx: bool = False):
        """Gradients of a scalar loss given d(loss)/d(output); returns (grads, dx)."""
        if tape is None or len(tape) != len(self.layers):
            raise ShapeError("tape does not match this network")
        grads: dict = {}
        dx = dy
        for i in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[i]
            want_dx = need_dx or i > 0
            dx, layer_grads = layer.backward(dx, tape[i], params, need_dx=want_dx)
            grads.update(layer_grads)
        return grads, (dx if need_dx else None)

    def signature(self, tape: list) -> bytes:
        """Concatenated decision patterns (relu signs, pool argmax, clip masks)."""
        return b"".join(layer.signature(cache) for layer, cache in zip(self.layers, tape))
