from .adam import Adam
from .checkpoint import CheckpointError, load_arrays, save_arrays
from .gradcheck import GradCheckReport, grad_check, network_loss
from .layers import (
    Clip,
    Conv2d,
    Dense,
    Flatten,
    MaxPool2,
    Relu,
    ShapeError,
    Softmax,
    Tanh,
)
from .network import Network

__all__ = [
    "Adam",
    "CheckpointError",
    "Clip",
    "Conv2d",
    "Dense",
    "Flatten",
    "GradCheckReport",
    "MaxPool2",
    "Network",
    "Relu",
    "ShapeError",
    "Softmax",
    "Tanh",
    "grad_check",
    "load_arrays",
    "network_loss",
    "save_arrays",
]
