from .model import HsacModel, ModelSpec
from .policy import (
    HybridAction,
    Policy,
    TrainingDivergence,
    action_codes,
    log_prob_continuous,
    log_softmax,
    normalized_from_command,
    sample_action,
    softmax,
    squash,
)
from .replay import ReplayBuffer, pack_observation, unpack_grids
from .trainer import HsacConfig, Trainer, load_policy_params
from .train_loop import TrainingRun, TrainSettings

__all__ = [
    "HsacConfig",
    "HsacModel",
    "HybridAction",
    "ModelSpec",
    "Policy",
    "ReplayBuffer",
    "Trainer",
    "TrainingDivergence",
    "TrainingRun",
    "TrainSettings",
    "action_codes",
    "load_policy_params",
    "log_prob_continuous",
    "log_softmax",
    "normalized_from_command",
    "pack_observation",
    "sample_action",
    "softmax",
    "squash",
    "unpack_grids",
]
