"""Run configuration: one YAML file drives every command.

Every key has a default matching the committed reference file
(configs/default.yaml); unknown keys are rejected so typos fail loudly.
The bridge endpoint may also come from the SOCNAV_BRIDGE_URL environment
variable, which overrides the file.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field

import yaml

from ..dialogue import BridgeConfig
from ..episode import EpisodeSettings
from ..hsac import HsacConfig, ModelSpec, TrainSettings
from ..observation import SensorParams
from ..pedestrian import IrvoParams
from ..rewards import RewardConfig
from ..scenes import builtin_scene, load_scene
from ..world import WorldParams

BRIDGE_ENV_VAR = "SOCNAV_BRIDGE_URL"


class ConfigError(ValueError):
    pass


@dataclass
class SessionConfig:
    port: int = 8765
    host: str = "127.0.0.1"
    tick_hz: float = 15.0
    auto_reset: bool = False


@dataclass
class RunConfig:
    scene: str = "hallway"              # builtin name or path to a scene YAML
    seed: int = 0
    eval_seed: int = 10_000
    language: bool = True               # off: pedestrian requests never reach the policy
    action_codes: int = 4               # 2 restricts the codes to {none, stop}
    total_steps: int = 30_000
    eval_interval: int = 2_000
    eval_episodes: int = 20             # during-training eval size
    final_eval_episodes: int = 500      # cmd_eval default
    bridge_endpoint: str | None = None
    bridge_timeout: float = 2.0
    world: WorldParams = field(default_factory=WorldParams)
    sensors: SensorParams = field(default_factory=SensorParams)
    irvo: IrvoParams = field(default_factory=IrvoParams)
    reward: RewardConfig = field(default_factory=RewardConfig)
    hsac: HsacConfig = field(default_factory=HsacConfig)
    session: SessionConfig = field(default_factory=SessionConfig)

    # -- derived views ---------------------------------------------------------

    def scenario(self):
        if self.scene in ("square", "hallway", "crosswalk"):
            return builtin_scene(self.scene)
        return load_scene(self.scene)

    def episode_settings(self, ped_source: str = "irvo") -> EpisodeSettings:
        return EpisodeSettings(
            scene=self.scenario(),
            world=self.world,
            sensors=self.sensors,
            irvo=self.irvo,
            reward=self.reward,
            language_on=self.language,
            ped_source=ped_source,
        )

    def model_spec(self) -> ModelSpec:
        if self.action_codes not in (2, 4):
            raise ConfigError("action_codes must be 2 or 4")
        return ModelSpec(n_codes=self.action_codes, grid_size=self.sensors.grid_size)

    def train_settings(self) -> TrainSettings:
        return TrainSettings(
            total_steps=self.total_steps,
            eval_interval=self.eval_interval,
            eval_episodes=self.eval_episodes,
            seed=self.seed,
            eval_seed=self.eval_seed,
        )

    def bridge(self) -> BridgeConfig | None:
        endpoint = os.environ.get(BRIDGE_ENV_VAR) or self.bridge_endpoint
        if not endpoint:
            return None
        return BridgeConfig(endpoint=endpoint, timeout=self.bridge_timeout)


_NESTED = {
    "world": WorldParams,
    "sensors": SensorParams,
    "irvo": IrvoParams,
    "reward": RewardConfig,
    "hsac": HsacConfig,
    "session": SessionConfig,
}


def _fill(cls, data: dict, path: str):
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown config key {path}{key}")
        kwargs[key] = value
    return cls(**kwargs)


def config_from_dict(data: dict) -> RunConfig:
    data = dict(data or {})
    kwargs = {}
    for name, cls in _NESTED.items():
        if name in data:
            section = data.pop(name)
            if not isinstance(section, dict):
                raise ConfigError(f"config section '{name}' must be a mapping")
            kwargs[name] = _fill(cls, section, f"{name}.")
    top_fields = {f.name for f in dataclasses.fields(RunConfig)}
    for key, value in data.items():
        if key not in top_fields:
            raise ConfigError(f"unknown config key {key}")
        kwargs[key] = value
    return RunConfig(**kwargs)


def config_to_dict(cfg: RunConfig) -> dict:
    out = {}
    for f in dataclasses.fields(RunConfig):
        value = getattr(cfg, f.name)
        out[f.name] = dataclasses.asdict(value) if dataclasses.is_dataclass(value) else value
    return out


def load_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    """Config file plus command-line overrides (None values are ignored)."""
    data = {}
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a mapping")
    cfg = config_from_dict(data)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown override {key}")
        setattr(cfg, key, value)
    return cfg


def save_config(cfg: RunConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(config_to_dict(cfg), fh, sort_keys=False)
