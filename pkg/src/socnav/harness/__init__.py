from .config import RunConfig, load_config, save_config

__all__ = ["RunConfig", "load_config", "save_config"]
