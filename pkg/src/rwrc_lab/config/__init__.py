"""Configuration management for rwrc-lab."""

from rwrc_lab.config.loader import ConfigurationError, get_config, load_config
from rwrc_lab.config.settings import LabSettings

__all__ = [
    "ConfigurationError",
    "LabSettings",
    "get_config",
    "load_config",
]
