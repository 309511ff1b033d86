"""Pydantic settings models for rwrc-lab configuration."""

from __future__ import annotations

import os
from typing import Any, Dict, Literal, Optional, Tuple, Type

import yaml
from pydantic import Field, field_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)


class YamlConfigSettingsSource(PydanticBaseSettingsSource):
    """Custom settings source that loads values from a YAML file.

    The YAML file path is determined by the CONFIG_PATH environment variable.
    Only the top-level ``settings:`` mapping is read when present, so the same
    file can also carry an experiment definition.
    """

    def get_field_value(
        self, field: Any, field_name: str
    ) -> Tuple[Any, str, bool]:
        """Get field value from YAML config."""
        yaml_config = self._load_yaml_config()
        field_value = yaml_config.get(field_name)
        return field_value, field_name, False

    def _load_yaml_config(self) -> Dict[str, Any]:
        """Load YAML configuration file."""
        config_path = os.environ.get("CONFIG_PATH")
        if not config_path:
            return {}

        try:
            with open(config_path) as f:
                data = yaml.safe_load(f)
        except (FileNotFoundError, yaml.YAMLError, PermissionError):
            # Errors will be handled by loader.py
            return {}
        if not isinstance(data, dict):
            return {}
        section = data.get("settings", data)
        return section if isinstance(section, dict) else {}

    def __call__(self) -> Dict[str, Any]:
        """Return the YAML config values."""
        return self._load_yaml_config()


class LabSettings(BaseSettings):
    """rwrc-lab runtime settings.

    Configuration is loaded in the following precedence (highest to lowest):
    1. Constructor arguments
    2. Environment variables (RWRC_ prefix)
    3. .env file
    4. YAML configuration file (via CONFIG_PATH)
    5. Default values
    """

    model_config = SettingsConfigDict(
        env_prefix="RWRC_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Logging settings
    log_level: str = Field(
        default="INFO",
        description="Logging level: DEBUG, INFO, WARNING, ERROR",
    )
    log_format: Literal["json", "text"] = Field(
        default="text",
        description="Log output format: json (batch runs) or text (interactive)",
    )

    # Output and execution
    output_dir: Optional[str] = Field(
        default=None,
        description="Default directory for result files when --out is not given",
    )
    threads: int = Field(
        default=1,
        ge=1,
        le=256,
        description="Worker threads for ensemble loops (results are reduced in input order)",
    )

    # Linear algebra
    eigen_tol: float = Field(
        default=1e-10,
        gt=0,
        description="Absolute residual tolerance for principal eigenpairs",
    )
    eigen_max_iter: int = Field(
        default=500,
        gt=0,
        description="Maximum outer iterations of inverse iteration",
    )
    dense_threshold: int = Field(
        default=200,
        ge=1,
        description="Boxes with at most this many sites use dense linear algebra",
    )

    # Monte Carlo
    walks_per_env: int = Field(
        default=64,
        ge=1,
        description="Default number of walks per sampled environment",
    )

    # Variational solver
    chi_restarts: int = Field(
        default=4,
        ge=2,
        description="Number of restarts for the p-energy minimiser (ones and p=2 start included)",
    )
    chi_max_iter: int = Field(
        default=4000,
        gt=0,
        description="Maximum gradient iterations per smoothing level",
    )
    smoothing_levels: int = Field(
        default=8,
        ge=1,
        le=30,
        description="Number of levels in the geometric smoothing schedule",
    )

    # Scaling diagnostics
    window_threshold: float = Field(
        default=0.1,
        gt=0,
        le=1,
        description="Pass threshold for the admissibility-window ratios",
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        """Customize settings sources to set precedence.

        Order (first = highest priority):
        1. init_settings (constructor arguments)
        2. env_settings (environment variables with RWRC_ prefix)
        3. dotenv_settings (.env file)
        4. yaml_settings (CONFIG_PATH YAML file)
        """
        return (
            init_settings,
            env_settings,
            dotenv_settings,
            YamlConfigSettingsSource(settings_cls),
        )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate and normalize log level."""
        valid_levels = {"DEBUG", "INFO", "WARNING", "WARN", "ERROR", "CRITICAL"}
        normalized = v.upper()
        if normalized == "WARN":
            normalized = "WARNING"
        if normalized not in valid_levels:
            raise ValueError(
                f"Invalid log level '{v}'. Must be one of: DEBUG, INFO, WARNING, ERROR"
            )
        return normalized

    @field_validator("output_dir", mode="before")
    @classmethod
    def parse_optional_dir(cls, v: Any) -> Any:
        """Convert empty strings to None for the optional output directory."""
        if v == "" or v is None:
            return None
        return v
