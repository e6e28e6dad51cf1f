"""
irdpg/config.py

Run settings. Values come from, in increasing priority: built-in defaults,
IRDPG_* environment variables (a local .env file is loaded first), a flat
key-value config file, and command-line flags.
"""

from __future__ import annotations
import logging
import os
from typing import Any, Dict, List, Optional

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, field_validator

logger = logging.getLogger(__name__)

ENV_PREFIX = "IRDPG_"


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    example: str = "Ex1"
    n: int = 2000
    scale_rule: Optional[str] = None
    trunc_k: int = 3
    grid_size: int = 400
    seed: int = 0
    seeds: List[int] = [0, 1, 2, 3, 4]
    dims: List[int] = [1, 2, 3, 5, 10]
    k: int = 100
    resamples: int = 10
    out_dir: str = "results"
    threads: int = 1
    full_scale: bool = False
    log_level: str = "INFO"
    solver_tol: float = 1e-10
    solver_max_restarts: int = 1000
    edge_list: Optional[str] = None
    queries: int = 10
    scree_m: int = 20
    timeout: float = 3600.0

    @field_validator("seeds", "dims", mode="before")
    @classmethod
    def _split_list(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [int(part) for part in value.replace(",", " ").split()]
        return value

    @field_validator("n")
    @classmethod
    def _check_n(cls, value: int) -> int:
        if value < 3:
            raise ValueError(f"N must be at least 3, got {value}")
        return value

    @field_validator("threads", "trunc_k", "grid_size", "k", "resamples", "solver_max_restarts", "queries", "scree_m")
    @classmethod
    def _check_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"value must be positive, got {value}")
        return value

    @field_validator("log_level")
    @classmethod
    def _check_level(cls, value: str) -> str:
        level = value.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Unknown log level '{value}'")
        return level


def _environment_values() -> Dict[str, str]:
    load_dotenv()
    values = {}
    for name in Settings.model_fields:
        raw = os.getenv(ENV_PREFIX + name.upper())
        if raw is not None:
            values[name] = raw
    return values


def read_config_file(path: str) -> Dict[str, str]:
    """Parse a flat KEY=value file; keys are case-insensitive, unknown keys are rejected."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"Config file not found: {path}")
    values = {}
    for key, raw in dotenv_values(path).items():
        name = key.lower()
        if name.startswith(ENV_PREFIX.lower()):
            name = name[len(ENV_PREFIX):]
        if name not in Settings.model_fields:
            raise ValueError(f"Unknown config key '{key}' in {path}")
        if raw is not None and raw != "":
            values[name] = raw
    return values


def load_settings(config_path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> Settings:
    """
    Merge defaults, environment, config file and overrides into Settings.

    Args:
        config_path: optional flat key-value file.
        overrides: values from command-line flags; None entries are ignored.

    Raises:
        FileNotFoundError: config_path does not exist.
        ValueError: unknown key or invalid value.
    """
    merged: Dict[str, Any] = _environment_values()
    if config_path:
        merged.update(read_config_file(config_path))
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    settings = Settings(**merged)
    logger.debug("Settings: %s", settings.model_dump())
    return settings
