"""Run configuration loading.

YAML files are read with ``yaml.safe_load`` and validated into
:class:`~cubicdyn.models.RunConfig`. CLI overrides are applied on top and
the result is re-validated, so the hash always reflects the effective run.
"""
from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Dict, Mapping

import yaml
from pydantic import ValidationError

from .errors import ConfigError
from .health import default_workers
from .models import RunConfig

WORKERS_ENV = "CUBICDYN_WORKERS"


def load_run_config(path: str | os.PathLike[str]) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}", path=str(path))
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {path}: {e}", path=str(path)) from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a mapping", path=str(path))
    return _validate(data, str(path))


def _validate(data: Mapping[str, Any], source: str) -> RunConfig:
    try:
        return RunConfig(**data)
    except ValidationError as e:
        raise ConfigError(f"invalid run config ({source}): {e}", source=source) from e


def dump_run_config(config: RunConfig) -> str:
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False)


def apply_overrides(config: RunConfig, overrides: Mapping[str, Any]) -> RunConfig:
    """New config with non-None ``overrides`` merged in."""
    data: Dict[str, Any] = config.model_dump(mode="json")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return _validate(data, "overrides")


def resolve_workers(config: RunConfig) -> int:
    if config.workers:
        return config.workers
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError as e:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from e
        if n < 1:
            raise ConfigError(f"{WORKERS_ENV} must be >= 1, got {n}")
        return n
    return default_workers()
