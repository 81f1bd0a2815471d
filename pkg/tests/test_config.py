"""Tests for run configuration loading."""
from unittest.mock import patch

import pytest
import yaml

from cubicdyn.config import (
    WORKERS_ENV,
    apply_overrides,
    dump_run_config,
    load_run_config,
    resolve_workers,
)
from cubicdyn.errors import ConfigError

CONFIG = """
family: markoff
axes:
  - target: ABC
    start: -0.1
    stop: 0.1
    num: 3
probes: [fatou]
fatou_depth: 6
seed: 7
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(CONFIG, encoding="utf-8")
    return path


def test_load_valid_config(config_file):
    cfg = load_run_config(config_file)
    assert cfg.family == "markoff"
    assert cfg.grid_shape == (3, 1)
    assert cfg.probes == ["fatou"]
    assert cfg.seed == 7


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_run_config(tmp_path / "absent.yaml")


def test_invalid_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("axes: [unclosed", encoding="utf-8")
    with pytest.raises(ConfigError, match="invalid YAML"):
        load_run_config(path)


def test_non_mapping(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="mapping"):
        load_run_config(path)


def test_validation_error_becomes_config_error(tmp_path):
    path = tmp_path / "noaxes.yaml"
    path.write_text("family: markoff\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="invalid run config"):
        load_run_config(path)


def test_dump_reloads_to_same_hash(config_file, tmp_path):
    cfg = load_run_config(config_file)
    again = tmp_path / "again.yaml"
    again.write_text(dump_run_config(cfg), encoding="utf-8")
    assert load_run_config(again).config_hash() == cfg.config_hash()
    assert list(yaml.safe_load(dump_run_config(cfg)))[0] == "family"


def test_overrides_skip_none(config_file):
    cfg = load_run_config(config_file)
    out = apply_overrides(cfg, {"seed": 11, "precision": None})
    assert out.seed == 11
    assert out.precision == cfg.precision
    assert out.config_hash() != cfg.config_hash()


def test_invalid_override(config_file):
    cfg = load_run_config(config_file)
    with pytest.raises(ConfigError):
        apply_overrides(cfg, {"fatou_depth": -1})


def test_workers_from_config(config_file):
    cfg = apply_overrides(load_run_config(config_file), {"workers": 3})
    assert resolve_workers(cfg) == 3


def test_workers_from_env(config_file, monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "5")
    assert resolve_workers(load_run_config(config_file)) == 5


@pytest.mark.parametrize("value", ["many", "0"])
def test_workers_env_invalid(config_file, monkeypatch, value):
    monkeypatch.setenv(WORKERS_ENV, value)
    with pytest.raises(ConfigError):
        resolve_workers(load_run_config(config_file))


@patch('cubicdyn.config.default_workers')
def test_workers_default(mock_default, config_file, monkeypatch):
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    mock_default.return_value = 2
    assert resolve_workers(load_run_config(config_file)) == 2
