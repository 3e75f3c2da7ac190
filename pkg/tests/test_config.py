"""
Tests for configuration loading, validation and overrides.
"""

import pytest
import yaml

from conftest import CONFIG_PATH
from utils.misc import (
    apply_overrides,
    get_config_value,
    load_config,
    update_config_value,
    validate_config,
)


def test_shipped_config_is_valid():
    config = load_config(CONFIG_PATH)
    assert validate_config(config)
    assert get_config_value(config, "pipeline.unroll") == 2
    assert get_config_value(config, "pipeline.emit") == "pipelined"
    assert get_config_value(config, "verify.unknown_trips") == [2, 12]


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / "absent.yaml"))


def test_config_path_from_environment(tmp_path, monkeypatch):
    path = tmp_path / "other.yaml"
    path.write_text("version: v9\n")
    monkeypatch.setenv("QLSP_CONFIG", str(path))
    assert load_config()["version"] == "v9"


def test_log_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("QLSP_LOG_DIR", str(tmp_path))
    config = load_config(CONFIG_PATH)
    assert config["directories"]["log_dir"] == str(tmp_path)


def test_malformed_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("pipeline: [unclosed\n")
    with pytest.raises(yaml.YAMLError):
        load_config(str(path))


def test_missing_section(config):
    del config["verify"]
    with pytest.raises(ValueError, match="section: verify"):
        validate_config(config)


def test_missing_key(config):
    del config["scheduler"]["max_ii"]
    with pytest.raises(ValueError, match="scheduler.max_ii"):
        validate_config(config)


@pytest.mark.parametrize(
    "key, value, message",
    [
        ("pipeline.unroll", 0, "unroll"),
        ("pipeline.emit", "fastest", "emit mode"),
        ("scheduler.max_ii", 0, "max_ii"),
    ],
)
def test_out_of_range_values(config, key, value, message):
    update_config_value(config, key, value)
    with pytest.raises(ValueError, match=message):
        validate_config(config)


def test_dotted_access():
    config = {"a": {"b": {"c": 3}}}
    assert get_config_value(config, "a.b.c") == 3
    assert get_config_value(config, "a.x.c", "fallback") == "fallback"
    assert get_config_value(config, "a.b.c.d", 7) == 7

    assert update_config_value(config, "a.y.z", 5)
    assert config["a"]["y"] == {"z": 5}


def test_overrides_skip_unset_flags(config):
    apply_overrides(config, {"pipeline.unroll": 4, "pipeline.emit": None, "verify.seed": 0})
    assert config["pipeline"]["unroll"] == 4
    assert config["pipeline"]["emit"] == "pipelined"
    assert config["verify"]["seed"] == 0
