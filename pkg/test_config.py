#!/usr/bin/env python3
"""
Configuration loading, overrides and value validation
"""
import json
import os
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from utils.jcm.config_manager import CONFIG_ENV_VAR, ConfigManager
from utils.jcm.model import TruncationPolicy
from utils.jcm.oracle import OracleSettings

PACKAGED = Path(__file__).parent / "utils" / "jcm" / "jcm_config.json"


def write_config(directory: str, payload) -> str:
    path = Path(directory) / "jcm.json"
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding="utf-8")
    return str(path)


def test_packaged_defaults_load():
    config = ConfigManager(str(PACKAGED))
    assert config.get("truncation.epsilon") == 1e-12
    assert config.get("oracle.time_average_window_g") == 2000.0
    assert config.get("reference_defaults.zeta") == 0.7
    assert config.get("missing.key", "fallback") == "fallback"
    assert not config.is_debug_mode()


def test_typed_accessors():
    config = ConfigManager(str(PACKAGED))
    assert config.truncation_policy() == TruncationPolicy(epsilon=1e-12, max_terms=4096)
    settings = config.oracle_settings()
    assert isinstance(settings, OracleSettings)
    assert settings.method == "transformed" and settings.cutoff is None
    assert settings.time_average_samples == 200000


def test_update_creates_sections():
    config = ConfigManager(str(PACKAGED))
    config.update("oracle.max_step_product", 0.02)
    config.update("extra.nested.flag", True)
    assert config.oracle_settings().max_step_product == 0.02
    assert config.get("extra.nested.flag") is True


def test_environment_override():
    with tempfile.TemporaryDirectory() as tmp:
        payload = json.loads(PACKAGED.read_text(encoding="utf-8"))
        payload["truncation"]["epsilon"] = 1e-10
        path = write_config(tmp, payload)
        previous = os.environ.get(CONFIG_ENV_VAR)
        os.environ[CONFIG_ENV_VAR] = path
        try:
            config = ConfigManager()
            assert config.config_path == path
            assert config.truncation_policy().epsilon == 1e-10
        finally:
            if previous is None:
                del os.environ[CONFIG_ENV_VAR]
            else:
                os.environ[CONFIG_ENV_VAR] = previous


def test_missing_file_rejected():
    try:
        ConfigManager("/nonexistent/jcm.json")
    except FileNotFoundError:
        return
    raise AssertionError("FileNotFoundError not raised")


def test_invalid_files_rejected():
    with tempfile.TemporaryDirectory() as tmp:
        for payload in ("{not json", {"truncation": {}}):
            try:
                ConfigManager(write_config(tmp, payload))
            except ValueError:
                continue
            raise AssertionError(f"ValueError not raised for {payload!r}")


def test_value_validation():
    assert ConfigManager(str(PACKAGED)).test_config()
    with tempfile.TemporaryDirectory() as tmp:
        payload = json.loads(PACKAGED.read_text(encoding="utf-8"))
        payload["oracle"]["method"] = "euler"
        payload["truncation"]["epsilon"] = 2.0
        assert not ConfigManager(write_config(tmp, payload)).test_config()


if __name__ == "__main__":
    from script_checks import run_all_tests
    sys.exit(0 if run_all_tests("Configuration", dict(globals())) else 1)
