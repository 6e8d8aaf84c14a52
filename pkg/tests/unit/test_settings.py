"""
Tests for settings layering and the pre-flight check.
"""

import pytest
from pydantic import ValidationError
from unittest.mock import patch

from qephonon.config.settings import Settings, get_settings, reload_settings
from qephonon.config.user_config import UserConfigManager
from qephonon.config.validation import validate_environment


@pytest.fixture
def user_config(tmp_path):
    manager = UserConfigManager(config_dir=tmp_path / "cfg")
    with patch("qephonon.config.user_config.get_user_config_manager", return_value=manager):
        get_settings.cache_clear()
        yield manager
    get_settings.cache_clear()


class TestSettings:

    def test_env_prefix(self, monkeypatch):
        monkeypatch.setenv("QEPHONON_ENGINE_DT_PS", "0.02")
        monkeypatch.setenv("QEPHONON_LOG_LEVEL", "debug")

        settings = Settings()

        assert settings.engine_dt_ps == pytest.approx(0.02)
        assert settings.log_level == "DEBUG"
        assert settings.engine_memory_steps == 150

    @pytest.mark.parametrize("field,value", [
        ("engine_svd_tol", 0.5),
        ("engine_dt_ps", 0.0),
        ("max_workers", 0),
        ("temperature_k", -1.0),
        ("log_level", "LOUD"),
    ])
    def test_rejects(self, field, value):
        with pytest.raises(ValidationError):
            Settings(**{field: value})

    def test_memory_must_cover_a_step(self):
        with pytest.raises(ValidationError, match="engine_memory_ps"):
            Settings(engine_dt_ps=0.5, engine_memory_ps=0.1)

    def test_short_pulses_refine_step(self):
        settings = Settings(engine_dt_ps=0.05)
        assert settings.engine_settings(1.0).dt == pytest.approx(0.02)
        assert settings.engine_settings(3.0).dt == pytest.approx(0.05)


class TestLayering:

    def test_user_value_applies(self, user_config):
        user_config.set("engine_max_bond", 64)
        assert reload_settings().engine_max_bond == 64

    def test_environment_beats_user_config(self, user_config, monkeypatch):
        user_config.set("engine_max_bond", 64)
        monkeypatch.setenv("QEPHONON_ENGINE_MAX_BOND", "32")
        assert get_settings().engine_max_bond == 32

    def test_conflicting_user_config_ignored(self, user_config, monkeypatch, caplog):
        monkeypatch.setenv("QEPHONON_ENGINE_DT_PS", "0.5")
        user_config.set("engine_memory_ps", "0.1")

        settings = get_settings()

        assert settings.engine_memory_ps == pytest.approx(3.0)
        assert "Ignoring user config" in caplog.text


class TestValidateEnvironment:

    def test_writable_locations(self, tmp_path):
        settings = Settings(output_base_dir=str(tmp_path / "out"), log_file=str(tmp_path / "logs" / "q.log"))

        valid, errors = validate_environment(settings)

        assert valid, errors
        assert (tmp_path / "out").is_dir()

    def test_output_blocked_by_file(self, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("x")
        settings = Settings(output_base_dir=str(blocker / "out"), log_file=str(tmp_path / "q.log"))

        valid, errors = validate_environment(settings)

        assert not valid
        assert errors[0].startswith("Output directory cannot be created")

    def test_user_values_checked(self, tmp_path):
        settings = Settings(output_base_dir=str(tmp_path), log_file=str(tmp_path / "q.log"))

        valid, errors = validate_environment(settings, {"engine_dt_ps": 1.0, "engine_memory_ps": 0.5})

        assert not valid
        assert any("engine_memory_ps" in e for e in errors)
