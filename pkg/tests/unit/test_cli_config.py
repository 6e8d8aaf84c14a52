"""
Tests for the `qephonon config` subcommands.
"""

import pytest
from unittest.mock import patch

from typer.testing import CliRunner

from qephonon.cli import app
from qephonon.config.settings import Settings
from qephonon.config.user_config import UserConfigManager


runner = CliRunner()


@pytest.fixture
def manager(tmp_path):
    """UserConfigManager backed by the temporary directory, injected into the CLI."""
    manager = UserConfigManager(config_dir=tmp_path)
    with patch("qephonon.cli.get_user_config_manager", return_value=manager):
        yield manager


class TestConfigGet:
    """Tests for 'qephonon config get'."""

    def test_get_all_shows_settings(self, manager):
        """Test that every key is listed with a hint about --verbose."""
        result = runner.invoke(app, ["config", "get"])

        assert result.exit_code == 0
        assert "output_base_dir" in result.stdout
        assert "engine_svd_tol" in result.stdout
        assert "Use --verbose" in result.stdout

    def test_get_all_marks_user_values(self, manager):
        """Test the '*' marker on user-configured keys."""
        manager.set("engine_max_bond", 64)
        result = runner.invoke(app, ["config", "get"])

        line = next(l for l in result.stdout.splitlines() if "engine_max_bond" in l)
        assert line.startswith("*")
        assert "64" in line

    def test_get_all_verbose_shows_ranges(self, manager):
        """Test that --verbose prints choices and ranges."""
        result = runner.invoke(app, ["config", "get", "--verbose"])

        assert result.exit_code == 0
        assert "DEBUG, INFO, WARNING, ERROR" in result.stdout
        assert "Range:" in result.stdout

    def test_get_specific_key(self, manager):
        """Test that a configured value is shown without the default marker."""
        manager.set("log_level", "DEBUG")
        result = runner.invoke(app, ["config", "get", "log_level"])

        assert result.exit_code == 0
        assert "log_level=DEBUG" in result.stdout
        assert "(default)" not in result.stdout

    def test_get_default_value(self, manager):
        """Test that an unset key falls back to its default."""
        result = runner.invoke(app, ["config", "get", "output_base_dir"])

        assert result.exit_code == 0
        assert "output_base_dir=./results" in result.stdout
        assert "(default)" in result.stdout

    def test_get_numeric_key_shows_range(self, manager):
        """Test the range line of a bounded key."""
        result = runner.invoke(app, ["config", "get", "max_workers"])

        assert "max_workers=4 (default)" in result.stdout
        assert "Range: 1 ~ 256" in result.stdout

    def test_get_unknown_key_error(self, manager):
        """Test that an unknown key lists the valid ones."""
        result = runner.invoke(app, ["config", "get", "unknown_key"])

        assert result.exit_code == 1
        assert "Error:" in result.output
        assert "unknown_key" in result.output
        assert "Available keys:" in result.output


class TestConfigSet:
    """Tests for 'qephonon config set'."""

    def test_set_valid_value(self, manager):
        """Test that a valid value is stored."""
        result = runner.invoke(app, ["config", "set", "log_level", "DEBUG"])

        assert result.exit_code == 0
        assert "Set log_level=DEBUG" in result.stdout
        assert manager.get("log_level") == "DEBUG"

    def test_set_engine_step(self, manager):
        """Test that numeric strings are converted."""
        result = runner.invoke(app, ["config", "set", "engine_dt_ps", "0.02"])

        assert result.exit_code == 0
        assert manager.get("engine_dt_ps") == pytest.approx(0.02)

    def test_set_invalid_choice(self, manager):
        """Test that a bad choice prints the valid values."""
        result = runner.invoke(app, ["config", "set", "log_level", "INVALID"])

        assert result.exit_code == 1
        assert "Error:" in result.output
        assert "Valid values:" in result.output

    def test_set_out_of_range(self, manager):
        """Test the bounds check."""
        result = runner.invoke(app, ["config", "set", "max_workers", "0"])

        assert result.exit_code == 1
        assert "must be >=" in result.output
        assert manager.get("max_workers") is None

    def test_set_unknown_key_error(self, manager):
        """Test that an unknown key is rejected."""
        result = runner.invoke(app, ["config", "set", "unknown_key", "value"])

        assert result.exit_code == 1
        assert "Error:" in result.output


class TestConfigReset:
    """Tests for 'qephonon config reset'."""

    def test_reset_specific_key(self, manager):
        """Test resetting one key."""
        manager.set("log_level", "DEBUG")
        result = runner.invoke(app, ["config", "reset", "log_level"])

        assert result.exit_code == 0
        assert "Reset log_level to default" in result.stdout
        assert manager.get("log_level") is None

    def test_reset_all_with_force(self, manager):
        """Test that --force skips the prompt."""
        manager.set("log_level", "DEBUG")
        manager.set("output_base_dir", "/custom")
        result = runner.invoke(app, ["config", "reset", "--force"])

        assert result.exit_code == 0
        assert "All configuration reset" in result.stdout
        assert manager.get_all() == {}

    def test_reset_all_cancelled(self, manager):
        """Test that declining the prompt keeps the values."""
        manager.set("log_level", "DEBUG")
        result = runner.invoke(app, ["config", "reset"], input="n\n")

        assert result.exit_code == 0
        assert "Cancelled" in result.stdout
        assert manager.get("log_level") == "DEBUG"

    def test_reset_unknown_key(self, manager):
        """Test that resetting an unknown key fails."""
        result = runner.invoke(app, ["config", "reset", "bogus"])

        assert result.exit_code == 1


class TestConfigListAndPath:
    """Tests for 'qephonon config list' and 'qephonon config path'."""

    def test_list_shows_all_keys(self):
        """Test the key catalogue."""
        result = runner.invoke(app, ["config", "list"])

        assert result.exit_code == 0
        assert "Available Configuration Keys:" in result.stdout
        assert "engine_memory_tolerance" in result.stdout
        assert "Description:" in result.stdout
        assert "Type: float" in result.stdout

    def test_path_shows_location(self, manager):
        """Test that the config location is printed."""
        result = runner.invoke(app, ["config", "path"])

        assert result.exit_code == 0
        assert "Config directory:" in result.stdout
        assert "File not created yet" in result.stdout


class TestConfigHelp:
    """Tests for config command help."""

    @pytest.mark.parametrize("args,text", [
        (["config", "--help"], "Manage user configuration"),
        (["config", "get", "--help"], "Show one user default"),
        (["config", "set", "--help"], "Store a user default"),
    ])
    def test_help(self, args, text):
        result = runner.invoke(app, args)

        assert result.exit_code == 0
        assert text in result.stdout


class TestUnitsAndCheck:
    """Tests for unit display and 'qephonon config check'."""

    def test_units_shown(self, manager):
        result = runner.invoke(app, ["config", "get", "engine_dt_ps"])

        assert "engine_dt_ps=0.05 (default)" in result.stdout
        assert "Trotter time step" in result.stdout
        assert "Range: 0.0001 ~ 1.0 ps" in result.stdout

    def test_check_reports_conflicting_user_values(self, manager, tmp_path):
        manager.set("engine_dt_ps", "1.0")
        manager.set("engine_memory_ps", "0.5")
        settings = Settings(output_base_dir=str(tmp_path / "out"), log_file=str(tmp_path / "q.log"))

        with patch("qephonon.cli.get_settings", return_value=settings):
            result = runner.invoke(app, ["config", "check"])

        assert result.exit_code == 2
        assert "engine_memory_ps" in result.output

    def test_check_ok(self, manager, tmp_path):
        settings = Settings(output_base_dir=str(tmp_path / "out"), log_file=str(tmp_path / "q.log"))

        with patch("qephonon.cli.get_settings", return_value=settings):
            result = runner.invoke(app, ["config", "check"])

        assert result.exit_code == 0
        assert "Configuration OK" in result.stdout
