"""
Persistent user defaults in ~/.qephonon/config.yaml

Backs the `qephonon config get/set/check/reset` commands. Values stored here
sit below environment variables and command-line flags.
"""

import logging
import os
from pathlib import Path
from typing import Any, Optional, Sequence

import yaml

logger = logging.getLogger(__name__)

CONFIG_DIR_ENV = "QEPHONON_CONFIG_DIR"


def _bounded(
    description: str,
    default: Any,
    low: Optional[float] = None,
    high: Optional[float] = None,
    unit: Optional[str] = None,
) -> dict[str, Any]:
    info: dict[str, Any] = {"description": description, "default": default, "type": type(default)}
    if low is not None:
        info["min"] = low
    if high is not None:
        info["max"] = high
    if unit:
        info["unit"] = unit
    return info


def _choice(description: str, default: str, choices: Sequence[str]) -> dict[str, Any]:
    return {"description": description, "default": default, "type": str, "choices": list(choices)}


def _text(description: str, default: str) -> dict[str, Any]:
    return {"description": description, "default": default, "type": str}


# Keys settable through `qephonon config set`; names match Settings fields
CONFIGURABLE_KEYS: dict[str, dict[str, Any]] = {
    "output_base_dir": _text("Default output directory for run artifacts", "./results"),
    "log_level": _choice("Logging level", "INFO", ["DEBUG", "INFO", "WARNING", "ERROR"]),
    "max_workers": _bounded("Worker processes for scans and batch fits", 4, 1, 256),
    "temperature_k": _bounded("Bath temperature", 4.0, 0.0, 400.0, unit="K"),
    "sound_speed_nm_per_ps": _bounded("Speed of sound used for confinement radii", 4.494, 0.1, 20.0, unit="nm/ps"),
    "engine_dt_ps": _bounded("Trotter time step", 0.05, 1e-4, 1.0, unit="ps"),
    "engine_memory_ps": _bounded("Bath memory window", 3.0, 0.01, 50.0, unit="ps"),
    "engine_svd_tol": _bounded("Relative singular-value truncation threshold", 1e-7, 1e-14, 1e-2),
    "engine_max_bond": _bounded("Bond-dimension cap of the tensor network", 128, 1, 4096),
    "engine_memory_tolerance": _bounded("Allowed |C(K dt)|/C(0) before a memory-coverage warning", 1e-2, 1e-12, 0.5),
    "fit_multi_start": _bounded("Number of perturbed initial guesses per fit", 5, 1, 50),
    "fit_seed": _bounded("Seed for multi-start perturbations", 20240101, 0),
}


def _require_known(key: str) -> dict[str, Any]:
    try:
        return CONFIGURABLE_KEYS[key]
    except KeyError:
        raise KeyError(f"Unknown configuration key: {key}") from None


def coerce_value(key: str, value: Any) -> Any:
    """
    Convert a raw value (usually a CLI string) to the key's type and check it

    Raises:
        KeyError: Unknown key
        ValueError: Wrong type, unknown choice or out of range
    """
    info = _require_known(key)
    kind = info["type"]

    if isinstance(value, bool) and kind is not bool:
        raise ValueError(f"{key} expects {kind.__name__}, got a boolean")
    try:
        converted = kind(value)
    except (TypeError, ValueError) as e:
        raise ValueError(f"Cannot convert '{value}' to {kind.__name__}: {e}") from e

    if "choices" in info:
        by_lower = {c.lower(): c for c in info["choices"]}
        if converted.lower() not in by_lower:
            raise ValueError(
                f"Invalid value '{value}' for {key}. Must be one of: {', '.join(info['choices'])}"
            )
        return by_lower[converted.lower()]

    if kind is float and converted != converted:
        raise ValueError(f"{key} must be a number, got nan")
    low, high = info.get("min"), info.get("max")
    if low is not None and converted < low:
        raise ValueError(f"Value {converted} for {key} must be >= {low}")
    if high is not None and converted > high:
        raise ValueError(f"Value {converted} for {key} must be <= {high}")
    return converted


class UserConfigManager:
    """
    Reads and writes the user defaults file

    Unknown or invalid entries found on disk are dropped with a warning, so a
    hand-edited file never breaks a run.
    """

    DEFAULT_CONFIG_DIR = Path.home() / ".qephonon"
    DEFAULT_CONFIG_FILE = "config.yaml"

    def __init__(self, config_dir: Optional[Path] = None):
        env_dir = os.environ.get(CONFIG_DIR_ENV)
        self.config_dir = Path(config_dir or env_dir or self.DEFAULT_CONFIG_DIR)
        self.config_path = self.config_dir / self.DEFAULT_CONFIG_FILE
        self._config: dict[str, Any] = self._load()

    def _load(self) -> dict[str, Any]:
        if not self.config_path.exists():
            return {}
        try:
            raw = yaml.safe_load(self.config_path.read_text(encoding="utf-8"))
        except (yaml.YAMLError, OSError) as e:
            logger.warning(f"Ignoring unreadable user config {self.config_path}: {e}")
            return {}
        if not isinstance(raw, dict):
            return {}

        loaded = {}
        for key, value in raw.items():
            try:
                loaded[key] = coerce_value(key, value)
            except (KeyError, ValueError) as e:
                logger.warning(f"Dropping user config entry {key}: {e}")
        return loaded

    def _save(self) -> None:
        self.config_dir.mkdir(parents=True, exist_ok=True)
        staging = self.config_path.with_suffix(".yaml.tmp")
        staging.write_text(
            yaml.safe_dump(self._config, default_flow_style=False, sort_keys=True),
            encoding="utf-8",
        )
        staging.replace(self.config_path)

    def get(self, key: str) -> Any:
        """Stored value, None when the default applies"""
        _require_known(key)
        return self._config.get(key)

    def get_all(self) -> dict[str, Any]:
        return dict(self._config)

    def set(self, key: str, value: Any) -> None:
        self._config[key] = coerce_value(key, value)
        self._save()

    def reset(self, key: Optional[str] = None) -> None:
        """Forget one key, or every key when ``key`` is None"""
        if key is None:
            self._config.clear()
            self._save()
            return
        _require_known(key)
        if self._config.pop(key, None) is not None:
            self._save()

    @staticmethod
    def list_keys() -> dict[str, dict[str, Any]]:
        return dict(CONFIGURABLE_KEYS)

    def get_effective_value(self, key: str) -> Any:
        info = _require_known(key)
        value = self._config.get(key)
        return info["default"] if value is None else value


_user_config_manager: Optional[UserConfigManager] = None


def get_user_config_manager() -> UserConfigManager:
    global _user_config_manager
    if _user_config_manager is None:
        _user_config_manager = UserConfigManager()
    return _user_config_manager


def reload_user_config() -> UserConfigManager:
    """Drop the cached manager and read the file again"""
    global _user_config_manager
    _user_config_manager = UserConfigManager()
    return _user_config_manager
