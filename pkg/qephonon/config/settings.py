"""
Process-wide defaults, layered as

    command-line flags > QEPHONON_* environment / .env > ~/.qephonon/config.yaml > built-ins

Flags are applied by the run-file layer; this module resolves the rest.
"""

import logging
from functools import lru_cache
from typing import Optional

import psutil
from pydantic import Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _default_workers() -> int:
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


class Settings(BaseSettings):
    """Defaults every run falls back to; times in ps, temperatures in K"""

    output_base_dir: str = "./results"

    log_level: str = "INFO"
    log_file: str = "qephonon.log"
    log_max_bytes: int = Field(10 * 1024 * 1024, gt=0)
    log_backup_count: int = Field(5, ge=0)

    max_workers: int = Field(default_factory=_default_workers, ge=1, le=256)

    temperature_k: float = Field(4.0, ge=0.0)
    sound_speed_nm_per_ps: float = Field(4.494, gt=0.0)
    quadrature_abs_tol: float = Field(1e-10, gt=0.0, lt=1.0)

    engine_dt_ps: float = Field(0.05, gt=0.0)
    engine_memory_ps: float = Field(3.0, gt=0.0)
    engine_svd_tol: float = Field(1e-7, gt=0.0, le=1e-2)
    engine_max_bond: int = Field(128, ge=1)
    engine_memory_tolerance: float = Field(1e-2, gt=0.0, lt=1.0)

    # Lineshape transform
    spectrum_envelope_tol: float = Field(1e-8, gt=0.0, lt=1.0)
    spectrum_max_window_ps: float = Field(4000.0, gt=0.0)

    fit_multi_start: int = Field(5, ge=1, le=50)
    fit_seed: int = Field(20240101, ge=0)
    fit_max_nfev: int = Field(400, ge=10)

    model_config = SettingsConfigDict(
        env_prefix="QEPHONON_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        if v.upper() not in LOG_LEVELS:
            raise ValueError(f"log_level must be one of: {', '.join(LOG_LEVELS)}")
        return v.upper()

    @model_validator(mode="after")
    def memory_covers_a_step(self) -> "Settings":
        if self.engine_memory_ps < self.engine_dt_ps:
            raise ValueError(
                f"engine_memory_ps ({self.engine_memory_ps}) must be >= engine_dt_ps ({self.engine_dt_ps})"
            )
        return self

    @property
    def engine_memory_steps(self) -> int:
        """Memory length in steps implied by engine_memory_ps / engine_dt_ps"""
        return max(1, int(round(self.engine_memory_ps / self.engine_dt_ps)))

    def engine_settings(self, t_p: Optional[float] = None):
        """
        Picklable engine knobs for scans

        Short pulses (t_p below 3 ps) step with at most 0.02 ps.
        """
        from qephonon.models.excitation import EngineSettings

        dt = self.engine_dt_ps
        if t_p is not None and t_p < 3.0:
            dt = min(dt, 0.02)
        return EngineSettings(
            dt=dt,
            memory_ps=self.engine_memory_ps,
            svd_tol=self.engine_svd_tol,
            max_bond=self.engine_max_bond,
            memory_tolerance=self.engine_memory_tolerance,
        )


def _with_user_defaults(settings: Settings) -> Settings:
    """
    Fill fields not set from the environment with ~/.qephonon/config.yaml values

    A combination that fails validation is logged and the user file ignored.
    """
    from qephonon.config.user_config import get_user_config_manager

    try:
        stored = get_user_config_manager().get_all()
    except Exception as e:
        logger.warning(f"User config unavailable: {e}")
        return settings

    updates = {k: v for k, v in stored.items() if k in Settings.model_fields and k not in settings.model_fields_set}
    if not updates:
        return settings
    try:
        return Settings(**{**settings.model_dump(), **updates})
    except ValidationError as e:
        logger.warning(f"Ignoring user config, it conflicts with the environment: {e}")
        return settings


@lru_cache()
def get_settings() -> Settings:
    return _with_user_defaults(Settings())


def reload_settings() -> Settings:
    """Re-read environment and user config from disk"""
    from qephonon.config.user_config import reload_user_config
    reload_user_config()

    get_settings.cache_clear()
    return get_settings()
