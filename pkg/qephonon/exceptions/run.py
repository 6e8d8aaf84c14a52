"""
Run configuration and artifact exceptions
"""

from pathlib import Path
from typing import Optional

from .base import QEPhononConfigurationError


class RunConfigError(QEPhononConfigurationError):
    """Run configuration violates the versioned schema"""

    def __init__(
        self,
        message: str,
        key_path: Optional[str] = None,
        **kwargs
    ):
        kwargs.setdefault("error_code", "SCHEMA_ERROR")
        super().__init__(message, setting_name=key_path, **kwargs)

    @property
    def key_path(self) -> Optional[str]:
        """Dotted pointer to the offending key"""
        return self.get_context("setting_name")


class ConfigHashMismatchError(QEPhononConfigurationError):
    """Output directory was produced by a different run configuration"""

    def __init__(
        self,
        message: str,
        expected: Optional[str] = None,
        found: Optional[str] = None,
        directory: Optional[Path] = None,
        **kwargs
    ):
        kwargs.setdefault("error_code", "CONFIG_HASH_MISMATCH")
        super().__init__(message, **kwargs)
        if expected:
            self.add_context("expected", expected)
        if found:
            self.add_context("found", found)
        if directory:
            self.add_context("directory", str(directory))
