"""
Driven-dynamics (tensor network, path sum, closed system) exceptions
"""

from typing import Optional

from .base import (
    QEPhononError,
    QEPhononConfigurationError,
    QEPhononNumericalError,
    QEPhononResourceError,
    QEPhononValidationError,
)


class DynamicsError(QEPhononError):
    """Base exception for propagation errors"""

    def __init__(
        self,
        message: str,
        step: Optional[int] = None,
        **kwargs
    ):
        kwargs.setdefault("error_code", "DYNAMICS_ERROR")
        super().__init__(message, **kwargs)
        if step is not None:
            self.add_context("step", step)


class HermiticityDriftError(DynamicsError, QEPhononNumericalError):
    """Reduced density matrix drifted away from Hermiticity"""

    def __init__(self, message: str, drift: Optional[float] = None, **kwargs):
        kwargs.setdefault("error_code", "HERMITICITY_DRIFT")
        super().__init__(message, **kwargs)
        if drift is not None:
            self.add_context("drift", drift)


class PathSumTooLargeError(DynamicsError, QEPhononResourceError):
    """Brute-force path sum requested for too many steps"""

    def __init__(
        self,
        message: str,
        n_steps: Optional[int] = None,
        limit: Optional[int] = None,
        **kwargs
    ):
        kwargs.setdefault("error_code", "PATH_SUM_TOO_LARGE")
        super().__init__(message, resource_type="memory", **kwargs)
        if n_steps is not None:
            self.add_context("n_steps", n_steps)
        if limit is not None:
            self.add_context("limit", limit)


class EngineConfigError(DynamicsError, QEPhononConfigurationError):
    """Process-tensor configuration is inconsistent"""

    def __init__(self, message: str, setting_name: Optional[str] = None, **kwargs):
        kwargs.setdefault("error_code", "ENGINE_CONFIG_ERROR")
        super().__init__(message, setting_name=setting_name, **kwargs)


class PulseError(DynamicsError, QEPhononValidationError):
    """Invalid pulse or pulse sequence"""

    def __init__(self, message: str, field_name: Optional[str] = None, **kwargs):
        kwargs.setdefault("error_code", "PULSE_ERROR")
        super().__init__(message, field_name=field_name, **kwargs)
