"""
Phonon bath related exceptions
"""

from typing import Optional

from .base import (
    QEPhononError,
    QEPhononConfigurationError,
    QEPhononNumericalError,
    QEPhononValidationError,
)


class BathError(QEPhononError):
    """Base exception for spectral-density and bath-function errors"""

    def __init__(
        self,
        message: str,
        quantity: Optional[str] = None,
        **kwargs
    ):
        kwargs.setdefault("error_code", "BATH_ERROR")
        super().__init__(message, **kwargs)
        if quantity:
            self.add_context("quantity", quantity)


class UnsupportedDimensionalityError(BathError, QEPhononValidationError):
    """Quantity is not defined for the requested phonon dimensionality"""

    def __init__(
        self,
        message: str,
        z: Optional[int] = None,
        **kwargs
    ):
        kwargs.setdefault("error_code", "UNSUPPORTED_DIMENSIONALITY")
        super().__init__(message, field_name="z", field_value=z, **kwargs)


class NegativeFrequencyError(BathError, QEPhononValidationError):
    """Spectral density evaluated outside omega >= 0"""

    def __init__(self, message: str, omega: Optional[float] = None, **kwargs):
        kwargs.setdefault("error_code", "NEGATIVE_FREQUENCY")
        super().__init__(
            message,
            field_name="omega",
            field_value=omega,
            validation_rule="omega >= 0",
            **kwargs
        )


class QuadratureError(BathError, QEPhononNumericalError):
    """Adaptive quadrature did not reach the requested tolerance"""

    def __init__(
        self,
        message: str,
        estimated_error: Optional[float] = None,
        tolerance: Optional[float] = None,
        **kwargs
    ):
        kwargs.setdefault("error_code", "QUADRATURE_ERROR")
        super().__init__(message, **kwargs)
        if estimated_error is not None:
            self.add_context("estimated_error", estimated_error)
        if tolerance is not None:
            self.add_context("tolerance", tolerance)


class MaterialParameterError(BathError, QEPhononConfigurationError):
    """A material constant required by the requested quantity is missing"""

    def __init__(
        self,
        message: str,
        parameter: Optional[str] = None,
        **kwargs
    ):
        kwargs.setdefault("error_code", "MATERIAL_PARAMETER_MISSING")
        super().__init__(message, setting_name=parameter, **kwargs)
