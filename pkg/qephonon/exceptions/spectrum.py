"""
Emission spectrum, ingestion and fitting exceptions
"""

from typing import Optional

from .base import (
    QEPhononError,
    QEPhononConfigurationError,
    QEPhononNumericalError,
    QEPhononValidationError,
)


class SpectrumError(QEPhononError):
    """Base exception for lineshape and spectrum-fit errors"""

    def __init__(
        self,
        message: str,
        source: Optional[str] = None,
        **kwargs
    ):
        kwargs.setdefault("error_code", "SPECTRUM_ERROR")
        super().__init__(message, **kwargs)
        if source:
            self.add_context("source", source)


class SpectrumFormatError(SpectrumError, QEPhononValidationError):
    """Spectrum file does not parse under the declared format"""

    def __init__(
        self,
        message: str,
        line_number: Optional[int] = None,
        **kwargs
    ):
        kwargs.setdefault("error_code", "SPECTRUM_FORMAT_ERROR")
        super().__init__(message, **kwargs)
        if line_number is not None:
            self.add_context("line_number", line_number)


class SpectrumDataError(SpectrumError, QEPhononValidationError):
    """Parsed spectrum violates a data invariant (NaN, duplicates, too few samples)"""

    def __init__(
        self,
        message: str,
        row: Optional[int] = None,
        **kwargs
    ):
        kwargs.setdefault("error_code", "SPECTRUM_DATA_ERROR")
        super().__init__(message, **kwargs)
        if row is not None:
            self.add_context("row", row)


class FitWindowError(SpectrumError, QEPhononConfigurationError):
    """Fit window is empty or outside the data range"""

    def __init__(self, message: str, **kwargs):
        kwargs.setdefault("error_code", "FIT_WINDOW_ERROR")
        super().__init__(message, setting_name="window_nm", **kwargs)


class TimeWindowError(SpectrumError, QEPhononNumericalError):
    """Correlation envelope has not decayed at the end of the time window"""

    def __init__(
        self,
        message: str,
        envelope: Optional[float] = None,
        window_ps: Optional[float] = None,
        **kwargs
    ):
        kwargs.setdefault("error_code", "TIME_WINDOW_ERROR")
        super().__init__(message, **kwargs)
        if envelope is not None:
            self.add_context("envelope", envelope)
        if window_ps is not None:
            self.add_context("window_ps", window_ps)


class NegativeSpectrumError(SpectrumError, QEPhononNumericalError):
    """Spectrum negativity beyond numerical noise"""

    def __init__(self, message: str, min_relative: Optional[float] = None, **kwargs):
        kwargs.setdefault("error_code", "NEGATIVE_SPECTRUM")
        super().__init__(message, **kwargs)
        if min_relative is not None:
            self.add_context("min_relative", min_relative)


class DegenerateFitError(SpectrumError, QEPhononNumericalError):
    """Jacobian of the lineshape model is singular at the solution"""

    def __init__(self, message: str, rank: Optional[int] = None, **kwargs):
        kwargs.setdefault("error_code", "DEGENERATE_FIT")
        super().__init__(message, **kwargs)
        if rank is not None:
            self.add_context("jacobian_rank", rank)
