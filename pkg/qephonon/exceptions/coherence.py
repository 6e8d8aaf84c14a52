"""
Dephasing and indistinguishability exceptions
"""

from typing import Optional

from .base import QEPhononError, QEPhononValidationError


class CoherenceError(QEPhononError):
    """Base exception for coherence calculations"""

    def __init__(self, message: str, **kwargs):
        kwargs.setdefault("error_code", "COHERENCE_ERROR")
        super().__init__(message, **kwargs)


class DecayRateError(CoherenceError, QEPhononValidationError):
    """Decay rate outside its domain (Gamma = 0, negative rates)"""

    def __init__(
        self,
        message: str,
        rate_name: Optional[str] = None,
        rate_value: Optional[float] = None,
        **kwargs
    ):
        kwargs.setdefault("error_code", "DECAY_RATE_ERROR")
        super().__init__(
            message, field_name=rate_name, field_value=rate_value, **kwargs
        )
