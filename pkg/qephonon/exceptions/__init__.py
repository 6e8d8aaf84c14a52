"""
Custom exception hierarchy for qephonon
"""

from .base import (
    QEPhononError,
    QEPhononConfigurationError,
    QEPhononValidationError,
    QEPhononNumericalError,
    QEPhononResourceError,
)
from .bath import (
    BathError,
    UnsupportedDimensionalityError,
    NegativeFrequencyError,
    QuadratureError,
    MaterialParameterError,
)
from .spectrum import (
    SpectrumError,
    SpectrumFormatError,
    SpectrumDataError,
    FitWindowError,
    TimeWindowError,
    NegativeSpectrumError,
    DegenerateFitError,
)
from .dynamics import (
    DynamicsError,
    HermiticityDriftError,
    PathSumTooLargeError,
    EngineConfigError,
    PulseError,
)
from .coherence import CoherenceError, DecayRateError
from .run import RunConfigError, ConfigHashMismatchError

__all__ = [
    # Base exceptions
    "QEPhononError",
    "QEPhononConfigurationError",
    "QEPhononValidationError",
    "QEPhononNumericalError",
    "QEPhononResourceError",

    # Bath exceptions
    "BathError",
    "UnsupportedDimensionalityError",
    "NegativeFrequencyError",
    "QuadratureError",
    "MaterialParameterError",

    # Spectrum exceptions
    "SpectrumError",
    "SpectrumFormatError",
    "SpectrumDataError",
    "FitWindowError",
    "TimeWindowError",
    "NegativeSpectrumError",
    "DegenerateFitError",

    # Dynamics exceptions
    "DynamicsError",
    "HermiticityDriftError",
    "PathSumTooLargeError",
    "EngineConfigError",
    "PulseError",

    # Coherence exceptions
    "CoherenceError",
    "DecayRateError",

    # Run exceptions
    "RunConfigError",
    "ConfigHashMismatchError",
]
