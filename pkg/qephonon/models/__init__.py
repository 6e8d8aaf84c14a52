"""
Domain models for qephonon
"""

from .bath import (
    UNITS,
    UnitConventions,
    SpectralDensity,
    BathTemperature,
    MaterialParams,
)
from .spectrum import (
    FIT_PARAMETER_NAMES,
    LineshapeParams,
    SpectrumCurve,
    AreaRatio,
    SpectrumMetadata,
    MeasuredSpectrum,
    BaselineMode,
    WeightMode,
    FitDomain,
    FitConfig,
    FitSeries,
    FitResult,
    DerivedQuantities,
    FitOutcome,
    SpectrumOutcome,
)
from .dynamics import (
    SystemHamiltonian,
    ConstantHamiltonian,
    ProcessTensorConfig,
    InfluenceCoefficients,
    EngineReport,
    Trajectory,
    ConvergenceReport,
    ground_state,
    excited_state,
    exciton_population,
    validate_density_matrix,
)
from .excitation import (
    GaussianPulse,
    PulseSequence,
    PopulationReadout,
    ScanAxis,
    ArgmaxRecord,
    ScanResult,
    RabiCurve,
    EngineSettings,
    ScanTask,
    PointResult,
)
from .coherence import DecayRates, CoherenceCurves
from .run import RunStatus, RunSummary
from .run_config import (
    RUN_SCHEMA_VERSION,
    EmitterPreset,
    PRESETS,
    SWING_UP_LAYOUTS,
    SwingUpLayout,
    RunConfig,
    get_preset,
)

__all__ = [
    # Bath
    "UNITS",
    "UnitConventions",
    "SpectralDensity",
    "BathTemperature",
    "MaterialParams",

    # Spectra and fits
    "FIT_PARAMETER_NAMES",
    "LineshapeParams",
    "SpectrumCurve",
    "AreaRatio",
    "SpectrumMetadata",
    "MeasuredSpectrum",
    "BaselineMode",
    "WeightMode",
    "FitDomain",
    "FitConfig",
    "FitSeries",
    "FitResult",
    "DerivedQuantities",
    "FitOutcome",
    "SpectrumOutcome",

    # Dynamics
    "SystemHamiltonian",
    "ConstantHamiltonian",
    "ProcessTensorConfig",
    "InfluenceCoefficients",
    "EngineReport",
    "Trajectory",
    "ConvergenceReport",
    "ground_state",
    "excited_state",
    "exciton_population",
    "validate_density_matrix",

    # Excitation
    "GaussianPulse",
    "PulseSequence",
    "PopulationReadout",
    "ScanAxis",
    "ArgmaxRecord",
    "ScanResult",
    "RabiCurve",
    "EngineSettings",
    "ScanTask",
    "PointResult",

    # Coherence
    "DecayRates",
    "CoherenceCurves",

    # Runs
    "RunStatus",
    "RunSummary",

    # Run configuration
    "RUN_SCHEMA_VERSION",
    "EmitterPreset",
    "PRESETS",
    "SWING_UP_LAYOUTS",
    "SwingUpLayout",
    "RunConfig",
    "get_preset",
]
