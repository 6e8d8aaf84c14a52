"""
Emission spectrum and fitting domain models
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from ..exceptions import QEPhononValidationError, SpectrumDataError
from .bath import BathTemperature, SpectralDensity


FIT_PARAMETER_NAMES: Tuple[str, ...] = ("omega_X_tilde", "A", "W", "alpha", "omega_c")


@dataclass(frozen=True)
class LineshapeParams:
    """Parameters of the polaron lineshape model"""

    omega_X_tilde: float
    A: float
    W: float
    sd: SpectralDensity
    T: BathTemperature

    def __post_init__(self):
        if not math.isfinite(self.W) or self.W <= 0:
            raise QEPhononValidationError(
                "W must be > 0", field_name="W", field_value=self.W, validation_rule="W > 0"
            )
        if not math.isfinite(self.A) or self.A <= 0:
            raise QEPhononValidationError(
                "A must be > 0", field_name="A", field_value=self.A, validation_rule="A > 0"
            )
        if not math.isfinite(self.omega_X_tilde):
            raise QEPhononValidationError(
                "omega_X_tilde must be finite", field_name="omega_X_tilde", field_value=self.omega_X_tilde
            )

    def as_vector(self) -> np.ndarray:
        return np.array([self.omega_X_tilde, self.A, self.W, self.sd.alpha, self.sd.omega_c])

    @classmethod
    def from_vector(cls, x, z: int, T: BathTemperature) -> "LineshapeParams":
        return cls(
            omega_X_tilde=float(x[0]),
            A=float(x[1]),
            W=float(x[2]),
            sd=SpectralDensity(alpha=float(x[3]), omega_c=float(x[4]), z=z),
            T=T,
        )


@dataclass
class SpectrumCurve:
    """Intensity on a strictly increasing angular-frequency grid"""

    omega_grid: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.omega_grid = np.asarray(self.omega_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.omega_grid.shape != self.values.shape:
            raise QEPhononValidationError(
                "grid and values must have the same shape",
                field_name="values", field_value=self.values.shape,
            )
        if self.omega_grid.size > 1 and np.any(np.diff(self.omega_grid) <= 0):
            raise QEPhononValidationError(
                "omega grid must be strictly increasing", field_name="omega_grid"
            )

    @property
    def area(self) -> float:
        return float(trapezoid(self.values, self.omega_grid))

    @property
    def peak_omega(self) -> float:
        return float(self.omega_grid[np.argmax(self.values)])

    def same_grid(self, other: "SpectrumCurve") -> bool:
        return self.omega_grid.shape == other.omega_grid.shape and np.array_equal(
            self.omega_grid, other.omega_grid
        )


@dataclass(frozen=True)
class AreaRatio:
    """ZPL/PSB area ratio and PSB fraction; ratio is inf when the PSB area vanishes"""

    zpl_area: float
    psb_area: float

    @property
    def ratio(self) -> float:
        if self.psb_area <= 0:
            return math.inf
        return self.zpl_area / self.psb_area

    @property
    def psb_fraction(self) -> float:
        total = self.zpl_area + self.psb_area
        if self.psb_area <= 0 or total <= 0:
            return 0.0
        return self.psb_area / total

    def to_dict(self) -> dict:
        return {
            "zpl_area": self.zpl_area,
            "psb_area": self.psb_area,
            "ratio": None if math.isinf(self.ratio) else self.ratio,
            "psb_fraction": self.psb_fraction,
        }


@dataclass
class SpectrumMetadata:
    """Acquisition metadata of a measured spectrum"""

    temperature_k: Optional[float] = None
    integration_time_s: Optional[float] = None
    emitter_label: str = ""
    source: Optional[str] = None


@dataclass
class MeasuredSpectrum:
    """Wavelength/counts pairs, sorted by ascending wavelength"""

    wavelengths_nm: np.ndarray
    counts: np.ndarray
    metadata: SpectrumMetadata = field(default_factory=SpectrumMetadata)

    def __post_init__(self):
        self.wavelengths_nm = np.asarray(self.wavelengths_nm, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.wavelengths_nm.shape != self.counts.shape or self.wavelengths_nm.ndim != 1:
            raise SpectrumDataError("wavelengths and counts must be 1-D arrays of equal length")
        bad = np.flatnonzero(~np.isfinite(self.counts))
        if bad.size:
            raise SpectrumDataError(
                f"non-finite count at row {int(bad[0])}", row=int(bad[0])
            )
        if self.wavelengths_nm.size > 1 and np.any(np.diff(self.wavelengths_nm) <= 0):
            raise SpectrumDataError("wavelengths must be strictly increasing")

    def __len__(self) -> int:
        return int(self.wavelengths_nm.size)

    def scaled(self, factor: float) -> "MeasuredSpectrum":
        return MeasuredSpectrum(self.wavelengths_nm.copy(), self.counts * factor, self.metadata)


class BaselineMode(str, Enum):
    NONE = "none"
    CONSTANT = "constant"
    LINEAR = "linear"


class WeightMode(str, Enum):
    UNIFORM = "uniform"
    POISSON = "poisson"


class FitDomain(str, Enum):
    """Frequency converts counts to a per-unit-frequency density; wavelength keeps raw counts"""

    FREQUENCY = "frequency"
    WAVELENGTH = "wavelength"


@dataclass
class FitConfig:
    """Settings of one lineshape fit"""

    z: int = 2
    temperature_k: float = 4.0
    window_nm: Optional[Tuple[float, float]] = None
    baseline: BaselineMode = BaselineMode.CONSTANT
    baseline_value: Optional[float] = None
    weights: WeightMode = WeightMode.UNIFORM
    domain: FitDomain = FitDomain.FREQUENCY
    initial_guess: Dict[str, float] = field(default_factory=dict)
    ftol: float = 1e-10
    xtol: float = 1e-10
    gtol: float = 1e-10
    max_nfev: int = 400
    multi_start: int = 5
    seed: int = 20240101
    min_samples: int = 50

    def __post_init__(self):
        self.baseline = BaselineMode(self.baseline)
        self.weights = WeightMode(self.weights)
        self.domain = FitDomain(self.domain)
        if self.z not in (2, 3):
            raise QEPhononValidationError("z must be 2 or 3", field_name="z", field_value=self.z)
        for name in ("ftol", "xtol", "gtol"):
            if getattr(self, name) <= 0:
                raise QEPhononValidationError(
                    f"{name} must be > 0", field_name=name, field_value=getattr(self, name)
                )
        if self.multi_start < 1:
            raise QEPhononValidationError(
                "multi_start must be >= 1", field_name="multi_start", field_value=self.multi_start
            )
        unknown = set(self.initial_guess) - set(FIT_PARAMETER_NAMES)
        if unknown:
            raise QEPhononValidationError(
                f"unknown initial-guess keys: {sorted(unknown)}", field_name="initial_guess"
            )

    @property
    def temperature(self) -> BathTemperature:
        return BathTemperature(self.temperature_k)


@dataclass
class FitSeries:
    """Model-ready series: ascending angular frequency, intensity and residual weights"""

    omega: np.ndarray
    intensity: np.ndarray
    weights: np.ndarray
    baseline: np.ndarray
    label: str = ""

    def __len__(self) -> int:
        return int(self.omega.size)


@dataclass
class FitResult:
    """
    Fitted lineshape parameters with one-sigma estimates and diagnostics

    Derived quantities (S, R, B, area ratios) are recomputed from the
    parameters by ``report_derived`` and never stored here.
    """

    values: Dict[str, float]
    sigmas: Dict[str, float]
    z: int
    temperature_k: float
    residual_norm: float
    converged: bool
    message: str
    nfev: int
    at_bounds: List[str] = field(default_factory=list)
    unidentifiable: List[str] = field(default_factory=list)
    seed: Optional[int] = None
    starts: List[List[float]] = field(default_factory=list)
    # 0.5 |r|^2 of each accepted iterate of the winning start, normalized units
    residual_trace: List[float] = field(default_factory=list)
    label: str = ""

    @property
    def temperature(self) -> BathTemperature:
        return BathTemperature(self.temperature_k)

    @property
    def spectral_density(self) -> SpectralDensity:
        return SpectralDensity(self.values["alpha"], self.values["omega_c"], self.z)

    @property
    def lineshape_params(self) -> LineshapeParams:
        return LineshapeParams(
            omega_X_tilde=self.values["omega_X_tilde"],
            A=self.values["A"],
            W=self.values["W"],
            sd=self.spectral_density,
            T=self.temperature,
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "label": self.label,
            "z": self.z,
            "temperature_k": self.temperature_k,
            "values": self.values,
            "sigmas": {k: (None if not math.isfinite(v) else v) for k, v in self.sigmas.items()},
            "residual_norm": self.residual_norm,
            "converged": self.converged,
            "message": self.message,
            "nfev": self.nfev,
            "at_bounds": self.at_bounds,
            "unidentifiable": self.unidentifiable,
            "seed": self.seed,
            "starts": self.starts,
        }


@dataclass
class DerivedQuantities:
    """S, R, B and ZPL/PSB areas of a fitted emitter"""

    huang_rhys: float
    radius_nm: float
    polaron_shift: float
    franck_condon: Optional[float] = None
    areas: Optional[AreaRatio] = None

    def to_dict(self) -> dict:
        return {
            "S": self.huang_rhys,
            "R_nm": self.radius_nm,
            "D_rad_per_ps": self.polaron_shift,
            "B": self.franck_condon,
            "areas": self.areas.to_dict() if self.areas else None,
        }


@dataclass
class FitOutcome:
    """One fitted spectrum with everything needed to report and plot it"""

    result: FitResult
    derived: DerivedQuantities
    series: FitSeries
    curve: SpectrumCurve
    source: str = ""

    def to_dict(self) -> dict:
        return {"source": self.source, "fit": self.result.to_dict(), "derived": self.derived.to_dict()}


@dataclass
class SpectrumOutcome:
    """Model spectrum with its optional ZPL/PSB split"""

    total: SpectrumCurve
    zpl: Optional[SpectrumCurve] = None
    psb: Optional[SpectrumCurve] = None
    areas: Optional[AreaRatio] = None
    red_fraction: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "peak_omega_rad_per_ps": self.total.peak_omega,
            "total_area": self.total.area,
            "areas": self.areas.to_dict() if self.areas else None,
            "red_fraction": self.red_fraction,
        }
