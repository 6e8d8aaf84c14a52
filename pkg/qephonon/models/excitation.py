"""
Pulsed-excitation domain models
"""

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..exceptions import PulseError, QEPhononValidationError
from .bath import BathTemperature, SpectralDensity
from .dynamics import ProcessTensorConfig


@dataclass(frozen=True)
class GaussianPulse:
    """
    Gaussian laser pulse

    theta: pulse area in radians; t_p: duration in ps; delta: detuning from
    the polaron-shifted exciton frequency in rad/ps (negative = red).
    """

    theta: float
    t_p: float
    delta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.t_p) or self.t_p <= 0:
            raise PulseError("pulse duration must be > 0", field_name="t_p")
        if not math.isfinite(self.theta) or self.theta < 0:
            raise PulseError("pulse area must be >= 0", field_name="theta")
        if not math.isfinite(self.delta):
            raise PulseError("detuning must be finite", field_name="delta")

    @classmethod
    def from_pi_units(cls, theta_pi: float, t_p: float, delta: float = 0.0) -> "GaussianPulse":
        return cls(theta=theta_pi * math.pi, t_p=t_p, delta=delta)

    @property
    def theta_pi(self) -> float:
        return self.theta / math.pi

    @property
    def peak_amplitude(self) -> float:
        return self.theta / (math.sqrt(math.pi) * self.t_p)

    def scaled(self, factor: float) -> "GaussianPulse":
        return GaussianPulse(theta=self.theta, t_p=self.t_p / factor, delta=self.delta * factor)

    def to_dict(self) -> dict:
        return {"theta_pi": self.theta_pi, "t_p_ps": self.t_p, "delta_rad_per_ps": self.delta}


@dataclass(frozen=True)
class PulseSequence:
    """Simultaneous pulses sharing the time origin, plus the polaron shift D used in their phases"""

    pulses: Tuple[GaussianPulse, ...]
    polaron_shift: float = 0.0

    MAX_PULSES = 2

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if not 1 <= len(self.pulses) <= self.MAX_PULSES:
            raise PulseError(
                f"pulse sequences support 1 to {self.MAX_PULSES} pulses, got {len(self.pulses)}",
                field_name="pulses",
            )
        if not math.isfinite(self.polaron_shift):
            raise PulseError("polaron shift must be finite", field_name="polaron_shift")

    @property
    def t_p_max(self) -> float:
        return max(p.t_p for p in self.pulses)

    @property
    def window(self) -> Tuple[float, float]:
        """Propagation window [-3 t_p, 3 t_p] for the longest pulse"""
        return -3.0 * self.t_p_max, 3.0 * self.t_p_max

    @property
    def readout_time(self) -> float:
        return 3.0 * self.t_p_max

    @property
    def is_dark(self) -> bool:
        return all(p.theta == 0 for p in self.pulses)

    def with_polaron_shift(self, shift: float) -> "PulseSequence":
        return replace(self, polaron_shift=shift)

    def to_dict(self) -> dict:
        return {
            "pulses": [p.to_dict() for p in self.pulses],
            "polaron_shift_rad_per_ps": self.polaron_shift,
        }


@dataclass
class PopulationReadout:
    """P_X after the pulses are gone"""

    evaluation_time: float
    population: float
    method: str = "closed"
    converged: bool = True
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "evaluation_time_ps": self.evaluation_time,
            "P_X": self.population,
            "method": self.method,
            "converged": self.converged,
            "warnings": self.warnings,
        }


@dataclass(frozen=True)
class ScanAxis:
    name: str
    values: Tuple[float, ...]
    unit: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise QEPhononValidationError(f"scan axis '{self.name}' is empty", field_name=self.name)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values)


@dataclass(frozen=True)
class ArgmaxRecord:
    value: float
    row_index: int
    col_index: int
    row_value: float
    col_value: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ScanResult:
    """
    Population map over two axes

    ``values[i, j]`` belongs to ``rows.values[i]`` and ``cols.values[j]``.
    """

    rows: ScanAxis
    cols: ScanAxis
    values: np.ndarray
    converged: np.ndarray
    label: str = ""
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.converged = np.asarray(self.converged, dtype=bool)
        shape = (len(self.rows), len(self.cols))
        if self.values.shape != shape or self.converged.shape != shape:
            raise QEPhononValidationError(
                f"scan values must have shape {shape}", field_name="values",
                field_value=self.values.shape,
            )

    @property
    def argmax(self) -> ArgmaxRecord:
        i, j = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return ArgmaxRecord(
            value=float(self.values[i, j]),
            row_index=int(i),
            col_index=int(j),
            row_value=self.rows.values[i],
            col_value=self.cols.values[j],
        )

    @property
    def max_value(self) -> float:
        return float(np.max(self.values))

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "rows": {"name": self.rows.name, "unit": self.rows.unit, "values": list(self.rows.values)},
            "cols": {"name": self.cols.name, "unit": self.cols.unit, "values": list(self.cols.values)},
            "values": self.values.tolist(),
            "converged": self.converged.tolist(),
            "argmax": self.argmax.to_dict(),
            "metadata": self.metadata,
        }


@dataclass
class RabiCurve:
    """P_X versus pulse area for one pulse duration"""

    t_p: float
    thetas: np.ndarray
    populations: np.ndarray
    first_max_value: float
    first_max_theta: float
    local_maxima: int

    def to_dict(self) -> dict:
        return {
            "t_p_ps": self.t_p,
            "theta_pi": (np.asarray(self.thetas) / math.pi).tolist(),
            "P_X": np.asarray(self.populations).tolist(),
            "first_maximum": {"P_X": self.first_max_value, "theta_pi": self.first_max_theta / math.pi},
            "local_maxima": self.local_maxima,
        }


@dataclass(frozen=True)
class EngineSettings:
    """Picklable engine knobs carried by each scan task"""

    dt: float
    memory_ps: float
    svd_tol: float
    max_bond: int
    memory_tolerance: float = 1e-2

    def process_tensor_config(self, t_end: float) -> ProcessTensorConfig:
        return ProcessTensorConfig(
            dt=self.dt,
            memory_steps=max(1, int(round(self.memory_ps / self.dt))),
            svd_tol=self.svd_tol,
            max_bond=self.max_bond,
            t_end=t_end,
            memory_tolerance=self.memory_tolerance,
        )


@dataclass(frozen=True)
class ScanTask:
    """One independent grid point of a scan"""

    row: int
    col: int
    sequence: PulseSequence
    sd: Optional[SpectralDensity]
    temperature: BathTemperature
    engine: EngineSettings


@dataclass(frozen=True)
class PointResult:
    """Outcome of one scan task, placed back by (row, col)"""

    row: int
    col: int
    population: float
    converged: bool = True
    warnings: Tuple[str, ...] = ()
