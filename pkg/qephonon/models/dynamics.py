"""
Reduced-dynamics domain models for the two-level emitter
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, asdict
from typing import List, Optional

import numpy as np

from ..exceptions import EngineConfigError, QEPhononValidationError

# Basis ordering {|G>, |X>}
GROUND = 0
EXCITED = 1

# Eigenvalues of the coupling operator n = |X><X|
COUPLING_EIGENVALUES = np.array([0.0, 1.0])

SIGMA_DAG = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |X><G|


class SystemHamiltonian(ABC):
    """
    Time-dependent 2x2 Hermitian Hamiltonian in the frame rotating at the
    bare exciton frequency, hbar = 1, rad/ps.
    """

    @abstractmethod
    def __call__(self, t: float) -> np.ndarray:
        """Hamiltonian matrix at time t"""

    def batch(self, times: np.ndarray) -> np.ndarray:
        """Hamiltonians at many times, shape (n, 2, 2)"""
        return np.stack([self(t) for t in np.atleast_1d(times)])

    @property
    def frequency_scale(self) -> float:
        """Upper bound on the rate at which H(t) changes (rad/ps); 0 for constant H"""
        return 0.0


@dataclass(frozen=True)
class ConstantHamiltonian(SystemHamiltonian):
    """Time-independent Hamiltonian"""

    matrix: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2) or not np.allclose(m, m.conj().T, atol=1e-12):
            raise QEPhononValidationError("Hamiltonian must be a Hermitian 2x2 matrix", field_name="matrix")

    @classmethod
    def from_array(cls, matrix) -> "ConstantHamiltonian":
        m = np.asarray(matrix, dtype=complex)
        return cls(tuple(tuple(complex(v) for v in row) for row in m))

    @classmethod
    def rabi(cls, omega: float, detuning: float = 0.0) -> "ConstantHamiltonian":
        """H = (omega/2) sigma_x - detuning |X><X|"""
        return cls.from_array([[0.0, omega / 2.0], [omega / 2.0, -detuning]])

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.matrix, dtype=complex)

    def batch(self, times: np.ndarray) -> np.ndarray:
        times = np.atleast_1d(times)
        return np.broadcast_to(np.asarray(self.matrix, dtype=complex), (times.size, 2, 2)).copy()


@dataclass(frozen=True)
class ProcessTensorConfig:
    """
    Discretization of the influence functional

    dt: Trotter step (ps); memory_steps: K; svd_tol: relative singular-value
    cutoff; max_bond: bond-dimension cap; t_end: final time (ps).
    """

    dt: float
    memory_steps: int
    svd_tol: float
    max_bond: int
    t_end: float
    memory_tolerance: float = 1e-2
    system_substeps: Optional[int] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise EngineConfigError("dt must be > 0", setting_name="dt")
        if self.memory_steps < 1:
            raise EngineConfigError("memory_steps must be >= 1", setting_name="memory_steps")
        if not 0 < self.svd_tol <= 1e-2:
            raise EngineConfigError("svd_tol must be in (0, 1e-2]", setting_name="svd_tol")
        if self.max_bond < 1:
            raise EngineConfigError("max_bond must be >= 1", setting_name="max_bond")
        if self.system_substeps is not None and self.system_substeps < 1:
            raise EngineConfigError("system_substeps must be >= 1", setting_name="system_substeps")

    @property
    def memory_time(self) -> float:
        return self.dt * self.memory_steps

    def n_steps(self, t_start: float = 0.0) -> int:
        span = self.t_end - t_start
        if span <= 0:
            raise EngineConfigError("t_end must be after the start time", setting_name="t_end")
        return max(1, int(round(span / self.dt)))

    def refined(self, dt_factor: float = 1.0, svd_factor: float = 1.0) -> "ProcessTensorConfig":
        """Same physical memory window with a rescaled step and/or truncation threshold"""
        dt = self.dt * dt_factor
        return ProcessTensorConfig(
            dt=dt,
            memory_steps=max(1, int(round(self.memory_time / dt))),
            svd_tol=self.svd_tol * svd_factor,
            max_bond=self.max_bond,
            t_end=self.t_end,
            memory_tolerance=self.memory_tolerance,
            system_substeps=self.system_substeps,
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class InfluenceCoefficients:
    """Memory-kernel coefficients eta_0..eta_K for step dt"""

    eta: np.ndarray
    dt: float

    @property
    def memory_steps(self) -> int:
        return int(self.eta.size - 1)

    def influence_factor(self, k: int) -> np.ndarray:
        """
        I_k(c, a) = exp(-(s+_c - s-_c)(eta_k s+_a - conj(eta_k) s-_a)) on the
        Liouville indices c, a = 2 i + j of rho_ij.
        For k = 0 the factor depends on c only and is returned as a vector.
        """
        s_plus = np.repeat(COUPLING_EIGENVALUES, 2)
        s_minus = np.tile(COUPLING_EIGENVALUES, 2)
        diff = s_plus - s_minus
        eta = self.eta[k]
        if k == 0:
            return np.exp(-diff * (eta * s_plus - np.conj(eta) * s_minus))
        return np.exp(-np.outer(diff, eta * s_plus - np.conj(eta) * s_minus))


def ground_state() -> np.ndarray:
    return np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)


def excited_state() -> np.ndarray:
    return np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)


def exciton_population(rho: np.ndarray) -> float:
    """P_X = Tr[sigma^dag sigma rho]"""
    return float(np.real(rho[EXCITED, EXCITED]))


def validate_density_matrix(rho: np.ndarray, atol: float = 1e-8) -> None:
    """Raise if rho is not a 2x2 Hermitian, unit-trace, positive matrix"""
    rho = np.asarray(rho)
    if rho.shape != (2, 2):
        raise QEPhononValidationError("density matrix must be 2x2", field_name="rho")
    if not np.allclose(rho, rho.conj().T, atol=atol):
        raise QEPhononValidationError("density matrix must be Hermitian", field_name="rho")
    if abs(np.trace(rho).real - 1.0) > atol:
        raise QEPhononValidationError("density matrix must have unit trace", field_name="rho")
    if np.linalg.eigvalsh(rho).min() < -atol:
        raise QEPhononValidationError("density matrix must be positive", field_name="rho")


@dataclass
class EngineReport:
    """Numerical diagnostics of one propagation"""

    method: str
    dt: float
    n_steps: int
    memory_steps: Optional[int] = None
    svd_tol: Optional[float] = None
    max_bond: Optional[int] = None
    max_bond_used: int = 0
    bond_cap_hit: bool = False
    accuracy_warning: bool = False
    max_discarded_weight: float = 0.0
    memory_ratio: Optional[float] = None
    memory_covered: Optional[bool] = None
    max_trace_error: float = 0.0
    min_eigenvalue: float = 0.0
    max_hermiticity_drift: float = 0.0
    system_substeps: Optional[int] = None
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Trajectory:
    """Reduced density matrices rho(t_i) on the step grid"""

    times: np.ndarray
    rhos: np.ndarray
    report: EngineReport

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def populations(self) -> np.ndarray:
        return np.real(self.rhos[:, EXCITED, EXCITED])

    @property
    def final_rho(self) -> np.ndarray:
        return self.rhos[-1]

    @property
    def final_population(self) -> float:
        return float(self.populations[-1])

    def to_rows(self) -> List[List[float]]:
        """Rows of t, Re/Im of rho_GG, rho_GX, rho_XG, rho_XX"""
        rows = []
        for t, rho in zip(self.times, self.rhos):
            flat = rho.reshape(4)
            row = [float(t)]
            for value in flat:
                row.extend([float(value.real), float(value.imag)])
            rows.append(row)
        return rows

    @staticmethod
    def csv_header() -> List[str]:
        header = ["t_ps"]
        for name in ("GG", "GX", "XG", "XX"):
            header.extend([f"re_rho_{name}", f"im_rho_{name}"])
        return header


@dataclass
class ConvergenceReport:
    """Final P_X at accepted, halved-dt and tightened-svd settings"""

    base_population: float
    halved_dt_population: float
    tightened_svd_population: float
    tolerance: float = 1e-3
    base_config: dict = field(default_factory=dict)

    @property
    def dt_change(self) -> float:
        return abs(self.halved_dt_population - self.base_population)

    @property
    def svd_change(self) -> float:
        return abs(self.tightened_svd_population - self.base_population)

    @property
    def passed(self) -> bool:
        return max(self.dt_change, self.svd_change) < self.tolerance

    def to_dict(self) -> dict:
        return {
            "base_population": self.base_population,
            "halved_dt_population": self.halved_dt_population,
            "tightened_svd_population": self.tightened_svd_population,
            "dt_change": self.dt_change,
            "svd_change": self.svd_change,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "base_config": self.base_config,
        }


def is_finite_matrix(m: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(m)))


def hermiticity_drift(rho: np.ndarray) -> float:
    return float(np.max(np.abs(rho - rho.conj().T)))


def trace_error(rho: np.ndarray) -> float:
    return float(abs(np.trace(rho) - 1.0))


def min_eigenvalue(rho: np.ndarray) -> float:
    herm = 0.5 * (rho + rho.conj().T)
    return float(np.linalg.eigvalsh(herm).min())


def nan_report_value(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return value
