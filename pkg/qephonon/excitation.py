"""
Pulsed excitation schemes: resonant Rabi sweeps, phonon-assisted maps and
two-pulse swing-up (SUPER) maps

Every grid point is an independent propagation described by a picklable
ScanTask. Scan builders take a ``runner`` callable that maps a list of tasks
to PointResults; the default runs them in-process, the scan service hands
them to a process pool.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import find_peaks

from .bath import polaron_shift
from .exceptions import PulseError
from .models.bath import BathTemperature, SpectralDensity
from .models.dynamics import SIGMA_DAG, SystemHamiltonian, exciton_population as population_of, ground_state
from .models.excitation import (
    EngineSettings,
    GaussianPulse,
    PointResult,
    PopulationReadout,
    PulseSequence,
    RabiCurve,
    ScanAxis,
    ScanResult,
    ScanTask,
)
from .models.run_config import SWING_UP_LAYOUTS, SwingUpLayout, get_preset
from .tempo import closed_system_propagate, convergence_ladder, propagate
from .utils.logging import quiet_engine

logger = logging.getLogger(__name__)

Runner = Callable[[List[ScanTask]], List[PointResult]]

POPULATION_SLACK = 1e-6
PHONON_ASSISTED_T_P = 8.0
PEAK_PROMINENCE = 1e-3


def pulse_envelope(p: GaussianPulse, t):
    """Omega(t) = Theta / (sqrt(pi) t_p) exp(-(t/t_p)^2); scalars or arrays"""
    t = np.asarray(t, dtype=float)
    value = p.peak_amplitude * np.exp(-(t / p.t_p) ** 2)
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class DriveHamiltonian(SystemHamiltonian):
    """
    H(t) = (1/2) sum_j Omega_j(t) [exp(-i (delta_j - D) t) sigma^dag + h.c.]

    in the frame rotating at the bare exciton frequency.
    """

    sequence: PulseSequence

    def _coupling(self, times: np.ndarray) -> np.ndarray:
        total = np.zeros(times.shape, dtype=complex)
        for p in self.sequence.pulses:
            phase = p.delta - self.sequence.polaron_shift
            total += pulse_envelope(p, times) * np.exp(-1j * phase * times)
        return 0.5 * total

    def __call__(self, t: float) -> np.ndarray:
        return self.batch(np.array([t]))[0]

    def batch(self, times: np.ndarray) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        coupling = self._coupling(times)
        h = coupling[:, None, None] * SIGMA_DAG[None, :, :]
        return h + np.conj(np.swapaxes(h, 1, 2))

    @property
    def frequency_scale(self) -> float:
        pulses = self.sequence.pulses
        amplitude = 0.5 * sum(p.peak_amplitude for p in pulses)
        phase = max(abs(p.delta - self.sequence.polaron_shift) for p in pulses)
        return amplitude + phase + 1.0 / min(p.t_p for p in pulses)


def drive_hamiltonian(seq: PulseSequence, t: float) -> np.ndarray:
    return DriveHamiltonian(seq)(t)


def with_bath_shift(seq: PulseSequence, sd: Optional[SpectralDensity]) -> PulseSequence:
    """Sequence whose phases use the polaron shift of the active bath"""
    shift = polaron_shift(sd) if sd is not None and sd.is_coupled else 0.0
    return seq.with_polaron_shift(shift)


def exciton_population(
    seq: PulseSequence,
    sd: Optional[SpectralDensity],
    T: BathTemperature,
    engine: EngineSettings,
    convergence_check: bool = False,
) -> PopulationReadout:
    """
    P_X at t = 3 t_p after starting in |G><G| at t = -3 t_p

    Without coupling the closed-system integrator is used; a sequence of
    zero-area pulses never leaves the ground state.
    """
    seq = with_bath_shift(seq, sd)
    t_start, t_end = seq.window
    if seq.is_dark:
        return PopulationReadout(evaluation_time=t_end, population=0.0, method="dark")

    H = DriveHamiltonian(seq)
    if sd is None or not sd.is_coupled:
        trajectory = closed_system_propagate(H, ground_state(), engine.dt, t_end, t_start)
        return PopulationReadout(
            evaluation_time=float(trajectory.times[-1]),
            population=trajectory.final_population,
            method="closed",
        )

    cfg = engine.process_tensor_config(t_end)
    if convergence_check:
        ladder = convergence_ladder(H, sd, T, cfg, ground_state(), t_start)
        warnings = [] if ladder.passed else [
            f"convergence ladder failed: dt change {ladder.dt_change:.1e}, svd change {ladder.svd_change:.1e}"
        ]
        return PopulationReadout(
            evaluation_time=t_end,
            population=ladder.base_population,
            method="tempo",
            converged=ladder.passed,
            warnings=warnings,
        )

    trajectory = propagate(H, sd, T, cfg, ground_state(), t_start)
    report = trajectory.report
    return PopulationReadout(
        evaluation_time=float(trajectory.times[-1]),
        population=population_of(trajectory.final_rho),
        method="tempo",
        converged=not report.accuracy_warning,
        warnings=list(report.warnings),
    )


def evaluate_task(task: ScanTask) -> PointResult:
    """Worker entry point; engine logs below ERROR stay quiet per point"""
    with quiet_engine():
        readout = exciton_population(task.sequence, task.sd, task.temperature, task.engine)
    return PointResult(
        row=task.row,
        col=task.col,
        population=readout.population,
        converged=readout.converged,
        warnings=tuple(readout.warnings),
    )


def run_tasks(tasks: List[ScanTask]) -> List[PointResult]:
    """In-process runner"""
    return [evaluate_task(task) for task in tasks]


def assemble(
    rows: ScanAxis,
    cols: ScanAxis,
    results: Sequence[PointResult],
    label: str = "",
    metadata: Optional[dict] = None,
) -> ScanResult:
    """Place results by grid index; arrival order does not matter"""
    values = np.full((len(rows), len(cols)), np.nan)
    converged = np.zeros((len(rows), len(cols)), dtype=bool)
    for r in results:
        values[r.row, r.col] = r.population
        converged[r.row, r.col] = r.converged
    if np.isnan(values).any():
        missing = int(np.isnan(values).sum())
        raise PulseError(f"{missing} scan points produced no result", field_name="results")
    out_of_range = (values < -POPULATION_SLACK) | (values > 1.0 + POPULATION_SLACK)
    if out_of_range.any():
        logger.warning(f"{int(out_of_range.sum())} populations fall outside [0, 1] in scan '{label}'")
    return ScanResult(rows=rows, cols=cols, values=values, converged=converged,
                      label=label, metadata=dict(metadata or {}))


def scaling_transform(seq: PulseSequence, C: float) -> PulseSequence:
    """t_p -> t_p / C and delta_j -> C delta_j; areas unchanged"""
    if not C > 0:
        raise PulseError("scaling factor must be > 0", field_name="C")
    return PulseSequence(tuple(p.scaled(C) for p in seq.pulses), polaron_shift=seq.polaron_shift)


def resonant_sequence(theta: float, t_p: float) -> PulseSequence:
    """Single pulse at the polaron-shifted exciton frequency"""
    return PulseSequence((GaussianPulse(theta=theta, t_p=t_p, delta=0.0),))


def phonon_assisted_sequence(delta: float, theta: float, t_p: float = PHONON_ASSISTED_T_P) -> PulseSequence:
    if delta < 0:
        raise PulseError("phonon-assisted excitation needs blue detuning (delta >= 0)", field_name="delta")
    return PulseSequence((GaussianPulse(theta=theta, t_p=t_p, delta=delta),))


def super_sequence(pulse1: GaussianPulse, delta2: float, theta2: float) -> PulseSequence:
    """Pulse 1 fixed, pulse 2 of the same duration"""
    if pulse1.delta >= 0 or delta2 >= 0:
        raise PulseError("swing-up excitation needs two red-detuned pulses", field_name="delta")
    return PulseSequence((pulse1, GaussianPulse(theta=theta2, t_p=pulse1.t_p, delta=delta2)))


def first_maximum(thetas, populations) -> Tuple[float, float]:
    """(P_X, Theta) at the first local maximum; the last point when the curve only rises"""
    pops = np.asarray(populations, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    for i in range(pops.size - 1):
        if pops[i] > pops[i + 1] and (i == 0 or pops[i] >= pops[i - 1]):
            return float(pops[i]), float(thetas[i])
    return float(pops[-1]), float(thetas[-1])


def count_local_maxima(populations, prominence: float = PEAK_PROMINENCE) -> int:
    peaks, _ = find_peaks(np.asarray(populations, dtype=float), prominence=prominence)
    return int(peaks.size)


def _grid_tasks(
    row_values: Sequence[float],
    col_values: Sequence[float],
    factory: Callable[[float, float], PulseSequence],
    sd: Optional[SpectralDensity],
    T: BathTemperature,
    engine: EngineSettings,
) -> List[ScanTask]:
    return [
        ScanTask(row=i, col=j, sequence=factory(r, c), sd=sd, temperature=T, engine=engine)
        for i, r in enumerate(row_values)
        for j, c in enumerate(col_values)
    ]


def scan_map(
    rows: ScanAxis,
    cols: ScanAxis,
    factory: Callable[[float, float], PulseSequence],
    sd: Optional[SpectralDensity],
    T: BathTemperature,
    engine: EngineSettings,
    runner: Runner = run_tasks,
    label: str = "",
    metadata: Optional[dict] = None,
) -> ScanResult:
    tasks = _grid_tasks(rows.values, cols.values, factory, sd, T, engine)
    logger.info(f"Scanning '{label}': {len(rows)} x {len(cols)} points")
    return assemble(rows, cols, runner(tasks), label=label, metadata=metadata)


def rabi_sweep(
    sd: Optional[SpectralDensity],
    T: BathTemperature,
    t_ps: Sequence[float],
    thetas: Sequence[float],
    engine: EngineSettings | Callable[[float], EngineSettings],
    runner: Runner = run_tasks,
) -> List[RabiCurve]:
    """
    Resonant P_X(Theta) curve per pulse duration

    ``engine`` may be a callable of t_p so that short pulses get a finer step.
    """
    rows = ScanAxis("t_p", tuple(t_ps), "ps")
    tasks: List[ScanTask] = []
    for i, t_p in enumerate(rows.values):
        settings = engine(t_p) if callable(engine) else engine
        tasks.extend(
            ScanTask(row=i, col=j, sequence=resonant_sequence(theta, t_p), sd=sd, temperature=T, engine=settings)
            for j, theta in enumerate(thetas)
        )

    scan = assemble(rows, ScanAxis("theta", tuple(thetas), "rad"), runner(tasks), label="rabi")
    curves = []
    for i, t_p in enumerate(rows.values):
        pops = scan.values[i]
        value, theta = first_maximum(scan.cols.array, pops)
        curves.append(RabiCurve(
            t_p=t_p,
            thetas=scan.cols.array,
            populations=pops,
            first_max_value=value,
            first_max_theta=theta,
            local_maxima=count_local_maxima(pops),
        ))
        logger.info(f"Rabi t_p={t_p} ps: first maximum P_X={value:.4f} at {theta / math.pi:.2f} pi")
    return curves


def phonon_assisted_map(
    sd: Optional[SpectralDensity],
    T: BathTemperature,
    deltas: Sequence[float],
    thetas: Sequence[float],
    engine: EngineSettings,
    t_p: float = PHONON_ASSISTED_T_P,
    runner: Runner = run_tasks,
    label: str = "phonon-assisted",
) -> ScanResult:
    """P_X over blue detuning (rows) and pulse area (cols)"""
    if any(d < 0 for d in deltas):
        raise PulseError("phonon-assisted detunings must be >= 0", field_name="deltas")
    factory = PhononAssistedFactory(t_p)
    return scan_map(
        ScanAxis("delta", tuple(deltas), "rad/ps"),
        ScanAxis("theta", tuple(thetas), "rad"),
        factory, sd, T, engine, runner, label,
        metadata={"kind": "phonon-assisted", "t_p_ps": t_p},
    )


def super_map(
    sd: Optional[SpectralDensity],
    T: BathTemperature,
    pulse1: GaussianPulse,
    delta2s: Sequence[float],
    theta2s: Sequence[float],
    engine: EngineSettings,
    runner: Runner = run_tasks,
    label: str = "super",
) -> ScanResult:
    """P_X over the second pulse's detuning (rows) and area (cols)"""
    if pulse1.delta >= 0 or any(d >= 0 for d in delta2s):
        raise PulseError("swing-up detunings must be < 0", field_name="delta2s")
    return scan_map(
        ScanAxis("delta2", tuple(delta2s), "rad/ps"),
        ScanAxis("theta2", tuple(theta2s), "rad"),
        SuperFactory(pulse1), sd, T, engine, runner, label,
        metadata={"kind": "super", "pulse1": pulse1.to_dict()},
    )


@dataclass(frozen=True)
class PhononAssistedFactory:
    t_p: float

    def __call__(self, delta: float, theta: float) -> PulseSequence:
        return phonon_assisted_sequence(delta, theta, self.t_p)


@dataclass(frozen=True)
class SuperFactory:
    pulse1: GaussianPulse

    def __call__(self, delta2: float, theta2: float) -> PulseSequence:
        return super_sequence(self.pulse1, delta2, theta2)


def plateau_region(scan: ScanResult, level: float) -> List[Tuple[float, float]]:
    """(row value, col value) of every cell with P_X >= level"""
    rows, cols = np.nonzero(scan.values >= level)
    return [(scan.rows.values[i], scan.cols.values[j]) for i, j in zip(rows, cols)]


def _refined_axis(axis: ScanAxis, index: int, n: int) -> ScanAxis:
    values = axis.array
    lo = values[max(index - 1, 0)]
    hi = values[min(index + 1, values.size - 1)]
    if lo == hi:
        return ScanAxis(axis.name, (float(lo),), axis.unit)
    return ScanAxis(axis.name, tuple(np.linspace(lo, hi, n)), axis.unit)


def refine_argmax(
    scan: ScanResult,
    factory: Callable[[float, float], PulseSequence],
    sd: Optional[SpectralDensity],
    T: BathTemperature,
    engine: EngineSettings,
    n: int = 5,
    runner: Runner = run_tasks,
) -> ScanResult:
    """n x n grid spanning the neighbouring coarse cells of the argmax"""
    best = scan.argmax
    rows = _refined_axis(scan.rows, best.row_index, n)
    cols = _refined_axis(scan.cols, best.col_index, n)
    metadata = dict(scan.metadata, refined_from=best.to_dict())
    return scan_map(rows, cols, factory, sd, T, engine, runner, f"{scan.label}-refined", metadata)


def swing_up_inputs(name: str) -> Tuple[SwingUpLayout, Optional[SpectralDensity], GaussianPulse]:
    """Layout, bath and fixed first pulse of a swing-up map"""
    try:
        layout = SWING_UP_LAYOUTS[name]
    except KeyError:
        raise PulseError(
            f"unknown swing-up layout '{name}', choose from {sorted(SWING_UP_LAYOUTS)}", field_name="layout"
        ) from None
    sd = get_preset(layout.preset).spectral_density if layout.preset else None
    pulse1 = GaussianPulse.from_pi_units(layout.theta1_pi, layout.t_p, layout.delta1)
    return layout, sd, pulse1
