"""
Tensor-network propagation of the driven emitter coupled to the phonon bath

Each Trotter interval [t_k, t_k+1] is split symmetrically: a system half
step, the influence kick at the midpoint and a second half step. The path
sum over midpoint indices is kept as a matrix-product state of the indices
still inside the memory window and compressed after every step.
"""

import logging
from typing import Optional

import numpy as np

from ..bath import memory_ratio
from ..exceptions import HermiticityDriftError
from ..models.bath import BathTemperature, SpectralDensity
from ..models.dynamics import (
    ConvergenceReport,
    EngineReport,
    ProcessTensorConfig,
    SystemHamiltonian,
    Trajectory,
    hermiticity_drift,
    min_eigenvalue,
    trace_error,
    validate_density_matrix,
)
from .influence import eta_coefficients, influence_factors
from .mps import AugmentedDensityTensor
from .propagators import half_step_superoperators, substeps_for

logger = logging.getLogger(__name__)

HERMITICITY_LIMIT = 1e-6


def _memory_diagnostic(
    report: EngineReport,
    sd: Optional[SpectralDensity],
    T: BathTemperature,
    cfg: ProcessTensorConfig,
) -> None:
    if sd is None or not sd.is_coupled:
        report.memory_ratio = 0.0
        report.memory_covered = True
        return
    ratio = memory_ratio(sd, T, cfg.memory_time)
    report.memory_ratio = ratio
    report.memory_covered = ratio <= cfg.memory_tolerance
    if not report.memory_covered:
        message = (
            f"bath memory not covered: |C(K dt)|/C(0) = {ratio:.2e} at K dt = {cfg.memory_time} ps "
            f"exceeds {cfg.memory_tolerance:.0e}"
        )
        logger.warning(message)
        report.warnings.append(message)


def _record_state(report: EngineReport, rho: np.ndarray, step: int) -> None:
    drift = hermiticity_drift(rho)
    if drift > HERMITICITY_LIMIT:
        raise HermiticityDriftError(
            f"density matrix lost Hermiticity at step {step}", drift=drift, step=step
        )
    report.max_hermiticity_drift = max(report.max_hermiticity_drift, drift)
    report.max_trace_error = max(report.max_trace_error, trace_error(rho))
    report.min_eigenvalue = min(report.min_eigenvalue, min_eigenvalue(rho))


def propagate(
    H: SystemHamiltonian,
    sd: Optional[SpectralDensity],
    T: BathTemperature,
    cfg: ProcessTensorConfig,
    rho0: np.ndarray,
    t_start: float = 0.0,
) -> Trajectory:
    """
    Reduced density matrices on t_start + k dt up to cfg.t_end

    sd = None propagates without a bath. Raises HermiticityDriftError when a
    state drifts more than 1e-6 from Hermitian; a bond cap that forces
    truncation above svd_tol is reported as an accuracy warning.
    """
    validate_density_matrix(rho0)
    rho0 = np.asarray(rho0, dtype=complex)
    n_steps = cfg.n_steps(t_start)
    dt = cfg.dt
    times = t_start + dt * np.arange(n_steps + 1)

    n_sub = substeps_for(H, 0.5 * dt, cfg.system_substeps)
    first_half, second_half = half_step_superoperators(H, t_start, dt, n_steps, n_sub)

    K = cfg.memory_steps
    if sd is None:
        sd = SpectralDensity(0.0, 1.0, 2)
    coefficients = eta_coefficients(sd, T, dt, K)
    diagonal, memory = influence_factors(coefficients)

    report = EngineReport(
        method="tempo",
        dt=dt,
        n_steps=n_steps,
        memory_steps=K,
        svd_tol=cfg.svd_tol,
        max_bond=cfg.max_bond,
        max_bond_used=1,
        min_eigenvalue=min_eigenvalue(rho0),
        system_substeps=n_sub,
    )
    _memory_diagnostic(report, sd, T, cfg)

    rhos = np.empty((n_steps + 1, 2, 2), dtype=complex)
    rhos[0] = rho0

    state = AugmentedDensityTensor.initial(diagonal * (first_half[0] @ rho0.ravel()))
    rhos[1] = (second_half[0] @ state.newest_marginal()).reshape(2, 2)
    _record_state(report, rhos[1], 1)

    for n in range(1, n_steps):
        transfer = first_half[n] @ second_half[n - 1]
        state = state.extend(transfer, diagonal, memory, drop_oldest=len(state) == K)
        stats = state.compress(cfg.svd_tol, cfg.max_bond)
        report.max_bond_used = max(report.max_bond_used, stats.max_bond)
        report.max_discarded_weight = max(report.max_discarded_weight, stats.max_discarded_weight)
        report.bond_cap_hit = report.bond_cap_hit or stats.cap_hit

        rhos[n + 1] = (second_half[n] @ state.newest_marginal()).reshape(2, 2)
        _record_state(report, rhos[n + 1], n + 1)

    if report.bond_cap_hit:
        report.accuracy_warning = True
        message = f"bond dimension capped at {cfg.max_bond} with svd_tol={cfg.svd_tol:.0e} unmet"
        logger.warning(message)
        report.warnings.append(message)

    logger.debug(
        f"Propagated {n_steps} steps: max bond {report.max_bond_used}, "
        f"trace error {report.max_trace_error:.2e}"
    )
    return Trajectory(times=times, rhos=rhos, report=report)


def convergence_ladder(
    H: SystemHamiltonian,
    sd: Optional[SpectralDensity],
    T: BathTemperature,
    cfg: ProcessTensorConfig,
    rho0: np.ndarray,
    t_start: float = 0.0,
    tolerance: float = 1e-3,
) -> ConvergenceReport:
    """Final P_X at cfg, at dt/2 and at svd_tol/10"""
    base = propagate(H, sd, T, cfg, rho0, t_start)
    halved = propagate(H, sd, T, cfg.refined(dt_factor=0.5), rho0, t_start)
    tightened = propagate(H, sd, T, cfg.refined(svd_factor=0.1), rho0, t_start)
    report = ConvergenceReport(
        base_population=base.final_population,
        halved_dt_population=halved.final_population,
        tightened_svd_population=tightened.final_population,
        tolerance=tolerance,
        base_config=cfg.to_dict(),
    )
    if not report.passed:
        logger.warning(
            f"Convergence ladder failed: dP_X(dt/2)={report.dt_change:.2e}, "
            f"dP_X(svd/10)={report.svd_change:.2e}"
        )
    return report
