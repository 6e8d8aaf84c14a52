"""
Brute-force path sum over the same discretized influence functional

Keeps the full tensor of interval indices, 4^N entries after N steps, and
serves as the exactness reference for the tensor-network engine.
"""

import logging
from typing import Optional

import numpy as np
import psutil

from ..exceptions import PathSumTooLargeError
from ..models.bath import BathTemperature, SpectralDensity
from ..models.dynamics import (
    EngineReport,
    SystemHamiltonian,
    Trajectory,
    hermiticity_drift,
    min_eigenvalue,
    trace_error,
    validate_density_matrix,
)
from .influence import eta_coefficients, influence_factors
from .propagators import half_step_superoperators, substeps_for

logger = logging.getLogger(__name__)

MAX_PATH_STEPS = 12
BYTES_PER_ENTRY = 16
# Intermediate broadcasting holds a few copies of the path tensor
WORKSPACE_COPIES = 4


def path_sum_bytes(kept: int) -> int:
    """Working memory of a path sum holding `kept` interval indices"""
    return WORKSPACE_COPIES * BYTES_PER_ENTRY * 4 ** kept


def check_path_sum_resources(n_steps: int, kept: int) -> None:
    if n_steps > MAX_PATH_STEPS:
        raise PathSumTooLargeError(
            f"path sum limited to {MAX_PATH_STEPS} steps, got {n_steps}",
            n_steps=n_steps,
            limit=MAX_PATH_STEPS,
        )
    required = path_sum_bytes(kept)
    available = psutil.virtual_memory().available
    if required > available:
        raise PathSumTooLargeError(
            f"path sum needs {required / 2**20:.0f} MiB, {available / 2**20:.0f} MiB available",
            n_steps=n_steps,
            limit=MAX_PATH_STEPS,
        )


def quapi_brute_force(
    H: SystemHamiltonian,
    sd: Optional[SpectralDensity],
    T: BathTemperature,
    dt: float,
    n_steps: int,
    rho0: np.ndarray,
    t_start: float = 0.0,
    memory_steps: Optional[int] = None,
    system_substeps: Optional[int] = None,
) -> Trajectory:
    """
    Reduced dynamics by explicit summation over all interval-index paths

    memory_steps defaults to the full history; indices beyond it are summed
    out exactly as in the tensor-network engine.
    """
    validate_density_matrix(rho0)
    K = memory_steps if memory_steps is not None else max(1, n_steps)
    check_path_sum_resources(n_steps, min(n_steps, K + 1))

    rho0 = np.asarray(rho0, dtype=complex)
    times = t_start + dt * np.arange(n_steps + 1)
    n_sub = substeps_for(H, 0.5 * dt, system_substeps)
    first_half, second_half = half_step_superoperators(H, t_start, dt, n_steps, n_sub)

    if sd is None:
        sd = SpectralDensity(0.0, 1.0, 2)
    diagonal, memory = influence_factors(eta_coefficients(sd, T, dt, K))

    rhos = np.empty((n_steps + 1, 2, 2), dtype=complex)
    rhos[0] = rho0

    # Axis 0 is the newest interval index, axis j the index j intervals back
    paths = diagonal * (first_half[0] @ rho0.ravel())
    rhos[1] = (second_half[0] @ paths).reshape(2, 2)

    for n in range(1, n_steps):
        transfer = first_half[n] @ second_half[n - 1]
        depth = paths.ndim
        grown = transfer.reshape((4, 4) + (1,) * (depth - 1)) * paths[None, ...]
        grown = grown * diagonal.reshape((4,) + (1,) * depth)
        for j in range(depth):
            shape = [1] * (depth + 1)
            shape[0], shape[j + 1] = 4, 4
            grown = grown * memory[j].reshape(shape)
        if depth == K:
            grown = grown.sum(axis=-1)
        paths = grown
        marginal = paths.reshape(4, -1).sum(axis=1)
        rhos[n + 1] = (second_half[n] @ marginal).reshape(2, 2)

    report = EngineReport(
        method="path-sum",
        dt=dt,
        n_steps=n_steps,
        memory_steps=K,
        system_substeps=n_sub,
        max_trace_error=max(trace_error(r) for r in rhos),
        min_eigenvalue=min(min_eigenvalue(r) for r in rhos),
        max_hermiticity_drift=max(hermiticity_drift(r) for r in rhos),
    )
    logger.debug(f"Path sum over {n_steps} steps with memory {K}")
    return Trajectory(times=times, rhos=rhos, report=report)
