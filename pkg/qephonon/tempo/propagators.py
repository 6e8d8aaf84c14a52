"""
Bath-free propagation of the two-level system

Half-step propagators for the Trotter splitting come from a fourth-order
Magnus expansion on substeps; closed_system_propagate integrates the von
Neumann equation with an adaptive high-order Runge-Kutta method and serves as
the reference for both.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from ..exceptions import EngineConfigError, QEPhononNumericalError
from ..models.dynamics import (
    EngineReport,
    SystemHamiltonian,
    Trajectory,
    hermiticity_drift,
    min_eigenvalue,
    trace_error,
)

logger = logging.getLogger(__name__)

# Largest phase |H| h accumulated over one Magnus substep
MAGNUS_PHASE = 0.02
MAX_SUBSTEPS = 4096
CLOSED_RTOL = 1e-12
CLOSED_ATOL = 1e-12

_GAUSS_OFFSET = math.sqrt(3.0) / 6.0


def substeps_for(H: SystemHamiltonian, half_step: float, override: Optional[int] = None) -> int:
    if override is not None:
        return override
    n = int(math.ceil(half_step * H.frequency_scale / MAGNUS_PHASE))
    if n > MAX_SUBSTEPS:
        raise EngineConfigError(
            f"drive varies too fast for dt: {n} substeps per half step", setting_name="dt"
        )
    return max(1, n)


def magnus_propagators(H: SystemHamiltonian, starts: np.ndarray, h: float) -> np.ndarray:
    """
    U(t + h, t) for every t in starts, fourth order in h

    Omega = -i h (H1 + H2)/2 - (sqrt(3) h^2 / 12) [H2, H1] at the two
    Gauss-Legendre nodes.
    """
    starts = np.asarray(starts, dtype=float)
    h1 = H.batch(starts + (0.5 - _GAUSS_OFFSET) * h)
    h2 = H.batch(starts + (0.5 + _GAUSS_OFFSET) * h)
    commutator = h2 @ h1 - h1 @ h2
    generator = -0.5j * h * (h1 + h2) - (math.sqrt(3.0) / 12.0) * h ** 2 * commutator
    return expm(generator)


def interval_propagators(
    H: SystemHamiltonian,
    t_start: float,
    length: float,
    count: int,
    n_sub: int,
) -> np.ndarray:
    """U over [t_start + i length, t_start + (i+1) length] for i < count, shape (count, 2, 2)"""
    h = length / n_sub
    starts = t_start + length * np.arange(count)[:, None] + h * np.arange(n_sub)[None, :]
    subs = magnus_propagators(H, starts.ravel(), h).reshape(count, n_sub, 2, 2)
    total = subs[:, 0]
    for j in range(1, n_sub):
        total = subs[:, j] @ total
    return total


def superoperator(U: np.ndarray) -> np.ndarray:
    """
    Liouville matrix of rho -> U rho U^dag on row-major vec(rho), index a = 2 i + j

    Works on a single 2x2 matrix or a stack of them.
    """
    U = np.asarray(U)
    S = np.einsum("...ik,...jl->...ijkl", U, U.conj())
    return S.reshape(U.shape[:-2] + (4, 4))


def half_step_superoperators(
    H: SystemHamiltonian,
    t_start: float,
    dt: float,
    n_steps: int,
    n_sub: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    (first halves, second halves) of every Trotter interval

    first[k] propagates t_k -> t_k + dt/2 and second[k] t_k + dt/2 -> t_{k+1}.
    """
    halves = interval_propagators(H, t_start, 0.5 * dt, 2 * n_steps, n_sub)
    supers = superoperator(halves)
    return supers[0::2], supers[1::2]


def closed_system_propagate(
    H: SystemHamiltonian,
    rho0: np.ndarray,
    dt: float,
    t_end: float,
    t_start: float = 0.0,
) -> Trajectory:
    """
    Unitary reference: d rho/dt = -i [H(t), rho] integrated with DOP853

    Output on t_start + k dt up to t_end.
    """
    if not dt > 0:
        raise EngineConfigError("dt must be > 0", setting_name="dt")
    span = t_end - t_start
    if span <= 0:
        raise EngineConfigError("t_end must be after the start time", setting_name="t_end")
    n_steps = max(1, int(round(span / dt)))
    times = t_start + dt * np.arange(n_steps + 1)

    def rhs(t, y):
        rho = y.reshape(2, 2)
        h = H(t)
        return (-1j * (h @ rho - rho @ h)).ravel()

    max_step = np.inf
    if H.frequency_scale > 0:
        max_step = 0.5 / H.frequency_scale

    sol = solve_ivp(
        rhs,
        (times[0], times[-1]),
        np.asarray(rho0, dtype=complex).ravel(),
        method="DOP853",
        t_eval=times,
        rtol=CLOSED_RTOL,
        atol=CLOSED_ATOL,
        max_step=max_step,
    )
    if not sol.success:
        raise QEPhononNumericalError(
            f"closed-system integration failed: {sol.message}",
            diagnostics={"t_start": t_start, "t_end": float(times[-1])},
        )

    rhos = sol.y.T.reshape(-1, 2, 2)
    report = EngineReport(
        method="closed",
        dt=dt,
        n_steps=n_steps,
        max_trace_error=max(trace_error(r) for r in rhos),
        min_eigenvalue=min(min_eigenvalue(r) for r in rhos),
        max_hermiticity_drift=max(hermiticity_drift(r) for r in rhos),
    )
    return Trajectory(times=times, rhos=rhos, report=report)
