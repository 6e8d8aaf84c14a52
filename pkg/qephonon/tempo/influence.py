"""
Discretized influence functional of the linear exciton-phonon coupling

Each Trotter interval couples to the bath through n = |X><X| at its
midpoint. eta_0 is the self term of one interval, eta_k the cross term of
two intervals k steps apart:

    eta_0 = g(dt)
    eta_k = g((k+1) dt) - 2 g(k dt) + g((k-1) dt)

with g the lineshape function. Both are evaluated directly in frequency
space so that every coefficient carries the quadrature tolerance.
"""

import logging
import math
from functools import lru_cache

import numpy as np

from ..bath import QUAD_ABS_TOL, _coth_half_scalar, _upper_limit, adaptive_quad
from ..exceptions import EngineConfigError
from ..models.bath import BathTemperature, SpectralDensity
from ..models.dynamics import InfluenceCoefficients

logger = logging.getLogger(__name__)

ETA_ABS_TOL = 1e-2 * QUAD_ABS_TOL


@lru_cache(maxsize=32)
def eta_coefficients(
    sd: SpectralDensity,
    T: BathTemperature,
    dt: float,
    memory_steps: int,
) -> InfluenceCoefficients:
    """eta_0..eta_K for step dt; cached per (bath, temperature, dt, K)"""
    if not dt > 0:
        raise EngineConfigError("dt must be > 0", setting_name="dt")
    if memory_steps < 1:
        raise EngineConfigError("memory_steps must be >= 1", setting_name="memory_steps")

    eta = np.zeros(memory_steps + 1, dtype=complex)
    if sd.alpha == 0:
        eta.setflags(write=False)
        return InfluenceCoefficients(eta=eta, dt=dt)

    upper = _upper_limit(sd)

    def spectral(w: float) -> float:
        """J(omega)/omega^2"""
        return sd.alpha * w ** (sd.z - 2) * math.exp(-(w / sd.omega_c) ** 2)

    def self_real(w: float) -> float:
        if w == 0.0:
            return 0.0
        return spectral(w) * 2.0 * math.sin(0.5 * w * dt) ** 2 * _coth_half_scalar(w, T)

    def self_imag(w: float) -> float:
        return spectral(w) * (math.sin(w * dt) - w * dt)

    eta[0] = complex(
        adaptive_quad(self_real, 0.0, upper, "eta_0", epsabs=ETA_ABS_TOL),
        adaptive_quad(self_imag, 0.0, upper, "eta_0", epsabs=ETA_ABS_TOL),
    )

    def cross_thermal(w: float) -> float:
        if w == 0.0:
            return 0.0
        return spectral(w) * 4.0 * math.sin(0.5 * w * dt) ** 2 * _coth_half_scalar(w, T)

    def cross_spectral(w: float) -> float:
        return spectral(w) * 4.0 * math.sin(0.5 * w * dt) ** 2

    for k in range(1, memory_steps + 1):
        lag = k * dt
        re = adaptive_quad(cross_thermal, 0.0, upper, "eta_k", epsabs=ETA_ABS_TOL, weight="cos", wvar=lag)
        im = adaptive_quad(cross_spectral, 0.0, upper, "eta_k", epsabs=ETA_ABS_TOL, weight="sin", wvar=lag)
        eta[k] = complex(re, -im)

    eta.setflags(write=False)
    logger.debug(
        f"eta coefficients: dt={dt} K={memory_steps} |eta_0|={abs(eta[0]):.3e} |eta_K|={abs(eta[-1]):.3e}"
    )
    return InfluenceCoefficients(eta=eta, dt=dt)


def accumulated_phase(coefficients: InfluenceCoefficients, n_intervals: int) -> complex:
    """
    sum over interval pairs of eta after n intervals

    Equals g(n dt) whenever n - 1 <= K, which ties the coefficients back to
    the lineshape function.
    """
    eta = coefficients.eta
    total = n_intervals * eta[0]
    for k in range(1, min(n_intervals, eta.size)):
        total += (n_intervals - k) * eta[k]
    return complex(total)


def influence_factors(coefficients: InfluenceCoefficients):
    """(I_0 vector, stacked I_1..I_K matrices)"""
    diagonal = coefficients.influence_factor(0)
    if coefficients.memory_steps == 0:
        return diagonal, np.ones((0, 4, 4), dtype=complex)
    stacked = np.stack([coefficients.influence_factor(k) for k in range(1, coefficients.memory_steps + 1)])
    return diagonal, stacked
