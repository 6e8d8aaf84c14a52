"""
Phonon bath functions derived from the spectral density J(omega)

Closed forms where they exist, adaptive quadrature for single values and a
vectorized Gauss-Legendre tabulation for whole time grids. Integrals run over
[0, 8 omega_c]; the Gaussian cutoff makes the remainder negligible.
"""

import logging
import math
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from .exceptions import (
    NegativeFrequencyError,
    QEPhononValidationError,
    QuadratureError,
    UnsupportedDimensionalityError,
)
from .models.bath import UNITS, BathTemperature, MaterialParams, SpectralDensity

logger = logging.getLogger(__name__)

CUTOFF_MULTIPLE = 8.0
QUAD_ABS_TOL = 1e-10
QUAD_REL_TOL = 1e-10
QUAD_LIMIT = 2000
GAUSS_NODES = 16
TIME_CHUNK = 512

_GL_X, _GL_W = leggauss(GAUSS_NODES)


def _upper_limit(sd: SpectralDensity) -> float:
    return CUTOFF_MULTIPLE * sd.omega_c


def _coth_half(omega, T: BathTemperature):
    """coth(hbar omega / 2 k_B T) for omega > 0; identically 1 at T = 0"""
    if T.is_zero:
        return np.ones_like(np.asarray(omega, dtype=float))
    return 1.0 / np.tanh(np.asarray(omega, dtype=float) / (2.0 * T.thermal_frequency))


def _coth_half_scalar(omega: float, T: BathTemperature) -> float:
    if T.is_zero:
        return 1.0
    return 1.0 / math.tanh(omega / (2.0 * T.thermal_frequency))


def adaptive_quad(
    func: Callable[[float], float],
    a: float,
    b: float,
    quantity: str,
    epsabs: float = QUAD_ABS_TOL,
    epsrel: float = QUAD_REL_TOL,
    weight: Optional[str] = None,
    wvar: Optional[float] = None,
) -> float:
    """scipy quad with the error estimate checked against the requested tolerance"""
    kwargs = dict(epsabs=epsabs, epsrel=epsrel, limit=QUAD_LIMIT, full_output=1)
    if weight is not None:
        kwargs.update(weight=weight, wvar=wvar)
    out = integrate.quad(func, a, b, **kwargs)
    value, abserr = out[0], out[1]
    tolerance = 10.0 * max(epsabs, epsrel * abs(value))
    if not math.isfinite(value) or abserr > tolerance:
        raise QuadratureError(
            f"quadrature for {quantity} did not converge",
            quantity=quantity,
            estimated_error=abserr,
            tolerance=tolerance,
        )
    return value


def j_omega(sd: SpectralDensity, omega):
    """J(omega) = alpha omega^z exp(-omega^2/omega_c^2); accepts scalars or arrays"""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise NegativeFrequencyError("J(omega) is defined for omega >= 0", omega=float(np.min(w)))
    value = sd.alpha * w ** sd.z * np.exp(-(w / sd.omega_c) ** 2)
    return float(value) if value.ndim == 0 else value


def huang_rhys(sd: SpectralDensity, method: str = "closed") -> float:
    """S = int J(omega)/omega^2 d omega"""
    if method == "closed":
        if sd.z == 2:
            return math.sqrt(math.pi) / 2.0 * sd.omega_c * sd.alpha
        return 0.5 * sd.omega_c ** 2 * sd.alpha
    if method == "quadrature":
        if sd.alpha == 0:
            return 0.0
        return adaptive_quad(
            lambda w: sd.alpha * w ** (sd.z - 2) * math.exp(-(w / sd.omega_c) ** 2),
            0.0, _upper_limit(sd), "huang_rhys", epsabs=0.0, epsrel=1e-13,
        )
    raise QEPhononValidationError(f"unknown method '{method}'", field_name="method", field_value=method)


def polaron_shift(sd: SpectralDensity, method: str = "closed") -> float:
    """D = int J(omega)/omega d omega in rad/ps"""
    if method == "closed":
        if sd.z == 2:
            return sd.alpha * sd.omega_c ** 2 / 2.0
        return sd.alpha * math.sqrt(math.pi) * sd.omega_c ** 3 / 4.0
    if method == "quadrature":
        if sd.alpha == 0:
            return 0.0
        return adaptive_quad(
            lambda w: sd.alpha * w ** (sd.z - 1) * math.exp(-(w / sd.omega_c) ** 2),
            0.0, _upper_limit(sd), "polaron_shift", epsabs=0.0, epsrel=1e-13,
        )
    raise QEPhononValidationError(f"unknown method '{method}'", field_name="method", field_value=method)


def franck_condon(sd: SpectralDensity, T: BathTemperature) -> float:
    """
    B = exp[-(alpha/2) int omega exp(-omega^2/omega_c^2) coth(hbar omega/2 k_B T) d omega]

    Only defined for z = 3; the z = 2 integral diverges at omega -> 0.
    At T = 0 this is exp(-S/2), so the zero-phonon weight B^2 equals exp(-S).
    """
    if sd.z != 3:
        raise UnsupportedDimensionalityError(
            "the Franck-Condon factor diverges for a 2D bath", z=sd.z, quantity="franck_condon"
        )
    if sd.alpha == 0:
        return 1.0
    if T.is_zero:
        return math.exp(-0.5 * huang_rhys(sd))

    two_theta = 2.0 * T.thermal_frequency

    def integrand(w: float) -> float:
        if w == 0.0:
            return two_theta
        return w * math.exp(-(w / sd.omega_c) ** 2) / math.tanh(w / two_theta)

    integral = adaptive_quad(integrand, 0.0, _upper_limit(sd), "franck_condon", epsabs=0.0, epsrel=1e-12)
    return math.exp(-0.5 * sd.alpha * integral)


def alpha_from_material(m: MaterialParams, z: int) -> float:
    """
    First-principles coupling strength

    z=2: (D_e - D_h)^2 / (4 pi hbar rho_A c^4), in ps
    z=3: (D_e - D_h)^2 / (4 pi^2 hbar rho_V c^5), in ps^2
    """
    if z not in (2, 3):
        raise UnsupportedDimensionalityError("z must be 2 or 3", z=z, quantity="alpha")
    density = m.require_density(z)
    delta_d = (m.D_e - m.D_h) ** 2
    if z == 2:
        denom = 4.0 * math.pi * UNITS.hbar_ev_ps * density * m.sound_speed ** 4
    else:
        denom = 4.0 * math.pi ** 2 * UNITS.hbar_ev_ps * density * m.sound_speed ** 5
    # eV ps^(z+1) / (amu nm^2) -> ps^(z-1)
    return delta_d / denom / UNITS.amu_nm2_per_ps2_in_ev


def confinement_radius(sd: SpectralDensity, sound_speed: float) -> float:
    """R = sqrt(2) c / omega_c in nm for c in nm/ps"""
    if sound_speed <= 0:
        raise QEPhononValidationError(
            "speed of sound must be > 0", field_name="sound_speed", field_value=sound_speed
        )
    return math.sqrt(2.0) * sound_speed / sd.omega_c


def _check_time(t: float) -> None:
    if not math.isfinite(t) or t < 0:
        raise QEPhononValidationError("time must be finite and >= 0", field_name="t", field_value=t)


def phi(
    sd: SpectralDensity,
    T: BathTemperature,
    t: float,
    epsabs: float = QUAD_ABS_TOL,
) -> complex:
    """
    Phi(t) = int J/omega^2 [(cos omega t - 1) coth(hbar omega/2 k_B T) - i sin omega t] d omega

    Adaptive quadrature; both integrands vanish at omega = 0 for z >= 2.
    """
    _check_time(t)
    if t == 0 or sd.alpha == 0:
        return 0j

    def real_part(w: float) -> float:
        if w == 0.0:
            return 0.0
        return (
            sd.alpha * w ** (sd.z - 2) * math.exp(-(w / sd.omega_c) ** 2)
            * -2.0 * math.sin(0.5 * w * t) ** 2 * _coth_half_scalar(w, T)
        )

    def imag_part(w: float) -> float:
        return -sd.alpha * w ** (sd.z - 2) * math.exp(-(w / sd.omega_c) ** 2) * math.sin(w * t)

    upper = _upper_limit(sd)
    re = adaptive_quad(real_part, 0.0, upper, "phi", epsabs=epsabs)
    im = adaptive_quad(imag_part, 0.0, upper, "phi", epsabs=epsabs)
    return complex(re, im)


def bath_correlation(
    sd: SpectralDensity,
    T: BathTemperature,
    t: float,
    epsabs: float = QUAD_ABS_TOL,
) -> complex:
    """
    C(t) = int J(omega)[coth(hbar omega/2 k_B T) cos omega t - i sin omega t] d omega

    Oscillatory weights (QAWO) for t > 0.
    """
    _check_time(t)
    if sd.alpha == 0:
        return 0j

    def thermal(w: float) -> float:
        if w == 0.0:
            return 0.0
        return sd.alpha * w ** sd.z * math.exp(-(w / sd.omega_c) ** 2) * _coth_half_scalar(w, T)

    def spectral(w: float) -> float:
        return sd.alpha * w ** sd.z * math.exp(-(w / sd.omega_c) ** 2)

    upper = _upper_limit(sd)
    if t == 0:
        return complex(adaptive_quad(thermal, 0.0, upper, "bath_correlation", epsabs=epsabs), 0.0)
    re = adaptive_quad(thermal, 0.0, upper, "bath_correlation", epsabs=epsabs, weight="cos", wvar=t)
    im = -adaptive_quad(spectral, 0.0, upper, "bath_correlation", epsabs=epsabs, weight="sin", wvar=t)
    return complex(re, im)


def _panel_nodes(sd: SpectralDensity, T: BathTemperature, t_max: float):
    """Composite Gauss-Legendre nodes/weights on [0, 8 omega_c] resolving cos(omega t_max)"""
    upper = _upper_limit(sd)
    widths = [sd.omega_c / 2.0]
    if t_max > 0:
        widths.append(8.0 / t_max)
    if not T.is_zero:
        widths.append(math.pi * T.thermal_frequency)
    n_panels = max(1, int(math.ceil(upper / min(widths))))
    edges = np.linspace(0.0, upper, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    weights = (half[:, None] * _GL_W[None, :]).ravel()
    return nodes, weights


def _tabulate(sd, T, times, kernel) -> np.ndarray:
    """Chunked sum_i w_i kernel(omega_i, t) with per-chunk node sets"""
    times = np.asarray(times, dtype=float)
    flat = times.ravel()
    out = np.empty(flat.size, dtype=complex)
    order = np.argsort(flat)
    for start in range(0, flat.size, TIME_CHUNK):
        idx = order[start:start + TIME_CHUNK]
        chunk = flat[idx]
        nodes, weights = _panel_nodes(sd, T, float(chunk.max()))
        out[idx] = kernel(nodes, chunk[:, None]) @ weights
    return out.reshape(times.shape)


def phi_table(sd: SpectralDensity, T: BathTemperature, times) -> np.ndarray:
    """Phi on many times by composite Gauss-Legendre quadrature"""
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise QEPhononValidationError("times must be >= 0", field_name="times")
    if sd.alpha == 0:
        return np.zeros(times.shape, dtype=complex)

    def kernel(w, t):
        f = sd.alpha * w ** (sd.z - 2) * np.exp(-(w / sd.omega_c) ** 2)
        coth = _coth_half(w, T)
        return f * (-2.0 * np.sin(0.5 * w * t) ** 2 * coth - 1j * np.sin(w * t))

    return _tabulate(sd, T, times, kernel)


def correlation_table(sd: SpectralDensity, T: BathTemperature, times) -> np.ndarray:
    """C(t) on many times by composite Gauss-Legendre quadrature"""
    times = np.asarray(times, dtype=float)
    if sd.alpha == 0:
        return np.zeros(times.shape, dtype=complex)

    def kernel(w, t):
        j = sd.alpha * w ** sd.z * np.exp(-(w / sd.omega_c) ** 2)
        return j * (_coth_half(w, T) * np.cos(w * t) - 1j * np.sin(w * t))

    return _tabulate(sd, T, times, kernel)


@lru_cache(maxsize=64)
def unit_phi_grid(omega_c: float, z: int, kelvin: float, dt: float, n: int) -> np.ndarray:
    """
    Phi / alpha on t_k = k dt, k = 0..n-1

    Phi is linear in alpha, so the fit reuses one table while only alpha moves.
    The returned array is read-only.
    """
    table = phi_table(SpectralDensity(1.0, omega_c, z), BathTemperature(kelvin), dt * np.arange(n))
    table.setflags(write=False)
    return table


def lineshape_function(sd: SpectralDensity, T: BathTemperature, t: float) -> complex:
    """g(t) = int_0^t int_0^t' C(s) ds dt' = -Phi(t) - i D t"""
    return -phi(sd, T, t) - 1j * polaron_shift(sd) * t


def lineshape_function_table(sd: SpectralDensity, T: BathTemperature, times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    return -phi_table(sd, T, times) - 1j * polaron_shift(sd) * times


def memory_ratio(sd: SpectralDensity, T: BathTemperature, t: float) -> float:
    """|C(t)| / C(0); how far the bath memory has decayed by time t"""
    if sd.alpha == 0:
        return 0.0
    c = correlation_table(sd, T, np.array([0.0, t]))
    return float(abs(c[1]) / c[0].real)
