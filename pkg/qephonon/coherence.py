"""
Pure dephasing from quadratic coupling to 2D acoustic phonons, linewidth
budget and single-photon indistinguishability

Rates are in ps^-1 (1 GHz = 1e-3 ps^-1). Linewidths W from the lineshape
fit are angular frequencies in rad/ps and are converted to rates through the
ordinary-frequency convention, W / 2 pi.
"""

import logging
import math
from typing import Sequence, Tuple

import numpy as np

from .bath import _upper_limit, adaptive_quad
from .exceptions import DecayRateError, UnsupportedDimensionalityError
from .models.bath import UNITS, BathTemperature, MaterialParams, SpectralDensity
from .models.coherence import CoherenceCurves, DecayRates

logger = logging.getLogger(__name__)

# Beyond this hbar omega / k_B T the Bose product underflows to zero
_BOSE_CUTOFF = 700.0


def level_spacing_ev(omega_c: float, effective_mass: float, sound_speed: float) -> float:
    """Delta_i = (hbar omega_c)^2 / (2 m_i c^2) in eV"""
    energy = UNITS.hbar_ev_ps * omega_c
    rest = effective_mass * UNITS.electron_mass_nm2_per_ps2_in_ev * sound_speed ** 2
    return energy ** 2 / (2.0 * rest)


def quadratic_coupling_strength(omega_c: float, m: MaterialParams) -> float:
    """mu = pi hbar^2 (D_e^2/Delta_e + D_h^2/Delta_h)^2 / (D_e - D_h)^4 in ps^2"""
    m_e, m_h = m.require_masses()
    delta_e = level_spacing_ev(omega_c, m_e, m.sound_speed)
    delta_h = level_spacing_ev(omega_c, m_h, m.sound_speed)
    numerator = (m.D_e ** 2 / delta_e + m.D_h ** 2 / delta_h) ** 2
    return math.pi * UNITS.hbar_ev_ps ** 2 * numerator / (m.D_e - m.D_h) ** 4


def pure_dephasing_rate(sd: SpectralDensity, m: MaterialParams, T: BathTemperature) -> float:
    """
    gamma_pd = (alpha^2 mu / omega_c^4) int omega^8 exp(-2 omega^2/omega_c^2) n (n + 1) d omega

    Rate in ps^-1. The Bose product n(n+1) = 1/(4 sinh^2(hbar omega/2 k_B T))
    vanishes at T = 0.
    """
    if sd.z != 2:
        raise UnsupportedDimensionalityError(
            "quadratic-coupling dephasing is defined for a 2D bath", z=sd.z, quantity="gamma_pd"
        )
    mu = quadratic_coupling_strength(sd.omega_c, m)
    if T.is_zero or sd.alpha == 0:
        return 0.0

    theta = T.thermal_frequency

    def integrand(w: float) -> float:
        half = 0.5 * w / theta
        if w == 0.0 or half > _BOSE_CUTOFF:
            return 0.0
        return w ** 8 * math.exp(-2.0 * (w / sd.omega_c) ** 2) / (4.0 * math.sinh(half) ** 2)

    integral = adaptive_quad(integrand, 0.0, _upper_limit(sd), "gamma_pd", epsabs=0.0, epsrel=1e-10)
    return sd.alpha ** 2 * mu / sd.omega_c ** 4 * integral


def indistinguishability(r: DecayRates) -> float:
    """I = Gamma / (Gamma + 2 gamma_tot)"""
    if r.Gamma <= 0:
        raise DecayRateError("indistinguishability needs Gamma > 0", rate_name="Gamma", rate_value=r.Gamma)
    return r.Gamma / (r.Gamma + 2.0 * r.gamma_tot)


def linewidth_to_rate(W: float) -> float:
    """Angular linewidth in rad/ps as a rate in ps^-1"""
    return UNITS.ghz_to_rate(UNITS.rad_per_ps_to_ghz(W))


def noise_from_linewidth(W: float, Gamma: float, gamma_pd: float) -> Tuple[float, bool]:
    """
    gamma_noise = W - Gamma - gamma_pd, clamped at 0

    W in rad/ps, the rates in ps^-1. Returns (gamma_noise, clamped).
    """
    if W < 0:
        raise DecayRateError("linewidth must be >= 0", rate_name="W", rate_value=W)
    noise = linewidth_to_rate(W) - Gamma - gamma_pd
    if noise < 0:
        logger.warning(
            f"Linewidth {UNITS.rad_per_ps_to_ghz(W):.4g} GHz is below Gamma + gamma_pd; "
            f"gamma_noise clamped to 0 (was {UNITS.rate_to_ghz(noise):.4g} GHz)"
        )
        return 0.0, True
    return noise, False


def linewidth_budget(
    W: float,
    Gamma: float,
    sd: SpectralDensity,
    m: MaterialParams,
    T: BathTemperature,
) -> DecayRates:
    """Split a fitted linewidth into radiative, phonon and noise contributions"""
    gamma_pd = pure_dephasing_rate(sd, m, T)
    gamma_noise, clamped = noise_from_linewidth(W, Gamma, gamma_pd)
    return DecayRates(Gamma=Gamma, gamma_pd=gamma_pd, gamma_noise=gamma_noise, gamma_noise_clamped=clamped)


def temperature_curves(
    sd: SpectralDensity,
    m: MaterialParams,
    temperatures_k: Sequence[float],
    tau_ns: Sequence[float],
    gamma_noise: float = 0.0,
) -> CoherenceCurves:
    """
    gamma_pd(T) and I(tau, T) without and with a noise rate (ps^-1)
    """
    temperatures = np.asarray(temperatures_k, dtype=float)
    lifetimes = np.asarray(tau_ns, dtype=float)
    if temperatures.size == 0 or lifetimes.size == 0:
        raise DecayRateError("temperature and lifetime grids must be non-empty", rate_name="grid")
    if np.any(lifetimes <= 0):
        raise DecayRateError("lifetimes must be > 0", rate_name="tau_ns", rate_value=float(lifetimes.min()))

    gamma_pd = np.array([pure_dephasing_rate(sd, m, BathTemperature(t)) for t in temperatures])
    phonon_only = np.empty((temperatures.size, lifetimes.size))
    with_noise = np.empty_like(phonon_only)
    for i, g in enumerate(gamma_pd):
        for j, tau in enumerate(lifetimes):
            Gamma = UNITS.lifetime_ns_to_rate(tau)
            phonon_only[i, j] = indistinguishability(DecayRates(Gamma=Gamma, gamma_pd=g))
            with_noise[i, j] = indistinguishability(DecayRates(Gamma=Gamma, gamma_pd=g, gamma_noise=gamma_noise))

    logger.info(
        f"gamma_pd from {UNITS.rate_to_ghz(gamma_pd.min()):.3e} to "
        f"{UNITS.rate_to_ghz(gamma_pd.max()):.3e} GHz over {temperatures.size} temperatures"
    )
    return CoherenceCurves(
        temperatures_k=temperatures,
        gamma_pd=gamma_pd,
        tau_ns=lifetimes,
        indist_phonon_only=phonon_only,
        indist_with_noise=with_noise,
        gamma_noise=gamma_noise,
    )
