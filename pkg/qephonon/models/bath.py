"""
Phonon bath domain models
"""

import math
from dataclasses import dataclass, field
from typing import Optional

from scipy import constants

from ..exceptions import QEPhononValidationError, MaterialParameterError


@dataclass(frozen=True)
class UnitConventions:
    """
    Unit system: time in ps, angular frequency in rad/ps, lengths in nm,
    energies in eV. All constants derive from CODATA values in scipy.constants.
    """

    kB_over_hbar: float = field(
        default_factory=lambda: constants.k / constants.hbar * 1e-12
    )  # rad ps^-1 K^-1
    hbar_ev_ps: float = field(
        default_factory=lambda: constants.hbar / constants.e * 1e12
    )
    c_light_nm_per_ps: float = field(
        default_factory=lambda: constants.c * 1e9 / 1e12
    )
    amu_nm2_per_ps2_in_ev: float = field(
        default_factory=lambda: constants.atomic_mass * 1e6 / constants.e
    )
    electron_mass_nm2_per_ps2_in_ev: float = field(
        default_factory=lambda: constants.m_e * 1e6 / constants.e
    )

    # Frequencies: an angular frequency of 2*pi*1e-3 rad/ps is one GHz
    def rad_per_ps_to_ghz(self, omega: float) -> float:
        return omega / (2.0 * math.pi * 1e-3)

    def ghz_to_rad_per_ps(self, ghz: float) -> float:
        return ghz * 2.0 * math.pi * 1e-3

    # Rates: one GHz is one event per ns
    def rate_to_ghz(self, rate_per_ps: float) -> float:
        return rate_per_ps * 1e3

    def ghz_to_rate(self, ghz: float) -> float:
        return ghz * 1e-3

    def lifetime_ns_to_rate(self, tau_ns: float) -> float:
        return 1.0 / (tau_ns * 1e3)

    def rad_per_ps_to_mev(self, omega: float) -> float:
        return omega * self.hbar_ev_ps * 1e3

    def mev_to_rad_per_ps(self, mev: float) -> float:
        return mev * 1e-3 / self.hbar_ev_ps

    def wavelength_nm_to_omega(self, wavelength_nm):
        return 2.0 * math.pi * self.c_light_nm_per_ps / wavelength_nm

    def omega_to_wavelength_nm(self, omega):
        return 2.0 * math.pi * self.c_light_nm_per_ps / omega

    def describe(self) -> dict:
        """Conventions block stamped into run summaries"""
        return {
            "time": "ps",
            "angular_frequency": "rad/ps (numerically the 'THz' of fit tables)",
            "frequency_ghz": "1 GHz = 2*pi*1e-3 rad/ps",
            "rate_ghz": "1 GHz = 1 ns^-1 = 1e-3 ps^-1",
            "length": "nm",
            "energy": "eV",
            "kB_over_hbar_rad_per_ps_per_K": self.kB_over_hbar,
        }


UNITS = UnitConventions()


@dataclass(frozen=True)
class SpectralDensity:
    """
    Super-ohmic spectral density J(omega) = alpha omega^z exp(-omega^2/omega_c^2)

    alpha is in ps for z=2 and ps^2 for z=3; omega_c in rad/ps.
    """

    alpha: float
    omega_c: float
    z: int = 2

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise QEPhononValidationError(
                "alpha must be finite and >= 0",
                field_name="alpha", field_value=self.alpha, validation_rule="alpha >= 0",
            )
        if not math.isfinite(self.omega_c) or self.omega_c <= 0:
            raise QEPhononValidationError(
                "omega_c must be finite and > 0",
                field_name="omega_c", field_value=self.omega_c, validation_rule="omega_c > 0",
            )
        if self.z not in (2, 3):
            raise QEPhononValidationError(
                "z must be 2 or 3",
                field_name="z", field_value=self.z, validation_rule="z in {2, 3}",
            )

    @property
    def is_coupled(self) -> bool:
        return self.alpha > 0

    @property
    def alpha_units(self) -> str:
        return "ps" if self.z == 2 else "ps^2"

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "omega_c": self.omega_c, "z": self.z}

    def __str__(self) -> str:
        return f"SpectralDensity(alpha={self.alpha} {self.alpha_units}, omega_c={self.omega_c} rad/ps, z={self.z})"


@dataclass(frozen=True)
class BathTemperature:
    """Bath temperature in kelvin; T = 0 is handled as the coth -> 1 limit"""

    kelvin: float

    def __post_init__(self):
        if not math.isfinite(self.kelvin) or self.kelvin < 0:
            raise QEPhononValidationError(
                "temperature must be finite and >= 0",
                field_name="kelvin", field_value=self.kelvin, validation_rule="T >= 0",
            )

    @property
    def is_zero(self) -> bool:
        return self.kelvin == 0

    @property
    def thermal_frequency(self) -> float:
        """k_B T / hbar in rad/ps"""
        return UNITS.kB_over_hbar * self.kelvin

    @property
    def beta_hbar(self) -> float:
        """hbar / (k_B T) in ps; infinite at T = 0"""
        if self.is_zero:
            return math.inf
        return 1.0 / self.thermal_frequency


@dataclass(frozen=True)
class MaterialParams:
    """
    Material constants for first-principles coupling and dephasing

    Deformation potentials in eV, speed of sound in nm/ps, densities in
    amu/nm^2 (2D) and amu/nm^3 (3D), lattice constant in nm, effective
    masses in units of the free electron mass.
    """

    D_e: float
    D_h: float
    sound_speed: float
    rho_area: Optional[float] = None
    rho_volume: Optional[float] = None
    lattice_constant: Optional[float] = None
    m_e_eff: Optional[float] = None
    m_h_eff: Optional[float] = None

    def __post_init__(self):
        if self.sound_speed <= 0:
            raise QEPhononValidationError(
                "speed of sound must be > 0", field_name="sound_speed", field_value=self.sound_speed
            )
        for name in ("rho_area", "rho_volume", "lattice_constant", "m_e_eff", "m_h_eff"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise QEPhononValidationError(
                    f"{name} must be > 0", field_name=name, field_value=value
                )

    def require_density(self, z: int) -> float:
        """Mass density for the requested dimensionality"""
        density = self.rho_area if z == 2 else self.rho_volume
        if density is None:
            name = "rho_area" if z == 2 else "rho_volume"
            raise MaterialParameterError(
                f"{name} is required for z={z}", parameter=name
            )
        return density

    def require_masses(self) -> tuple[float, float]:
        if self.m_e_eff is None or self.m_h_eff is None:
            missing = "m_e_eff" if self.m_e_eff is None else "m_h_eff"
            raise MaterialParameterError(
                "effective masses are required for the pure-dephasing rate",
                parameter=missing,
            )
        return self.m_e_eff, self.m_h_eff

    @classmethod
    def monolayer_from_lattice(
        cls,
        D_e: float,
        D_h: float,
        sound_speed: float,
        lattice_constant: float,
        formula_mass_amu: float,
        m_e_eff: Optional[float] = None,
        m_h_eff: Optional[float] = None,
    ) -> "MaterialParams":
        """Hexagonal monolayer: rho_A = formula mass / ((sqrt(3)/2) a^2)"""
        cell_area = math.sqrt(3.0) / 2.0 * lattice_constant ** 2
        return cls(
            D_e=D_e,
            D_h=D_h,
            sound_speed=sound_speed,
            rho_area=formula_mass_amu / cell_area,
            lattice_constant=lattice_constant,
            m_e_eff=m_e_eff,
            m_h_eff=m_h_eff,
        )

    @classmethod
    def wse2(
        cls,
        m_e_eff: Optional[float] = None,
        m_h_eff: Optional[float] = None,
        sound_speed: float = 4.494,
    ) -> "MaterialParams":
        """WSe2 monolayer first-principles inputs; masses stay caller supplied"""
        m_w = 183.84
        m_se = 78.971
        return cls.monolayer_from_lattice(
            D_e=-6.03,
            D_h=-0.16,
            sound_speed=sound_speed,
            lattice_constant=0.3319,
            formula_mass_amu=m_w + 2 * m_se,
            m_e_eff=m_e_eff,
            m_h_eff=m_h_eff,
        )
