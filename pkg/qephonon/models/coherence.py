"""
Decay, dephasing and indistinguishability models
"""

from dataclasses import dataclass, field
from typing import List

import numpy as np

from ..exceptions import DecayRateError
from .bath import UNITS


@dataclass(frozen=True)
class DecayRates:
    """
    Rates in ps^-1

    gamma_noise_clamped marks a noise rate that came out negative from the
    linewidth subtraction and was set to zero.
    """

    Gamma: float
    gamma_pd: float = 0.0
    gamma_noise: float = 0.0
    gamma_noise_clamped: bool = False

    def __post_init__(self):
        for name in ("Gamma", "gamma_pd", "gamma_noise"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise DecayRateError(f"{name} must be finite and >= 0", rate_name=name, rate_value=value)

    @classmethod
    def from_ghz(cls, Gamma_ghz: float, gamma_pd_ghz: float = 0.0, gamma_noise_ghz: float = 0.0) -> "DecayRates":
        return cls(
            Gamma=UNITS.ghz_to_rate(Gamma_ghz),
            gamma_pd=UNITS.ghz_to_rate(gamma_pd_ghz),
            gamma_noise=UNITS.ghz_to_rate(gamma_noise_ghz),
        )

    @property
    def tau(self) -> float:
        """Lifetime in ps"""
        if self.Gamma == 0:
            return float("inf")
        return 1.0 / self.Gamma

    @property
    def gamma_tot(self) -> float:
        return self.gamma_pd + self.gamma_noise

    def to_dict(self) -> dict:
        return {
            "Gamma_per_ps": self.Gamma,
            "gamma_pd_per_ps": self.gamma_pd,
            "gamma_noise_per_ps": self.gamma_noise,
            "Gamma_ghz": UNITS.rate_to_ghz(self.Gamma),
            "gamma_pd_ghz": UNITS.rate_to_ghz(self.gamma_pd),
            "gamma_noise_ghz": UNITS.rate_to_ghz(self.gamma_noise),
            "tau_ns": self.tau / 1e3,
            "gamma_noise_clamped": self.gamma_noise_clamped,
        }


@dataclass
class CoherenceCurves:
    """Dephasing rate versus temperature and indistinguishability versus lifetime"""

    temperatures_k: np.ndarray
    gamma_pd: np.ndarray
    tau_ns: np.ndarray
    indist_phonon_only: np.ndarray
    indist_with_noise: np.ndarray
    gamma_noise: float = 0.0
    warnings: List[str] = field(default_factory=list)

    def dephasing_rows(self) -> List[List[float]]:
        return [
            [float(t), float(g), UNITS.rate_to_ghz(float(g))]
            for t, g in zip(self.temperatures_k, self.gamma_pd)
        ]

    def indistinguishability_rows(self, temperature_index: int) -> List[List[float]]:
        return [
            [float(tau), float(a), float(b)]
            for tau, a, b in zip(
                self.tau_ns,
                self.indist_phonon_only[temperature_index],
                self.indist_with_noise[temperature_index],
            )
        ]

    def to_dict(self) -> dict:
        return {
            "temperatures_k": np.asarray(self.temperatures_k).tolist(),
            "gamma_pd_per_ps": np.asarray(self.gamma_pd).tolist(),
            "gamma_pd_ghz": [UNITS.rate_to_ghz(float(g)) for g in self.gamma_pd],
            "tau_ns": np.asarray(self.tau_ns).tolist(),
            "indistinguishability_phonon_only": np.asarray(self.indist_phonon_only).tolist(),
            "indistinguishability_with_noise": np.asarray(self.indist_with_noise).tolist(),
            "gamma_noise_ghz": UNITS.rate_to_ghz(self.gamma_noise),
            "warnings": self.warnings,
        }
