"""
Run configuration schema and emitter presets

Every physical quantity carries its unit in the key name so that a run file
never has to guess between angular frequency and ordinary frequency.
"""

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .bath import BathTemperature, MaterialParams, SpectralDensity
from .spectrum import LineshapeParams

RUN_SCHEMA_VERSION = 1

COMMANDS = ("fit", "spectrum", "rabi", "phonon-assisted", "super", "dephasing", "indist")


@dataclass(frozen=True)
class EmitterPreset:
    """Fitted emitter parameters; lineshape fields are absent for bath-only presets"""

    name: str
    z: int
    alpha: float
    omega_c: float
    omega_X_tilde: Optional[float] = None
    A: Optional[float] = None
    W: Optional[float] = None
    sound_speed: float = 4.494
    description: str = ""

    @property
    def spectral_density(self) -> SpectralDensity:
        return SpectralDensity(alpha=self.alpha, omega_c=self.omega_c, z=self.z)

    @property
    def has_lineshape(self) -> bool:
        return None not in (self.omega_X_tilde, self.A, self.W)

    def lineshape_params(self, temperature_k: float = 4.0) -> LineshapeParams:
        if not self.has_lineshape:
            raise ValueError(f"preset {self.name} carries no lineshape parameters")
        return LineshapeParams(
            omega_X_tilde=self.omega_X_tilde,
            A=self.A,
            W=self.W,
            sd=self.spectral_density,
            T=BathTemperature(temperature_k),
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "z": self.z,
            "alpha": self.alpha,
            "omega_c_rad_per_ps": self.omega_c,
            "omega_X_tilde_rad_per_ps": self.omega_X_tilde,
            "A": self.A,
            "W_rad_per_ps": self.W,
            "sound_speed_nm_per_ps": self.sound_speed,
            "description": self.description,
        }


PRESETS: Dict[str, EmitterPreset] = {
    "A2D": EmitterPreset("A2D", 2, 0.297, 3.209, 2336.80, 344.09, 0.773,
                         description="WSe2 emitter A, 2D bath fit"),
    "A3D": EmitterPreset("A3D", 3, 0.232, 2.345, 2336.76, 347.66, 0.986,
                         description="WSe2 emitter A, 3D bath fit"),
    "B2D": EmitterPreset("B2D", 2, 0.274, 1.959, 2353.35, 53.37, 0.119,
                         description="WSe2 emitter B, 2D bath fit"),
    "B3D": EmitterPreset("B3D", 3, 0.634, 1.106, 2353.35, 52.30, 0.165,
                         description="WSe2 emitter B, 3D bath fit"),
    "InAs": EmitterPreset("InAs", 3, 0.03, 2.2, sound_speed=4.494,
                          description="InAs quantum dot reference bath"),
}


def get_preset(name: str) -> EmitterPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset '{name}', choose from {sorted(PRESETS)}") from None


@dataclass(frozen=True)
class SwingUpLayout:
    """Two-pulse swing-up scan layout"""

    preset: Optional[str]
    delta1: float
    theta1_pi: float
    t_p: float
    delta2_range: Tuple[float, float]
    theta2_pi_range: Tuple[float, float]


_BASE_SUPER = dict(delta1=-5.0, theta1_pi=11.0, t_p=3.0,
                   delta2_range=(-40.0, -6.0), theta2_pi_range=(0.0, 30.0))
_SCALED_SUPER = dict(delta1=-15.0, theta1_pi=11.0, t_p=1.0,
                     delta2_range=(-120.0, -18.0), theta2_pi_range=(0.0, 30.0))

SWING_UP_LAYOUTS: Dict[str, SwingUpLayout] = {
    "free": SwingUpLayout(None, **_BASE_SUPER),
    "A2D": SwingUpLayout("A2D", **_BASE_SUPER),
    "B2D": SwingUpLayout("B2D", **_BASE_SUPER),
    "InAs": SwingUpLayout("InAs", **_BASE_SUPER),
    "free-scaled": SwingUpLayout(None, **_SCALED_SUPER),
    "A2D-scaled": SwingUpLayout("A2D", **_SCALED_SUPER),
    "B2D-scaled": SwingUpLayout("B2D", **_SCALED_SUPER),
    "InAs-scaled": SwingUpLayout("InAs", **_SCALED_SUPER),
}


class GridSpec(BaseModel):
    """Inclusive linear grid"""

    model_config = ConfigDict(extra="forbid")

    start: float
    stop: float
    n: int = Field(default=25, ge=1)

    @model_validator(mode="after")
    def check_order(self):
        if self.n > 1 and self.stop <= self.start:
            raise ValueError("stop must be greater than start")
        return self

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n)


class EmitterSection(BaseModel):
    """Overrides on top of the preset; required in full for the custom preset"""

    model_config = ConfigDict(extra="forbid")

    alpha: Optional[float] = Field(default=None, ge=0)
    omega_c_rad_per_ps: Optional[float] = Field(default=None, gt=0)
    z: Optional[Literal[2, 3]] = None
    omega_X_tilde_rad_per_ps: Optional[float] = None
    A: Optional[float] = Field(default=None, gt=0)
    W_rad_per_ps: Optional[float] = Field(default=None, gt=0)
    sound_speed_nm_per_ps: Optional[float] = Field(default=None, gt=0)


class MaterialSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    D_e_ev: float = -6.03
    D_h_ev: float = -0.16
    rho_area_amu_per_nm2: Optional[float] = Field(default=None, gt=0)
    rho_volume_amu_per_nm3: Optional[float] = Field(default=None, gt=0)
    lattice_constant_nm: Optional[float] = Field(default=0.3319, gt=0)
    formula_mass_amu: Optional[float] = Field(default=183.84 + 2 * 78.971, gt=0)
    m_e_eff: Optional[float] = Field(default=None, gt=0)
    m_h_eff: Optional[float] = Field(default=None, gt=0)

    def to_material(self, sound_speed: float) -> MaterialParams:
        rho_area = self.rho_area_amu_per_nm2
        if rho_area is None and self.lattice_constant_nm and self.formula_mass_amu:
            rho_area = self.formula_mass_amu / (math.sqrt(3.0) / 2.0 * self.lattice_constant_nm ** 2)
        return MaterialParams(
            D_e=self.D_e_ev,
            D_h=self.D_h_ev,
            sound_speed=sound_speed,
            rho_area=rho_area,
            rho_volume=self.rho_volume_amu_per_nm3,
            lattice_constant=self.lattice_constant_nm,
            m_e_eff=self.m_e_eff,
            m_h_eff=self.m_h_eff,
        )


class EngineSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dt_ps: Optional[float] = Field(default=None, gt=0)
    memory_ps: Optional[float] = Field(default=None, gt=0)
    svd_tol: Optional[float] = Field(default=None, gt=0, le=1e-2)
    max_bond: Optional[int] = Field(default=None, ge=1)
    convergence_check: bool = False


class FitSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    input: Optional[Path] = None
    window_nm: Optional[Tuple[float, float]] = None
    baseline: Literal["none", "constant", "linear"] = "constant"
    baseline_value: Optional[float] = None
    weights: Literal["uniform", "poisson"] = "uniform"
    domain: Literal["frequency", "wavelength"] = "frequency"
    multi_start: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None
    label: str = ""


class SpectrumSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    span_rad_per_ps: float = Field(default=15.0, gt=0)
    n_points: int = Field(default=2001, ge=3)
    decompose: bool = True
    instrument_fwhm_rad_per_ps: Optional[float] = Field(default=None, gt=0)


class ScanSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    t_p_ps: List[float] = Field(default_factory=lambda: [1.0, 3.0])
    theta_pi: GridSpec = Field(default_factory=lambda: GridSpec(start=0.5, stop=20.0, n=25))
    delta_rad_per_ps: Optional[GridSpec] = None
    layout: Optional[str] = None
    refine: bool = False

    @field_validator("t_p_ps")
    @classmethod
    def check_durations(cls, v):
        if not v or any(t <= 0 for t in v):
            raise ValueError("t_p_ps must be a non-empty list of positive durations")
        return v

    @field_validator("layout")
    @classmethod
    def check_layout(cls, v):
        if v is not None and v not in SWING_UP_LAYOUTS:
            raise ValueError(f"layout must be one of {sorted(SWING_UP_LAYOUTS)}")
        return v


class CoherenceSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    temperatures_k: List[float] = Field(default_factory=lambda: [4.0, 10.0, 20.0, 30.0, 40.0, 50.0])
    tau_ns: List[float] = Field(default_factory=lambda: [0.1, 0.3, 1.0, 3.0, 10.0])
    gamma_noise_ghz: float = Field(default=0.0, ge=0)
    W_ghz: Optional[float] = Field(default=None, ge=0)
    reference_tau_ns: float = Field(default=1.0, gt=0)


class RunConfig(BaseModel):
    """One batch run; unknown keys are schema violations"""

    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = RUN_SCHEMA_VERSION
    command: Literal["fit", "spectrum", "rabi", "phonon-assisted", "super", "dephasing", "indist"]
    preset: Literal["A2D", "A3D", "B2D", "B3D", "InAs", "custom"] = "A2D"
    temperature_k: Optional[float] = Field(default=None, ge=0)
    emitter: EmitterSection = Field(default_factory=EmitterSection)
    material: MaterialSection = Field(default_factory=MaterialSection)
    engine: EngineSection = Field(default_factory=EngineSection)
    fit: FitSection = Field(default_factory=FitSection)
    spectrum: SpectrumSection = Field(default_factory=SpectrumSection)
    scan: ScanSection = Field(default_factory=ScanSection)
    coherence: CoherenceSection = Field(default_factory=CoherenceSection)
    bath_free: bool = False
    output_dir: Optional[Path] = None
    workers: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def check_custom_emitter(self):
        if self.preset == "custom":
            missing = [
                name for name in ("alpha", "omega_c_rad_per_ps", "z")
                if getattr(self.emitter, name) is None
            ]
            if missing:
                raise ValueError(f"custom preset requires emitter.{', emitter.'.join(missing)}")
        if self.command == "fit" and self.fit.input is None:
            raise ValueError("fit command requires fit.input")
        return self

    def emitter_preset(self) -> EmitterPreset:
        """Preset with emitter overrides applied"""
        base = PRESETS.get(self.preset) or EmitterPreset("custom", 2, 0.0, 1.0)
        e = self.emitter
        return EmitterPreset(
            name=base.name,
            z=e.z if e.z is not None else base.z,
            alpha=e.alpha if e.alpha is not None else base.alpha,
            omega_c=e.omega_c_rad_per_ps if e.omega_c_rad_per_ps is not None else base.omega_c,
            omega_X_tilde=e.omega_X_tilde_rad_per_ps if e.omega_X_tilde_rad_per_ps is not None else base.omega_X_tilde,
            A=e.A if e.A is not None else base.A,
            W=e.W_rad_per_ps if e.W_rad_per_ps is not None else base.W,
            sound_speed=e.sound_speed_nm_per_ps if e.sound_speed_nm_per_ps is not None else base.sound_speed,
            description=base.description,
        )

    def config_hash(self) -> str:
        """
        Short digest of everything that can change numeric output

        Output location and worker count are excluded.
        """
        payload = self.model_dump(mode="json", exclude={"output_dir", "workers"})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
