"""
Workflow service implementation - one batch run per cli command
"""

import asyncio
import logging
import math
from dataclasses import asdict, replace
from datetime import datetime
from functools import partial
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from ..bath import confinement_radius, franck_condon, huang_rhys, polaron_shift
from ..coherence import linewidth_budget, temperature_curves
from ..config import get_settings
from ..excitation import (
    PHONON_ASSISTED_T_P,
    PhononAssistedFactory,
    SuperFactory,
    exciton_population,
    phonon_assisted_map,
    plateau_region,
    rabi_sweep,
    refine_argmax,
    resonant_sequence,
    swing_up_inputs,
    super_map,
)
from ..exceptions import RunConfigError
from ..models.bath import UNITS, BathTemperature, MaterialParams, SpectralDensity
from ..models.excitation import EngineSettings, GaussianPulse, PulseSequence, ScanResult
from ..models.run import RunStatus, RunSummary
from ..models.run_config import SWING_UP_LAYOUTS, EmitterPreset, RunConfig
from ..models.spectrum import FitConfig
from ..utils.logging import get_structured_logger, log_stage
from .interfaces import FileService, ScanService, SpectrumService, WorkflowService
from .resources import ResourceMonitor

logger = logging.getLogger(__name__)
structured = get_structured_logger(__name__)

DEFAULT_MAP_POINTS = 40
PHONON_ASSISTED_DELTAS = (0.25, 10.0)
PLATEAU_LEVEL = 0.99


def package_version() -> str:
    try:
        return version("qephonon")
    except PackageNotFoundError:
        return "0+unknown"


class WorkflowServiceImpl(WorkflowService):
    """Implementation of WorkflowService interface"""

    def __init__(
        self,
        spectrum_service: SpectrumService,
        scan_service: ScanService,
        file_service: FileService,
        resource_monitor: Optional[ResourceMonitor] = None,
    ):
        self.spectrum_service = spectrum_service
        self.scan_service = scan_service
        self.file_service = file_service
        self.resource_monitor = resource_monitor
        self.settings = get_settings()

    @log_stage(logger)
    async def execute(self, config: RunConfig) -> RunSummary:
        """
        Run one command end to end

        The summary is written even when the run fails; the error is re-raised.
        """
        handlers = {
            "fit": self._run_fit,
            "spectrum": self._run_spectrum,
            "rabi": self._run_rabi,
            "phonon-assisted": self._run_phonon_assisted,
            "super": self._run_super,
            "dephasing": self._run_dephasing,
            "indist": self._run_indist,
        }
        config_hash = config.config_hash()
        output_dir = await self.file_service.create_output_directory(config.command, config_hash, config.output_dir)
        summary = RunSummary(
            command=config.command,
            config_hash=config_hash,
            output_dir=output_dir,
            provenance=self._provenance(config, config_hash),
            started_at=datetime.now(),
        )

        summary.status = RunStatus.RUNNING
        try:
            await handlers[config.command](config, summary)
            summary.status = RunStatus.COMPLETED
        except Exception as e:
            summary.status = RunStatus.FAILED
            summary.error_message = str(e)
            raise
        finally:
            summary.completed_at = datetime.now()
            summary.add_artifact(await self.file_service.save_summary(summary))
            structured.info(
                "Run finished",
                command=config.command,
                status=summary.status.value,
                config_hash=config_hash,
                artifacts=len(summary.artifacts),
                seconds=f"{summary.duration_seconds:.1f}",
            )
        return summary

    def _provenance(self, config: RunConfig, config_hash: str) -> Dict[str, Any]:
        provenance = {
            "package_version": package_version(),
            "config_hash": config_hash,
            "config": config.model_dump(mode="json"),
            "units": UNITS.describe(),
            "engine": asdict(self._engine(config)),
            "seeds": {},
            "convergence": [],
        }
        if self.resource_monitor is not None:
            provenance["host"] = self.resource_monitor.snapshot()
        return provenance

    # Inputs shared by the commands

    def _temperature(self, config: RunConfig) -> BathTemperature:
        kelvin = config.temperature_k if config.temperature_k is not None else self.settings.temperature_k
        return BathTemperature(kelvin)

    def _preset(self, config: RunConfig) -> EmitterPreset:
        preset = config.emitter_preset()
        if config.preset == "custom" and config.emitter.sound_speed_nm_per_ps is None:
            preset = replace(preset, sound_speed=self.settings.sound_speed_nm_per_ps)
        return preset

    def _bath(self, config: RunConfig, preset: EmitterPreset) -> Optional[SpectralDensity]:
        return None if config.bath_free else preset.spectral_density

    def _material(self, config: RunConfig, preset: EmitterPreset) -> MaterialParams:
        return config.material.to_material(preset.sound_speed)

    def _engine(self, config: RunConfig, t_p: Optional[float] = None) -> EngineSettings:
        """Settings defaults, finer dt for short pulses, then run-file overrides"""
        base = self.settings.engine_settings(t_p)
        e = config.engine
        return replace(
            base,
            dt=e.dt_ps or base.dt,
            memory_ps=e.memory_ps or base.memory_ps,
            svd_tol=e.svd_tol or base.svd_tol,
            max_bond=e.max_bond or base.max_bond,
        )

    async def _in_thread(self, func: Callable, *args, **kwargs):
        loop = asyncio.get_event_loop()
        return await loop.run_in_executor(None, partial(func, *args, **kwargs))

    async def _emit(self, summary: RunSummary, result: Any, kind: str) -> None:
        paths = await self.file_service.emit_plot_data(result, kind, Path(summary.output_dir), summary.config_hash)
        for path in paths:
            summary.add_artifact(path)

    @staticmethod
    def _derived(sd: SpectralDensity, T: BathTemperature, sound_speed: float) -> Dict[str, Any]:
        return {
            "S": huang_rhys(sd),
            "D_rad_per_ps": polaron_shift(sd),
            "R_nm": confinement_radius(sd, sound_speed),
            "B": franck_condon(sd, T) if sd.z == 3 else None,
        }

    # Commands

    async def _run_fit(self, config: RunConfig, summary: RunSummary) -> None:
        preset = self._preset(config)
        T = self._temperature(config)
        source = Path(config.fit.input)
        if not source.exists():
            raise RunConfigError(f"fit input not found: {source}", key_path="fit.input")
        paths = sorted(source.glob("*.csv")) if source.is_dir() else [source]
        if not paths:
            raise RunConfigError(f"no .csv spectra in {source}", key_path="fit.input")

        cfg = FitConfig(
            z=preset.z,
            temperature_k=T.kelvin,
            window_nm=config.fit.window_nm,
            baseline=config.fit.baseline,
            baseline_value=config.fit.baseline_value,
            weights=config.fit.weights,
            domain=config.fit.domain,
            multi_start=config.fit.multi_start or self.settings.fit_multi_start,
            seed=config.fit.seed if config.fit.seed is not None else self.settings.fit_seed,
            max_nfev=self.settings.fit_max_nfev,
        )
        summary.provenance["seeds"]["fit"] = cfg.seed

        outcomes = await self.spectrum_service.fit_many(paths, cfg, self._material(config, preset))
        fits = []
        for outcome in outcomes:
            if config.fit.label and len(outcomes) == 1:
                outcome.result.label = config.fit.label
            await self._emit(summary, outcome, "fit")
            fits.append(outcome.to_dict())
            if outcome.result.at_bounds:
                summary.warnings.append(
                    f"{outcome.result.label}: parameters at bounds: {', '.join(outcome.result.at_bounds)}"
                )
            if not outcome.result.converged:
                summary.warnings.append(f"{outcome.result.label}: optimizer did not converge")
        summary.results["fits"] = fits

    async def _run_spectrum(self, config: RunConfig, summary: RunSummary) -> None:
        preset = self._preset(config)
        if not preset.has_lineshape:
            raise RunConfigError(
                f"preset {preset.name} carries no lineshape parameters; set emitter.omega_X_tilde_rad_per_ps, "
                "emitter.A and emitter.W_rad_per_ps",
                key_path="emitter",
            )
        T = self._temperature(config)
        params = preset.lineshape_params(T.kelvin)
        if config.bath_free:
            params = replace(params, sd=SpectralDensity(0.0, params.sd.omega_c, params.sd.z))
        section = config.spectrum
        grid = np.linspace(
            params.omega_X_tilde - section.span_rad_per_ps,
            params.omega_X_tilde + section.span_rad_per_ps,
            section.n_points,
        )
        outcome = await self.spectrum_service.compute_spectrum(
            params, grid, decompose=section.decompose, instrument_fwhm=section.instrument_fwhm_rad_per_ps
        )
        await self._emit(summary, outcome, "spectrum")
        summary.results["spectrum"] = outcome.to_dict()
        summary.results["derived"] = self._derived(params.sd, T, preset.sound_speed)

    async def _run_rabi(self, config: RunConfig, summary: RunSummary) -> None:
        preset = self._preset(config)
        sd = self._bath(config, preset)
        T = self._temperature(config)
        thetas = config.scan.theta_pi.values() * math.pi
        engine = partial(self._engine, config)
        runner = self.scan_service.runner(asyncio.get_event_loop())

        curves = await self._in_thread(rabi_sweep, sd, T, config.scan.t_p_ps, thetas, engine, runner)
        await self._emit(summary, curves, "rabi")
        summary.results["curves"] = [
            {
                "t_p_ps": c.t_p,
                "first_maximum": {"P_X": c.first_max_value, "theta_pi": c.first_max_theta / math.pi},
                "local_maxima": c.local_maxima,
            }
            for c in curves
        ]
        if config.engine.convergence_check:
            for c in curves:
                await self._check_convergence(
                    summary, resonant_sequence(c.first_max_theta, c.t_p), sd, T, self._engine(config, c.t_p)
                )

    async def _run_phonon_assisted(self, config: RunConfig, summary: RunSummary) -> None:
        preset = self._preset(config)
        sd = self._bath(config, preset)
        T = self._temperature(config)
        scan_cfg = config.scan
        t_p = scan_cfg.t_p_ps[0] if "t_p_ps" in scan_cfg.model_fields_set else PHONON_ASSISTED_T_P
        if scan_cfg.delta_rad_per_ps is not None:
            deltas = scan_cfg.delta_rad_per_ps.values()
        else:
            deltas = np.linspace(*PHONON_ASSISTED_DELTAS, DEFAULT_MAP_POINTS)
        thetas = scan_cfg.theta_pi.values() * math.pi
        engine = self._engine(config, t_p)
        runner = self.scan_service.runner(asyncio.get_event_loop())

        scan = await self._in_thread(phonon_assisted_map, sd, T, deltas, thetas, engine, t_p, runner)
        await self._finish_map(config, summary, scan, PhononAssistedFactory(t_p), sd, T, engine)

    async def _run_super(self, config: RunConfig, summary: RunSummary) -> None:
        """
        Swing-up map; a named layout brings its own bath, pulse 1 and windows

        Without a layout the unscaled windows run with the configured bath.
        """
        scan_cfg = config.scan
        T = self._temperature(config)
        if scan_cfg.layout is not None:
            layout, sd, pulse1 = swing_up_inputs(scan_cfg.layout)
        else:
            layout = SWING_UP_LAYOUTS["free"]
            sd = self._bath(config, self._preset(config))
            pulse1 = GaussianPulse.from_pi_units(layout.theta1_pi, layout.t_p, layout.delta1)
        if config.bath_free:
            sd = None

        if scan_cfg.delta_rad_per_ps is not None:
            delta2s = scan_cfg.delta_rad_per_ps.values()
        else:
            delta2s = np.linspace(*layout.delta2_range, DEFAULT_MAP_POINTS)
        if "theta_pi" in scan_cfg.model_fields_set:
            theta2s = scan_cfg.theta_pi.values() * math.pi
        else:
            theta2s = np.linspace(*layout.theta2_pi_range, DEFAULT_MAP_POINTS) * math.pi
        engine = self._engine(config, pulse1.t_p)
        runner = self.scan_service.runner(asyncio.get_event_loop())

        label = f"super-{scan_cfg.layout}" if scan_cfg.layout else "super"
        scan = await self._in_thread(super_map, sd, T, pulse1, delta2s, theta2s, engine, runner, label)
        await self._finish_map(config, summary, scan, SuperFactory(pulse1), sd, T, engine)

    async def _finish_map(
        self,
        config: RunConfig,
        summary: RunSummary,
        scan: ScanResult,
        factory: Callable[[float, float], PulseSequence],
        sd: Optional[SpectralDensity],
        T: BathTemperature,
        engine: EngineSettings,
    ) -> None:
        await self._emit(summary, scan, "map")
        summary.results["map"] = self._map_summary(scan)
        if not scan.all_converged:
            summary.warnings.append(f"{int((~scan.converged).sum())} scan points flagged accuracy warnings")

        best = scan
        if config.scan.refine:
            runner = self.scan_service.runner(asyncio.get_event_loop())
            best = await self._in_thread(refine_argmax, scan, factory, sd, T, engine, 5, runner)
            await self._emit(summary, best, "map")
            summary.results["refined"] = self._map_summary(best)

        if config.engine.convergence_check:
            argmax = best.argmax
            await self._check_convergence(summary, factory(argmax.row_value, argmax.col_value), sd, T, engine)

    @staticmethod
    def _map_summary(scan: ScanResult) -> Dict[str, Any]:
        plateau = plateau_region(scan, PLATEAU_LEVEL)
        return {
            "label": scan.label,
            "max_P_X": scan.max_value,
            "argmax": scan.argmax.to_dict(),
            "plateau_level": PLATEAU_LEVEL,
            "plateau_cells": len(plateau),
            "all_converged": scan.all_converged,
        }

    async def _check_convergence(
        self,
        summary: RunSummary,
        seq: PulseSequence,
        sd: Optional[SpectralDensity],
        T: BathTemperature,
        engine: EngineSettings,
    ) -> None:
        readout = await self._in_thread(exciton_population, seq, sd, T, engine, convergence_check=True)
        entry = {"sequence": seq.to_dict(), **readout.to_dict()}
        summary.provenance["convergence"].append(entry)
        if not readout.converged:
            summary.warnings.extend(readout.warnings)

    async def _coherence_inputs(self, config: RunConfig, summary: RunSummary):
        preset = self._preset(config)
        sd = preset.spectral_density
        material = self._material(config, preset)
        T = self._temperature(config)
        section = config.coherence
        gamma_noise = UNITS.ghz_to_rate(section.gamma_noise_ghz)
        if section.W_ghz is not None:
            Gamma = UNITS.lifetime_ns_to_rate(section.reference_tau_ns)
            rates = await self._in_thread(
                linewidth_budget, UNITS.ghz_to_rad_per_ps(section.W_ghz), Gamma, sd, material, T
            )
            gamma_noise = rates.gamma_noise
            summary.results["linewidth_budget"] = {
                "temperature_k": T.kelvin,
                "reference_tau_ns": section.reference_tau_ns,
                **rates.to_dict(),
            }
            if rates.gamma_noise_clamped:
                summary.warnings.append("linewidth below Gamma + gamma_pd; gamma_noise clamped to 0")
        return sd, material, T, gamma_noise

    async def _run_dephasing(self, config: RunConfig, summary: RunSummary) -> None:
        sd, material, T, gamma_noise = await self._coherence_inputs(config, summary)
        section = config.coherence
        curves = await self._in_thread(
            temperature_curves, sd, material, section.temperatures_k, section.tau_ns, gamma_noise
        )
        await self._emit(summary, curves, "coherence")
        summary.results["gamma_pd_ghz"] = [
            {"temperature_k": float(t), "gamma_pd_ghz": UNITS.rate_to_ghz(float(g))}
            for t, g in zip(curves.temperatures_k, curves.gamma_pd)
        ]

    async def _run_indist(self, config: RunConfig, summary: RunSummary) -> None:
        sd, material, T, gamma_noise = await self._coherence_inputs(config, summary)
        section = config.coherence
        temperatures: List[float] = sorted(set(section.temperatures_k) | {T.kelvin})
        curves = await self._in_thread(
            temperature_curves, sd, material, temperatures, section.tau_ns, gamma_noise
        )
        await self._emit(summary, curves, "coherence")

        row = temperatures.index(T.kelvin)
        gamma_pd = float(curves.gamma_pd[row])
        summary.results["temperature_k"] = T.kelvin
        summary.results["gamma_pd_ghz"] = UNITS.rate_to_ghz(gamma_pd)
        summary.results["gamma_noise_ghz"] = UNITS.rate_to_ghz(gamma_noise)
        summary.results["indistinguishability"] = [
            {
                "tau_ns": float(tau),
                "I_phonon_only": float(a),
                "I_with_noise": float(b),
            }
            for tau, a, b in zip(curves.tau_ns, curves.indist_phonon_only[row], curves.indist_with_noise[row])
        ]
        summary.results["I_phonon_only_min_over_tau"] = float(np.min(curves.indist_phonon_only[row]))
