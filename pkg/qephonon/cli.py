#!/usr/bin/env python3
"""
qephonon command line entry point

Every simulation command builds a validated RunConfig and hands it to the
workflow service; ``qephonon run`` does the same from a YAML file.
Exit codes: 0 success, 1 unexpected failure, 2 configuration or input
error, 3 numerical failure, 130 interrupted.
"""

import asyncio
import json
from pathlib import Path
from typing import Any, Dict, List, Optional

import typer
import yaml
from pydantic import ValidationError
from typing_extensions import Annotated

from qephonon.config import build_run_config, get_settings, load_run_config
from qephonon.config.user_config import get_user_config_manager, CONFIGURABLE_KEYS
from qephonon.config.validation import validate_environment
from qephonon.exceptions import QEPhononError, RunConfigError
from qephonon.exceptions.base import EXIT_CONFIG, EXIT_FAILURE
from qephonon.models.run import RunStatus, RunSummary
from qephonon.models.run_config import PRESETS, SWING_UP_LAYOUTS, RunConfig
from qephonon.repositories.interfaces import FileRepository
from qephonon.repositories.file_repository import FileRepositoryImpl
from qephonon.services.interfaces import FileService, ScanService, SpectrumService, WorkflowService
from qephonon.services.file_service import json_safe
from qephonon.services.resources import ResourceMonitor
from qephonon.services.scan_service import ScanServiceImpl
from qephonon.services.spectrum_service import SpectrumServiceImpl
from qephonon.services.workflow_service import WorkflowServiceImpl
from qephonon.utils.logging import setup_logging, get_logger

logger = get_logger(__name__)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]

EXIT_INTERRUPTED = 130


class ServiceContainer:
    """Dependency injection container for services"""

    def __init__(self, workers: Optional[int] = None, show_progress: bool = True):
        self.settings = get_settings()
        self.show_progress = show_progress
        self._resource_monitor: Optional[ResourceMonitor] = None
        self._requested_workers = workers
        self._file_repository: Optional[FileRepository] = None
        self._spectrum_service: Optional[SpectrumService] = None
        self._scan_service: Optional[ScanService] = None
        self._file_service: Optional[FileService] = None
        self._workflow_service: Optional[WorkflowService] = None

    @property
    def resource_monitor(self) -> ResourceMonitor:
        if self._resource_monitor is None:
            self._resource_monitor = ResourceMonitor(self.settings.max_workers)
        return self._resource_monitor

    @property
    def workers(self) -> int:
        return self.resource_monitor.recommended_workers(self._requested_workers)

    @property
    def file_repository(self) -> FileRepository:
        if self._file_repository is None:
            self._file_repository = FileRepositoryImpl()
        return self._file_repository

    @property
    def spectrum_service(self) -> SpectrumService:
        if self._spectrum_service is None:
            self._spectrum_service = SpectrumServiceImpl(
                max_workers=self.workers,
                envelope_tol=self.settings.spectrum_envelope_tol,
                max_window_ps=self.settings.spectrum_max_window_ps,
            )
        return self._spectrum_service

    @property
    def scan_service(self) -> ScanService:
        if self._scan_service is None:
            self._scan_service = ScanServiceImpl(max_workers=self.workers, show_progress=self.show_progress)
        return self._scan_service

    @property
    def file_service(self) -> FileService:
        if self._file_service is None:
            # Import here to avoid circular imports
            from qephonon.services.file_service import FileServiceImpl
            self._file_service = FileServiceImpl(
                file_repository=self.file_repository,
                output_base_dir=Path(self.settings.output_base_dir),
            )
        return self._file_service

    @property
    def workflow_service(self) -> WorkflowService:
        if self._workflow_service is None:
            self._workflow_service = WorkflowServiceImpl(
                spectrum_service=self.spectrum_service,
                scan_service=self.scan_service,
                file_service=self.file_service,
                resource_monitor=self.resource_monitor,
            )
        return self._workflow_service

    def close(self) -> None:
        if self._scan_service is not None:
            self._scan_service.shutdown()
        if self._file_repository is not None:
            self._file_repository.close()


def _setup(log_level: str) -> None:
    if log_level.upper() not in LOG_LEVELS:
        typer.echo(f"Error: Invalid log level '{log_level}'. Choose from: {', '.join(LOG_LEVELS)}", err=True)
        raise typer.Exit(EXIT_CONFIG)
    setup_logging(console_level=log_level.upper())


def _put(data: Dict[str, Any], key_path: str, value: Any) -> None:
    """Set a dotted key, skipping unset CLI options"""
    if value is None:
        return
    node = data
    *parents, leaf = key_path.split(".")
    for part in parents:
        node = node.setdefault(part, {})
    node[leaf] = value


def _grid(start: Optional[float], stop: Optional[float], n: Optional[int], default: tuple) -> Optional[dict]:
    """Grid dict from partial CLI input, or None when nothing was given"""
    if start is None and stop is None and n is None:
        return None
    d_start, d_stop, d_n = default
    return {
        "start": d_start if start is None else start,
        "stop": d_stop if stop is None else stop,
        "n": d_n if n is None else n,
    }


def _common(
    data: Dict[str, Any],
    preset: Optional[str],
    temperature: Optional[float],
    output_dir: Optional[str],
    workers: Optional[int],
    bath_free: bool = False,
) -> Dict[str, Any]:
    _put(data, "preset", preset)
    _put(data, "temperature_k", temperature)
    _put(data, "output_dir", output_dir)
    _put(data, "workers", workers)
    if bath_free:
        data["bath_free"] = True
    return data


def _engine(
    data: Dict[str, Any],
    dt: Optional[float],
    memory_ps: Optional[float],
    svd_tol: Optional[float],
    max_bond: Optional[int],
    convergence_check: bool,
) -> None:
    _put(data, "engine.dt_ps", dt)
    _put(data, "engine.memory_ps", memory_ps)
    _put(data, "engine.svd_tol", svd_tol)
    _put(data, "engine.max_bond", max_bond)
    if convergence_check:
        _put(data, "engine.convergence_check", True)


def _parse_sets(assignments: Optional[List[str]]) -> Dict[str, Any]:
    """KEY=VALUE pairs with YAML-typed values"""
    overrides: Dict[str, Any] = {}
    for item in assignments or []:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise RunConfigError(f"override '{item}' must look like key.path=value", key_path=item)
        overrides[key.strip()] = yaml.safe_load(raw)
    return overrides


def _report(summary: RunSummary) -> None:
    """Short human summary on stdout"""
    typer.echo(f"Command:     {summary.command}")
    typer.echo(f"Config hash: {summary.config_hash}")
    typer.echo(f"Output:      {summary.output_dir}")
    typer.echo(f"Artifacts:   {len(summary.artifacts)}")
    if summary.duration_seconds is not None:
        typer.echo(f"Duration:    {summary.duration_seconds:.1f} s")
    for warning in summary.warnings:
        typer.echo(f"Warning: {warning}", err=True)
    typer.echo(json.dumps(json_safe(summary.results), indent=2, sort_keys=True))


def _exit_code(error: BaseException) -> int:
    if isinstance(error, ValidationError):
        return EXIT_CONFIG
    return getattr(error, "exit_code", EXIT_FAILURE)


def _describe_error(error: BaseException) -> str:
    key_path = getattr(error, "key_path", None)
    message = str(getattr(error, "message", error))
    if key_path and not message.startswith(key_path):
        return f"{key_path}: {message}"
    return message


def execute_config(config: RunConfig, show_progress: bool = True) -> RunSummary:
    """Run one validated config through the workflow service"""
    services = ServiceContainer(workers=config.workers, show_progress=show_progress)
    try:
        return asyncio.run(services.workflow_service.execute(config))
    finally:
        services.close()


def _run(
    data: Optional[Dict[str, Any]] = None,
    config_file: Optional[Path] = None,
    overrides: Optional[Dict[str, Any]] = None,
    log_level: str = "INFO",
) -> None:
    _setup(log_level)
    try:
        if config_file is not None:
            config = load_run_config(config_file, overrides)
        else:
            config = build_run_config(data or {}, overrides)
        logger.info(f"Running {config.command} with preset {config.preset}")
        summary = execute_config(config)
    except KeyboardInterrupt:
        typer.echo("\nInterrupted by user", err=True)
        raise typer.Exit(EXIT_INTERRUPTED)
    except (QEPhononError, ValidationError) as e:
        code = _exit_code(e)
        typer.echo(f"Error: {_describe_error(e)}", err=True)
        logger.debug("Run failed", exc_info=True)
        raise typer.Exit(code)
    except Exception as e:
        typer.echo(f"Fatal error: {e}", err=True)
        logger.debug("Run failed", exc_info=True)
        raise typer.Exit(EXIT_FAILURE)

    _report(summary)
    if summary.status != RunStatus.COMPLETED:
        raise typer.Exit(EXIT_FAILURE)


app = typer.Typer(
    name="qephonon",
    help="qephonon - phonon-coupled single-photon emitters: lineshape fits, spectra, driven dynamics and coherence",
    rich_markup_mode="rich",
    add_completion=False,
    epilog="""Examples:

  # Fit a measured spectrum with a 2D bath
  qephonon fit --input emitterA.csv --dim 2

  # Model spectrum of a preset
  qephonon spectrum --preset A3D --temperature 4

  # Rabi rotations and excitation maps
  qephonon rabi --preset InAs --t-p 1 --t-p 3
  qephonon phonon-assisted --preset A2D --refine
  qephonon super --layout A2D

  # Coherence (effective masses are required)
  qephonon indist --m-e 0.29 --m-h 0.36 --temperatures 4 --temperatures 20

  # Batch run from a file
  qephonon run configs/rabi_inas.yaml --set engine.dt_ps=0.02
"""
)

PresetOpt = Annotated[Optional[str], typer.Option("--preset", "-p", help=f"Emitter preset ({', '.join(PRESETS)}, custom)")]
TemperatureOpt = Annotated[Optional[float], typer.Option("--temperature", "-T", help="Bath temperature in K (default from settings)")]
OutputDirOpt = Annotated[Optional[str], typer.Option("--output-dir", "-o", help="Base output directory (default: ./results)")]
WorkersOpt = Annotated[Optional[int], typer.Option("--workers", "-j", help="Worker processes for scans and batch fits")]
BathFreeOpt = Annotated[bool, typer.Option("--bath-free", help="Switch the phonon bath off (alpha = 0)")]
LogLevelOpt = Annotated[str, typer.Option("--log-level", help="Logging level")]
DtOpt = Annotated[Optional[float], typer.Option("--dt", help="Engine time step in ps")]
MemoryOpt = Annotated[Optional[float], typer.Option("--memory-ps", help="Engine memory window in ps")]
SvdTolOpt = Annotated[Optional[float], typer.Option("--svd-tol", help="Relative SVD truncation tolerance")]
MaxBondOpt = Annotated[Optional[int], typer.Option("--max-bond", help="Maximum MPS bond dimension")]
ConvergenceOpt = Annotated[bool, typer.Option("--convergence-check", help="Repeat key points with dt/2 and a tighter SVD tolerance")]
AlphaOpt = Annotated[Optional[float], typer.Option("--alpha", help="Coupling strength override")]
OmegaCOpt = Annotated[Optional[float], typer.Option("--omega-c", help="Cutoff frequency override in rad/ps")]
DimOpt = Annotated[Optional[int], typer.Option("--dim", "-z", help="Bath dimensionality override (2 or 3)")]


@app.command("fit")
def fit(
    input_path: Annotated[str, typer.Option("--input", "-i", help="Spectrum CSV file or a directory of CSV files")],
    dim: DimOpt = None,
    preset: PresetOpt = None,
    window_min_nm: Annotated[Optional[float], typer.Option("--window-min-nm", help="Lower edge of the fit window in nm")] = None,
    window_max_nm: Annotated[Optional[float], typer.Option("--window-max-nm", help="Upper edge of the fit window in nm")] = None,
    baseline: Annotated[Optional[str], typer.Option("--baseline", help="Baseline handling (none, constant, linear)")] = None,
    baseline_value: Annotated[Optional[float], typer.Option("--baseline-value", help="Fixed baseline to subtract")] = None,
    weights: Annotated[Optional[str], typer.Option("--weights", help="Residual weights (uniform, poisson)")] = None,
    domain: Annotated[Optional[str], typer.Option("--domain", help="Fit domain (frequency, wavelength)")] = None,
    multi_start: Annotated[Optional[int], typer.Option("--multi-start", help="Number of optimizer starts")] = None,
    seed: Annotated[Optional[int], typer.Option("--seed", help="Random seed for multi-start")] = None,
    label: Annotated[Optional[str], typer.Option("--label", help="Label for the fit artifacts")] = None,
    temperature: TemperatureOpt = None,
    output_dir: OutputDirOpt = None,
    workers: WorkersOpt = None,
    log_level: LogLevelOpt = "INFO",
):
    """Fit a measured emission spectrum with the independent-boson lineshape"""
    if (window_min_nm is None) != (window_max_nm is None):
        typer.echo("Error: --window-min-nm and --window-max-nm go together", err=True)
        raise typer.Exit(EXIT_CONFIG)
    if preset is None:
        preset = "A3D" if dim == 3 else "A2D"
    data: Dict[str, Any] = {"command": "fit", "fit": {"input": input_path}}
    _common(data, preset, temperature, output_dir, workers)
    _put(data, "emitter.z", dim)
    if window_min_nm is not None:
        _put(data, "fit.window_nm", [window_min_nm, window_max_nm])
    _put(data, "fit.baseline", baseline)
    _put(data, "fit.baseline_value", baseline_value)
    _put(data, "fit.weights", weights)
    _put(data, "fit.domain", domain)
    _put(data, "fit.multi_start", multi_start)
    _put(data, "fit.seed", seed)
    _put(data, "fit.label", label)
    _run(data, log_level=log_level)


@app.command("spectrum")
def spectrum(
    preset: PresetOpt = None,
    alpha: AlphaOpt = None,
    omega_c: OmegaCOpt = None,
    dim: DimOpt = None,
    span: Annotated[Optional[float], typer.Option("--span", help="Half width of the frequency grid around the ZPL in rad/ps")] = None,
    points: Annotated[Optional[int], typer.Option("--points", help="Number of grid points")] = None,
    no_decompose: Annotated[bool, typer.Option("--no-decompose", help="Skip the ZPL/PSB decomposition")] = False,
    instrument_fwhm: Annotated[Optional[float], typer.Option("--instrument-fwhm", help="Gaussian instrument FWHM in rad/ps")] = None,
    temperature: TemperatureOpt = None,
    bath_free: BathFreeOpt = False,
    output_dir: OutputDirOpt = None,
    log_level: LogLevelOpt = "INFO",
):
    """Model emission spectrum of a preset or custom emitter"""
    data: Dict[str, Any] = {"command": "spectrum"}
    _common(data, preset, temperature, output_dir, None, bath_free)
    _put(data, "emitter.alpha", alpha)
    _put(data, "emitter.omega_c_rad_per_ps", omega_c)
    _put(data, "emitter.z", dim)
    _put(data, "spectrum.span_rad_per_ps", span)
    _put(data, "spectrum.n_points", points)
    _put(data, "spectrum.instrument_fwhm_rad_per_ps", instrument_fwhm)
    if no_decompose:
        _put(data, "spectrum.decompose", False)
    _run(data, log_level=log_level)


@app.command("rabi")
def rabi(
    preset: PresetOpt = None,
    alpha: AlphaOpt = None,
    omega_c: OmegaCOpt = None,
    dim: DimOpt = None,
    t_p: Annotated[Optional[List[float]], typer.Option("--t-p", help="Pulse duration in ps (repeatable)")] = None,
    theta_start: Annotated[Optional[float], typer.Option("--theta-start", help="First pulse area in units of pi")] = None,
    theta_stop: Annotated[Optional[float], typer.Option("--theta-stop", help="Last pulse area in units of pi")] = None,
    theta_n: Annotated[Optional[int], typer.Option("--theta-n", help="Number of pulse areas")] = None,
    temperature: TemperatureOpt = None,
    bath_free: BathFreeOpt = False,
    dt: DtOpt = None,
    memory_ps: MemoryOpt = None,
    svd_tol: SvdTolOpt = None,
    max_bond: MaxBondOpt = None,
    convergence_check: ConvergenceOpt = False,
    output_dir: OutputDirOpt = None,
    workers: WorkersOpt = None,
    log_level: LogLevelOpt = "INFO",
):
    """Resonant Rabi rotations: final exciton population against pulse area"""
    data: Dict[str, Any] = {"command": "rabi"}
    _common(data, preset, temperature, output_dir, workers, bath_free)
    _put(data, "emitter.alpha", alpha)
    _put(data, "emitter.omega_c_rad_per_ps", omega_c)
    _put(data, "emitter.z", dim)
    _put(data, "scan.t_p_ps", list(t_p) if t_p else None)
    _put(data, "scan.theta_pi", _grid(theta_start, theta_stop, theta_n, (0.5, 20.0, 25)))
    _engine(data, dt, memory_ps, svd_tol, max_bond, convergence_check)
    _run(data, log_level=log_level)


@app.command("phonon-assisted")
def phonon_assisted(
    preset: PresetOpt = None,
    alpha: AlphaOpt = None,
    omega_c: OmegaCOpt = None,
    dim: DimOpt = None,
    t_p: Annotated[Optional[float], typer.Option("--t-p", help="Pulse duration in ps (default 8)")] = None,
    delta_start: Annotated[Optional[float], typer.Option("--delta-start", help="First detuning in rad/ps")] = None,
    delta_stop: Annotated[Optional[float], typer.Option("--delta-stop", help="Last detuning in rad/ps")] = None,
    delta_n: Annotated[Optional[int], typer.Option("--delta-n", help="Number of detunings")] = None,
    theta_start: Annotated[Optional[float], typer.Option("--theta-start", help="First pulse area in units of pi")] = None,
    theta_stop: Annotated[Optional[float], typer.Option("--theta-stop", help="Last pulse area in units of pi")] = None,
    theta_n: Annotated[Optional[int], typer.Option("--theta-n", help="Number of pulse areas")] = None,
    refine: Annotated[bool, typer.Option("--refine", help="Refine the map maximum on a finer local grid")] = False,
    temperature: TemperatureOpt = None,
    dt: DtOpt = None,
    memory_ps: MemoryOpt = None,
    svd_tol: SvdTolOpt = None,
    max_bond: MaxBondOpt = None,
    convergence_check: ConvergenceOpt = False,
    output_dir: OutputDirOpt = None,
    workers: WorkersOpt = None,
    log_level: LogLevelOpt = "INFO",
):
    """Phonon-assisted excitation map over detuning and pulse area"""
    data: Dict[str, Any] = {"command": "phonon-assisted"}
    _common(data, preset, temperature, output_dir, workers)
    _put(data, "emitter.alpha", alpha)
    _put(data, "emitter.omega_c_rad_per_ps", omega_c)
    _put(data, "emitter.z", dim)
    _put(data, "scan.t_p_ps", [t_p] if t_p is not None else None)
    _put(data, "scan.delta_rad_per_ps", _grid(delta_start, delta_stop, delta_n, (0.25, 10.0, 40)))
    _put(data, "scan.theta_pi", _grid(theta_start, theta_stop, theta_n, (0.5, 20.0, 25)))
    if refine:
        _put(data, "scan.refine", True)
    _engine(data, dt, memory_ps, svd_tol, max_bond, convergence_check)
    _run(data, log_level=log_level)


@app.command("super")
def super_scan(
    layout_name: Annotated[Optional[str], typer.Option("--layout", help=f"Named two-pulse layout ({', '.join(SWING_UP_LAYOUTS)})")] = None,
    preset: PresetOpt = None,
    delta_start: Annotated[Optional[float], typer.Option("--delta-start", help="First second-pulse detuning in rad/ps")] = None,
    delta_stop: Annotated[Optional[float], typer.Option("--delta-stop", help="Last second-pulse detuning in rad/ps")] = None,
    delta_n: Annotated[Optional[int], typer.Option("--delta-n", help="Number of detunings")] = None,
    theta_start: Annotated[Optional[float], typer.Option("--theta-start", help="First second-pulse area in units of pi")] = None,
    theta_stop: Annotated[Optional[float], typer.Option("--theta-stop", help="Last second-pulse area in units of pi")] = None,
    theta_n: Annotated[Optional[int], typer.Option("--theta-n", help="Number of pulse areas")] = None,
    refine: Annotated[bool, typer.Option("--refine", help="Refine the map maximum on a finer local grid")] = False,
    temperature: TemperatureOpt = None,
    bath_free: BathFreeOpt = False,
    dt: DtOpt = None,
    memory_ps: MemoryOpt = None,
    svd_tol: SvdTolOpt = None,
    max_bond: MaxBondOpt = None,
    convergence_check: ConvergenceOpt = False,
    output_dir: OutputDirOpt = None,
    workers: WorkersOpt = None,
    log_level: LogLevelOpt = "INFO",
):
    """Two-pulse swing-up map over the second pulse's detuning and area"""
    layout = SWING_UP_LAYOUTS.get(layout_name or "free", SWING_UP_LAYOUTS["free"])
    data: Dict[str, Any] = {"command": "super"}
    _common(data, preset, temperature, output_dir, workers, bath_free)
    _put(data, "scan.layout", layout_name)
    _put(data, "scan.delta_rad_per_ps", _grid(delta_start, delta_stop, delta_n, (*layout.delta2_range, 40)))
    _put(data, "scan.theta_pi", _grid(theta_start, theta_stop, theta_n, (*layout.theta2_pi_range, 40)))
    if refine:
        _put(data, "scan.refine", True)
    _engine(data, dt, memory_ps, svd_tol, max_bond, convergence_check)
    _run(data, log_level=log_level)


def _coherence_data(
    command: str,
    preset: Optional[str],
    m_e: Optional[float],
    m_h: Optional[float],
    temperatures: Optional[List[float]],
    tau_ns: Optional[List[float]],
    gamma_noise: Optional[float],
    linewidth_ghz: Optional[float],
    reference_tau_ns: Optional[float],
) -> Dict[str, Any]:
    data: Dict[str, Any] = {"command": command}
    _put(data, "preset", preset)
    _put(data, "material.m_e_eff", m_e)
    _put(data, "material.m_h_eff", m_h)
    _put(data, "coherence.temperatures_k", list(temperatures) if temperatures else None)
    _put(data, "coherence.tau_ns", list(tau_ns) if tau_ns else None)
    _put(data, "coherence.gamma_noise_ghz", gamma_noise)
    _put(data, "coherence.W_ghz", linewidth_ghz)
    _put(data, "coherence.reference_tau_ns", reference_tau_ns)
    return data


MeOpt = Annotated[Optional[float], typer.Option("--m-e", help="Electron effective mass in units of m_0 (required)")]
MhOpt = Annotated[Optional[float], typer.Option("--m-h", help="Hole effective mass in units of m_0 (required)")]
TemperaturesOpt = Annotated[Optional[List[float]], typer.Option("--temperatures", help="Temperature in K (repeatable)")]
TauOpt = Annotated[Optional[List[float]], typer.Option("--tau-ns", help="Radiative lifetime in ns (repeatable)")]
NoiseOpt = Annotated[Optional[float], typer.Option("--gamma-noise", help="Extra noise dephasing in GHz")]
LinewidthOpt = Annotated[Optional[float], typer.Option("--linewidth-ghz", help="Measured ZPL linewidth in GHz; noise is inferred from it")]
ReferenceTauOpt = Annotated[Optional[float], typer.Option("--reference-tau-ns", help="Lifetime used for the linewidth budget")]


@app.command("dephasing")
def dephasing(
    preset: PresetOpt = None,
    m_e: MeOpt = None,
    m_h: MhOpt = None,
    temperatures: TemperaturesOpt = None,
    tau_ns: TauOpt = None,
    gamma_noise: NoiseOpt = None,
    linewidth_ghz: LinewidthOpt = None,
    reference_tau_ns: ReferenceTauOpt = None,
    temperature: TemperatureOpt = None,
    output_dir: OutputDirOpt = None,
    log_level: LogLevelOpt = "INFO",
):
    """Pure dephasing rate from quadratic coupling to a 2D bath against temperature"""
    data = _coherence_data(
        "dephasing", preset, m_e, m_h, temperatures, tau_ns, gamma_noise, linewidth_ghz, reference_tau_ns
    )
    _common(data, None, temperature, output_dir, None)
    _run(data, log_level=log_level)


@app.command("indist")
def indist(
    preset: PresetOpt = None,
    m_e: MeOpt = None,
    m_h: MhOpt = None,
    temperatures: TemperaturesOpt = None,
    tau_ns: TauOpt = None,
    gamma_noise: NoiseOpt = None,
    linewidth_ghz: LinewidthOpt = None,
    reference_tau_ns: ReferenceTauOpt = None,
    temperature: TemperatureOpt = None,
    output_dir: OutputDirOpt = None,
    log_level: LogLevelOpt = "INFO",
):
    """Single-photon indistinguishability against lifetime and temperature"""
    data = _coherence_data(
        "indist", preset, m_e, m_h, temperatures, tau_ns, gamma_noise, linewidth_ghz, reference_tau_ns
    )
    _common(data, None, temperature, output_dir, None)
    _run(data, log_level=log_level)


@app.command("run")
def run(
    config_file: Annotated[Path, typer.Argument(help="YAML run configuration")],
    set_values: Annotated[Optional[List[str]], typer.Option("--set", help="Override a key, e.g. engine.dt_ps=0.02 (repeatable)")] = None,
    output_dir: OutputDirOpt = None,
    workers: WorkersOpt = None,
    log_level: LogLevelOpt = "INFO",
):
    """Execute a batch run described by a YAML file"""
    try:
        overrides = _parse_sets(set_values)
    except (RunConfigError, yaml.YAMLError) as e:
        typer.echo(f"Error: {_describe_error(e)}", err=True)
        raise typer.Exit(EXIT_CONFIG)
    overrides["output_dir"] = output_dir
    overrides["workers"] = workers
    _run(config_file=config_file, overrides=overrides, log_level=log_level)


@app.command("presets")
def presets(
    as_json: Annotated[bool, typer.Option("--json", help="Print presets as JSON")] = False,
):
    """List emitter presets"""
    if as_json:
        typer.echo(json.dumps({name: p.to_dict() for name, p in PRESETS.items()}, indent=2))
        return

    typer.echo("Emitter Presets:")
    typer.echo("=" * 78)
    typer.echo(f"  {'name':<6} {'z':>2} {'alpha':>7} {'omega_c':>8} {'omega_X':>9} {'A':>8} {'W':>7}  description")
    for name, p in PRESETS.items():
        omega_x = f"{p.omega_X_tilde:9.2f}" if p.omega_X_tilde is not None else f"{'-':>9}"
        amplitude = f"{p.A:8.2f}" if p.A is not None else f"{'-':>8}"
        width = f"{p.W:7.3f}" if p.W is not None else f"{'-':>7}"
        typer.echo(f"  {name:<6} {p.z:>2} {p.alpha:7.3f} {p.omega_c:8.3f} {omega_x} {amplitude} {width}  {p.description}")
    typer.echo("")
    typer.echo("Units: omega in rad/ps, A in spectrum units, W in rad/ps")


# Config subcommand group
config_app = typer.Typer(
    name="config",
    help="Manage user configuration (stored in ~/.qephonon/config.yaml)",
    rich_markup_mode="rich",
)


def _range_text(info: Dict[str, Any]) -> Optional[str]:
    if "choices" in info:
        return ", ".join(map(str, info["choices"]))
    if "min" not in info and "max" not in info:
        return None
    unit = f" {info['unit']}" if "unit" in info else ""
    return f"Range: {info.get('min', '')} ~ {info.get('max', '')}{unit}"


@config_app.command("get")
def config_get(
    key: Annotated[
        Optional[str],
        typer.Argument(help="Configuration key to retrieve. Omit to list all.")
    ] = None,
    verbose: Annotated[
        bool,
        typer.Option("--verbose", "-v", help="Show detailed options and ranges")
    ] = False,
):
    """Show one user default or all of them; '*' marks values set by the user"""
    manager = get_user_config_manager()

    if key is None:
        for k, info in CONFIGURABLE_KEYS.items():
            stored = manager.get(k)
            unit = f" {info['unit']}" if "unit" in info else ""
            typer.echo(f"{'*' if stored is not None else ' '} {k:<28} {manager.get_effective_value(k)}{unit}")
            if verbose and _range_text(info):
                typer.echo(f"    └─ {_range_text(info)}")
        typer.echo("")
        typer.echo(f"* = User configured  |  Config: {manager.config_path}")
        if not verbose:
            typer.echo("Use --verbose (-v) for available options")
        return

    if key not in CONFIGURABLE_KEYS:
        typer.echo(f"Error: Unknown configuration key: {key}", err=True)
        typer.echo("\nAvailable keys: " + ", ".join(CONFIGURABLE_KEYS), err=True)
        raise typer.Exit(1)

    info = CONFIGURABLE_KEYS[key]
    source = "" if manager.get(key) is not None else " (default)"
    typer.echo(f"{key}={manager.get_effective_value(key)}{source}")
    typer.echo(info["description"])
    if _range_text(info):
        typer.echo(_range_text(info))


@config_app.command("set")
def config_set(
    key: Annotated[str, typer.Argument(help="Configuration key to set")],
    value: Annotated[str, typer.Argument(help="Value to set")],
):
    """Store a user default after type and range checks"""
    manager = get_user_config_manager()

    try:
        manager.set(key, value)
    except KeyError as e:
        typer.echo(f"Error: {e.args[0]}", err=True)
        typer.echo("\nAvailable keys: " + ", ".join(CONFIGURABLE_KEYS), err=True)
        raise typer.Exit(1)
    except ValueError as e:
        typer.echo(f"Error: {e}", err=True)
        if "choices" in CONFIGURABLE_KEYS[key]:
            typer.echo(f"Valid values: {_range_text(CONFIGURABLE_KEYS[key])}", err=True)
        raise typer.Exit(1)
    typer.echo(f"Set {key}={manager.get(key)}")
    typer.echo(f"Saved to: {manager.config_path}")


@config_app.command("reset")
def config_reset(
    key: Annotated[
        Optional[str],
        typer.Argument(help="Configuration key to reset. Omit to reset all.")
    ] = None,
    force: Annotated[
        bool,
        typer.Option("--force", "-f", help="Skip confirmation prompt")
    ] = False,
):
    """Drop user defaults so the built-in values apply again"""
    manager = get_user_config_manager()

    if key is not None:
        try:
            manager.reset(key)
        except KeyError as e:
            typer.echo(f"Error: {e.args[0]}", err=True)
            raise typer.Exit(1)
        typer.echo(f"Reset {key} to default.")
        return

    if not force and not typer.confirm("Reset all configuration to defaults?"):
        typer.echo("Cancelled.")
        raise typer.Exit(0)
    manager.reset()
    typer.echo("All configuration reset to defaults.")


@config_app.command("list")
def config_list():
    """Catalogue of configurable keys"""
    typer.echo("Available Configuration Keys:")
    for key, info in CONFIGURABLE_KEYS.items():
        typer.echo(f"\n{key}")
        typer.echo(f"  Description: {info['description']}")
        typer.echo(f"  Default: {info['default']}{' ' + info['unit'] if 'unit' in info else ''}")
        typer.echo(f"  Type: {info['type'].__name__}")
        if _range_text(info):
            label = "Choices: " if "choices" in info else ""
            typer.echo(f"  {label}{_range_text(info)}")


@config_app.command("path")
def config_path():
    """Show configuration file path"""
    manager = get_user_config_manager()

    typer.echo(f"Config directory: {manager.config_dir}")
    typer.echo(f"Config file: {manager.config_path}")
    if manager.config_path.exists():
        typer.echo("Status: File exists")
    else:
        typer.echo("Status: File not created yet (will be created on first 'config set')")


@config_app.command("check")
def config_check():
    """Validate settings, output and log locations"""
    valid, errors = validate_environment(get_settings(), get_user_config_manager().get_all())
    if valid:
        typer.echo("Configuration OK")
        return
    for error in errors:
        typer.echo(f"- {error}", err=True)
    raise typer.Exit(EXIT_CONFIG)


# Register config subcommand
app.add_typer(config_app, name="config")


def main():
    """Main entry point for CLI"""
    app()


if __name__ == "__main__":
    main()
