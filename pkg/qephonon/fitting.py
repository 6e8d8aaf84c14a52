"""
Spectral-density reconstruction by least-squares fitting of the emission lineshape
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import least_squares

from .bath import confinement_radius, franck_condon, huang_rhys, polaron_shift
from .exceptions import (
    DegenerateFitError,
    FitWindowError,
    QEPhononNumericalError,
    SpectrumDataError,
    SpectrumFormatError,
)
from .lineshape import MAX_WINDOW_PS, area_ratio, emission_spectrum, zpl_psb_decompose
from .models.bath import UNITS, MaterialParams
from .models.spectrum import (
    FIT_PARAMETER_NAMES,
    BaselineMode,
    DerivedQuantities,
    FitConfig,
    FitDomain,
    FitResult,
    FitSeries,
    LineshapeParams,
    MeasuredSpectrum,
    SpectrumCurve,
    SpectrumMetadata,
    WeightMode,
)

logger = logging.getLogger(__name__)

ALPHA_BOUNDS = (0.0, 5.0)
OMEGA_C_BOUNDS = (0.05, 20.0)
MIN_WIDTH = 1e-4
DEFAULT_ALPHA = 0.3
DEFAULT_OMEGA_C = 2.0
FAILED_RESIDUAL = 10.0
JACOBIAN_STEP = 1e-6
# Relative to the bound interval (to |x| where the interval is unbounded)
BOUND_RTOL = 1e-4
ALPHA_INDEX = FIT_PARAMETER_NAMES.index("alpha")
OMEGA_C_INDEX = FIT_PARAMETER_NAMES.index("omega_c")
COUPLING_PARAMETERS = ("alpha", "omega_c")
DECOMPOSITION_HALF_SPAN = 12.0  # in units of omega_c
DECOMPOSITION_POINTS = 4001

TABLE_HEADER = ["label", "z", "omega_X_tilde", "A", "W", "alpha", "omega_c", "R_nm", "S", "B"]


def _jacobian_nm(wavelengths_nm: np.ndarray) -> np.ndarray:
    """|d lambda / d omega| = lambda^2 / (2 pi c)"""
    return wavelengths_nm ** 2 / (2.0 * math.pi * UNITS.c_light_nm_per_ps)


def load_metadata(path: Path) -> SpectrumMetadata:
    """Optional JSON sidecar next to the spectrum file"""
    sidecar = path.with_suffix(".json")
    if not sidecar.exists():
        return SpectrumMetadata(source=str(path))
    try:
        data = json.loads(sidecar.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SpectrumFormatError(
            f"metadata sidecar is not valid JSON: {e.msg}", line_number=e.lineno, source=str(sidecar)
        ) from e
    return SpectrumMetadata(
        temperature_k=data.get("temperature_k"),
        integration_time_s=data.get("integration_time_s"),
        emitter_label=data.get("emitter_label", ""),
        source=str(path),
    )


def load_spectrum(path, format: str = "csv") -> MeasuredSpectrum:
    """
    Read a two-column (wavelength_nm, counts) spectrum

    Blank lines and lines starting with '#' are skipped; a first non-numeric
    row is taken as a header. Rows are sorted by wavelength; exact duplicate
    rows are dropped.
    """
    path = Path(path)
    if format != "csv":
        raise SpectrumFormatError(f"unsupported spectrum format '{format}'", source=str(path))

    rows: List[Tuple[float, float, int]] = []
    header_allowed = True
    with path.open(newline="", encoding="utf-8") as f:
        for line_number, record in enumerate(csv.reader(f), start=1):
            if not record or not "".join(record).strip() or record[0].lstrip().startswith("#"):
                continue
            cells = [c.strip() for c in record if c.strip()]
            try:
                if len(cells) != 2:
                    raise ValueError(f"expected 2 columns, found {len(cells)}")
                wavelength, count = float(cells[0]), float(cells[1])
            except ValueError as e:
                if header_allowed and not any(ch.isdigit() for ch in cells[0]):
                    header_allowed = False
                    continue
                raise SpectrumFormatError(
                    f"cannot parse line {line_number}: {e}", line_number=line_number, source=str(path)
                ) from e
            header_allowed = False
            if not math.isfinite(count):
                raise SpectrumDataError(
                    f"non-finite count on line {line_number}", row=line_number, source=str(path)
                )
            if not math.isfinite(wavelength) or wavelength <= 0:
                raise SpectrumDataError(
                    f"invalid wavelength on line {line_number}", row=line_number, source=str(path)
                )
            rows.append((wavelength, count, line_number))

    if len(rows) < 2:
        raise SpectrumDataError("spectrum has fewer than two samples", source=str(path))

    rows.sort(key=lambda r: r[0])
    unique: List[Tuple[float, float, int]] = [rows[0]]
    for row in rows[1:]:
        if row[0] == unique[-1][0]:
            if row[1] != unique[-1][1]:
                raise SpectrumDataError(
                    f"conflicting counts for wavelength {row[0]} nm", row=row[2], source=str(path)
                )
            continue
        unique.append(row)

    data = np.array([(w, c) for w, c, _ in unique])
    spectrum = MeasuredSpectrum(data[:, 0], data[:, 1], load_metadata(path))
    logger.debug(f"Loaded {len(spectrum)} samples from {path}")
    return spectrum


def _estimate_baseline(wavelengths: np.ndarray, counts: np.ndarray, cfg: FitConfig) -> np.ndarray:
    if cfg.baseline == BaselineMode.NONE:
        return np.zeros_like(counts)
    if cfg.baseline == BaselineMode.CONSTANT:
        if cfg.baseline_value is not None:
            return np.full_like(counts, cfg.baseline_value)
        decile = max(1, counts.size // 10)
        return np.full_like(counts, float(np.mean(np.sort(counts)[:decile])))
    decile = max(2, counts.size // 10)
    x = np.concatenate([wavelengths[:decile], wavelengths[-decile:]])
    y = np.concatenate([counts[:decile], counts[-decile:]])
    slope, intercept = np.polyfit(x, y, 1)
    return slope * wavelengths + intercept


def preprocess(s: MeasuredSpectrum, cfg: FitConfig) -> FitSeries:
    """Window, baseline, wavelength -> angular frequency, weights"""
    wavelengths, counts = s.wavelengths_nm, s.counts
    if cfg.window_nm is not None:
        lo, hi = sorted(cfg.window_nm)
        if hi < wavelengths[0] or lo > wavelengths[-1]:
            raise FitWindowError(
                f"fit window {lo}-{hi} nm lies outside the data range "
                f"{wavelengths[0]:.3f}-{wavelengths[-1]:.3f} nm"
            )
        mask = (wavelengths >= lo) & (wavelengths <= hi)
        wavelengths, counts = wavelengths[mask], counts[mask]
    if wavelengths.size == 0:
        raise FitWindowError("fit window contains no samples")
    if wavelengths.size < cfg.min_samples:
        raise FitWindowError(
            f"fit window contains {wavelengths.size} samples, at least {cfg.min_samples} required"
        )

    baseline = _estimate_baseline(wavelengths, counts, cfg)
    signal = counts - baseline

    if cfg.domain == FitDomain.FREQUENCY:
        jacobian = _jacobian_nm(wavelengths)
    else:
        jacobian = np.ones_like(wavelengths)
    intensity = signal * jacobian

    if cfg.weights == WeightMode.POISSON:
        weights = 1.0 / (jacobian * np.sqrt(np.maximum(counts, 1.0)))
        weights = weights / weights.max()
    else:
        weights = np.ones_like(counts)

    omega = UNITS.wavelength_nm_to_omega(wavelengths)
    order = np.argsort(omega)
    return FitSeries(
        omega=omega[order],
        intensity=intensity[order],
        weights=weights[order],
        baseline=baseline[order],
        label=s.metadata.emitter_label,
    )


def _half_max_width(omega: np.ndarray, y: np.ndarray, peak: int) -> float:
    half = 0.5 * y[peak]
    left = peak
    while left > 0 and y[left] > half:
        left -= 1
    right = peak
    while right < y.size - 1 and y[right] > half:
        right += 1

    def crossing(i: int, j: int) -> float:
        if y[j] == y[i]:
            return omega[i]
        return omega[i] + (half - y[i]) * (omega[j] - omega[i]) / (y[j] - y[i])

    lo = crossing(left, left + 1) if left < peak else omega[peak]
    hi = crossing(right - 1, right) if right > peak else omega[peak]
    return max(hi - lo, 2.0 * float(np.min(np.diff(omega))))


def initial_guess(series: FitSeries, y: np.ndarray, cfg: FitConfig, scale: float) -> np.ndarray:
    """Peak position, FWHM, area/pi, and mid-range bath priors; overrides from cfg win"""
    peak = int(np.argmax(y))
    guess = {
        "omega_X_tilde": float(series.omega[peak]),
        "A": max(float(trapezoid(y, series.omega)) / math.pi, 1e-6),
        "W": _half_max_width(series.omega, y, peak),
        "alpha": DEFAULT_ALPHA,
        "omega_c": DEFAULT_OMEGA_C,
    }
    for name, value in cfg.initial_guess.items():
        guess[name] = value / scale if name == "A" else value
    return np.array([guess[name] for name in FIT_PARAMETER_NAMES], dtype=float)


def _bounds(series: FitSeries, x0: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    span = float(series.omega[-1] - series.omega[0])
    lower = np.array([series.omega[0], 1e-12 * max(x0[1], 1.0), MIN_WIDTH, ALPHA_BOUNDS[0], OMEGA_C_BOUNDS[0]])
    upper = np.array([series.omega[-1], np.inf, max(span, 2 * MIN_WIDTH), ALPHA_BOUNDS[1], OMEGA_C_BOUNDS[1]])
    return lower, upper


def _perturbed_starts(x0: np.ndarray, n: int, rng: np.random.Generator, lower, upper) -> List[np.ndarray]:
    starts = [x0]
    for _ in range(n - 1):
        x = x0.copy()
        x[1] *= rng.uniform(0.8, 1.25)
        x[2] *= rng.uniform(0.7, 1.4)
        x[3] *= rng.uniform(0.3, 3.0)
        x[4] *= rng.uniform(0.5, 2.0)
        starts.append(x)
    # least_squares needs starts strictly inside finite bounds
    margin = 1e-9 * np.where(np.isfinite(upper), upper - lower, 1.0)
    return [np.clip(x, lower + margin, upper - margin) for x in starts]


def _forward_jacobian(fun, x: np.ndarray, r: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Forward differences, stepping backwards where x + h would leave the box"""
    jac = np.empty((r.size, x.size))
    for j in range(x.size):
        h = JACOBIAN_STEP * max(1.0, abs(x[j]))
        if x[j] + h > upper[j]:
            h = -h
        shifted = x.copy()
        shifted[j] += h
        jac[:, j] = (fun(shifted) - r) / h
    return jac


def _near_bounds(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    width = upper - lower
    tol = BOUND_RTOL * np.where(np.isfinite(width), width, np.abs(x))
    near_lower = x - lower <= tol
    near_upper = np.isfinite(upper) & (upper - x <= tol)
    return near_lower, near_upper


def fit(
    series: FitSeries,
    cfg: FitConfig,
    max_window_ps: float = MAX_WINDOW_PS,
) -> FitResult:
    """
    Weighted least squares over (omega_X_tilde, A, W, alpha, omega_c)

    Intensities are normalized by their maximum before fitting and A is
    scaled back, so the fit is equivariant under a global count scale.
    Parameters within BOUND_RTOL of a bound are reported in at_bounds
    without a sigma; a vanishing alpha or cutoff, or an alpha below its own
    sigma, marks alpha and omega_c as unidentifiable.
    """
    if len(series) < 5:
        raise FitWindowError("too few samples to fit five parameters")
    scale = float(np.max(np.abs(series.intensity)))
    if scale <= 0:
        raise FitWindowError("fit window holds no signal")
    y = series.intensity / scale
    T = cfg.temperature

    def model(x: np.ndarray) -> np.ndarray:
        p = LineshapeParams.from_vector(x, cfg.z, T)
        return emission_spectrum(p, series.omega, max_window_ps=max_window_ps, warn_on_clip=False).values

    x0 = initial_guess(series, y, cfg, scale)
    lower, upper = _bounds(series, x0)
    rng = np.random.default_rng(cfg.seed)
    starts = _perturbed_starts(x0, cfg.multi_start, rng, lower, upper)

    best = None
    best_trace: List[float] = []
    for i, start in enumerate(starts):
        trace: List[float] = []
        last: Dict[str, np.ndarray] = {}

        def weighted(x: np.ndarray) -> np.ndarray:
            try:
                return series.weights * (model(x) - y)
            except QEPhononNumericalError as e:
                logger.debug(f"Model evaluation failed at {x}: {e}")
                return np.full_like(y, FAILED_RESIDUAL)

        def residuals(x: np.ndarray) -> np.ndarray:
            r = weighted(x)
            last["x"], last["r"] = x.copy(), r
            return r

        def jacobian(x: np.ndarray) -> np.ndarray:
            # trf evaluates the Jacobian once per accepted iterate
            if "x" in last and np.array_equal(x, last["x"]):
                r = last["r"]
            else:
                r = weighted(x)
            trace.append(0.5 * float(r @ r))
            return _forward_jacobian(weighted, x, r, upper)

        result = least_squares(
            residuals,
            start,
            jac=jacobian,
            bounds=(lower, upper),
            method="trf",
            x_scale="jac",
            ftol=cfg.ftol,
            xtol=cfg.xtol,
            gtol=cfg.gtol,
            max_nfev=cfg.max_nfev,
        )
        logger.debug(
            f"Start {i}: cost={result.cost:.6e} status={result.status} nfev={result.nfev} iterates={len(trace)}"
        )
        if best is None or result.cost < best.cost:
            best, best_trace = result, trace

    x = best.x
    near_lower, near_upper = _near_bounds(x, lower, upper)
    near = near_lower | near_upper | (best.active_mask != 0)
    at_bounds = [name for name, flagged in zip(FIT_PARAMETER_NAMES, near) if flagged]
    free = ~near
    unidentifiable = []
    if near_lower[ALPHA_INDEX] or near_lower[OMEGA_C_INDEX]:
        # omega_c only enters through alpha J(omega), and a vanishing cutoff hides alpha
        unidentifiable = list(COUPLING_PARAMETERS)
        free[[ALPHA_INDEX, OMEGA_C_INDEX]] = False

    try:
        sigmas = _parameter_sigmas(best, free, y.size)
    except DegenerateFitError:
        if unidentifiable:
            raise
        unidentifiable = list(COUPLING_PARAMETERS)
        free[[ALPHA_INDEX, OMEGA_C_INDEX]] = False
        sigmas = _parameter_sigmas(best, free, y.size)
    if not unidentifiable and sigmas["alpha"] > x[ALPHA_INDEX]:
        unidentifiable = list(COUPLING_PARAMETERS)
    for name in unidentifiable:
        sigmas[name] = math.nan
    sigmas["A"] *= scale
    values = dict(zip(FIT_PARAMETER_NAMES, (float(v) for v in x)))
    values["A"] *= scale

    if at_bounds:
        logger.warning(f"Fit parameters at bounds: {', '.join(at_bounds)}")
    if unidentifiable:
        logger.warning(f"Phonon coupling not resolved (alpha={x[ALPHA_INDEX]:.3g}), omega_c is unidentifiable")
    return FitResult(
        values=values,
        sigmas=sigmas,
        z=cfg.z,
        temperature_k=cfg.temperature_k,
        residual_norm=float(np.sqrt(2.0 * best.cost) * scale),
        converged=bool(best.status > 0),
        message=str(best.message),
        nfev=int(best.nfev),
        at_bounds=at_bounds,
        unidentifiable=unidentifiable,
        seed=cfg.seed,
        starts=[[float(v) * (scale if k == 1 else 1.0) for k, v in enumerate(s)] for s in starts],
        residual_trace=best_trace,
        label=series.label,
    )


def _parameter_sigmas(result, free: np.ndarray, n_samples: int) -> Dict[str, float]:
    """One-sigma errors from (J^T J)^-1 s^2 over the free, identifiable parameters"""
    sigmas = {name: math.nan for name in FIT_PARAMETER_NAMES}
    n_free = int(free.sum())
    if n_free == 0:
        return sigmas
    jac = result.jac[:, free]
    rank = np.linalg.matrix_rank(jac)
    if rank < n_free:
        raise DegenerateFitError(
            f"Jacobian has rank {rank} for {n_free} free parameters", rank=int(rank)
        )
    dof = n_samples - n_free
    s2 = 2.0 * result.cost / dof if dof > 0 else math.nan
    cov = np.linalg.inv(jac.T @ jac) * s2
    for name, var in zip(np.array(FIT_PARAMETER_NAMES)[free], np.diag(cov)):
        sigmas[str(name)] = float(np.sqrt(var)) if var >= 0 else math.nan
    return sigmas


def report_derived(r: FitResult, m: MaterialParams) -> DerivedQuantities:
    """
    S, R and D from the fitted spectral density; B and the ZPL/PSB areas only for z = 3

    The radius uses the speed of sound of the supplied material.
    """
    sd = r.spectral_density
    derived = DerivedQuantities(
        huang_rhys=huang_rhys(sd),
        radius_nm=confinement_radius(sd, m.sound_speed),
        polaron_shift=polaron_shift(sd),
    )
    if sd.z == 3:
        derived.franck_condon = franck_condon(sd, r.temperature)
        p = r.lineshape_params
        half_span = DECOMPOSITION_HALF_SPAN * sd.omega_c
        grid = np.linspace(p.omega_X_tilde - half_span, p.omega_X_tilde + half_span, DECOMPOSITION_POINTS)
        zpl, psb = zpl_psb_decompose(p, grid)
        derived.areas = area_ratio(zpl, psb)
    return derived


def table_row(r: FitResult, derived: DerivedQuantities) -> List:
    """Row matching TABLE_HEADER"""
    v = r.values
    return [
        r.label,
        f"{r.z}D",
        v["omega_X_tilde"],
        v["A"],
        v["W"],
        v["alpha"],
        v["omega_c"],
        derived.radius_nm,
        derived.huang_rhys,
        derived.franck_condon if derived.franck_condon is not None else "",
    ]


def fitted_curve(r: FitResult, series: FitSeries) -> SpectrumCurve:
    curve = emission_spectrum(r.lineshape_params, series.omega, warn_on_clip=False)
    curve.label = "fit"
    return curve


def synthesize_measured(
    p: LineshapeParams,
    wavelengths_nm,
    domain: FitDomain = FitDomain.FREQUENCY,
    noise: float = 0.0,
    seed: Optional[int] = None,
    background: float = 0.0,
    label: str = "synthetic",
) -> MeasuredSpectrum:
    """
    Counts a detector would record for the lineshape p

    In the frequency domain the per-unit-frequency spectrum is mapped to
    per-wavelength counts, the inverse of the Jacobian applied by preprocess.
    Noise is multiplicative Gaussian with relative width ``noise``.
    """
    wavelengths = np.sort(np.asarray(wavelengths_nm, dtype=float))
    omega = UNITS.wavelength_nm_to_omega(wavelengths)
    order = np.argsort(omega)
    values = np.empty_like(omega)
    values[order] = emission_spectrum(p, omega[order], warn_on_clip=False).values
    if FitDomain(domain) == FitDomain.FREQUENCY:
        values = values / _jacobian_nm(wavelengths)
    if noise > 0:
        rng = np.random.default_rng(seed)
        values = values * (1.0 + noise * rng.standard_normal(values.size))
    metadata = SpectrumMetadata(temperature_k=p.T.kelvin, emitter_label=label)
    return MeasuredSpectrum(wavelengths, values + background, metadata)
