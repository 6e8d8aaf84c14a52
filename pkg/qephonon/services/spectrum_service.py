"""
Spectrum service implementation - lineshape fits and model spectra
"""

import asyncio
import logging
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from functools import partial
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from ..exceptions import SpectrumError
from ..fitting import fit, fitted_curve, load_spectrum, preprocess, report_derived, synthesize_measured
from ..lineshape import (
    area_ratio,
    emission_spectrum,
    instrument_convolve,
    sideband_asymmetry,
    zpl_psb_decompose,
)
from ..models.bath import MaterialParams
from ..models.spectrum import (
    FitConfig,
    FitDomain,
    FitOutcome,
    LineshapeParams,
    MeasuredSpectrum,
    SpectrumOutcome,
)
from .interfaces import SpectrumService

logger = logging.getLogger(__name__)


def fit_path(path: Path, cfg: FitConfig, material: MaterialParams, max_window_ps: float) -> FitOutcome:
    """Load, preprocess and fit one file; module level so worker processes can run it"""
    spectrum = load_spectrum(path)
    series = preprocess(spectrum, cfg)
    if not series.label:
        series.label = Path(path).stem
    result = fit(series, cfg, max_window_ps=max_window_ps)
    derived = report_derived(result, material)
    return FitOutcome(
        result=result,
        derived=derived,
        series=series,
        curve=fitted_curve(result, series),
        source=str(path),
    )


def model_spectrum(
    params: LineshapeParams,
    grid: np.ndarray,
    decompose: bool,
    instrument_fwhm: Optional[float],
    envelope_tol: float,
    max_window_ps: float,
) -> SpectrumOutcome:
    total = emission_spectrum(params, grid, envelope_tol=envelope_tol, max_window_ps=max_window_ps)
    _, _, red_fraction = sideband_asymmetry(total, params.omega_X_tilde)
    outcome = SpectrumOutcome(total=instrument_convolve(total, instrument_fwhm), red_fraction=red_fraction)
    if decompose and params.sd.z == 3:
        zpl, psb = zpl_psb_decompose(params, grid, envelope_tol=envelope_tol, max_window_ps=max_window_ps)
        outcome.areas = area_ratio(zpl, psb)
        outcome.zpl = instrument_convolve(zpl, instrument_fwhm)
        outcome.psb = instrument_convolve(psb, instrument_fwhm)
    elif decompose:
        logger.info("2D bath: no finite Franck-Condon factor, skipping the ZPL/PSB split")
    return outcome


class SpectrumServiceImpl(SpectrumService):
    """Implementation of SpectrumService interface"""

    def __init__(self, max_workers: int = 4, envelope_tol: float = 1e-8, max_window_ps: float = 4000.0):
        self.max_workers = max_workers
        self.envelope_tol = envelope_tol
        self.max_window_ps = max_window_ps
        self.executor = ThreadPoolExecutor(max_workers=1)

    async def fit_file(self, path: Path, cfg: FitConfig, material: MaterialParams) -> FitOutcome:
        logger.info(f"Fitting {path} ({cfg.z}D bath, {cfg.multi_start} starts, seed {cfg.seed})")
        loop = asyncio.get_event_loop()
        outcome = await loop.run_in_executor(
            self.executor, fit_path, Path(path), cfg, material, self.max_window_ps
        )
        self._log_outcome(outcome)
        return outcome

    async def fit_many(self, paths: Sequence[Path], cfg: FitConfig, material: MaterialParams) -> List[FitOutcome]:
        """Independent fits on a process pool"""
        if not paths:
            raise SpectrumError("no spectra to fit")
        if len(paths) == 1:
            return [await self.fit_file(paths[0], cfg, material)]

        workers = min(self.max_workers, len(paths))
        logger.info(f"Fitting {len(paths)} spectra on {workers} workers")
        loop = asyncio.get_event_loop()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = await asyncio.gather(*[
                loop.run_in_executor(pool, fit_path, Path(p), cfg, material, self.max_window_ps)
                for p in paths
            ])
        for outcome in outcomes:
            self._log_outcome(outcome)
        return list(outcomes)

    async def synthesize(
        self,
        params: LineshapeParams,
        wavelengths_nm: np.ndarray,
        noise: float = 0.0,
        seed: Optional[int] = None,
        domain: FitDomain = FitDomain.FREQUENCY,
    ) -> MeasuredSpectrum:
        loop = asyncio.get_event_loop()
        return await loop.run_in_executor(
            self.executor,
            partial(synthesize_measured, params, wavelengths_nm, domain=domain, noise=noise, seed=seed),
        )

    async def compute_spectrum(
        self,
        params: LineshapeParams,
        grid: np.ndarray,
        decompose: bool = True,
        instrument_fwhm: Optional[float] = None,
    ) -> SpectrumOutcome:
        loop = asyncio.get_event_loop()
        outcome = await loop.run_in_executor(
            self.executor, model_spectrum, params, np.asarray(grid, dtype=float), decompose,
            instrument_fwhm, self.envelope_tol, self.max_window_ps,
        )
        if outcome.areas is not None:
            logger.info(
                f"ZPL/PSB area ratio {outcome.areas.ratio:.3f}, PSB fraction {outcome.areas.psb_fraction:.3f}"
            )
        return outcome

    @staticmethod
    def _log_outcome(outcome: FitOutcome) -> None:
        v = outcome.result.values
        logger.info(
            f"{outcome.result.label}: alpha={v['alpha']:.4f} omega_c={v['omega_c']:.4f} "
            f"W={v['W']:.4f} S={outcome.derived.huang_rhys:.3f} R={outcome.derived.radius_nm:.2f} nm"
        )
        if not outcome.result.converged:
            logger.warning(f"{outcome.result.label}: optimizer did not converge ({outcome.result.message})")

    def __del__(self):
        """Cleanup executor on deletion"""
        if hasattr(self, 'executor'):
            self.executor.shutdown(wait=False)
