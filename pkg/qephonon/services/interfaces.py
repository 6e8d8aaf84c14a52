"""
Service interfaces defining contracts for the batch workflows
"""

import asyncio
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, List, Optional, Sequence

import numpy as np

from ..excitation import Runner
from ..models.bath import MaterialParams
from ..models.excitation import PointResult, ScanTask
from ..models.run import RunSummary
from ..models.run_config import RunConfig
from ..models.spectrum import (
    FitConfig,
    FitDomain,
    FitOutcome,
    LineshapeParams,
    MeasuredSpectrum,
    SpectrumOutcome,
)


class SpectrumService(ABC):
    """Interface for lineshape fitting and model spectra"""

    @abstractmethod
    async def fit_file(self, path: Path, cfg: FitConfig, material: MaterialParams) -> FitOutcome:
        """Load, preprocess and fit one measured spectrum"""
        pass

    @abstractmethod
    async def fit_many(self, paths: Sequence[Path], cfg: FitConfig, material: MaterialParams) -> List[FitOutcome]:
        """Fit independent spectra in parallel, results in input order"""
        pass

    @abstractmethod
    async def synthesize(
        self,
        params: LineshapeParams,
        wavelengths_nm: np.ndarray,
        noise: float = 0.0,
        seed: Optional[int] = None,
        domain: FitDomain = FitDomain.FREQUENCY,
    ) -> MeasuredSpectrum:
        """Detector counts for a known lineshape"""
        pass

    @abstractmethod
    async def compute_spectrum(
        self,
        params: LineshapeParams,
        grid: np.ndarray,
        decompose: bool = True,
        instrument_fwhm: Optional[float] = None,
    ) -> SpectrumOutcome:
        """Model spectrum, split into ZPL and PSB where the bath allows it"""
        pass


class ScanService(ABC):
    """Interface for parallel evaluation of independent scan points"""

    @abstractmethod
    async def run_grid(self, tasks: List[ScanTask], label: str = "") -> List[PointResult]:
        """Evaluate every task; results carry their grid index"""
        pass

    @abstractmethod
    def runner(self, loop: asyncio.AbstractEventLoop) -> Runner:
        """Blocking runner for scan builders executing off the event loop"""
        pass


class FileService(ABC):
    """Interface for run artifacts"""

    @abstractmethod
    async def create_output_directory(self, name: str, config_hash: str, base_dir: Optional[Path] = None) -> Path:
        """Create (or resume into) the output directory of a run"""
        pass

    @abstractmethod
    async def emit_plot_data(self, result: Any, kind: str, output_dir: Path, config_hash: str) -> List[Path]:
        """Write CSV and JSON files for external plotting"""
        pass

    @abstractmethod
    async def save_summary(self, summary: RunSummary) -> Path:
        """Write the JSON run summary"""
        pass


class WorkflowService(ABC):
    """Interface for complete batch runs"""

    @abstractmethod
    async def execute(self, config: RunConfig) -> RunSummary:
        """Run one configured command and write its artifacts"""
        pass
