"""
File service implementation

Every artifact is stamped with the run's config hash: JSON files carry a
``config_hash`` key, CSV files a leading ``# config_hash=...`` comment.
"""

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from ..fitting import TABLE_HEADER, table_row
from ..lineshape import SPECTRUM_CSV_HEADER, spectrum_rows
from ..models.bath import UNITS
from ..models.coherence import CoherenceCurves
from ..models.excitation import RabiCurve, ScanResult
from ..models.run import RunSummary
from ..models.spectrum import FitOutcome, SpectrumOutcome
from ..repositories.interfaces import FileRepository
from .interfaces import FileService

logger = logging.getLogger(__name__)

PLOT_KINDS = ("fit", "spectrum", "rabi", "map", "coherence")
SUMMARY_NAME = "summary.json"


def json_safe(value: Any) -> Any:
    """Non-finite floats become None so the JSON stays standard"""
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return json_safe(value.tolist())
    if isinstance(value, (np.floating, float)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


class FileServiceImpl(FileService):
    """Implementation of FileService interface"""

    def __init__(self, file_repository: FileRepository, output_base_dir: Path):
        self.file_repository = file_repository
        self.output_base_dir = output_base_dir

    async def create_output_directory(self, name: str, config_hash: str, base_dir: Optional[Path] = None) -> Path:
        """<base>/<name>-<hash>; resuming into it requires the same hash"""
        base = base_dir or self.output_base_dir
        output_dir = base / f"{name}-{config_hash}"
        resumed = await self.file_repository.claim_directory(output_dir, config_hash)
        logger.info(f"Output directory: {output_dir}" + (" (resumed)" if resumed else ""))
        return output_dir

    async def emit_plot_data(self, result: Any, kind: str, output_dir: Path, config_hash: str) -> List[Path]:
        """
        Plot-ready files per result kind

        fit: fit JSON, measured-vs-model CSV and a parameter-table row;
        spectrum: one CSV with total/zpl/psb columns; rabi: one CSV per t_p;
        map: heatmap CSV with separate axis files; coherence: dephasing CSV
        and one indistinguishability CSV per temperature.
        """
        writers = {
            "fit": self._emit_fit,
            "spectrum": self._emit_spectrum,
            "rabi": self._emit_rabi,
            "map": self._emit_map,
            "coherence": self._emit_coherence,
        }
        try:
            writer = writers[kind]
        except KeyError:
            raise ValueError(f"Unsupported plot kind: {kind} (choose from {', '.join(PLOT_KINDS)})") from None
        paths = await writer(result, output_dir, config_hash)
        logger.debug(f"Wrote {len(paths)} {kind} artifacts to {output_dir}")
        return paths

    async def save_summary(self, summary: RunSummary) -> Path:
        file_path = Path(summary.output_dir) / SUMMARY_NAME
        await self._json(summary.to_dict(), file_path, summary.config_hash)
        return file_path

    async def _json(self, payload: Dict[str, Any], file_path: Path, config_hash: str) -> Path:
        data = json_safe(dict(payload, config_hash=config_hash))
        await self.file_repository.write_json(data, file_path)
        return file_path

    async def _csv(self, header, rows, file_path: Path, config_hash: str, comments: Optional[List[str]] = None) -> Path:
        lines = [f"config_hash={config_hash}"] + list(comments or [])
        await self.file_repository.write_csv(header, rows, file_path, lines)
        return file_path

    async def _emit_fit(self, outcome: FitOutcome, output_dir: Path, config_hash: str) -> List[Path]:
        stem = outcome.result.label or "fit"
        series = outcome.series
        rows = [
            [float(w), float(lam), float(y), float(m)]
            for w, lam, y, m in zip(
                series.omega,
                UNITS.omega_to_wavelength_nm(series.omega),
                series.intensity,
                outcome.curve.values,
            )
        ]
        return [
            await self._json(outcome.to_dict(), output_dir / f"{stem}.json", config_hash),
            await self._csv(
                ["omega_rad_per_ps", "wavelength_nm", "measured", "fit"], rows,
                output_dir / f"{stem}_curve.csv", config_hash,
            ),
            await self._csv(
                TABLE_HEADER, [table_row(outcome.result, outcome.derived)],
                output_dir / f"{stem}_table.csv", config_hash,
            ),
        ]

    async def _emit_spectrum(self, outcome: SpectrumOutcome, output_dir: Path, config_hash: str) -> List[Path]:
        header = list(SPECTRUM_CSV_HEADER)
        rows = spectrum_rows(outcome.total)
        if outcome.zpl is not None and outcome.psb is not None:
            header += ["zpl", "psb"]
            rows = [row + [float(z), float(p)] for row, z, p in zip(rows, outcome.zpl.values, outcome.psb.values)]
        return [
            await self._csv(header, rows, output_dir / "spectrum.csv", config_hash),
            await self._json(outcome.to_dict(), output_dir / "spectrum.json", config_hash),
        ]

    async def _emit_rabi(self, curves: List[RabiCurve], output_dir: Path, config_hash: str) -> List[Path]:
        paths = []
        for curve in curves:
            rows = [[float(t) / math.pi, float(p)] for t, p in zip(curve.thetas, curve.populations)]
            paths.append(await self._csv(
                ["theta_pi", "P_X"], rows, output_dir / f"rabi_tp{curve.t_p:g}ps.csv", config_hash,
                comments=[f"t_p_ps={curve.t_p:g}"],
            ))
        paths.append(await self._json({"curves": [c.to_dict() for c in curves]}, output_dir / "rabi.json", config_hash))
        return paths

    async def _emit_map(self, scan: ScanResult, output_dir: Path, config_hash: str) -> List[Path]:
        stem = scan.label or "map"
        header = [f"{scan.rows.name}\\{scan.cols.name}"] + [f"{v:.10g}" for v in scan.cols.values]
        rows = [[value] + list(map(float, scan.values[i])) for i, value in enumerate(scan.rows.values)]
        return [
            await self._csv(header, rows, output_dir / f"{stem}_map.csv", config_hash),
            await self._csv(
                [f"{scan.rows.name}_{scan.rows.unit}".rstrip("_").replace("/", "_per_")],
                [[v] for v in scan.rows.values], output_dir / f"{stem}_rows.csv", config_hash,
            ),
            await self._csv(
                [f"{scan.cols.name}_{scan.cols.unit}".rstrip("_").replace("/", "_per_")],
                [[v] for v in scan.cols.values], output_dir / f"{stem}_cols.csv", config_hash,
            ),
            await self._json(scan.to_dict(), output_dir / f"{stem}.json", config_hash),
        ]

    async def _emit_coherence(self, curves: CoherenceCurves, output_dir: Path, config_hash: str) -> List[Path]:
        paths = [await self._csv(
            ["temperature_k", "gamma_pd_per_ps", "gamma_pd_ghz"], curves.dephasing_rows(),
            output_dir / "dephasing.csv", config_hash,
        )]
        for i, kelvin in enumerate(curves.temperatures_k):
            paths.append(await self._csv(
                ["tau_ns", "I_phonon_only", "I_with_noise"], curves.indistinguishability_rows(i),
                output_dir / f"indist_T{float(kelvin):g}K.csv", config_hash,
                comments=[f"gamma_noise_ghz={UNITS.rate_to_ghz(curves.gamma_noise):g}"],
            ))
        paths.append(await self._json(curves.to_dict(), output_dir / "coherence.json", config_hash))
        return paths
