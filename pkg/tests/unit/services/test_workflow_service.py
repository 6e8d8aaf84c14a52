"""
Tests for batch runs through the workflow service.
"""

import json
from pathlib import Path
from unittest.mock import AsyncMock

import numpy as np
import pytest

from qephonon.config import build_run_config
from qephonon.exceptions import RunConfigError
from qephonon.models.run import RunStatus
from qephonon.models.spectrum import SpectrumCurve, SpectrumOutcome
from qephonon.repositories.file_repository import FileRepositoryImpl
from qephonon.services.file_service import FileServiceImpl
from qephonon.services.interfaces import FileService, SpectrumService
from qephonon.services.resources import ResourceMonitor
from qephonon.services.scan_service import ScanServiceImpl
from qephonon.services.workflow_service import WorkflowServiceImpl
from tests.fixtures.configs import VALID_BATH_FREE_RABI, VALID_INDIST, VALID_SPECTRUM, with_overrides


@pytest.fixture
def scan_service():
    service = ScanServiceImpl(max_workers=1, show_progress=False)
    yield service
    service.shutdown()


@pytest.fixture
def file_service(tmp_path):
    return FileServiceImpl(file_repository=FileRepositoryImpl(), output_base_dir=tmp_path)


@pytest.fixture
def spectrum_service():
    return AsyncMock(spec=SpectrumService)


@pytest.fixture
def workflow(spectrum_service, scan_service, file_service):
    return WorkflowServiceImpl(
        spectrum_service=spectrum_service,
        scan_service=scan_service,
        file_service=file_service,
        resource_monitor=ResourceMonitor(max_workers=1),
    )


def read_summary(output_dir: Path) -> dict:
    return json.loads((Path(output_dir) / "summary.json").read_text())


class TestFailures:
    """Tests for runs that stop with an error."""

    @pytest.mark.asyncio
    async def test_missing_fit_input(self, workflow, tmp_path):
        """Test that the error is raised and a failed summary is still written."""
        config = build_run_config({"command": "fit", "fit": {"input": str(tmp_path / "absent.csv")}})

        with pytest.raises(RunConfigError) as exc_info:
            await workflow.execute(config)

        assert exc_info.value.key_path == "fit.input"
        output_dir = tmp_path / f"fit-{config.config_hash()}"
        summary = read_summary(output_dir)
        assert summary["status"] == "failed"
        assert "absent.csv" in summary["error_message"]

    @pytest.mark.asyncio
    async def test_spectrum_of_bath_only_preset(self, workflow):
        """Test that a preset without lineshape parameters cannot produce a spectrum."""
        config = build_run_config({"command": "spectrum", "preset": "InAs"})

        with pytest.raises(RunConfigError) as exc_info:
            await workflow.execute(config)
        assert exc_info.value.key_path == "emitter"


class TestRabi:
    """Tests for the resonant Rabi command."""

    @pytest.mark.asyncio
    async def test_bath_free_rabi(self, workflow):
        """Test a complete bath-free run with its artifacts."""
        config = build_run_config(with_overrides(
            VALID_BATH_FREE_RABI, scan={"t_p_ps": [3.0], "theta_pi": {"start": 0.5, "stop": 1.5, "n": 3}},
        ))

        summary = await workflow.execute(config)

        assert summary.status == RunStatus.COMPLETED
        curve = summary.results["curves"][0]
        assert curve["t_p_ps"] == 3.0
        assert curve["first_maximum"]["P_X"] == pytest.approx(1.0, abs=1e-4)
        assert curve["first_maximum"]["theta_pi"] == pytest.approx(1.0)
        names = sorted(Path(a).name for a in summary.artifacts)
        assert names == ["rabi.json", "rabi_tp3ps.csv", "summary.json"]
        assert summary.provenance["host"]["max_workers"] == 1
        assert read_summary(summary.output_dir)["config_hash"] == config.config_hash()


class TestCoherence:
    """Tests for the dephasing and indistinguishability commands."""

    @pytest.mark.asyncio
    async def test_indist(self, workflow):
        config = build_run_config(VALID_INDIST)

        summary = await workflow.execute(config)

        results = summary.results
        assert results["temperature_k"] == 4.0
        assert results["gamma_pd_ghz"] == pytest.approx(2.29e-3, rel=0.1)
        values = [row["I_phonon_only"] for row in results["indistinguishability"]]
        assert len(values) == 3
        assert all(0.0 < v <= 1.0 for v in values)
        assert results["I_phonon_only_min_over_tau"] == min(values)

    @pytest.mark.asyncio
    async def test_linewidth_budget(self, workflow):
        """Test that a measured linewidth sets the noise rate."""
        config = build_run_config(with_overrides(
            VALID_INDIST,
            coherence={"temperatures_k": [4.0], "tau_ns": [1.0], "W_ghz": 5.0, "reference_tau_ns": 1.0},
        ))

        summary = await workflow.execute(config)

        budget = summary.results["linewidth_budget"]
        assert budget["reference_tau_ns"] == 1.0
        assert summary.results["gamma_noise_ghz"] > 0
        assert not summary.warnings

    @pytest.mark.asyncio
    async def test_dephasing_requires_masses(self, workflow):
        from qephonon.exceptions import MaterialParameterError

        config = build_run_config({"command": "dephasing", "preset": "A2D"})
        with pytest.raises(MaterialParameterError):
            await workflow.execute(config)


class TestSpectrumDispatch:
    """Tests for the spectrum command against mocked services."""

    @pytest.mark.asyncio
    async def test_grid_and_artifacts(self, spectrum_service, scan_service, tmp_path):
        grid = np.linspace(-1.0, 1.0, 3)
        spectrum_service.compute_spectrum.return_value = SpectrumOutcome(
            total=SpectrumCurve(grid, np.array([0.0, 1.0, 0.0]), label="total")
        )
        file_service = AsyncMock(spec=FileService)
        file_service.create_output_directory.return_value = tmp_path
        file_service.emit_plot_data.return_value = [tmp_path / "spectrum.csv", tmp_path / "spectrum.json"]
        file_service.save_summary.return_value = tmp_path / "summary.json"
        workflow = WorkflowServiceImpl(spectrum_service, scan_service, file_service)

        summary = await workflow.execute(build_run_config(VALID_SPECTRUM))

        params, model_grid = spectrum_service.compute_spectrum.call_args.args
        assert model_grid.size == 3001
        assert model_grid[1500] == pytest.approx(params.omega_X_tilde)
        assert spectrum_service.compute_spectrum.call_args.kwargs["decompose"] is True
        file_service.emit_plot_data.assert_awaited_once()
        assert len(summary.artifacts) == 3
        assert summary.results["derived"]["B"] is not None
        assert "host" not in summary.provenance
