"""
Tests for parallel scan evaluation.
"""

import asyncio
import math

import pytest

from qephonon.excitation import resonant_sequence
from qephonon.exceptions import PulseError
from qephonon.models.bath import BathTemperature
from qephonon.models.excitation import EngineSettings, ScanTask
from qephonon.services.scan_service import ScanServiceImpl

ENGINE = EngineSettings(dt=0.05, memory_ps=3.0, svd_tol=1e-7, max_bond=64)


def bath_free_tasks(thetas_pi):
    return [
        ScanTask(
            row=0,
            col=j,
            sequence=resonant_sequence(theta * math.pi, 3.0),
            sd=None,
            temperature=BathTemperature(4.0),
            engine=ENGINE,
        )
        for j, theta in enumerate(thetas_pi)
    ]


@pytest.fixture
def service():
    service = ScanServiceImpl(max_workers=1, show_progress=False)
    yield service
    service.shutdown()


class TestRunGrid:
    """Tests for ScanServiceImpl.run_grid."""

    @pytest.mark.asyncio
    async def test_empty_grid(self, service):
        assert await service.run_grid([]) == []

    @pytest.mark.asyncio
    async def test_results_carry_their_index(self, service):
        """Test that every task comes back with its column and population."""
        results = await service.run_grid(bath_free_tasks([1.0, 2.0, 0.5]), label="rabi")

        by_col = {r.col: r.population for r in results}
        assert by_col[0] == pytest.approx(1.0, abs=1e-4)
        assert by_col[1] == pytest.approx(0.0, abs=1e-4)
        assert by_col[2] == pytest.approx(0.5, abs=1e-4)
        assert all(r.converged for r in results)

    @pytest.mark.asyncio
    async def test_failure_propagates(self, service, mocker):
        mocker.patch(
            "qephonon.services.scan_service.evaluate_task",
            side_effect=PulseError("broken point", field_name="sequence"),
        )
        with pytest.raises(PulseError):
            await service.run_grid(bath_free_tasks([1.0]))

    def test_single_worker_uses_threads(self, service):
        from concurrent.futures import ThreadPoolExecutor

        assert isinstance(service.executor, ThreadPoolExecutor)


class TestRunner:
    """Tests for the blocking runner used by scan builders."""

    @pytest.mark.asyncio
    async def test_runner_from_worker_thread(self, service):
        run = service.runner(asyncio.get_running_loop())
        results = await asyncio.to_thread(run, bath_free_tasks([1.0, 3.0]))

        assert sorted(r.col for r in results) == [0, 1]
        assert all(r.population == pytest.approx(1.0, abs=1e-4) for r in results)
