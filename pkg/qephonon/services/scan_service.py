"""
Scan service implementation - parallel evaluation of independent grid points
"""

import asyncio
import logging
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from typing import List, Optional

from tqdm import tqdm

from ..excitation import Runner, evaluate_task
from ..models.excitation import PointResult, ScanTask
from .interfaces import ScanService

logger = logging.getLogger(__name__)


class ScanServiceImpl(ScanService):
    """Implementation of ScanService interface"""

    def __init__(self, max_workers: int = 4, show_progress: bool = True):
        """
        Initialize scan service.

        Args:
            max_workers: Worker processes; 1 evaluates on a single thread in this process
            show_progress: Show a tqdm progress bar per grid
        """
        self.max_workers = max_workers
        self.show_progress = show_progress
        self._executor: Optional[Executor] = None

    @property
    def executor(self) -> Executor:
        if self._executor is None:
            if self.max_workers == 1:
                self._executor = ThreadPoolExecutor(max_workers=1)
            else:
                self._executor = ProcessPoolExecutor(max_workers=self.max_workers)
        return self._executor

    async def run_grid(self, tasks: List[ScanTask], label: str = "") -> List[PointResult]:
        """
        Evaluate all tasks on the pool

        Results arrive in completion order; each carries its (row, col) so
        the caller assembles them deterministically.
        """
        if not tasks:
            return []
        loop = asyncio.get_event_loop()
        futures = [loop.run_in_executor(self.executor, evaluate_task, task) for task in tasks]
        results: List[PointResult] = []
        desc = f"Scanning {label}".strip()
        try:
            with tqdm(total=len(tasks), desc=desc, unit="point", disable=not self.show_progress) as pbar:
                for next_result in asyncio.as_completed(futures):
                    results.append(await next_result)
                    pbar.update(1)
        except Exception as e:
            for future in futures:
                future.cancel()
            logger.error(f"Scan {label or 'grid'} failed: {e}")
            raise

        unconverged = sum(1 for r in results if not r.converged)
        if unconverged:
            logger.warning(f"{unconverged} of {len(results)} points flagged an accuracy warning")
        logger.debug(f"Evaluated {len(results)} points with {self.max_workers} workers")
        return results

    def runner(self, loop: asyncio.AbstractEventLoop) -> Runner:
        """Runner for scan builders called from a worker thread while `loop` runs"""

        def run(tasks: List[ScanTask]) -> List[PointResult]:
            return asyncio.run_coroutine_threadsafe(self.run_grid(tasks), loop).result()

        return run

    def shutdown(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True, cancel_futures=True)
            self._executor = None

    def __del__(self):
        """Cleanup executor on deletion"""
        if getattr(self, "_executor", None) is not None:
            self._executor.shutdown(wait=False)
