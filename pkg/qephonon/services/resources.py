"""
Host resource checks for scans and batch fits
"""

import logging
from typing import Any, Dict, Optional

import psutil

logger = logging.getLogger(__name__)


class ResourceMonitor:
    """Worker counts and host description from psutil"""

    def __init__(self, max_workers: int):
        self.max_workers = max_workers

    def recommended_workers(self, requested: Optional[int] = None, n_tasks: Optional[int] = None) -> int:
        """
        Worker count for a process pool

        Capped by physical cores and by the number of tasks; an explicit
        request still wins over the configured default.
        """
        cores = psutil.cpu_count(logical=False) or psutil.cpu_count(logical=True) or 1
        workers = min(requested or self.max_workers, cores)
        if n_tasks is not None:
            workers = min(workers, max(1, n_tasks))
        logger.debug(f"Using {workers} workers ({cores} cores, requested {requested or self.max_workers})")
        return max(1, workers)

    def available_memory_gb(self) -> float:
        return psutil.virtual_memory().available / (1024 ** 3)

    def snapshot(self) -> Dict[str, Any]:
        """Host description for run provenance"""
        return {
            "cores": psutil.cpu_count(logical=False),
            "threads": psutil.cpu_count(logical=True),
            "memory_gb": round(psutil.virtual_memory().total / (1024 ** 3), 1),
            "available_memory_gb": round(self.available_memory_gb(), 1),
            "max_workers": self.max_workers,
        }
