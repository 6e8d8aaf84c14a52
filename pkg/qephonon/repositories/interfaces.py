"""
Repository interfaces for artifact persistence
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence


class FileRepository(ABC):
    """
    Storage of run artifacts

    Writes raise ``OSError`` on failure and never leave a partial file behind.
    """

    @abstractmethod
    async def write_json(self, data: Dict[str, Any], file_path: Path) -> None:
        pass

    @abstractmethod
    async def write_csv(
        self,
        header: Sequence[str],
        rows: Iterable[Sequence[Any]],
        file_path: Path,
        comments: Optional[List[str]] = None,
    ) -> None:
        """Rows as CSV, preceded by one ``# <comment>`` line per comment"""

    @abstractmethod
    async def read_json(self, file_path: Path) -> Optional[Dict[str, Any]]:
        """Parsed file, None when it does not exist"""

    @abstractmethod
    async def claim_directory(self, dir_path: Path, config_hash: str) -> bool:
        """
        Create an output directory and bind it to one run configuration

        Returns:
            bool: True when the directory was already bound to ``config_hash``

        Raises:
            ConfigHashMismatchError: directory holds output of another configuration
        """

    def close(self) -> None:
        """Release background writers; pending writes finish first"""
