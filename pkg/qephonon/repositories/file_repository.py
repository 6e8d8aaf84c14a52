"""
File repository implementation

All writes go through one worker thread so artifact files have a single
writer; each file is staged next to its target and renamed into place.
"""

import asyncio
import csv
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, TextIO

from ..exceptions import ConfigHashMismatchError
from .interfaces import FileRepository

logger = logging.getLogger(__name__)

RUN_MARKER = ".qephonon-run.json"


def _atomic_write(file_path: Path, fill: Callable[[TextIO], None], newline: Optional[str] = None) -> None:
    file_path.parent.mkdir(parents=True, exist_ok=True)
    staging = file_path.with_name(f".{file_path.name}.partial")
    try:
        with open(staging, "w", encoding="utf-8", newline=newline) as f:
            fill(f)
        os.replace(staging, file_path)
    except BaseException:
        staging.unlink(missing_ok=True)
        raise


class FileRepositoryImpl(FileRepository):
    """Local-disk artifact store"""

    def __init__(self):
        self.executor = ThreadPoolExecutor(max_workers=1, thread_name_prefix="qephonon-io")

    async def _submit(self, fn: Callable[..., Any], *args) -> Any:
        return await asyncio.get_running_loop().run_in_executor(self.executor, fn, *args)

    async def write_json(self, data: Dict[str, Any], file_path: Path) -> None:
        def fill(f: TextIO) -> None:
            json.dump(data, f, indent=2, sort_keys=True)
            f.write("\n")

        await self._submit(_atomic_write, file_path, fill)
        logger.debug(f"Wrote {file_path}")

    async def write_csv(
        self,
        header: Sequence[str],
        rows: Iterable[Sequence[Any]],
        file_path: Path,
        comments: Optional[List[str]] = None,
    ) -> None:
        materialized = [list(r) for r in rows]

        def fill(f: TextIO) -> None:
            f.writelines(f"# {line}\n" for line in comments or [])
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(materialized)

        await self._submit(_atomic_write, file_path, fill, "")
        logger.debug(f"Wrote {file_path} ({len(materialized)} rows)")

    async def read_json(self, file_path: Path) -> Optional[Dict[str, Any]]:
        def load() -> Optional[Dict[str, Any]]:
            try:
                return json.loads(file_path.read_text(encoding="utf-8"))
            except FileNotFoundError:
                return None

        return await self._submit(load)

    async def claim_directory(self, dir_path: Path, config_hash: str) -> bool:
        marker = dir_path / RUN_MARKER
        await self._submit(lambda: dir_path.mkdir(parents=True, exist_ok=True))

        try:
            existing = await self.read_json(marker)
        except json.JSONDecodeError as e:
            raise ConfigHashMismatchError(
                f"{dir_path} has an unreadable run marker", expected=config_hash, directory=dir_path, cause=e
            ) from e

        if existing is None:
            await self.write_json(
                {"config_hash": config_hash, "created": datetime.now(timezone.utc).isoformat(timespec="seconds")},
                marker,
            )
            return False

        found = existing.get("config_hash")
        if found != config_hash:
            raise ConfigHashMismatchError(
                f"{dir_path} holds results of a different configuration",
                expected=config_hash,
                found=str(found),
                directory=dir_path,
            )
        logger.info(f"Resuming into {dir_path} (config hash {config_hash})")
        return True

    def close(self) -> None:
        self.executor.shutdown(wait=True)

    def __del__(self):
        if hasattr(self, "executor"):
            self.executor.shutdown(wait=False)
