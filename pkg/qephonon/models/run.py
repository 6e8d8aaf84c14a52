"""
Batch run domain models
"""

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional


class RunStatus(Enum):
    """Run processing status enumeration"""

    PENDING = "pending"
    RUNNING = "running"
    SAVING = "saving"
    COMPLETED = "completed"
    FAILED = "failed"

    @property
    def is_terminal(self) -> bool:
        return self in {RunStatus.COMPLETED, RunStatus.FAILED}


@dataclass
class RunSummary:
    """Outcome of one batch run with its provenance block"""

    command: str
    config_hash: str
    output_dir: Path
    status: RunStatus = RunStatus.PENDING
    results: Dict[str, Any] = field(default_factory=dict)
    artifacts: List[str] = field(default_factory=list)
    provenance: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    started_at: Optional[datetime] = None
    completed_at: Optional[datetime] = None
    error_message: Optional[str] = None

    @property
    def duration_seconds(self) -> Optional[float]:
        if self.started_at and self.completed_at:
            return (self.completed_at - self.started_at).total_seconds()
        return None

    def add_artifact(self, path: Path) -> None:
        self.artifacts.append(str(path))

    def to_dict(self) -> dict:
        """
        JSON summary

        Wall-clock fields live under ``timing`` so that the numeric payload of
        two identical runs compares equal.
        """
        return {
            "command": self.command,
            "config_hash": self.config_hash,
            "status": self.status.value,
            "output_dir": str(self.output_dir),
            "results": self.results,
            "artifacts": sorted(self.artifacts),
            "provenance": self.provenance,
            "warnings": self.warnings,
            "error_message": self.error_message,
            "timing": {
                "started_at": self.started_at.isoformat() if self.started_at else None,
                "completed_at": self.completed_at.isoformat() if self.completed_at else None,
                "duration_seconds": self.duration_seconds,
            },
        }
