"""
Utility modules
"""

from .logging import (
    setup_logging,
    get_logger,
    get_structured_logger,
    quiet_engine,
    log_stage,
)

__all__ = [
    "setup_logging",
    "get_logger",
    "get_structured_logger",
    "quiet_engine",
    "log_stage",
]
