"""
Repository layer for artifact persistence
"""

from .interfaces import FileRepository
from .file_repository import FileRepositoryImpl, RUN_MARKER

__all__ = [
    "FileRepository",
    "FileRepositoryImpl",
    "RUN_MARKER",
]
