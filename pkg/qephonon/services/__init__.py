"""
Service layer for qephonon batch workflows
"""

from .interfaces import (
    SpectrumService,
    ScanService,
    FileService,
    WorkflowService,
)
from .spectrum_service import SpectrumServiceImpl
from .scan_service import ScanServiceImpl
from .file_service import FileServiceImpl
from .workflow_service import WorkflowServiceImpl
from .resources import ResourceMonitor

__all__ = [
    # Interfaces
    "SpectrumService",
    "ScanService",
    "FileService",
    "WorkflowService",

    # Implementations
    "SpectrumServiceImpl",
    "ScanServiceImpl",
    "FileServiceImpl",
    "WorkflowServiceImpl",
    "ResourceMonitor",
]
