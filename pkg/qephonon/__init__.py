"""
qephonon
Phonon spectral densities, numerically exact driven dynamics and
indistinguishability bounds for solid-state single-photon emitters
"""

from .config import get_settings
from .services import (
    SpectrumServiceImpl,
    ScanServiceImpl,
    FileServiceImpl,
    WorkflowServiceImpl,
)

__all__ = [
    "SpectrumServiceImpl",
    "ScanServiceImpl",
    "FileServiceImpl",
    "WorkflowServiceImpl",
    "get_settings",
]

from .services.workflow_service import package_version

__version__ = package_version()
