"""
Numerically exact reduced dynamics of the driven emitter
"""

from .propagators import closed_system_propagate, superoperator
from .engine import convergence_ladder, propagate
from .influence import accumulated_phase, eta_coefficients, influence_factors
from .mps import AugmentedDensityTensor, TruncationStats
from .quapi import MAX_PATH_STEPS, check_path_sum_resources, path_sum_bytes, quapi_brute_force

__all__ = [
    "propagate",
    "convergence_ladder",
    "eta_coefficients",
    "accumulated_phase",
    "influence_factors",
    "AugmentedDensityTensor",
    "TruncationStats",
    "quapi_brute_force",
    "MAX_PATH_STEPS",
    "check_path_sum_resources",
    "path_sum_bytes",
    "closed_system_propagate",
    "superoperator",
]
