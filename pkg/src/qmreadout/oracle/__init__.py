"""Brute-force time-sliced oracle for the analytic passage maps."""

from ._kernels import HAVE_NUMBA, numba_enabled
from .sliced import (
    SINGLE_THRESHOLD,
    TWO_CELL_THRESHOLD,
    ConvergenceReport,
    ConvergenceRow,
    ModeSpec,
    Projection,
    SlicedSystem,
    build_sliced_transform,
    convergence_report,
    default_modes,
    default_slices,
    fitted_order,
    profile_modes,
    project,
    reference_map,
)

__all__ = [
    "HAVE_NUMBA", "numba_enabled", "SINGLE_THRESHOLD", "TWO_CELL_THRESHOLD", "ConvergenceReport",
    "ConvergenceRow", "ModeSpec", "Projection", "SlicedSystem", "build_sliced_transform",
    "convergence_report", "default_modes", "default_slices", "fitted_order", "profile_modes",
    "project", "reference_map",
]
