"""Conic solvers: in-repo interior-point method and optional adapters."""

from .backends import (
    BackendExecutionError,
    BackendUnavailable,
    CapabilityError,
    CvxoptBackend,
    InteriorPointBackend,
    SolveReport,
    SolveStatus,
    SolverCapabilities,
    SolverOptions,
    SubprocessBackend,
    default_feastol,
    get_backend,
    program_class,
    to_standard_form,
)
from .ipm import ConeDims, IpmResult, solve_cone_lp

__all__ = [
    "BackendExecutionError",
    "BackendUnavailable",
    "CapabilityError",
    "ConeDims",
    "CvxoptBackend",
    "InteriorPointBackend",
    "IpmResult",
    "SolveReport",
    "SolveStatus",
    "SolverCapabilities",
    "SolverOptions",
    "SubprocessBackend",
    "default_feastol",
    "get_backend",
    "program_class",
    "solve_cone_lp",
    "to_standard_form",
]
