"""Fuel-optimal, collision-free relative-orbit reconfiguration planning.

The package plans finite-burn reconfigurations for N single-thruster
deputies around an uncontrolled chief. States are dimensional
quasi-non-singular relative orbital elements; the planner compiles a
convex program (quadratic, second-order-cone or linear-programming
formulation of the thrust bound), solves it with a deterministic
interior-point method inside a sequential-convex-programming loop that
linearizes collision avoidance, and certifies the result by exact
re-propagation.
"""

from .dynamics import (
    ArcModel,
    arc_models,
    control_convolution,
    control_influence,
    latitude_rate,
    propagate,
    rtn_map,
    rtn_maps,
    stm,
)
from .formulation import (
    CollisionLinearizationError,
    build_program,
    extract_solution,
    linearize_collision,
    report_counts,
)
from .oracle import ValidationReport, replay_trajectory
from .orbits import ChiefOrbit, DimRoeState, OrbitalElements, RoeVector
from .polyhedron import (
    PolyhedronSpec,
    compute_scale_factor,
    enumerate_vertices,
    facet_matrix,
    tn_coverage,
)
from .program import (
    ConicProgram,
    FormulationKind,
    ProgramFormatError,
    SecondOrderCone,
    export_program,
    parse_program,
)
from .scenarios import (
    DeputySpec,
    Scenario,
    ScenarioFormatError,
    bundled_scenarios,
    coplanar_to_pco_scenario,
    load_bundled,
    load_scenario,
    loads_scenario,
    resolve_scenario,
    save_scenario,
)
from .scp import (
    InitialGuess,
    IterationRecord,
    ScpBackendError,
    ScpConfig,
    ScpError,
    ScpInfeasibleError,
    ScpTrace,
    initial_reference,
    run_scp,
)
from .solution import (
    GuidanceSolution,
    chief_distances,
    compute_dv,
    deputy_pair_distances,
    rtn_trajectory,
)
from .solver import (
    SolveReport,
    SolveStatus,
    SolverOptions,
    get_backend,
)
from .timegrid import ArcKind, TimeGrid, build_time_grid, min_coast_duration

__version__ = "1.0.0"

__all__ = [
    "ArcKind",
    "ArcModel",
    "ChiefOrbit",
    "CollisionLinearizationError",
    "ConicProgram",
    "DeputySpec",
    "DimRoeState",
    "FormulationKind",
    "GuidanceSolution",
    "InitialGuess",
    "IterationRecord",
    "OrbitalElements",
    "PolyhedronSpec",
    "ProgramFormatError",
    "RoeVector",
    "Scenario",
    "ScenarioFormatError",
    "ScpBackendError",
    "ScpConfig",
    "ScpError",
    "ScpInfeasibleError",
    "ScpTrace",
    "SecondOrderCone",
    "SolveReport",
    "SolveStatus",
    "SolverOptions",
    "TimeGrid",
    "ValidationReport",
    "arc_models",
    "build_program",
    "build_time_grid",
    "bundled_scenarios",
    "chief_distances",
    "compute_dv",
    "compute_scale_factor",
    "control_convolution",
    "control_influence",
    "coplanar_to_pco_scenario",
    "deputy_pair_distances",
    "enumerate_vertices",
    "export_program",
    "extract_solution",
    "facet_matrix",
    "get_backend",
    "initial_reference",
    "latitude_rate",
    "linearize_collision",
    "load_bundled",
    "load_scenario",
    "loads_scenario",
    "min_coast_duration",
    "parse_program",
    "propagate",
    "replay_trajectory",
    "report_counts",
    "resolve_scenario",
    "rtn_map",
    "rtn_maps",
    "rtn_trajectory",
    "run_scp",
    "save_scenario",
    "stm",
    "tn_coverage",
]
