"""Sequential convex programming loop around the program builders.

Each iteration rebuilds the keep-out linearization about the previous
trajectory, solves the convex subproblem, and checks the termination
criteria: exact collision clearance (fast path), reference convergence
within epsilon, or the iteration cap. The zeroth iterate comes either
from an uncontrolled propagation or from solving the same formulation
without keep-out rows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from .dynamics import ArcModel, arc_models, propagate
from .formulation import build_program, extract_solution
from .program import FormulationKind
from .solution import GuidanceSolution, chief_distances, deputy_pair_distances
from .solver import (
    InteriorPointBackend,
    SolveReport,
    SolveStatus,
    SolverOptions,
)
from .timegrid import TimeGrid

if TYPE_CHECKING:
    from .scenarios import Scenario


class InitialGuess(enum.Enum):
    UNCONTROLLED_PROPAGATION = "uncontrolled-propagation"
    SOLVE_WITHOUT_COLLISION = "solve-without-collision"


@dataclass(frozen=True)
class ScpConfig:
    """Loop controls: convergence threshold, cap, and stop criteria."""

    epsilon: float = 1.0
    max_iterations: int = 10
    stop_on_collision_free: bool = True
    initial_guess: InitialGuess = InitialGuess.SOLVE_WITHOUT_COLLISION
    collision_tolerance: float = 1e-3

    def __post_init__(self) -> None:
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iterations < 1:
            raise ValueError(
                f"max_iterations must be >= 1, got {self.max_iterations}"
            )


@dataclass(frozen=True)
class IterationRecord:
    """One row of the SCP trace; index 0 is the zeroth iterate."""

    index: int
    objective: float
    dv_total: float
    max_displacement: float
    collision_free: bool
    solve_time: float
    status: SolveStatus | None


@dataclass(frozen=True)
class ScpTrace:
    records: tuple[IterationRecord, ...]
    terminated_by: str

    @property
    def iterations(self) -> int:
        """Iterations after the zeroth iterate."""
        return self.records[-1].index if self.records else 0


class ScpError(RuntimeError):
    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration


class ScpInfeasibleError(ScpError):
    """A subproblem was certified infeasible."""


class ScpBackendError(ScpError):
    """The backend failed to return an optimal point."""


def _exact_collision_free(
    states: np.ndarray, scenario: "Scenario", grid: TimeGrid, tol: float
) -> bool:
    if scenario.r_ca <= 0.0:
        return True
    floor = scenario.r_ca - tol
    if float(np.min(chief_distances(states, scenario.chief, grid))) < floor:
        return False
    _, dists = deputy_pair_distances(states, scenario.chief, grid)
    return not dists.size or float(np.min(dists)) >= floor


def _solve_step(
    scenario: "Scenario",
    grid: TimeGrid,
    kind: FormulationKind,
    reference: np.ndarray | None,
    collision: bool,
    backend,
    options: SolverOptions | None,
    arcs,
    iteration: int,
) -> tuple[GuidanceSolution, SolveReport]:
    program = build_program(
        scenario, grid, kind, reference, collision=collision, arcs=arcs
    )
    report = backend.solve(program, options)
    if report.status is SolveStatus.INFEASIBLE:
        raise ScpInfeasibleError(
            f"subproblem infeasible at iteration {iteration}", iteration
        )
    if report.status is not SolveStatus.OPTIMAL:
        raise ScpBackendError(
            f"backend returned {report.status.value} at iteration "
            f"{iteration}: {report.message}",
            iteration,
        )
    solution = extract_solution(
        report.x, scenario, grid, kind, report.status, report.objective, arcs
    )
    return solution, report


def initial_reference(
    scenario: "Scenario",
    grid: TimeGrid,
    strategy: InitialGuess,
    kind: FormulationKind = FormulationKind.LP_SCALED,
    backend=None,
    options: SolverOptions | None = None,
    arcs: tuple[ArcModel, ...] | None = None,
) -> tuple[np.ndarray, GuidanceSolution | None, SolveReport | None]:
    """Zeroth-iterate trajectory used to seed the keep-out linearization.

    UNCONTROLLED_PROPAGATION chains the natural dynamics from each
    initial state (no solve). SOLVE_WITHOUT_COLLISION solves the chosen
    formulation with the keep-out families removed and returns its
    trajectory together with the solution and report.
    """
    arcs = arcs or arc_models(scenario.chief, grid)
    if strategy is InitialGuess.UNCONTROLLED_PROPAGATION:
        states = np.array(
            [propagate(d.y0.as_array(), arcs) for d in scenario.deputies]
        )
        return states, None, None
    backend = backend or InteriorPointBackend()
    solution, report = _solve_step(
        scenario, grid, kind, None, False, backend, options, arcs, 0
    )
    return solution.states, solution, report


def run_scp(
    scenario: "Scenario",
    grid: TimeGrid,
    kind: FormulationKind = FormulationKind.LP_SCALED,
    config: ScpConfig | None = None,
    backend=None,
    options: SolverOptions | None = None,
) -> tuple[GuidanceSolution, ScpTrace]:
    """Solve one reconfiguration through the full SCP loop.

    Returns the final solution (certified_collision_free reflects the
    exact check, scp_iterations counts iterations after the zeroth) and
    the per-iteration trace. Raises ScpInfeasibleError or
    ScpBackendError with the failing iteration index.
    """
    config = config or ScpConfig()
    backend = backend or InteriorPointBackend()
    arcs = arc_models(scenario.chief, grid)
    records: list[IterationRecord] = []

    reference, zeroth, zeroth_report = initial_reference(
        scenario, grid, config.initial_guess, kind, backend, options, arcs
    )
    zeroth_ok = _exact_collision_free(
        reference, scenario, grid, config.collision_tolerance
    )
    if zeroth is not None:
        records.append(
            IterationRecord(
                index=0,
                objective=zeroth.objective,
                dv_total=zeroth.dv_total,
                max_displacement=math.nan,
                collision_free=zeroth_ok,
                solve_time=zeroth_report.solve_time,
                status=zeroth_report.status,
            )
        )
        if config.stop_on_collision_free and zeroth_ok:
            final = replace(
                zeroth, certified_collision_free=True, scp_iterations=0
            )
            return final, ScpTrace(tuple(records), "collision-free")
    else:
        records.append(
            IterationRecord(
                index=0,
                objective=math.nan,
                dv_total=math.nan,
                max_displacement=math.nan,
                collision_free=zeroth_ok,
                solve_time=0.0,
                status=None,
            )
        )

    solution = zeroth
    terminated = "iteration-cap"
    for it in range(1, config.max_iterations + 1):
        solution, report = _solve_step(
            scenario, grid, kind, reference, True, backend, options, arcs, it
        )
        displacement = float(
            np.max(np.linalg.norm(solution.states - reference, axis=2))
        )
        collision_ok = _exact_collision_free(
            solution.states, scenario, grid, config.collision_tolerance
        )
        records.append(
            IterationRecord(
                index=it,
                objective=solution.objective,
                dv_total=solution.dv_total,
                max_displacement=displacement,
                collision_free=collision_ok,
                solve_time=report.solve_time,
                status=report.status,
            )
        )
        reference = solution.states
        if config.stop_on_collision_free and collision_ok:
            terminated = "collision-free"
            break
        if displacement <= config.epsilon:
            terminated = "reference-converged"
            break

    final_ok = _exact_collision_free(
        solution.states, scenario, grid, config.collision_tolerance
    )
    final = replace(
        solution,
        certified_collision_free=final_ok,
        scp_iterations=records[-1].index,
    )
    return final, ScpTrace(tuple(records), terminated)
