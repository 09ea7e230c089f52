"""Independent verification of guidance solutions.

Everything here recomputes its inputs from scratch: trajectories are
replayed by chaining the arc models from the initial conditions, fuel
cost is re-integrated from the controls, clearances are measured with
the exact position norms, and polyhedron geometry is re-derived by
brute-force vertex enumeration. None of it shares state with the
optimizer, so agreement is evidence rather than tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import arc_models, control_convolution, propagate, rtn_map, stm
from .formulation import check_nonconvex_feasibility
from .orbits import ChiefOrbit
from .polyhedron import PolyhedronSpec, enumerate_vertices
from .program import FormulationKind
from .scenarios import Scenario
from .solution import GuidanceSolution, compute_dv, rtn_trajectory
from .timegrid import TimeGrid

REPLAY_TOL = 1e-6
DV_REL_TOL = 1e-9
DYNAMICS_TOL = 1e-6
BOUNDARY_TOL = 1e-3
OFF_ARC_TOL = 1e-15
THRUST_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class ValidationReport:
    """Audit of one solution against independently recomputed physics.

    Residuals and separations are in meters, Delta-V in m/s, thrust in
    m/s^2. dv_split resolves each deputy's Delta-V by thrust axis
    (radial, transversal, normal), so its rows sum to at least the
    Euclidean dv_per_deputy entries. dense_min_* are sub-epoch
    clearance minima and stay NaN unless dense sampling was requested.
    """

    replay_error: float
    boundary_residual: float
    dynamics_residual: float
    off_arc_thrust: float
    thrust_excess: float
    thrust_allowance: float
    min_chief_separation: float
    min_deputy_separation: float
    chief_separations: np.ndarray
    pair_labels: tuple[tuple[int, int], ...]
    pair_separations: np.ndarray
    dv_per_deputy: np.ndarray
    dv_total: float
    dv_reported: float
    dv_split: np.ndarray
    r_ca: float
    collision_tolerance: float
    dense_min_chief: float = math.nan
    dense_min_deputy: float = math.nan

    @property
    def replay_ok(self) -> bool:
        return self.replay_error <= REPLAY_TOL

    @property
    def dv_consistent(self) -> bool:
        scale = max(1.0, abs(self.dv_reported))
        return abs(self.dv_total - self.dv_reported) <= DV_REL_TOL * scale

    @property
    def dynamics_ok(self) -> bool:
        return self.dynamics_residual <= DYNAMICS_TOL

    @property
    def boundary_ok(self) -> bool:
        return self.boundary_residual <= BOUNDARY_TOL

    @property
    def thrust_ok(self) -> bool:
        return (
            self.off_arc_thrust <= OFF_ARC_TOL
            and self.thrust_excess <= self.thrust_allowance
        )

    @property
    def collision_free(self) -> bool:
        floor = self.r_ca - self.collision_tolerance
        return (
            self.min_chief_separation >= floor
            and self.min_deputy_separation >= floor
        )

    @property
    def passed(self) -> bool:
        return all(ok for ok, _, _ in self.families().values())

    def families(self) -> dict[str, tuple[bool, float, float]]:
        """Per-family verdicts as name -> (ok, measured, threshold)."""
        dv_scale = max(1.0, abs(self.dv_reported))
        floor = self.r_ca - self.collision_tolerance
        min_sep = min(self.min_chief_separation, self.min_deputy_separation)
        return {
            "replay": (self.replay_ok, self.replay_error, REPLAY_TOL),
            "dynamics": (self.dynamics_ok, self.dynamics_residual, DYNAMICS_TOL),
            "boundary": (self.boundary_ok, self.boundary_residual, BOUNDARY_TOL),
            "off-arc-thrust": (
                self.off_arc_thrust <= OFF_ARC_TOL,
                self.off_arc_thrust,
                OFF_ARC_TOL,
            ),
            "thrust-cap": (
                self.thrust_excess <= self.thrust_allowance,
                self.thrust_excess,
                self.thrust_allowance,
            ),
            "collision": (self.collision_free, min_sep, floor),
            "dv-identity": (
                self.dv_consistent,
                abs(self.dv_total - self.dv_reported),
                DV_REL_TOL * dv_scale,
            ),
        }


def _dense_separations(
    solution: GuidanceSolution,
    chief: ChiefOrbit,
    grid: TimeGrid,
    subsamples: int,
) -> tuple[float, float]:
    """Clearance minima at interior arc times via partial propagation."""
    n_dep = solution.n_deputies
    min_chief = math.inf
    min_pair = math.inf
    for k in range(grid.n_intervals):
        t0 = float(grid.epochs[k])
        t1 = float(grid.epochs[k + 1])
        u_bar = solution.controls[:, k, :]
        burning = bool(np.any(u_bar))
        for s in range(1, subsamples + 1):
            t = t0 + (t1 - t0) * s / (subsamples + 1)
            phi = stm(chief, t0, t)
            y_t = solution.states[:, k, :] @ phi.T
            if burning:
                psi = control_convolution(chief, t0, t)
                y_t = y_t + u_bar @ psi.T
            pos = y_t @ rtn_map(chief, t).T
            min_chief = min(min_chief, float(np.linalg.norm(pos, axis=1).min()))
            for i in range(n_dep):
                for j in range(i + 1, n_dep):
                    d = float(np.linalg.norm(pos[i] - pos[j]))
                    min_pair = min(min_pair, d)
    return min_chief, min_pair


def replay_trajectory(
    solution: GuidanceSolution,
    scenario: Scenario,
    grid: TimeGrid,
    dense_subsamples: int = 0,
    collision_tolerance: float = 1e-3,
) -> ValidationReport:
    """Re-derive a solution's physics and compare with what it claims.

    Chains the arc models from each deputy's pinned initial state with
    the stored controls and measures the worst epoch mismatch against
    the stored trajectory, audits the exact thrust/clearance/boundary
    constraints, recomputes the Delta-V ledger, and splits fuel use by
    thrust axis. dense_subsamples > 0 additionally evaluates clearances
    at that many evenly spaced interior times per arc (epoch clearances
    alone are the contractual check; the dense minima are advisory).
    """
    chief = scenario.chief
    arcs = arc_models(chief, grid)
    replay_error = 0.0
    for i, dep in enumerate(scenario.deputies):
        replayed = propagate(dep.y0.as_array(), arcs, solution.controls[i])
        gap = np.linalg.norm(replayed - solution.states[i], axis=1)
        replay_error = max(replay_error, float(gap.max()))

    audit = check_nonconvex_feasibility(
        solution, scenario, grid, collision_tolerance=collision_tolerance
    )

    dv_per_deputy = compute_dv(solution.controls, grid, chief)
    dt = grid.durations
    u_phys = solution.physical_controls(chief)
    dv_split = np.einsum("k,ikc->ic", dt, np.abs(u_phys))

    pos = rtn_trajectory(solution.states, chief, grid)
    chief_seps = np.linalg.norm(pos, axis=2)
    pair_labels = tuple(
        (i, j)
        for i in range(solution.n_deputies)
        for j in range(i + 1, solution.n_deputies)
    )
    if pair_labels:
        pair_seps = np.array(
            [np.linalg.norm(pos[i] - pos[j], axis=1) for i, j in pair_labels]
        )
    else:
        pair_seps = np.zeros((0, grid.n_epochs))

    u_max = max(d.u_max for d in scenario.deputies)
    if solution.kind is FormulationKind.LP:
        allowance = (scenario.poly.scale_c - 1.0) * u_max + THRUST_SLACK
    else:
        allowance = THRUST_SLACK

    dense_chief = math.nan
    dense_pair = math.nan
    if dense_subsamples > 0:
        dense_chief, dense_pair = _dense_separations(
            solution, chief, grid, dense_subsamples
        )

    return ValidationReport(
        replay_error=replay_error,
        boundary_residual=audit.boundary_residual,
        dynamics_residual=audit.dynamics_residual,
        off_arc_thrust=audit.off_arc_thrust,
        thrust_excess=audit.thrust_excess,
        thrust_allowance=allowance,
        min_chief_separation=audit.min_chief_separation,
        min_deputy_separation=audit.min_deputy_separation,
        chief_separations=chief_seps,
        pair_labels=pair_labels,
        pair_separations=pair_seps,
        dv_per_deputy=dv_per_deputy,
        dv_total=float(dv_per_deputy.sum()),
        dv_reported=solution.dv_total,
        dv_split=dv_split,
        r_ca=scenario.r_ca,
        collision_tolerance=collision_tolerance,
        dense_min_chief=dense_chief,
        dense_min_deputy=dense_pair,
    )


def vertex_enumerate_polyhedron(poly: PolyhedronSpec) -> np.ndarray:
    """All vertices of the unit-Gamma thrust polyhedron, brute force."""
    return enumerate_vertices(poly.n_dir, exhaustive=True)
