"""Compile reconfiguration scenarios into standard-form conic programs.

Three interchangeable formulations share the same decision layout and
linear constraint core (boundary conditions, discrete dynamics, coast
arcs pinned to zero thrust, linearized collision keep-out rows):

- quadratic: quadratic fuel cost with per-burn norm-squared thrust caps,
- cone: linear cost over per-burn slack magnitudes with second-order
  cone thrust constraints,
- facet: the cone constraint replaced by a polyhedral outer or inner
  approximation, yielding a pure LP.

All builders are pure functions of (scenario, grid, reference) and
return an immutable ConicProgram.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse as sp

from .dynamics import ArcModel, arc_models, propagate, rtn_maps
from .orbits import DimRoeState
from .polyhedron import facet_matrix
from .program import ConicProgram, FormulationKind, SecondOrderCone
from .solution import (
    GuidanceSolution,
    chief_distances,
    compute_dv,
    deputy_pair_distances,
)
from .solver import SolveStatus
from .timegrid import TimeGrid

if TYPE_CHECKING:
    from .scenarios import Scenario

# References closer than this cannot define a keep-out direction and are
# nudged radially by the documented deterministic perturbation.
DEGENERACY_FLOOR = 1e-6
RADIAL_NUDGE = 1e-3


@dataclass(frozen=True)
class DeputySpec:
    """One controlled deputy: boundary states and thruster sizing."""

    y0: DimRoeState
    yf: DimRoeState
    f_max: float
    mass: float
    label: str = ""

    def __post_init__(self) -> None:
        if self.mass <= 0.0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.f_max <= 0.0:
            raise ValueError(f"f_max must be positive, got {self.f_max}")

    @property
    def u_max(self) -> float:
        """Maximum thrust acceleration f_max / mass [m/s^2]."""
        return self.f_max / self.mass


class CollisionLinearizationError(ValueError):
    """Raised when a reference pair is too close to define a hyperplane."""


@dataclass(frozen=True)
class DecisionLayout:
    """Index map of the flat decision vector.

    Order: all state epochs deputy-major (6 per epoch), then all per-arc
    scaled controls deputy-major (3 per arc), then, when the formulation
    carries slacks, one magnitude bound per deputy and burn.
    """

    n_deputies: int
    n_epochs: int
    n_arcs: int
    n_burns: int
    has_slack: bool

    @property
    def n_state_vars(self) -> int:
        return 6 * self.n_deputies * self.n_epochs

    @property
    def n_control_vars(self) -> int:
        return 3 * self.n_deputies * self.n_arcs

    @property
    def n_slack_vars(self) -> int:
        return self.n_deputies * self.n_burns if self.has_slack else 0

    @property
    def n_variables(self) -> int:
        return self.n_state_vars + self.n_control_vars + self.n_slack_vars

    def y_slice(self, deputy: int, epoch: int) -> slice:
        base = 6 * (deputy * self.n_epochs + epoch)
        return slice(base, base + 6)

    def u_slice(self, deputy: int, arc: int) -> slice:
        base = self.n_state_vars + 3 * (deputy * self.n_arcs + arc)
        return slice(base, base + 3)

    def gamma_index(self, deputy: int, burn: int) -> int:
        if not self.has_slack:
            raise ValueError("this layout has no slack variables")
        return self.n_state_vars + self.n_control_vars + (
            deputy * self.n_burns + burn
        )

    def states_from(self, x: np.ndarray) -> np.ndarray:
        return x[: self.n_state_vars].reshape(
            self.n_deputies, self.n_epochs, 6
        )

    def controls_from(self, x: np.ndarray) -> np.ndarray:
        lo = self.n_state_vars
        return x[lo : lo + self.n_control_vars].reshape(
            self.n_deputies, self.n_arcs, 3
        )

    def gammas_from(self, x: np.ndarray) -> np.ndarray | None:
        if not self.has_slack:
            return None
        lo = self.n_state_vars + self.n_control_vars
        return x[lo:].reshape(self.n_deputies, self.n_burns)


def make_layout(
    scenario: "Scenario", grid: TimeGrid, with_slack: bool
) -> DecisionLayout:
    return DecisionLayout(
        n_deputies=len(scenario.deputies),
        n_epochs=grid.n_epochs,
        n_arcs=grid.n_intervals,
        n_burns=grid.n_burns,
        has_slack=with_slack,
    )


def linearize_collision(
    reference_i: np.ndarray,
    reference_j: np.ndarray | None,
    t_matrix: np.ndarray,
    r_ca: float,
    perturb_degenerate: bool = True,
) -> tuple[np.ndarray, float]:
    """Supporting-hyperplane row of one keep-out sphere.

    Returns (coeffs, rhs) with the feasible half-space
    coeffs @ (y_i - y_j) >= rhs (reference_j None means the chief, in
    which case the row reads coeffs @ y_i >= rhs). The half-space
    normal is the unit vector along the references' relative RTN
    position, pulled back through the projection:

        a_hat = T (ref_i - ref_j) / ||T (ref_i - ref_j)||,
        a_hat^T T (y_i - y_j) >= r_ca.

    By Cauchy-Schwarz, a_hat^T T d <= ||T d|| for any state difference
    d, so the row implies the exact RTN clearance ||T d|| >= r_ca: any
    point satisfying the linear row is outside the keep-out sphere.
    The half-space is tangent to the sphere and contains the reference
    pair's own direction, which makes it the tightest convex
    restriction through the reference geometry.

    A reference pair closer than the degeneracy floor (in relative
    state or in projected RTN position) has no defined direction; it is
    nudged by 1e-3 m along the epoch's radial axis (a +1e-3 m shift of
    the leading reference's first state component), or rejected when
    perturb_degenerate is false.
    """
    ref_i = np.asarray(reference_i, dtype=float)
    rel = ref_i if reference_j is None else ref_i - np.asarray(reference_j, float)
    p = t_matrix @ rel
    if (
        float(np.linalg.norm(rel)) < DEGENERACY_FLOOR
        or float(np.linalg.norm(p)) < DEGENERACY_FLOOR
    ):
        if not perturb_degenerate:
            raise CollisionLinearizationError(
                "reference pair is degenerate; perturb the reference "
                "before linearizing"
            )
        rel = rel + np.array([RADIAL_NUDGE, 0.0, 0.0, 0.0, 0.0, 0.0])
        p = t_matrix @ rel
    direction = p / np.linalg.norm(p)
    return t_matrix.T @ direction, float(r_ca)


def _equality_rows(
    scenario: "Scenario", grid: TimeGrid, layout: DecisionLayout, arcs
) -> tuple[sp.csr_matrix, np.ndarray]:
    """Boundary, dynamics, and coast-arc zero-thrust equalities.

    Row order: per deputy, 6 initial rows, 6 dynamics rows per arc, 6
    terminal rows; then per deputy 3 zero-thrust rows per natural arc.
    """
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    rhs: list[float] = []

    def add_block(row0: int, col_slice: slice, block: np.ndarray) -> None:
        rr, cc = np.nonzero(block)
        rows.extend((row0 + rr).tolist())
        cols.extend((col_slice.start + cc).tolist())
        vals.extend(block[rr, cc].tolist())

    r = 0
    eye = np.eye(6)
    for i, dep in enumerate(scenario.deputies):
        add_block(r, layout.y_slice(i, 0), eye)
        rhs.extend(dep.y0.as_array().tolist())
        r += 6
        for k in range(grid.n_intervals):
            add_block(r, layout.y_slice(i, k + 1), eye)
            add_block(r, layout.y_slice(i, k), -arcs[k].phi)
            add_block(r, layout.u_slice(i, k), -arcs[k].psi)
            rhs.extend([0.0] * 6)
            r += 6
        add_block(r, layout.y_slice(i, grid.n_epochs - 1), eye)
        rhs.extend(dep.yf.as_array().tolist())
        r += 6
    for i in range(layout.n_deputies):
        for k in grid.natural_indices:
            add_block(r, layout.u_slice(i, k), np.eye(3))
            rhs.extend([0.0] * 3)
            r += 3
    a_eq = sp.csr_matrix(
        (vals, (rows, cols)), shape=(r, layout.n_variables)
    )
    return a_eq, np.array(rhs)


def _collision_rows(
    scenario: "Scenario",
    grid: TimeGrid,
    layout: DecisionLayout,
    reference: np.ndarray,
) -> tuple[sp.csr_matrix, np.ndarray]:
    """Linearized keep-out half-spaces at every grid epoch.

    Row order: per epoch, one deputy-chief row per deputy, then one
    deputy-deputy row per pair (i < j). Rows are emitted in the
    inequality convention a_ub x <= b_ub, so each keep-out row
    coeffs @ (y_i - y_j) >= r_ca is stored negated.
    """
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    rhs: list[float] = []
    maps = rtn_maps(scenario.chief, grid)
    pairs = tuple(combinations(range(layout.n_deputies), 2))
    r = 0
    for k in range(grid.n_epochs):
        t_k = maps[k]
        for i in range(layout.n_deputies):
            coeffs, bound = linearize_collision(
                reference[i, k], None, t_k, scenario.r_ca
            )
            sl = layout.y_slice(i, k)
            rows.extend([r] * 6)
            cols.extend(range(sl.start, sl.stop))
            vals.extend((-coeffs).tolist())
            rhs.append(-bound)
            r += 1
        for i, j in pairs:
            coeffs, bound = linearize_collision(
                reference[i, k], reference[j, k], t_k, scenario.r_ca
            )
            sl_i, sl_j = layout.y_slice(i, k), layout.y_slice(j, k)
            rows.extend([r] * 12)
            cols.extend(range(sl_i.start, sl_i.stop))
            cols.extend(range(sl_j.start, sl_j.stop))
            vals.extend((-coeffs).tolist())
            vals.extend(coeffs.tolist())
            rhs.append(-bound)
            r += 1
    a_ub = sp.csr_matrix(
        (vals, (rows, cols)), shape=(r, layout.n_variables)
    )
    return a_ub, np.array(rhs)


def _validate_reference(
    reference: np.ndarray | None, layout: DecisionLayout
) -> np.ndarray:
    if reference is None:
        raise ValueError(
            "collision linearization needs a reference trajectory; pass "
            "collision=False to build the keep-out-free relaxation"
        )
    reference = np.asarray(reference, dtype=float)
    want = (layout.n_deputies, layout.n_epochs, 6)
    if reference.shape != want:
        raise ValueError(
            f"reference trajectory shape {reference.shape} != {want}"
        )
    return reference


def _assemble(
    scenario: "Scenario",
    grid: TimeGrid,
    layout: DecisionLayout,
    reference: np.ndarray | None,
    collision: bool,
    arcs,
) -> tuple[sp.csr_matrix, np.ndarray, sp.csr_matrix, np.ndarray]:
    a_eq, b_eq = _equality_rows(scenario, grid, layout, arcs)
    if collision and scenario.r_ca > 0.0:
        reference = _validate_reference(reference, layout)
        a_ub, b_ub = _collision_rows(scenario, grid, layout, reference)
    else:
        a_ub = sp.csr_matrix((0, layout.n_variables))
        b_ub = np.zeros(0)
    return a_eq, b_eq, a_ub, b_ub


def _slack_bounds(
    scenario: "Scenario", layout: DecisionLayout
) -> tuple[np.ndarray, np.ndarray]:
    lower = np.full(layout.n_variables, -np.inf)
    upper = np.full(layout.n_variables, np.inf)
    a_c = scenario.chief.a
    for i, dep in enumerate(scenario.deputies):
        for b in range(layout.n_burns):
            g = layout.gamma_index(i, b)
            lower[g] = 0.0
            upper[g] = a_c * dep.u_max
    return lower, upper


def build_qcqp(
    scenario: "Scenario",
    grid: TimeGrid,
    reference: np.ndarray | None = None,
    collision: bool = True,
    arcs: tuple[ArcModel, ...] | None = None,
) -> ConicProgram:
    """Quadratic-cost formulation with norm-squared thrust caps.

    Cost (1/a_c^2) sum over deputies and forced arcs of dt_k^2 |u_bar|^2;
    thrust bound |u_bar| <= a_c u_max per burn as a fixed-head cone.
    """
    layout = make_layout(scenario, grid, with_slack=False)
    arcs = arcs or arc_models(scenario.chief, grid)
    a_eq, b_eq, a_ub, b_ub = _assemble(
        scenario, grid, layout, reference, collision, arcs
    )
    a_c = scenario.chief.a
    quad = np.zeros(layout.n_variables)
    cones = []
    for i, dep in enumerate(scenario.deputies):
        for k in grid.forced_indices:
            sl = layout.u_slice(i, k)
            quad[sl] = (grid.dt(k) / a_c) ** 2
            cones.append(
                SecondOrderCone(
                    head_index=None,
                    tail=tuple(range(sl.start, sl.stop)),
                    head_value=a_c * dep.u_max,
                )
            )
    return ConicProgram(
        c=np.zeros(layout.n_variables),
        a_eq=a_eq,
        b_eq=b_eq,
        a_ub=a_ub,
        b_ub=b_ub,
        cones=tuple(cones),
        quad_diag=quad,
        kind=FormulationKind.QCQP,
    )


def build_socp(
    scenario: "Scenario",
    grid: TimeGrid,
    reference: np.ndarray | None = None,
    collision: bool = True,
    arcs: tuple[ArcModel, ...] | None = None,
) -> ConicProgram:
    """Epigraph formulation: linear cost over per-burn slack magnitudes.

    Cost (1/a_c) sum of dt_k Gamma_{i,k}; cones |u_bar| <= Gamma; slack
    bounds 0 <= Gamma <= a_c u_max.
    """
    layout = make_layout(scenario, grid, with_slack=True)
    arcs = arcs or arc_models(scenario.chief, grid)
    a_eq, b_eq, a_ub, b_ub = _assemble(
        scenario, grid, layout, reference, collision, arcs
    )
    a_c = scenario.chief.a
    cost = np.zeros(layout.n_variables)
    cones = []
    for i in range(layout.n_deputies):
        for b, k in enumerate(grid.forced_indices):
            sl = layout.u_slice(i, k)
            g = layout.gamma_index(i, b)
            cost[g] = grid.dt(k) / a_c
            cones.append(
                SecondOrderCone(
                    head_index=g, tail=tuple(range(sl.start, sl.stop))
                )
            )
    lower, upper = _slack_bounds(scenario, layout)
    return ConicProgram(
        c=cost,
        a_eq=a_eq,
        b_eq=b_eq,
        a_ub=a_ub,
        b_ub=b_ub,
        cones=tuple(cones),
        lower=lower,
        upper=upper,
        kind=FormulationKind.SOCP,
    )


def build_lp(
    scenario: "Scenario",
    grid: TimeGrid,
    reference: np.ndarray | None = None,
    collision: bool = True,
    scaled: bool = True,
    arcs: tuple[ArcModel, ...] | None = None,
) -> ConicProgram:
    """Polyhedral formulation: the thrust cone replaced by facet rows.

    Each burn's cone becomes n_dir transversal-normal facets plus eight
    cross-plane facets on (scale * u_bar, Gamma). With scaled=False the
    polyhedron circumscribes the thrust sphere (vertices may protrude);
    with scaled=True it is shrunk by the scenario's scale factor so
    every feasible thrust stays inside the sphere.
    """
    layout = make_layout(scenario, grid, with_slack=True)
    arcs = arcs or arc_models(scenario.chief, grid)
    a_eq, b_eq, a_ub, b_ub = _assemble(
        scenario, grid, layout, reference, collision, arcs
    )
    a_c = scenario.chief.a
    scale = scenario.poly.scale_c if scaled else 1.0
    normals, offsets = facet_matrix(scenario.poly.n_dir)
    n_facets = normals.shape[0]

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    r = 0
    cost = np.zeros(layout.n_variables)
    for i in range(layout.n_deputies):
        for b, k in enumerate(grid.forced_indices):
            sl = layout.u_slice(i, k)
            g = layout.gamma_index(i, b)
            cost[g] = grid.dt(k) / a_c
            for f in range(n_facets):
                for comp in range(3):
                    if normals[f, comp] != 0.0:
                        rows.append(r)
                        cols.append(sl.start + comp)
                        vals.append(scale * normals[f, comp])
                rows.append(r)
                cols.append(g)
                vals.append(-offsets[f])
                r += 1
    facet_block = sp.csr_matrix(
        (vals, (rows, cols)), shape=(r, layout.n_variables)
    )
    a_ub = sp.vstack([a_ub, facet_block]).tocsr()
    b_ub = np.concatenate([b_ub, np.zeros(r)])
    lower, upper = _slack_bounds(scenario, layout)
    return ConicProgram(
        c=cost,
        a_eq=a_eq,
        b_eq=b_eq,
        a_ub=a_ub,
        b_ub=b_ub,
        lower=lower,
        upper=upper,
        kind=FormulationKind.LP_SCALED if scaled else FormulationKind.LP,
    )


def build_program(
    scenario: "Scenario",
    grid: TimeGrid,
    kind: FormulationKind,
    reference: np.ndarray | None = None,
    collision: bool = True,
    arcs: tuple[ArcModel, ...] | None = None,
) -> ConicProgram:
    """Dispatch to the builder matching the formulation kind."""
    if kind is FormulationKind.QCQP:
        return build_qcqp(scenario, grid, reference, collision, arcs)
    if kind is FormulationKind.SOCP:
        return build_socp(scenario, grid, reference, collision, arcs)
    if kind is FormulationKind.LP:
        return build_lp(scenario, grid, reference, collision, False, arcs)
    return build_lp(scenario, grid, reference, collision, True, arcs)


def report_counts(
    scenario: "Scenario",
    grid: TimeGrid,
    kind: FormulationKind,
    with_collision: bool = True,
) -> tuple[int, int]:
    """Reported problem size (n_variables, n_constraints).

    Variables count the whole decision vector: states at every epoch,
    controls on every arc, and one slack per burn for the epigraph
    formulations. Constraints count dynamics rows, thrust-cap
    constraints (one per burn for the conic formulations, one row per
    facet for the polyhedral ones), and collision rows at every epoch
    when present. Boundary conditions and coast-arc zero-thrust rows
    pin variables outright and are treated as fixings, not counted.
    Swapping a burn's cone for its n_dir + 8 facets therefore changes
    the count by exactly n_dir + 7 rows per burn per deputy.
    """
    layout = make_layout(
        scenario, grid, with_slack=kind is not FormulationKind.QCQP
    )
    n_dep = layout.n_deputies
    dynamics = 6 * n_dep * grid.n_intervals
    burns = n_dep * grid.n_burns
    if kind in (FormulationKind.LP, FormulationKind.LP_SCALED):
        thrust = burns * (scenario.poly.n_dir + 8)
    else:
        thrust = burns
    collision = 0
    if with_collision and scenario.r_ca > 0:
        collision = (n_dep + n_dep * (n_dep - 1) // 2) * grid.n_epochs
    return layout.n_variables, dynamics + thrust + collision


def extract_solution(
    x: np.ndarray,
    scenario: "Scenario",
    grid: TimeGrid,
    kind: FormulationKind,
    status: SolveStatus,
    objective: float,
    arcs: tuple[ArcModel, ...] | None = None,
) -> GuidanceSolution:
    """Turn a solver primal point into a GuidanceSolution.

    Controls are read from the decision vector with natural arcs forced
    to exact zero, and the stored trajectory is re-propagated from the
    initial states so it satisfies the discrete dynamics exactly rather
    than to solver tolerance.
    """
    layout = make_layout(
        scenario, grid, with_slack=kind is not FormulationKind.QCQP
    )
    if x.shape != (layout.n_variables,):
        raise ValueError(
            f"solution vector length {x.shape} != {layout.n_variables}"
        )
    arcs = arcs or arc_models(scenario.chief, grid)
    controls = layout.controls_from(x).copy()
    controls[:, list(grid.natural_indices), :] = 0.0
    states = np.array(
        [
            propagate(dep.y0.as_array(), arcs, controls[i])
            for i, dep in enumerate(scenario.deputies)
        ]
    )
    gammas = layout.gammas_from(x)
    dv = compute_dv(controls, grid, scenario.chief)
    return GuidanceSolution(
        kind=kind,
        states=states,
        controls=controls,
        gammas=None if gammas is None else gammas.copy(),
        objective=float(objective),
        solver_status=status,
        dv_per_deputy=dv,
        dv_total=float(np.sum(dv)),
    )


@dataclass(frozen=True)
class FeasibilityReport:
    """Exact constraint audit of a solution against the original problem.

    Distances and residuals are in meters, thrust quantities in m/s^2.
    thrust_excess is max over burns of ||u|| - u_max (negative when the
    bound holds everywhere). Collision margins are evaluated at every
    grid epoch with the exact RTN norms, not their linearizations.
    """

    boundary_residual: float
    dynamics_residual: float
    off_arc_thrust: float
    thrust_excess: float
    min_deputy_separation: float
    min_chief_separation: float
    quadratic_cost: float
    linear_cost: float
    r_ca: float
    collision_tolerance: float

    @property
    def collision_free(self) -> bool:
        floor = self.r_ca - self.collision_tolerance
        return (
            self.min_deputy_separation >= floor
            and self.min_chief_separation >= floor
        )


def check_nonconvex_feasibility(
    solution: GuidanceSolution,
    scenario: "Scenario",
    grid: TimeGrid,
    collision_tolerance: float = 1e-3,
) -> FeasibilityReport:
    """Audit a solution against the exact (non-convexified) constraints."""
    chief = scenario.chief
    a_c = chief.a
    arcs = arc_models(chief, grid)
    dyn = 0.0
    bnd = 0.0
    for i, dep in enumerate(scenario.deputies):
        y = solution.states[i]
        bnd = max(
            bnd,
            float(np.linalg.norm(y[0] - dep.y0.as_array())),
            float(np.linalg.norm(y[-1] - dep.yf.as_array())),
        )
        for k, arc in enumerate(arcs):
            pred = arc.phi @ y[k] + arc.psi @ solution.controls[i, k]
            dyn = max(dyn, float(np.linalg.norm(y[k + 1] - pred)))

    u_phys = solution.physical_controls(chief)
    norms = np.linalg.norm(u_phys, axis=2)
    off_arc = float(np.max(norms[:, list(grid.natural_indices)], initial=0.0))
    u_maxes = np.array([d.u_max for d in scenario.deputies])
    forced = norms[:, list(grid.forced_indices)]
    excess = float(np.max(forced - u_maxes[:, None]))

    dists_chief = chief_distances(solution.states, chief, grid)
    _, dists_dep = deputy_pair_distances(solution.states, chief, grid)
    min_chief = float(np.min(dists_chief))
    min_dep = float(np.min(dists_dep)) if dists_dep.size else np.inf

    dt = grid.durations
    ubar_norms = np.linalg.norm(solution.controls, axis=2)
    quad_cost = float(np.sum((ubar_norms * dt[None, :] / a_c) ** 2))
    lin_cost = float(np.sum(ubar_norms * dt[None, :] / a_c))

    return FeasibilityReport(
        boundary_residual=bnd,
        dynamics_residual=dyn,
        off_arc_thrust=off_arc,
        thrust_excess=excess,
        min_deputy_separation=min_dep,
        min_chief_separation=min_chief,
        quadratic_cost=quad_cost,
        linear_cost=lin_cost,
        r_ca=scenario.r_ca,
        collision_tolerance=collision_tolerance,
    )
