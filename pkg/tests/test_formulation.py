"""Convex program assembly: sizes, objective identity, keep-out rows."""

import numpy as np
import pytest

from roeguidance.dynamics import rtn_map
from roeguidance.formulation import (
    CollisionLinearizationError,
    build_program,
    extract_solution,
    linearize_collision,
    report_counts,
)
from roeguidance.program import FormulationKind
from roeguidance.scenarios import load_bundled
from roeguidance.solution import compute_dv
from roeguidance.solver import SolveStatus, get_backend

# (scenario, kind) -> (n_variables, n_constraints) with keep-out rows
EXPECTED_SIZES = {
    ("reconfig-1", "qcqp"): (1248, 1234),
    ("reconfig-1", "socp"): (1316, 1234),
    ("reconfig-1", "lp"): (1316, 2526),
    ("reconfig-1", "lp-scaled"): (1316, 2526),
    ("reconfig-2", "qcqp"): (2412, 2661),
    ("reconfig-2", "socp"): (2544, 2661),
    ("reconfig-2", "lp"): (2544, 5169),
    ("reconfig-2", "lp-scaled"): (2544, 5169),
    ("reconfig-3", "qcqp"): (960, 946),
    ("reconfig-3", "socp"): (1012, 946),
    ("reconfig-3", "lp"): (1012, 1934),
    ("reconfig-3", "lp-scaled"): (1012, 1934),
    ("reconfig-4", "qcqp"): (3816, 4221),
    ("reconfig-4", "socp"): (4026, 4221),
    ("reconfig-4", "lp"): (4026, 8211),
    ("reconfig-4", "lp-scaled"): (4026, 8211),
}


@pytest.mark.parametrize("name", ["reconfig-1", "reconfig-2", "reconfig-3", "reconfig-4"])
def test_report_counts_match_expected_sizes(name):
    scenario = load_bundled(name)
    grid = scenario.build_grid()
    for kind in FormulationKind:
        assert report_counts(scenario, grid, kind) == EXPECTED_SIZES[(name, kind.value)]


def test_report_counts_structure():
    for name in ("reconfig-1", "reconfig-2", "reconfig-3", "reconfig-4"):
        scenario = load_bundled(name)
        grid = scenario.build_grid()
        n_dep = len(scenario.deputies)
        burns = grid.n_burns
        nv_q, nc_q = report_counts(scenario, grid, FormulationKind.QCQP)
        nv_s, nc_s = report_counts(scenario, grid, FormulationKind.SOCP)
        nv_l, nc_l = report_counts(scenario, grid, FormulationKind.LP)
        # one epigraph slack per burn per deputy
        assert nv_s - nv_q == n_dep * burns
        assert nv_l == nv_s
        assert nc_s == nc_q
        # each cone swaps for n_dir fan facets plus 8 cross facets
        assert nc_l - nc_s == (scenario.poly.n_dir + 7) * n_dep * burns
        # dropping keep-out removes one row per pair per epoch
        pairs = n_dep * (n_dep - 1) // 2 + n_dep
        _, nc_free = report_counts(
            scenario, grid, FormulationKind.LP, with_collision=False
        )
        assert nc_l - nc_free == pairs * grid.n_epochs


def test_reconfig3_sizes_without_keepout():
    scenario = load_bundled("reconfig-3")
    grid = scenario.build_grid()
    assert report_counts(scenario, grid, FormulationKind.SOCP, with_collision=False) == (
        1012,
        676,
    )
    assert report_counts(scenario, grid, FormulationKind.LP, with_collision=False) == (
        1012,
        1664,
    )


@pytest.fixture(scope="module")
def socp_solution(pco2):
    grid = pco2.build_grid()
    prog = build_program(pco2, grid, FormulationKind.SOCP, collision=False)
    report = get_backend("ipm").solve(prog)
    assert report.status is SolveStatus.OPTIMAL
    solution = extract_solution(
        report.x, pco2, grid, FormulationKind.SOCP, report.status, report.objective
    )
    return pco2, grid, solution


def test_objective_equals_total_dv(socp_solution):
    scenario, grid, solution = socp_solution
    dv = compute_dv(solution.controls, grid, scenario.chief)
    assert solution.objective == pytest.approx(float(dv.sum()), rel=1e-6)
    assert solution.dv_total == pytest.approx(float(dv.sum()), rel=1e-12)
    np.testing.assert_allclose(solution.dv_per_deputy, dv, rtol=1e-12)


def test_gammas_bind_to_burn_norms(socp_solution):
    scenario, grid, solution = socp_solution
    u_max = scenario.deputies[0].f_max / scenario.deputies[0].mass
    norms = np.linalg.norm(solution.controls, axis=2)
    burn_norms = norms[:, 0::2]
    gap = np.max(np.abs(solution.gammas - burn_norms))
    assert gap <= 1e-6 * scenario.chief.a * u_max


def test_boundary_conditions_hold(socp_solution):
    scenario, grid, solution = socp_solution
    for i, dep in enumerate(scenario.deputies):
        np.testing.assert_allclose(
            solution.states[i, 0], dep.y0.values, atol=1e-9
        )
        np.testing.assert_allclose(
            solution.states[i, -1], dep.yf.values, atol=1e-3
        )


def test_coast_arcs_are_thrust_free(socp_solution):
    _, grid, solution = socp_solution
    coast = solution.controls[:, 1::2, :]
    assert np.max(np.abs(coast)) <= 1e-12


def test_qcqp_solution_has_no_gammas(pco2):
    grid = pco2.build_grid()
    prog = build_program(pco2, grid, FormulationKind.QCQP, collision=False)
    assert prog.quad_diag is not None
    report = get_backend("ipm").solve(prog)
    assert report.status is SolveStatus.OPTIMAL
    solution = extract_solution(
        report.x, pco2, grid, FormulationKind.QCQP, report.status, report.objective
    )
    assert solution.gammas is None
    for i, dep in enumerate(pco2.deputies):
        np.testing.assert_allclose(
            solution.states[i, -1], dep.yf.values, atol=1e-3
        )


def test_build_program_requires_reference(small_scenario):
    grid = small_scenario.build_grid()
    with pytest.raises(ValueError, match="collision=False"):
        build_program(small_scenario, grid, FormulationKind.LP)


def test_collision_row_contains_keepout_sphere(pco2):
    # any state pair accepted by the linear row is provably clear of
    # the sphere: coeffs @ d can never exceed ||T d||
    grid = pco2.build_grid()
    t = rtn_map(pco2.chief, float(grid.epochs[7]))
    rng = np.random.default_rng(21)
    for _ in range(50):
        ref_i = rng.normal(scale=300.0, size=6)
        ref_j = rng.normal(scale=300.0, size=6)
        coeffs, rhs = linearize_collision(ref_i, ref_j, t, pco2.r_ca)
        assert rhs == pco2.r_ca
        for _ in range(20):
            d = rng.normal(scale=500.0, size=6)
            assert coeffs @ d <= np.linalg.norm(t @ d) + 1e-9


def test_collision_row_tangent_at_reference(pco2):
    grid = pco2.build_grid()
    t = rtn_map(pco2.chief, float(grid.epochs[11]))
    rng = np.random.default_rng(3)
    ref_i = rng.normal(scale=400.0, size=6)
    ref_j = rng.normal(scale=400.0, size=6)
    coeffs, _ = linearize_collision(ref_i, ref_j, t, pco2.r_ca)
    d_ref = ref_i - ref_j
    assert coeffs @ d_ref == pytest.approx(np.linalg.norm(t @ d_ref), rel=1e-12)


def test_chief_keepout_row(pco2):
    grid = pco2.build_grid()
    t = rtn_map(pco2.chief, float(grid.epochs[5]))
    rng = np.random.default_rng(8)
    ref = rng.normal(scale=400.0, size=6)
    coeffs, rhs = linearize_collision(ref, None, t, pco2.r_ca)
    assert rhs == pco2.r_ca
    assert coeffs @ ref == pytest.approx(np.linalg.norm(t @ ref), rel=1e-12)


def test_degenerate_pair_is_nudged_deterministically(pco2):
    grid = pco2.build_grid()
    t = rtn_map(pco2.chief, float(grid.epochs[9]))
    ref = np.array([10.0, 20.0, 30.0, 40.0, 50.0, 60.0])
    first = linearize_collision(ref, ref.copy(), t, pco2.r_ca)
    second = linearize_collision(ref, ref.copy(), t, pco2.r_ca)
    np.testing.assert_array_equal(first[0], second[0])
    assert first[1] == second[1] == pco2.r_ca
    assert np.linalg.norm(first[0]) > 0.0


def test_degenerate_pair_raises_when_not_perturbed(pco2):
    grid = pco2.build_grid()
    t = rtn_map(pco2.chief, float(grid.epochs[9]))
    ref = np.zeros(6)
    with pytest.raises(CollisionLinearizationError):
        linearize_collision(ref, ref.copy(), t, pco2.r_ca, perturb_degenerate=False)
