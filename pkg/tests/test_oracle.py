"""Independent replay audit: honest plans pass, tampered plans do not."""

import dataclasses

import numpy as np
import pytest

from roeguidance.oracle import replay_trajectory, vertex_enumerate_polyhedron
from roeguidance.polyhedron import PolyhedronSpec, enumerate_vertices
from roeguidance.scp import run_scp

FAMILIES = {
    "replay",
    "dynamics",
    "boundary",
    "off-arc-thrust",
    "thrust-cap",
    "collision",
    "dv-identity",
}


@pytest.fixture(scope="module")
def audited_plan(pco2):
    grid = pco2.build_grid()
    solution, _ = run_scp(pco2, grid)
    return pco2, grid, solution


def test_honest_plan_passes_every_family(case_study, case_solution):
    solution, _ = case_solution
    report = replay_trajectory(solution, case_study, case_study.build_grid())
    verdicts = report.families()
    assert set(verdicts) == FAMILIES
    assert report.passed
    for name, (ok, _, _) in verdicts.items():
        assert ok, name
    assert report.dv_reported == pytest.approx(solution.dv_total, rel=1e-12)
    assert report.min_chief_separation >= case_study.r_ca - 1e-3
    assert report.min_deputy_separation >= case_study.r_ca - 1e-3


def test_zeroed_burn_is_caught(audited_plan):
    scenario, grid, solution = audited_plan
    controls = solution.controls.copy()
    worst = int(np.argmax(np.linalg.norm(controls[0], axis=1)))
    controls[0, worst] = 0.0
    tampered = dataclasses.replace(solution, controls=controls)
    report = replay_trajectory(tampered, scenario, grid)
    verdicts = report.families()
    assert not report.passed
    assert not verdicts["replay"][0]
    assert not verdicts["dynamics"][0]
    assert not verdicts["dv-identity"][0]
    # the stored trajectory still hits its targets, so boundary holds
    assert verdicts["boundary"][0]


def test_inflated_burn_breaks_thrust_cap(audited_plan):
    scenario, grid, solution = audited_plan
    controls = solution.controls.copy()
    worst = int(np.argmax(np.linalg.norm(controls[0], axis=1)))
    controls[0, worst] *= 3.0
    tampered = dataclasses.replace(solution, controls=controls)
    report = replay_trajectory(tampered, scenario, grid)
    verdicts = report.families()
    assert not report.passed
    assert not verdicts["thrust-cap"][0]
    assert not verdicts["replay"][0]


def test_cooked_ledger_fails_only_dv_identity(audited_plan):
    scenario, grid, solution = audited_plan
    tampered = dataclasses.replace(solution, dv_total=solution.dv_total * 1.01)
    report = replay_trajectory(tampered, scenario, grid)
    verdicts = report.families()
    assert not report.passed
    assert not verdicts["dv-identity"][0]
    for name in FAMILIES - {"dv-identity"}:
        assert verdicts[name][0], name


def test_shifted_endpoint_fails_boundary(audited_plan):
    scenario, grid, solution = audited_plan
    states = solution.states.copy()
    states[0, -1, 3] += 0.5
    tampered = dataclasses.replace(solution, states=states)
    report = replay_trajectory(tampered, scenario, grid)
    verdicts = report.families()
    assert not verdicts["boundary"][0]
    assert not verdicts["replay"][0]


def test_dv_split_bounds_the_euclidean_ledger(audited_plan):
    scenario, grid, solution = audited_plan
    report = replay_trajectory(solution, scenario, grid)
    assert report.dv_split.shape == (len(scenario.deputies), 3)
    per_deputy_l1 = report.dv_split.sum(axis=1)
    assert np.all(per_deputy_l1 >= report.dv_per_deputy - 1e-12)
    assert np.all(per_deputy_l1 <= np.sqrt(3.0) * report.dv_per_deputy + 1e-12)


def test_dense_subsampling_is_advisory(audited_plan):
    scenario, grid, solution = audited_plan
    sparse = replay_trajectory(solution, scenario, grid)
    assert np.isnan(sparse.dense_min_chief)
    dense = replay_trajectory(solution, scenario, grid, dense_subsamples=4)
    assert dense.dense_min_chief <= sparse.min_chief_separation
    assert dense.dense_min_deputy <= sparse.min_deputy_separation
    # interior dips below the keep-out radius do not fail the audit:
    # the contract certifies clearances at the grid epochs
    assert dense.passed
    assert dense.chief_separations.shape == (
        len(scenario.deputies),
        grid.n_epochs,
    )


def test_vertex_enumeration_cross_check():
    fast = enumerate_vertices(12)
    slow = vertex_enumerate_polyhedron(PolyhedronSpec(n_dir=12, scale_c=1.0))

    def canon(vertices):
        return np.array(sorted(tuple(np.round(v, 9)) for v in vertices))

    np.testing.assert_allclose(canon(fast), canon(slow), atol=1e-9)
