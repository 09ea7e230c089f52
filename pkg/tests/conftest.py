"""Shared fixtures: bundled scenarios and one precomputed plan."""

import pytest

from roeguidance import (
    FormulationKind,
    coplanar_to_pco_scenario,
    load_bundled,
    run_scp,
)


@pytest.fixture(scope="session")
def case_study():
    return load_bundled("case-study")


@pytest.fixture(scope="session")
def reconfig3():
    return load_bundled("reconfig-3")


@pytest.fixture(scope="session")
def small_scenario():
    """Two deputies over two orbits: the cheapest full pipeline instance.

    Too short to be reachable under the thrust cap, so only structural
    tests (program assembly, serialization) should use it; solver tests
    want pco2 below.
    """
    return coplanar_to_pco_scenario(2, duration_orbits=2.0)


@pytest.fixture(scope="session")
def pco2():
    """Two deputies over ten orbits: small but feasible end to end."""
    return coplanar_to_pco_scenario(2)


@pytest.fixture(scope="session")
def case_solution(case_study):
    """One converged case-study plan shared by validation-layer tests."""
    solution, trace = run_scp(
        case_study, case_study.build_grid(), kind=FormulationKind.LP_SCALED
    )
    return solution, trace
