"""Text serialization of standard-form conic programs."""

import numpy as np
import pytest
import scipy.sparse as sp

from roeguidance.formulation import build_program
from roeguidance.program import (
    FORMAT_TAG,
    ConicProgram,
    FormulationKind,
    ProgramFormatError,
    SecondOrderCone,
    export_program,
    parse_program,
    residuals,
)
from roeguidance.scp import InitialGuess, initial_reference


def _toy_program():
    return ConicProgram(
        c=np.array([1.0, 0.0]),
        a_eq=sp.csr_matrix(np.array([[1.0, 1.0]])),
        b_eq=np.array([1.0]),
        a_ub=sp.csr_matrix(np.array([[1.0, -1.0]])),
        b_ub=np.array([0.5]),
        cones=(SecondOrderCone(head_index=0, tail=(1,)),),
        lower=np.array([0.0, 0.0]),
        upper=np.array([2.0, 2.0]),
        kind=FormulationKind.SOCP,
    )


def test_format_tag_is_first_line():
    text = export_program(_toy_program())
    assert FORMAT_TAG == "conicprogram/1"
    assert text.splitlines()[0] == FORMAT_TAG


@pytest.mark.parametrize("kind", list(FormulationKind))
def test_roundtrip_is_bit_exact(small_scenario, kind):
    grid = small_scenario.build_grid()
    ref, _, _ = initial_reference(
        small_scenario, grid, InitialGuess.UNCONTROLLED_PROPAGATION
    )
    prog = build_program(small_scenario, grid, kind, reference=ref)
    text = export_program(prog)
    back = parse_program(text)
    assert export_program(back) == text
    assert back.kind == kind
    np.testing.assert_array_equal(back.c, prog.c)
    np.testing.assert_array_equal(back.b_eq, prog.b_eq)
    np.testing.assert_array_equal(back.b_ub, prog.b_ub)
    assert (back.a_eq != prog.a_eq).nnz == 0
    assert (back.a_ub != prog.a_ub).nnz == 0
    assert back.cones == prog.cones
    if prog.quad_diag is None:
        assert back.quad_diag is None
    else:
        np.testing.assert_array_equal(back.quad_diag, prog.quad_diag)


def test_export_is_deterministic(small_scenario):
    grid = small_scenario.build_grid()
    ref, _, _ = initial_reference(
        small_scenario, grid, InitialGuess.UNCONTROLLED_PROPAGATION
    )
    first = export_program(
        build_program(small_scenario, grid, FormulationKind.LP, reference=ref)
    )
    second = export_program(
        build_program(small_scenario, grid, FormulationKind.LP, reference=ref)
    )
    assert first == second


def test_parse_rejects_bad_header():
    with pytest.raises(ProgramFormatError):
        parse_program("conicprogram/9\nnvar 2\n")


def test_parse_rejects_truncated_text():
    text = export_program(_toy_program())
    lines = text.splitlines()
    with pytest.raises(ProgramFormatError):
        parse_program("\n".join(lines[: len(lines) // 2]))


def test_residuals_report_per_family_violations():
    prog = _toy_program()
    x = np.array([0.2, 0.5])
    res = residuals(prog, x)
    assert set(res) == {"bounds", "cones", "equality", "inequality"}
    assert res["equality"] == pytest.approx(0.3)
    assert res["inequality"] == pytest.approx(0.0)
    assert res["bounds"] == pytest.approx(0.0)
    assert res["cones"] == pytest.approx(0.3)
    feasible = np.array([0.5, 0.5])
    clean = residuals(prog, feasible)
    assert max(clean.values()) <= 1e-12
    outside = np.array([3.0, -1.0])
    res = residuals(prog, outside)
    assert res["bounds"] == pytest.approx(1.0)


def test_cone_validation():
    with pytest.raises(ValueError):
        SecondOrderCone(head_index=0, tail=())
    with pytest.raises(ValueError):
        SecondOrderCone(head_index=0, tail=(1,), head_value=1.0)
    with pytest.raises(ValueError):
        SecondOrderCone(head_index=None, tail=(1,), head_value=None)
    cone = SecondOrderCone(head_index=None, tail=(0, 1), head_value=2.5)
    assert cone.head_value == 2.5
