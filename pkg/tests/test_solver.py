"""Interior-point solver and backend dispatch checks."""

import sys
import textwrap

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.optimize import linprog

from roeguidance.program import ConicProgram, FormulationKind, SecondOrderCone
from roeguidance.solver import (
    BackendExecutionError,
    BackendUnavailable,
    CapabilityError,
    SolverOptions,
    SolveStatus,
    get_backend,
    solve_cone_lp,
    to_standard_form,
)


def _lp(c, a_ub, b_ub, lower=None, upper=None, a_eq=None, b_eq=None):
    n = len(c)
    return ConicProgram(
        c=np.asarray(c, dtype=float),
        a_eq=sp.csr_matrix((0, n)) if a_eq is None else sp.csr_matrix(a_eq),
        b_eq=np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float),
        a_ub=sp.csr_matrix(np.asarray(a_ub, dtype=float).reshape(-1, n)),
        b_ub=np.asarray(b_ub, dtype=float),
        lower=None if lower is None else np.asarray(lower, dtype=float),
        upper=None if upper is None else np.asarray(upper, dtype=float),
        kind=FormulationKind.LP,
    )


def test_hand_lp():
    prog = _lp([1.0, 1.0], [[-1.0, -1.0]], [-1.0], lower=[0.0, 0.0])
    report = get_backend("ipm").solve(prog)
    assert report.status is SolveStatus.OPTIMAL
    assert report.objective == pytest.approx(1.0, abs=1e-7)
    np.testing.assert_allclose(report.x, [0.5, 0.5], atol=1e-6)
    assert report.backend == "ipm"
    assert report.iterations > 0


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_random_lp_against_scipy(seed):
    rng = np.random.default_rng(seed)
    n, m = 8, 12
    a_ub = rng.normal(size=(m, n))
    interior = rng.uniform(1.0, 9.0, size=n)
    b_ub = a_ub @ interior + rng.uniform(0.5, 2.0, size=m)
    c = rng.normal(size=n)
    prog = _lp(c, a_ub, b_ub, lower=np.zeros(n), upper=np.full(n, 10.0))
    report = get_backend("ipm").solve(prog)
    assert report.status is SolveStatus.OPTIMAL
    reference = linprog(
        c, A_ub=a_ub, b_ub=b_ub, bounds=[(0.0, 10.0)] * n, method="highs"
    )
    assert reference.status == 0
    assert report.objective == pytest.approx(reference.fun, abs=1e-6)


def test_socp_analytic_minimum():
    # min t subject to ||x|| <= t and a @ x = 1 has optimum 1/||a||
    a = np.array([3.0, -4.0, 12.0])
    n = 4  # x0..x2 plus epigraph t at index 3
    prog = ConicProgram(
        c=np.array([0.0, 0.0, 0.0, 1.0]),
        a_eq=sp.csr_matrix(np.concatenate([a, [0.0]]).reshape(1, -1)),
        b_eq=np.array([1.0]),
        a_ub=sp.csr_matrix((0, n)),
        b_ub=np.zeros(0),
        cones=(SecondOrderCone(head_index=3, tail=(0, 1, 2)),),
        kind=FormulationKind.SOCP,
    )
    report = get_backend("ipm").solve(prog)
    assert report.status is SolveStatus.OPTIMAL
    assert report.objective == pytest.approx(1.0 / np.linalg.norm(a), rel=1e-6)
    np.testing.assert_allclose(
        report.x[:3], a / np.dot(a, a), atol=1e-6
    )


def test_qcqp_least_norm_matches_pseudoinverse():
    rng = np.random.default_rng(11)
    a_eq = rng.normal(size=(3, 6))
    b_eq = rng.normal(size=3)
    prog = ConicProgram(
        c=np.zeros(6),
        a_eq=sp.csr_matrix(a_eq),
        b_eq=b_eq,
        a_ub=sp.csr_matrix((0, 6)),
        b_ub=np.zeros(0),
        quad_diag=np.ones(6),
        kind=FormulationKind.QCQP,
    )
    report = get_backend("ipm").solve(prog)
    expected = np.linalg.pinv(a_eq) @ b_eq
    assert report.status is SolveStatus.OPTIMAL
    assert report.objective == pytest.approx(expected @ expected, rel=1e-6)
    # primal accuracy near a quadratic optimum scales like sqrt(gap)
    np.testing.assert_allclose(report.x, expected, atol=2e-4)


def test_ipm_matches_cvxopt():
    rng = np.random.default_rng(5)
    n, m = 10, 16
    a_ub = rng.normal(size=(m, n))
    interior = rng.uniform(1.0, 4.0, size=n)
    b_ub = a_ub @ interior + rng.uniform(0.5, 2.0, size=m)
    prog = _lp(
        rng.normal(size=n), a_ub, b_ub, lower=np.zeros(n), upper=np.full(n, 5.0)
    )
    mine = get_backend("ipm").solve(prog)
    other = get_backend("cvxopt").solve(prog)
    assert mine.status is SolveStatus.OPTIMAL
    assert other.status is SolveStatus.OPTIMAL
    assert mine.objective == pytest.approx(other.objective, rel=1e-6)


def test_infeasible_lp_is_certified():
    prog = _lp([1.0], [[-1.0], [1.0]], [-1.0, 0.0])
    report = get_backend("ipm").solve(prog)
    assert report.status is SolveStatus.INFEASIBLE
    assert "infeasib" in report.message


def test_unbounded_lp_reports_failure():
    prog = _lp([-1.0], np.zeros((0, 1)), [], lower=[0.0])
    report = get_backend("ipm").solve(prog)
    assert report.status is SolveStatus.NUMERICAL_FAILURE
    assert "unbounded" in report.message


def test_solves_are_bit_deterministic():
    rng = np.random.default_rng(9)
    a_ub = rng.normal(size=(12, 8))
    b_ub = a_ub @ rng.uniform(1.0, 3.0, size=8) + 1.0
    prog = _lp(
        rng.normal(size=8), a_ub, b_ub, lower=np.zeros(8), upper=np.full(8, 9.0)
    )
    first = get_backend("ipm").solve(prog)
    second = get_backend("ipm").solve(prog)
    assert first.x.tobytes() == second.x.tobytes()
    assert first.objective == second.objective
    assert first.iterations == second.iterations


def test_iteration_limit_status():
    rng = np.random.default_rng(3)
    a_ub = rng.normal(size=(12, 8))
    b_ub = a_ub @ rng.uniform(1.0, 3.0, size=8) + 1.0
    prog = _lp(
        rng.normal(size=8), a_ub, b_ub, lower=np.zeros(8), upper=np.full(8, 9.0)
    )
    report = get_backend("ipm").solve(prog, SolverOptions(max_iterations=1))
    assert report.status is SolveStatus.ITERATION_LIMIT


def test_time_limit_status():
    rng = np.random.default_rng(4)
    a_ub = rng.normal(size=(12, 8))
    b_ub = a_ub @ rng.uniform(1.0, 3.0, size=8) + 1.0
    prog = _lp(
        rng.normal(size=8), a_ub, b_ub, lower=np.zeros(8), upper=np.full(8, 9.0)
    )
    report = get_backend("ipm").solve(prog, SolverOptions(time_limit=0.0))
    assert report.status is SolveStatus.TIME_LIMIT


def test_unknown_backend_raises():
    with pytest.raises(BackendUnavailable):
        get_backend("nope")


def test_callback_receives_iteration_records():
    prog = _lp([1.0, 1.0], [[-1.0, -1.0]], [-1.0], lower=[0.0, 0.0])
    c, a_eq, b_eq, g, h, dims = to_standard_form(prog)
    records = []
    result = solve_cone_lp(c, a_eq, b_eq, g, h, dims, callback=records.append)
    assert result.status == "optimal"
    assert len(records) == result.iterations
    assert {"iteration", "pres", "dres", "relgap", "tau", "kappa"} <= set(records[0])
    iters = [r["iteration"] for r in records]
    assert iters == sorted(iters)


def _stub_backend(tmp_path, body):
    script = tmp_path / "stub.py"
    script.write_text(textwrap.dedent(body))
    return get_backend(f"exec:{sys.executable} {script}")


def test_subprocess_backend_roundtrip(tmp_path):
    backend = _stub_backend(
        tmp_path,
        """
        import sys

        prog_path, result_path = sys.argv[1], sys.argv[2]
        with open(prog_path) as fh:
            assert fh.readline().strip() == "conicprogram/1"
        with open(result_path, "w") as fh:
            fh.write("conicresult/1\\n")
            fh.write("status optimal\\n")
            fh.write("objective 1.0\\n")
            fh.write("primal 2\\n")
            fh.write("0.5\\n0.5\\n")
        """,
    )
    prog = _lp([1.0, 1.0], [[-1.0, -1.0]], [-1.0], lower=[0.0, 0.0])
    report = backend.solve(prog)
    assert report.status is SolveStatus.OPTIMAL
    assert report.objective == pytest.approx(1.0)
    np.testing.assert_allclose(report.x, [0.5, 0.5])
    assert report.backend.startswith("exec:")


def test_subprocess_backend_is_lp_only_by_default(tmp_path):
    backend = _stub_backend(tmp_path, "raise SystemExit(0)\n")
    socp = ConicProgram(
        c=np.array([0.0, 1.0]),
        a_eq=sp.csr_matrix((0, 2)),
        b_eq=np.zeros(0),
        a_ub=sp.csr_matrix((0, 2)),
        b_ub=np.zeros(0),
        cones=(SecondOrderCone(head_index=1, tail=(0,)),),
        kind=FormulationKind.SOCP,
    )
    with pytest.raises(CapabilityError):
        backend.solve(socp)


def test_subprocess_backend_propagates_crash(tmp_path):
    backend = _stub_backend(
        tmp_path,
        """
        import sys

        sys.stderr.write("boom")
        sys.exit(3)
        """,
    )
    prog = _lp([1.0], [[-1.0]], [-1.0], lower=[0.0])
    with pytest.raises(BackendExecutionError, match="exited 3"):
        backend.solve(prog)
