"""Solver backends: capability gating, status taxonomy, adapters.

The default backend is the in-repo interior-point method. A cvxopt
adapter (optional dependency) and an external-process adapter speaking
the text exchange format are provided behind the same interface.
"""

from __future__ import annotations

import enum
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from ..program import ConicProgram, export_program
from .ipm import ConeDims, solve_cone_lp


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    ITERATION_LIMIT = "iteration_limit"
    TIME_LIMIT = "time_limit"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class SolverCapabilities:
    """Which of the three problem classes a backend accepts."""

    lp: bool
    socp: bool
    qcqp: bool

    def accepts(self, klass: str) -> bool:
        return {"lp": self.lp, "socp": self.socp, "qcqp": self.qcqp}[klass]


@dataclass
class SolverOptions:
    feastol: float | None = None  # None picks 1e-8 (LP) or 1e-7 (cones)
    max_iterations: int = 100
    time_limit: float = 30.0


@dataclass
class SolveReport:
    """Outcome of one subproblem solve; x is set only when optimal."""

    status: SolveStatus
    backend: str
    objective: float | None = None
    x: np.ndarray | None = None
    iterations: int = 0
    solve_time: float = 0.0
    message: str = ""

    def __post_init__(self) -> None:
        if (self.x is not None) and self.status is not SolveStatus.OPTIMAL:
            raise ValueError("primal point only allowed on optimal reports")


class BackendUnavailable(RuntimeError):
    """The requested backend cannot be constructed in this environment."""


class CapabilityError(RuntimeError):
    """The backend does not accept this program class."""


class BackendExecutionError(RuntimeError):
    """The backend crashed or returned unparseable output."""


def program_class(program: ConicProgram) -> str:
    if program.quad_diag is not None and np.any(program.quad_diag):
        return "qcqp"
    if program.cones:
        return "socp"
    return "lp"


def default_feastol(program: ConicProgram) -> float:
    return 1e-8 if program_class(program) == "lp" else 1e-7


def to_standard_form(program: ConicProgram):
    """Rewrite a ConicProgram as min c@x, A x = b, G x + s = h, s in K.

    Bounds become orthant rows; each nonzero entry q_j of the quadratic
    diagonal becomes an epigraph variable t_j with cost 1 and the
    three-row cone ||(2 sqrt(q_j) x_j, 1 - t_j)|| <= 1 + t_j, which is
    exactly q_j x_j^2 <= t_j.
    """
    n = program.n_variables
    quad_idx = (
        np.nonzero(program.quad_diag)[0]
        if program.quad_diag is not None
        else np.array([], dtype=int)
    )
    n_std = n + quad_idx.size

    c_std = np.concatenate([program.c, np.ones(quad_idx.size)])
    a_eq = sp.hstack(
        [program.a_eq, sp.csr_matrix((program.a_eq.shape[0], quad_idx.size))],
        format="csr",
    )

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    hs: list[float] = []

    def add_row(entries: list[tuple[int, float]], rhs: float) -> None:
        r = len(hs)
        for col, val in entries:
            rows.append(r)
            cols.append(col)
            vals.append(val)
        hs.append(rhs)

    ub = program.a_ub.tocsr()
    for r in range(ub.shape[0]):
        lo, hi = ub.indptr[r], ub.indptr[r + 1]
        add_row(
            list(zip(ub.indices[lo:hi].tolist(), ub.data[lo:hi].tolist())),
            float(program.b_ub[r]),
        )
    for j in np.nonzero(np.isfinite(program.upper))[0]:
        add_row([(int(j), 1.0)], float(program.upper[j]))
    for j in np.nonzero(np.isfinite(program.lower))[0]:
        add_row([(int(j), -1.0)], -float(program.lower[j]))
    n_orthant = len(hs)

    soc_dims: list[int] = []
    for cone in program.cones:
        if cone.head_index is not None:
            add_row([(cone.head_index, -1.0)], 0.0)
        else:
            add_row([], float(cone.head_value))
        for t in cone.tail:
            add_row([(t, -1.0)], 0.0)
        soc_dims.append(1 + len(cone.tail))
    for pos, j in enumerate(quad_idx):
        t_col = n + pos
        w = 2.0 * float(np.sqrt(program.quad_diag[j]))
        add_row([(t_col, -1.0)], 1.0)
        add_row([(int(j), -w)], 0.0)
        add_row([(t_col, 1.0)], 1.0)
        soc_dims.append(3)

    g = sp.csr_matrix(
        (np.array(vals), (np.array(rows, dtype=int), np.array(cols, dtype=int))),
        shape=(len(hs), n_std),
    )
    dims = ConeDims(nonneg=n_orthant, soc=tuple(soc_dims))
    return c_std, a_eq, program.b_eq, g, np.array(hs), dims


class InteriorPointBackend:
    """Default deterministic in-repo backend."""

    name = "ipm"
    capabilities = SolverCapabilities(lp=True, socp=True, qcqp=True)

    def solve(
        self, program: ConicProgram, options: SolverOptions | None = None
    ) -> SolveReport:
        options = options or SolverOptions()
        _check_capability(self, program)
        c_std, a_eq, b_eq, g, h, dims = to_standard_form(program)
        feastol = options.feastol or default_feastol(program)
        res = solve_cone_lp(
            c_std,
            a_eq,
            b_eq,
            g,
            h,
            dims,
            feastol=feastol,
            max_iterations=options.max_iterations,
            time_limit=options.time_limit,
        )
        status = {
            "optimal": SolveStatus.OPTIMAL,
            "infeasible": SolveStatus.INFEASIBLE,
            "unbounded": SolveStatus.NUMERICAL_FAILURE,
            "iteration_limit": SolveStatus.ITERATION_LIMIT,
            "time_limit": SolveStatus.TIME_LIMIT,
            "numerical_failure": SolveStatus.NUMERICAL_FAILURE,
        }[res.status]
        message = res.message
        if res.status == "unbounded":
            message = "objective unbounded below (dual infeasibility certificate)"
        x = None
        objective = None
        if status is SolveStatus.OPTIMAL:
            x = res.x[: program.n_variables]
            objective = program.objective_value(x)
        return SolveReport(
            status=status,
            backend=self.name,
            objective=objective,
            x=x,
            iterations=res.iterations,
            solve_time=res.solve_time,
            message=message,
        )


class CvxoptBackend:
    """Adapter onto cvxopt's conelp, when cvxopt is installed."""

    name = "cvxopt"
    capabilities = SolverCapabilities(lp=True, socp=True, qcqp=True)

    def __init__(self) -> None:
        try:
            from cvxopt import solvers, matrix, spmatrix  # noqa: F401
        except ImportError as exc:
            raise BackendUnavailable(
                "cvxopt is not installed; install the [cvxopt] extra"
            ) from exc

    def solve(
        self, program: ConicProgram, options: SolverOptions | None = None
    ) -> SolveReport:
        from cvxopt import matrix, solvers, spmatrix

        options = options or SolverOptions()
        _check_capability(self, program)
        c_std, a_eq, b_eq, g, h, dims = to_standard_form(program)
        feastol = options.feastol or default_feastol(program)

        def to_sp(mat):
            coo = mat.tocoo()
            return spmatrix(
                coo.data.tolist(),
                coo.row.tolist(),
                coo.col.tolist(),
                size=mat.shape,
            )

        solver_opts = {
            "show_progress": False,
            "maxiters": options.max_iterations,
            "abstol": feastol,
            "reltol": feastol,
            "feastol": feastol,
        }
        t0 = time.perf_counter()
        sol = solvers.conelp(
            matrix(c_std),
            to_sp(g),
            matrix(h),
            {"l": dims.nonneg, "q": list(dims.soc), "s": []},
            to_sp(a_eq),
            matrix(b_eq),
            options=solver_opts,
        )
        elapsed = time.perf_counter() - t0
        status_map = {
            "optimal": SolveStatus.OPTIMAL,
            "primal infeasible": SolveStatus.INFEASIBLE,
            "dual infeasible": SolveStatus.NUMERICAL_FAILURE,
            "unknown": SolveStatus.NUMERICAL_FAILURE,
        }
        status = status_map.get(sol["status"], SolveStatus.NUMERICAL_FAILURE)
        x = None
        objective = None
        if status is SolveStatus.OPTIMAL:
            x = np.array(sol["x"]).ravel()[: program.n_variables]
            objective = program.objective_value(x)
        return SolveReport(
            status=status,
            backend=self.name,
            objective=objective,
            x=x,
            iterations=int(sol.get("iterations", 0)),
            solve_time=elapsed,
            message=sol["status"],
        )


class SubprocessBackend:
    """Spawn an external solver speaking the text exchange format.

    The command is invoked as `<argv...> <program-file> <result-file>`.
    The result file must contain: a `conicresult/1` line, `status
    <name>`, `objective <float>`, `primal <count>` and one value per
    line.
    """

    name = "exec"
    capabilities = SolverCapabilities(lp=True, socp=False, qcqp=False)

    def __init__(self, argv: list[str], capabilities: SolverCapabilities | None = None):
        if not argv:
            raise BackendUnavailable("empty external solver command")
        self.argv = argv
        self.name = f"exec:{argv[0]}"
        if capabilities is not None:
            self.capabilities = capabilities

    def solve(
        self, program: ConicProgram, options: SolverOptions | None = None
    ) -> SolveReport:
        options = options or SolverOptions()
        _check_capability(self, program)
        with tempfile.TemporaryDirectory(prefix="roeguidance-solve-") as tmp:
            prog_path = Path(tmp) / "program.txt"
            result_path = Path(tmp) / "result.txt"
            prog_path.write_text(export_program(program))
            t0 = time.perf_counter()
            try:
                proc = subprocess.run(
                    [*self.argv, str(prog_path), str(result_path)],
                    capture_output=True,
                    text=True,
                    timeout=options.time_limit + 60.0,
                )
            except (OSError, subprocess.TimeoutExpired) as exc:
                raise BackendExecutionError(
                    f"external solver failed to run: {exc}"
                ) from exc
            elapsed = time.perf_counter() - t0
            if proc.returncode != 0:
                raise BackendExecutionError(
                    f"external solver exited {proc.returncode}: {proc.stderr[-500:]}"
                )
            return _parse_result(
                result_path, program, self.name, elapsed
            )


def _parse_result(
    path: Path, program: ConicProgram, backend: str, elapsed: float
) -> SolveReport:
    try:
        lines = path.read_text().splitlines()
        if lines[0].strip() != "conicresult/1":
            raise ValueError(f"bad result header {lines[0]!r}")
        status = SolveStatus(lines[1].split()[1])
        objective = float(lines[2].split()[1])
        count = int(lines[3].split()[1])
        x = np.array([float(v) for v in lines[4 : 4 + count]])
    except (IndexError, ValueError, KeyError) as exc:
        raise BackendExecutionError(f"unparseable solver result: {exc}") from exc
    if status is not SolveStatus.OPTIMAL:
        return SolveReport(
            status=status, backend=backend, solve_time=elapsed
        )
    if x.size != program.n_variables:
        raise BackendExecutionError(
            f"result has {x.size} variables, expected {program.n_variables}"
        )
    return SolveReport(
        status=status,
        backend=backend,
        objective=program.objective_value(x),
        x=x,
        solve_time=elapsed,
    )


def _check_capability(backend, program: ConicProgram) -> None:
    klass = program_class(program)
    if not backend.capabilities.accepts(klass):
        raise CapabilityError(
            f"backend {backend.name} does not accept {klass} programs"
        )


def get_backend(spec: str):
    """Resolve a backend by name: 'ipm', 'cvxopt', or 'exec:<command>'."""
    if spec == "ipm":
        return InteriorPointBackend()
    if spec == "cvxopt":
        return CvxoptBackend()
    if spec.startswith("exec:"):
        return SubprocessBackend(shlex.split(spec[len("exec:") :]))
    raise BackendUnavailable(f"unknown backend {spec!r}")
