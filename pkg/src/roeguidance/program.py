"""Standard-form conic program container and its text serialization.

A program is min c @ x + x @ diag(q) @ x subject to a_eq x = b_eq,
a_ub x <= b_ub, variable bounds, and second-order cones
||x[tail]|| <= bound where the bound is either a variable or a constant.
The text dump is versioned and round-trips bit exactly (floats written
with shortest-roundtrip repr).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

FORMAT_TAG = "conicprogram/1"


class FormulationKind(enum.Enum):
    QCQP = "qcqp"
    SOCP = "socp"
    LP = "lp"
    LP_SCALED = "lp-scaled"


@dataclass(frozen=True)
class SecondOrderCone:
    """||x[tail]|| <= x[head_index] (or <= head_value when index is None)."""

    head_index: int | None
    tail: tuple[int, ...]
    head_value: float | None = None

    def __post_init__(self) -> None:
        if (self.head_index is None) == (self.head_value is None):
            raise ValueError("exactly one of head_index/head_value must be set")
        if len(self.tail) == 0:
            raise ValueError("cone tail must be nonempty")


@dataclass(eq=False)
class ConicProgram:
    """Sparse standard-form program plus the formulation kind tag."""

    c: np.ndarray
    a_eq: sp.csr_matrix
    b_eq: np.ndarray
    a_ub: sp.csr_matrix
    b_ub: np.ndarray
    cones: tuple[SecondOrderCone, ...] = ()
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    quad_diag: np.ndarray | None = None
    kind: FormulationKind = FormulationKind.LP

    def __post_init__(self) -> None:
        n = self.n_variables
        if self.lower is None:
            self.lower = np.full(n, -np.inf)
        if self.upper is None:
            self.upper = np.full(n, np.inf)
        for name, vec, rows in (
            ("b_eq", self.b_eq, self.a_eq.shape[0]),
            ("b_ub", self.b_ub, self.a_ub.shape[0]),
        ):
            if vec.shape != (rows,):
                raise ValueError(f"{name} length {vec.shape} != rows {rows}")
        if self.a_eq.shape[1] != n or self.a_ub.shape[1] != n:
            raise ValueError("matrix column counts disagree with cost length")
        if self.quad_diag is not None:
            if self.quad_diag.shape != (n,):
                raise ValueError("quad_diag length mismatch")
            if np.any(self.quad_diag < 0.0):
                raise ValueError("quadratic diagonal must be nonnegative")

    @property
    def n_variables(self) -> int:
        return int(self.c.shape[0])

    @property
    def n_constraints(self) -> int:
        """Rows of both matrices plus one per cone; bounds excluded."""
        return int(
            self.a_eq.shape[0] + self.a_ub.shape[0] + len(self.cones)
        )

    def objective_value(self, x: np.ndarray) -> float:
        val = float(self.c @ x)
        if self.quad_diag is not None:
            val += float(x @ (self.quad_diag * x))
        return val


def residuals(program: ConicProgram, x: np.ndarray) -> dict[str, float]:
    """Worst violation per constraint family at a candidate point."""
    out = {"equality": 0.0, "inequality": 0.0, "bounds": 0.0, "cones": 0.0}
    if program.a_eq.shape[0]:
        out["equality"] = float(
            np.max(np.abs(program.a_eq @ x - program.b_eq))
        )
    if program.a_ub.shape[0]:
        out["inequality"] = float(
            np.max(np.clip(program.a_ub @ x - program.b_ub, 0.0, None))
        )
    lo = np.clip(program.lower - x, 0.0, None)
    hi = np.clip(x - program.upper, 0.0, None)
    finite = np.isfinite(program.lower) | np.isfinite(program.upper)
    if np.any(finite):
        out["bounds"] = float(max(np.max(lo[finite]), np.max(hi[finite])))
    worst = 0.0
    for cone in program.cones:
        head = (
            x[cone.head_index]
            if cone.head_index is not None
            else cone.head_value
        )
        worst = max(
            worst, float(np.linalg.norm(x[list(cone.tail)]) - head)
        )
    out["cones"] = max(worst, 0.0)
    return out


def _write_sparse_vector(lines: list[str], tag: str, vec: np.ndarray) -> None:
    idx = np.nonzero(vec)[0]
    lines.append(f"{tag} {len(idx)}")
    for i in idx:
        lines.append(f"{i} {float(vec[i])!r}")


def _write_matrix(lines: list[str], tag: str, mat: sp.csr_matrix, rhs) -> None:
    mat = mat.tocsr()
    lines.append(f"{tag} {mat.shape[0]}")
    for r in range(mat.shape[0]):
        lo, hi = mat.indptr[r], mat.indptr[r + 1]
        cols = mat.indices[lo:hi]
        vals = mat.data[lo:hi]
        entries = " ".join(
            f"{c} {float(v)!r}" for c, v in zip(cols, vals)
        )
        lines.append(
            f"{float(rhs[r])!r} {len(cols)}"
            f"{' ' + entries if len(cols) else ''}"
        )


def export_program(program: ConicProgram) -> str:
    """Serialize to the versioned plain-text exchange format."""
    lines = [FORMAT_TAG, f"kind {program.kind.value}", f"nvar {program.n_variables}"]
    _write_sparse_vector(lines, "cost", program.c)
    if program.quad_diag is not None and np.any(program.quad_diag):
        _write_sparse_vector(lines, "quadcost", program.quad_diag)
    else:
        lines.append("quadcost 0")
    bounded = np.nonzero(
        np.isfinite(program.lower) | np.isfinite(program.upper)
    )[0]
    lines.append(f"bounds {len(bounded)}")
    for i in bounded:
        lines.append(
            f"{i} {float(program.lower[i])!r} "
            f"{float(program.upper[i])!r}"
        )
    _write_matrix(lines, "eq", program.a_eq, program.b_eq)
    _write_matrix(lines, "ineq", program.a_ub, program.b_ub)
    lines.append(f"cones {len(program.cones)}")
    for cone in program.cones:
        head = (
            f"var {cone.head_index}"
            if cone.head_index is not None
            else f"const {float(cone.head_value)!r}"
        )
        lines.append(
            f"{head} {len(cone.tail)} {' '.join(str(i) for i in cone.tail)}"
        )
    lines.append("end")
    return "\n".join(lines) + "\n"


class ProgramFormatError(ValueError):
    pass


class _Reader:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.lines):
            raise ProgramFormatError("unexpected end of program text")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def expect_count(self, tag: str) -> int:
        line = self.next()
        parts = line.split()
        if len(parts) != 2 or parts[0] != tag:
            raise ProgramFormatError(f"expected '{tag} <count>', got {line!r}")
        return int(parts[1])


def parse_program(text: str) -> ConicProgram:
    """Inverse of export_program; raises ProgramFormatError on bad input."""
    rd = _Reader(text)
    if rd.next().strip() != FORMAT_TAG:
        raise ProgramFormatError(f"first line must be {FORMAT_TAG!r}")
    kind_line = rd.next().split()
    if len(kind_line) != 2 or kind_line[0] != "kind":
        raise ProgramFormatError("second line must be 'kind <tag>'")
    try:
        kind = FormulationKind(kind_line[1])
    except ValueError as exc:
        raise ProgramFormatError(f"unknown kind {kind_line[1]!r}") from exc
    nvar_line = rd.next().split()
    if len(nvar_line) != 2 or nvar_line[0] != "nvar":
        raise ProgramFormatError("third line must be 'nvar <count>'")
    n = int(nvar_line[1])

    def read_vector(tag: str) -> np.ndarray:
        count = rd.expect_count(tag)
        vec = np.zeros(n)
        for _ in range(count):
            i_str, v_str = rd.next().split()
            vec[int(i_str)] = float(v_str)
        return vec

    c = read_vector("cost")
    quad = read_vector("quadcost")
    lower = np.full(n, -np.inf)
    upper = np.full(n, np.inf)
    for _ in range(rd.expect_count("bounds")):
        i_str, lo_str, hi_str = rd.next().split()
        lower[int(i_str)] = float(lo_str)
        upper[int(i_str)] = float(hi_str)

    def read_matrix(tag: str) -> tuple[sp.csr_matrix, np.ndarray]:
        rows = rd.expect_count(tag)
        rhs = np.zeros(rows)
        data, indices, indptr = [], [], [0]
        for r in range(rows):
            parts = rd.next().split()
            rhs[r] = float(parts[0])
            nnz = int(parts[1])
            if len(parts) != 2 + 2 * nnz:
                raise ProgramFormatError(f"malformed {tag} row {r}")
            for j in range(nnz):
                indices.append(int(parts[2 + 2 * j]))
                data.append(float(parts[3 + 2 * j]))
            indptr.append(len(data))
        mat = sp.csr_matrix(
            (np.array(data), np.array(indices, dtype=int), np.array(indptr)),
            shape=(rows, n),
        )
        return mat, rhs

    a_eq, b_eq = read_matrix("eq")
    a_ub, b_ub = read_matrix("ineq")
    cones = []
    for _ in range(rd.expect_count("cones")):
        parts = rd.next().split()
        if parts[0] == "var":
            head_index, head_value = int(parts[1]), None
        elif parts[0] == "const":
            head_index, head_value = None, float(parts[1])
        else:
            raise ProgramFormatError(f"bad cone head {parts[0]!r}")
        tail_len = int(parts[2])
        tail = tuple(int(p) for p in parts[3 : 3 + tail_len])
        if len(tail) != tail_len:
            raise ProgramFormatError("cone tail length mismatch")
        cones.append(
            SecondOrderCone(
                head_index=head_index, tail=tail, head_value=head_value
            )
        )
    if rd.next().strip() != "end":
        raise ProgramFormatError("missing 'end' terminator")
    return ConicProgram(
        c=c,
        a_eq=a_eq,
        b_eq=b_eq,
        a_ub=a_ub,
        b_ub=b_ub,
        cones=tuple(cones),
        lower=lower,
        upper=upper,
        quad_diag=quad if np.any(quad) else None,
        kind=kind,
    )
