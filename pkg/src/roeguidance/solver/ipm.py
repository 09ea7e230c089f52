"""Deterministic interior-point solver for linear-conic programs.

Solves min c@x s.t. a_eq x = b_eq, g x + s = h, s in K, where K is a
product of a nonnegative orthant and second-order cones. The algorithm
is a homogeneous self-dual embedding with Nesterov-Todd scaling and a
Mehrotra predictor-corrector step, so it detects infeasibility via the
tau/kappa certificates and needs no feasible starting point. All linear
algebra is sparse (scipy splu) with static regularization plus
iterative refinement; there is no randomization anywhere, so repeated
solves of the same data are bit identical. Degenerate instances that
stall just above the target tolerances are still reported optimal from
the best iterate once it is feasible to within reduced tolerances.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

_STEP_BACKOFF = 0.99
_REG_BASE = 1e-9
_REFINE_ROUNDS = 2
_MIN_TAU = 1e-12
_REDUCED_TOL = 1e-6
_STALL_ITERS = 5


@dataclass(frozen=True)
class ConeDims:
    """Sizes of the cone blocks stacked inside s: orthant then SOCs."""

    nonneg: int
    soc: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.nonneg < 0 or any(d < 2 for d in self.soc):
            raise ValueError("bad cone dimensions")

    @property
    def total(self) -> int:
        return self.nonneg + sum(self.soc)

    @property
    def degree(self) -> int:
        return self.nonneg + len(self.soc)

    def soc_slices(self) -> list[slice]:
        out = []
        off = self.nonneg
        for d in self.soc:
            out.append(slice(off, off + d))
            off += d
        return out


@dataclass
class IpmResult:
    status: str
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    z: np.ndarray | None = None
    s: np.ndarray | None = None
    iterations: int = 0
    pcost: float = math.nan
    dcost: float = math.nan
    gap: float = math.nan
    pres: float = math.nan
    dres: float = math.nan
    solve_time: float = 0.0
    message: str = ""


def cone_identity(dims: ConeDims) -> np.ndarray:
    e = np.zeros(dims.total)
    e[: dims.nonneg] = 1.0
    for sl in dims.soc_slices():
        e[sl.start] = 1.0
    return e


def cone_margin(v: np.ndarray, dims: ConeDims) -> float:
    """Distance to the cone boundary along the identity direction."""
    margins = []
    if dims.nonneg:
        margins.append(float(np.min(v[: dims.nonneg])))
    for sl in dims.soc_slices():
        margins.append(float(v[sl.start] - np.linalg.norm(v[sl][1:])))
    return min(margins) if margins else math.inf


def bring_to_cone(v: np.ndarray, dims: ConeDims) -> np.ndarray:
    """Shift v along the cone identity until strictly interior."""
    margin = cone_margin(v, dims)
    if margin > 0.0:
        return v.copy()
    return v + (1.0 - margin) * cone_identity(dims)


def jordan_product(u: np.ndarray, v: np.ndarray, dims: ConeDims) -> np.ndarray:
    out = np.empty(dims.total)
    l = dims.nonneg
    out[:l] = u[:l] * v[:l]
    for sl in dims.soc_slices():
        ub, vb = u[sl], v[sl]
        out[sl.start] = ub @ vb
        out[sl.start + 1 : sl.stop] = ub[0] * vb[1:] + vb[0] * ub[1:]
    return out


def jordan_divide(lam: np.ndarray, r: np.ndarray, dims: ConeDims) -> np.ndarray:
    """Solve lam o x = r per cone block."""
    out = np.empty(dims.total)
    l = dims.nonneg
    out[:l] = r[:l] / lam[:l]
    for sl in dims.soc_slices():
        a = lam[sl.start]
        b = lam[sl.start + 1 : sl.stop]
        det = a * a - b @ b
        x0 = (a * r[sl.start] - b @ r[sl.start + 1 : sl.stop]) / det
        out[sl.start] = x0
        out[sl.start + 1 : sl.stop] = (r[sl.start + 1 : sl.stop] - x0 * b) / a
    return out


def max_step_in_cone(v: np.ndarray, dv: np.ndarray, dims: ConeDims) -> float:
    """Largest alpha with v + alpha dv in the cone (v strictly interior)."""
    alpha = math.inf
    l = dims.nonneg
    if l:
        neg = dv[:l] < 0.0
        if np.any(neg):
            alpha = min(alpha, float(np.min(-v[:l][neg] / dv[:l][neg])))
    for sl in dims.soc_slices():
        s0, s1 = v[sl.start], v[sl.start + 1 : sl.stop]
        d0, d1 = dv[sl.start], dv[sl.start + 1 : sl.stop]
        a2 = d0 * d0 - d1 @ d1
        a1 = s0 * d0 - s1 @ d1
        a0 = s0 * s0 - s1 @ s1
        roots = []
        if abs(a2) < 1e-15:
            if a1 < 0.0:
                roots.append(-a0 / (2.0 * a1))
        else:
            disc = a1 * a1 - a2 * a0
            if disc >= 0.0:
                sq = math.sqrt(disc)
                roots.extend([(-a1 - sq) / a2, (-a1 + sq) / a2])
        cand = [r for r in roots if r > 0.0]
        if d0 < 0.0:
            cand.append(-s0 / d0)
        if cand:
            alpha = min(alpha, min(cand))
    return alpha


class NtScaling:
    """Nesterov-Todd scaling point for orthant x SOC products.

    Provides W v, W^{-1} v (W is symmetric) and the scaled variable
    lambda = W z = W^{-1} s.
    """

    def __init__(self, s: np.ndarray, z: np.ndarray, dims: ConeDims):
        self.dims = dims
        l = dims.nonneg
        if np.any(s[:l] <= 0.0) or np.any(z[:l] <= 0.0):
            raise FloatingPointError("orthant iterate left the interior")
        self.w_lin = np.sqrt(s[:l] / z[:l])
        self.blocks: list[tuple[float, np.ndarray]] = []
        for sl in dims.soc_slices():
            sb, zb = s[sl], z[sl]
            rs2 = sb[0] ** 2 - sb[1:] @ sb[1:]
            rz2 = zb[0] ** 2 - zb[1:] @ zb[1:]
            if rs2 <= 0.0 or rz2 <= 0.0:
                raise FloatingPointError("SOC iterate left the interior")
            rs, rz = math.sqrt(rs2), math.sqrt(rz2)
            sbar, zbar = sb / rs, zb / rz
            gamma = math.sqrt((1.0 + sbar @ zbar) / 2.0)
            wbar = sbar.copy()
            wbar[0] += zbar[0]
            wbar[1:] -= zbar[1:]
            wbar /= 2.0 * gamma
            # Householder vector with unit hyperbolic norm, so that the
            # scaling block is eta * (2 v v' - J) and its inverse is
            # J (2 v v' - J) J / eta.
            v = wbar.copy()
            v[0] += 1.0
            v /= math.sqrt(2.0 * (1.0 + wbar[0]))
            self.blocks.append((math.sqrt(rs / rz), v))
        self.lam = self.mult_w(z)

    @staticmethod
    def _jmul(v: np.ndarray) -> np.ndarray:
        out = -v
        out[0] = v[0]
        return out

    def mult_w(self, v: np.ndarray) -> np.ndarray:
        out = np.empty(self.dims.total)
        l = self.dims.nonneg
        out[:l] = self.w_lin * v[:l]
        for (eta, wbar), sl in zip(self.blocks, self.dims.soc_slices()):
            vb = v[sl]
            out[sl] = eta * (2.0 * wbar * (wbar @ vb) - self._jmul(vb))
        return out

    def mult_winv(self, v: np.ndarray) -> np.ndarray:
        out = np.empty(self.dims.total)
        l = self.dims.nonneg
        out[:l] = v[:l] / self.w_lin
        for (eta, wbar), sl in zip(self.blocks, self.dims.soc_slices()):
            jv = self._jmul(v[sl])
            hv = 2.0 * wbar * (wbar @ jv) - self._jmul(jv)
            out[sl] = self._jmul(hv) / eta
        return out

    def mult_wtw(self, v: np.ndarray) -> np.ndarray:
        return self.mult_w(self.mult_w(v))

    def wtw_sparse(self) -> sp.csc_matrix:
        l = self.dims.nonneg
        parts: list = []
        if l:
            parts.append(sp.diags(self.w_lin**2))
        for (eta, wbar), sl in zip(self.blocks, self.dims.soc_slices()):
            d = sl.stop - sl.start
            j = -np.eye(d)
            j[0, 0] = 1.0
            h = 2.0 * np.outer(wbar, wbar) - j
            parts.append(sp.csc_matrix(eta * eta * (h @ h)))
        if not parts:
            return sp.csc_matrix((0, 0))
        return sp.block_diag(parts, format="csc")


def _ruiz_equilibrate(a_eq, g, b, h, c, dims, n_iter=6):
    """Symmetric row/column scaling; SOC row blocks share one factor."""
    p, n = a_eq.shape
    q = g.shape[0]
    a_eq = a_eq.tocsr().astype(float)
    g = g.tocsr().astype(float)
    d_col = np.ones(n)
    e_a = np.ones(p)
    e_g = np.ones(q)
    soc_slices = dims.soc_slices()
    for _ in range(n_iter):
        ra = _row_max(a_eq)
        rg = _row_max(g)
        for sl in soc_slices:
            block = rg[sl]
            m = block.max() if block.size else 1.0
            rg[sl] = m
        ra = 1.0 / np.sqrt(np.maximum(ra, 1e-12))
        rg = 1.0 / np.sqrt(np.maximum(rg, 1e-12))
        a_eq = sp.diags(ra) @ a_eq
        g = sp.diags(rg) @ g
        e_a *= ra
        e_g *= rg
        ca = _col_max(a_eq, n)
        cg = _col_max(g, n)
        cc = 1.0 / np.sqrt(np.maximum(np.maximum(ca, cg), 1e-12))
        a_eq = a_eq @ sp.diags(cc)
        g = g @ sp.diags(cc)
        d_col *= cc
    return (
        a_eq.tocsr(),
        g.tocsr(),
        e_a * b,
        e_g * h,
        d_col * c,
        d_col,
        e_a,
        e_g,
    )


def _row_max(mat: sp.csr_matrix) -> np.ndarray:
    out = np.ones(mat.shape[0])
    if mat.nnz == 0:
        return out
    absmat = abs(mat)
    maxes = absmat.max(axis=1).toarray().ravel()
    return np.where(maxes > 0.0, maxes, 1.0)


def _col_max(mat: sp.csr_matrix, n: int) -> np.ndarray:
    if mat.nnz == 0:
        return np.ones(n)
    maxes = abs(mat).max(axis=0).toarray().ravel()
    return np.where(maxes > 0.0, maxes, 1.0)


class _Kkt:
    """Factor [[dI, A', G'], [A, -dI, 0], [G, 0, -(W'W+dI)]] and solve with
    iterative refinement against the unregularized operator."""

    def __init__(self, a_eq, g, scaling, reg):
        self.a_eq = a_eq
        self.g = g
        self.scaling = scaling
        self.n = a_eq.shape[1]
        self.p = a_eq.shape[0]
        self.q = g.shape[0]
        wtw = scaling.wtw_sparse()
        delta = reg
        k = sp.bmat(
            [
                [
                    sp.diags(np.full(self.n, delta)),
                    a_eq.T,
                    g.T if self.q else None,
                ],
                [a_eq, sp.diags(np.full(self.p, -delta)) if self.p else None, None],
                [
                    g if self.q else None,
                    None,
                    -(wtw + sp.diags(np.full(self.q, delta))) if self.q else None,
                ],
            ],
            format="csc",
        )
        self.lu = spla.splu(k, permc_spec="COLAMD")

    def _apply_noreg(self, sol):
        n, p, q = self.n, self.p, self.q
        x, y, z = sol[:n], sol[n : n + p], sol[n + p :]
        top = self.a_eq.T @ y + self.c_free(x, z)
        mid = self.a_eq @ x
        if q:
            bot = self.g @ x - self.scaling.mult_wtw(z)
            return np.concatenate([top, mid, bot])
        return np.concatenate([top, mid])

    def c_free(self, x, z):
        if self.q:
            return self.g.T @ z
        return np.zeros(self.n)

    def solve(self, rx, ry, rz):
        rhs = np.concatenate([rx, ry, rz])
        sol = self.lu.solve(rhs)
        for _ in range(_REFINE_ROUNDS):
            resid = rhs - self._apply_noreg(sol)
            if np.max(np.abs(resid)) <= 1e-13 * max(1.0, np.max(np.abs(rhs))):
                break
            sol = sol + self.lu.solve(resid)
        n, p = self.n, self.p
        return sol[:n], sol[n : n + p], sol[n + p :]


def solve_cone_lp(
    c: np.ndarray,
    a_eq: sp.spmatrix,
    b_eq: np.ndarray,
    g: sp.spmatrix,
    h: np.ndarray,
    dims: ConeDims,
    feastol: float = 1e-8,
    gaptol: float | None = None,
    max_iterations: int = 100,
    time_limit: float = 30.0,
    callback=None,
) -> IpmResult:
    """Solve the standard-form cone LP; see module docstring."""
    t_start = time.perf_counter()
    gaptol = feastol if gaptol is None else gaptol
    c = np.asarray(c, dtype=float)
    b_eq = np.asarray(b_eq, dtype=float)
    h = np.asarray(h, dtype=float)
    n = c.size
    a_eq = sp.csr_matrix(a_eq, shape=(b_eq.size, n))
    g = sp.csr_matrix(g, shape=(h.size, n))
    if dims.total != h.size:
        raise ValueError("cone dims do not match the rows of g")

    a_s, g_s, b_s, h_s, c_s, d_col, e_a, e_g = _ruiz_equilibrate(
        a_eq, g, b_eq, h, c, dims
    )
    cost_scale = max(1.0, float(np.max(np.abs(c_s))) if n else 1.0)
    c_s = c_s / cost_scale

    def finish(status, x=None, y=None, z=None, s=None, it=0, msg=""):
        res = IpmResult(status=status, iterations=it, message=msg)
        if x is not None:
            res.x = d_col * x
            res.y = cost_scale * e_a * y if y is not None else None
            res.z = cost_scale * e_g * z if z is not None else None
            res.s = s / e_g if s is not None else None
            res.pcost = float(c @ res.x) if status == "optimal" else math.nan
        res.solve_time = time.perf_counter() - t_start
        return res

    p, q = b_s.size, h_s.size
    if q == 0:
        raise ValueError("programs without any cone rows are not supported")

    class _Identity:
        def mult_wtw(self, v):
            return v

        def wtw_sparse(self):
            return sp.identity(q, format="csc")

    reg = _REG_BASE

    def factor(scaling):
        nonlocal reg
        last_err = None
        for _ in range(3):
            try:
                return _Kkt(a_s, g_s, scaling, reg)
            except RuntimeError as err:  # singular factorization
                last_err = err
                reg *= 100.0
        raise FloatingPointError(f"KKT factorization failed: {last_err}")

    try:
        kkt0 = factor(_Identity())
    except FloatingPointError as err:
        return finish("numerical_failure", msg=str(err))
    x, _, z1 = kkt0.solve(np.zeros(n), b_s, h_s)
    s = bring_to_cone(-z1, dims)
    _, y, z2 = kkt0.solve(-c_s, np.zeros(p), np.zeros(q))
    z = bring_to_cone(z2, dims)
    tau, kappa = 1.0, 1.0

    nb = 1.0 + max(np.max(np.abs(b_s)) if p else 0.0, 1.0)
    nh = 1.0 + (np.max(np.abs(h_s)) if q else 0.0)
    nc = 1.0 + (np.max(np.abs(c_s)) if n else 0.0)
    degree = dims.degree + 1

    status, msg = "iteration_limit", ""
    iteration = 0
    best = None
    best_merit = math.inf
    stall = 0
    for iteration in range(1, max_iterations + 1):
        if time.perf_counter() - t_start > time_limit:
            status, msg = "time_limit", "time limit hit"
            iteration -= 1
            break

        hrx = a_s.T @ y + g_s.T @ z + c_s * tau
        hry = a_s @ x - b_s * tau
        hrz = s + g_s @ x - h_s * tau
        hrt = kappa + c_s @ x + b_s @ y + h_s @ z

        pres = max(
            np.max(np.abs(hry)) / nb if p else 0.0,
            np.max(np.abs(hrz)) / nh,
        ) / tau
        dres = np.max(np.abs(hrx)) / nc / tau
        pcost = c_s @ x / tau
        dcost = -(b_s @ y + h_s @ z) / tau
        absgap = (s @ z) / tau**2
        relgap = absgap / max(1.0, abs(pcost), abs(dcost))

        if callback is not None:
            callback(
                {
                    "iteration": iteration,
                    "pres": pres,
                    "dres": dres,
                    "relgap": relgap,
                    "tau": tau,
                    "kappa": kappa,
                    "pcost": pcost,
                    "dcost": dcost,
                }
            )
        merit = max(pres, dres, relgap)
        if merit < 0.99 * best_merit:
            stall = 0
        else:
            stall += 1
        if merit < best_merit:
            best_merit = merit
            best = (x, y, z, s, tau, iteration, pres, dres, relgap, dcost)

        if pres <= feastol and dres <= feastol and relgap <= gaptol:
            status = "optimal"
            break
        if stall >= _STALL_ITERS and best_merit <= _REDUCED_TOL:
            status, msg = "numerical_failure", "progress stalled"
            break

        # infeasibility certificates on the homogeneous iterate
        bty = b_s @ y + h_s @ z
        if bty < -1e-10:
            cert = max(
                np.max(np.abs(a_s.T @ y + g_s.T @ z)) if n else 0.0, 0.0
            ) / (-bty)
            if cert <= feastol:
                status, msg = "infeasible", "primal infeasibility certificate"
                break
        ctx = c_s @ x
        if ctx < -1e-10:
            unb_eq = np.max(np.abs(a_s @ x)) if p else 0.0
            unb_cone = -cone_margin(-(g_s @ x), dims)
            if max(unb_eq, unb_cone) / (-ctx) <= feastol:
                status, msg = "unbounded", "dual infeasibility certificate"
                break

        mu = (s @ z + tau * kappa) / degree

        try:
            scaling = NtScaling(s, z, dims)
            kkt = factor(scaling)
        except FloatingPointError as err:
            status, msg = "numerical_failure", str(err)
            break
        lam = scaling.lam

        vx, vy, vz = kkt.solve(-c_s, b_s, h_s)

        def direction(d_s, d_kt, eta):
            ux, uy, uz = kkt.solve(
                -eta * hrx,
                -eta * hry,
                -eta * hrz + scaling.mult_w(d_s),
            )
            denom = (-kappa / tau) + (c_s @ vx + b_s @ vy + h_s @ vz)
            numer = -eta * hrt + d_kt / tau - (c_s @ ux + b_s @ uy + h_s @ uz)
            dtau = numer / denom
            dx = ux + dtau * vx
            dy = uy + dtau * vy
            dz = uz + dtau * vz
            ds = -scaling.mult_w(d_s) - scaling.mult_wtw(dz)
            dkappa = (-d_kt - kappa * dtau) / tau
            return dx, dy, dz, ds, dtau, dkappa

        # predictor
        dxa, dya, dza, dsa, dta, dka = direction(lam, tau * kappa, 1.0)
        alpha_a = min(
            max_step_in_cone(s, dsa, dims),
            max_step_in_cone(z, dza, dims),
            -tau / dta if dta < 0.0 else math.inf,
            -kappa / dka if dka < 0.0 else math.inf,
            1.0,
        )
        mu_aff = (
            (s + alpha_a * dsa) @ (z + alpha_a * dza)
            + (tau + alpha_a * dta) * (kappa + alpha_a * dka)
        ) / degree
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

        # corrector
        corr = jordan_product(
            scaling.mult_winv(dsa), scaling.mult_w(dza), dims
        )
        rhs_s = jordan_product(lam, lam, dims) + corr
        rhs_s[: dims.nonneg] -= sigma * mu
        for sl in dims.soc_slices():
            rhs_s[sl.start] -= sigma * mu
        d_s = jordan_divide(lam, rhs_s, dims)
        d_kt = tau * kappa + dta * dka - sigma * mu
        dx, dy, dz, ds, dtau, dkappa = direction(d_s, d_kt, 1.0 - sigma)

        alpha = min(
            max_step_in_cone(s, ds, dims),
            max_step_in_cone(z, dz, dims),
            -tau / dtau if dtau < 0.0 else math.inf,
            -kappa / dkappa if dkappa < 0.0 else math.inf,
        )
        alpha = min(1.0, _STEP_BACKOFF * alpha)
        if not math.isfinite(alpha) or alpha <= 1e-13:
            status, msg = "numerical_failure", "step length collapsed"
            break

        x = x + alpha * dx
        y = y + alpha * dy
        z = z + alpha * dz
        s = s + alpha * ds
        tau += alpha * dtau
        kappa += alpha * dkappa
        if tau < _MIN_TAU:
            status, msg = "numerical_failure", "tau collapsed without certificate"
            break

    if status == "optimal":
        res = finish("optimal", x / tau, y / tau, z / tau, s / tau, iteration)
        res.pres, res.dres, res.gap = pres, dres, relgap
        res.dcost = dcost * cost_scale
        return res
    if status in ("infeasible", "unbounded"):
        return finish(status, it=iteration, msg=msg)
    if best is not None:
        # Degenerate instances can stall a hair above the target gap and
        # then drift along the optimal ray until tau or the step length
        # underflows. If the best iterate seen is feasible and has a tiny
        # gap, that is a solved problem, so report it instead of failing.
        bx, by, bz, bs, btau, bit, bp, bd, bg, bdc = best
        ok = (
            bp <= max(feastol, _REDUCED_TOL)
            and bd <= max(feastol, _REDUCED_TOL)
            and bg <= max(gaptol, _REDUCED_TOL)
        )
        if ok:
            res = finish(
                "optimal",
                bx / btau,
                by / btau,
                bz / btau,
                bs / btau,
                iteration,
                msg=f"reduced tolerance after {msg or status}",
            )
            res.pres, res.dres, res.gap = bp, bd, bg
            res.dcost = bdc * cost_scale
            return res
    return finish(status, it=iteration, msg=msg)
