"""Linearized J2-perturbed relative dynamics in dimensional ROE space.

State y is the dimensional relative element vector (meters); control is
the scaled thrust acceleration u_bar = a_chief * u. The plant is
y' = A y + B(t) u_bar with constant A (secular J2 rates linearized about
the chief) and a control influence matrix that rotates with the chief's
argument of latitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .orbits import ChiefOrbit
from .timegrid import TimeGrid

GAUSS_NODES = 32


def j2_rate_coefficient(chief: ChiefOrbit) -> float:
    """Secular J2 rate scale gamma = (3/4) J2 n (R_E / a)^2 [rad/s]."""
    return (
        0.75
        * chief.j2
        * chief.mean_motion
        * (chief.r_earth / chief.a) ** 2
    )


def _trig_factors(chief: ChiefOrbit) -> tuple[float, float, float, float]:
    ci = math.cos(chief.elements.i)
    si = math.sin(chief.elements.i)
    p = 3.0 * ci * ci - 1.0
    q = 5.0 * ci * ci - 1.0
    s = 2.0 * si * ci
    t = si * si
    return p, q, s, t


def perigee_rate(chief: ChiefOrbit) -> float:
    """Secular argument-of-perigee rate gamma * (5 cos^2 i - 1) [rad/s]."""
    _, q, _, _ = _trig_factors(chief)
    return j2_rate_coefficient(chief) * q


def latitude_rate(chief: ChiefOrbit) -> float:
    """Mean argument-of-latitude rate of the chief, J2-consistent [rad/s]."""
    p, q, _, _ = _trig_factors(chief)
    return chief.mean_motion + j2_rate_coefficient(chief) * (p + q)


def arg_latitude(chief: ChiefOrbit, t: float) -> float:
    """Chief mean argument of latitude at time t (seconds past epoch)."""
    return chief.elements.theta + latitude_rate(chief) * t


def stm(chief: ChiefOrbit, t_from: float, t_to: float) -> np.ndarray:
    """State transition matrix Phi(t_from -> t_to), exact for constant A.

    With j2 = 0 the only off-diagonal entry is the Keplerian drift
    d(dlambda)/d(da) = -1.5 n dt.
    """
    tau = t_to - t_from
    n = chief.mean_motion
    gam = j2_rate_coefficient(chief)
    p, q, s, t = _trig_factors(chief)

    phi = np.eye(6)
    phi[1, 0] = -(1.5 * n + 7.0 * gam * p) * tau
    phi[1, 4] = -7.0 * gam * s * tau
    rot = gam * q * tau
    c, sn = math.cos(rot), math.sin(rot)
    phi[2, 2] = c
    phi[2, 3] = -sn
    phi[3, 2] = sn
    phi[3, 3] = c
    phi[5, 0] = 3.5 * gam * s * tau
    phi[5, 4] = 2.0 * gam * t * tau
    return phi


def plant_matrix(chief: ChiefOrbit) -> np.ndarray:
    """Constant rate matrix A with y' = A y for uncontrolled motion."""
    n = chief.mean_motion
    gam = j2_rate_coefficient(chief)
    p, q, s, t = _trig_factors(chief)
    a = np.zeros((6, 6))
    a[1, 0] = -(1.5 * n + 7.0 * gam * p)
    a[1, 4] = -7.0 * gam * s
    a[2, 3] = -gam * q
    a[3, 2] = gam * q
    a[5, 0] = 3.5 * gam * s
    a[5, 4] = 2.0 * gam * t
    return a


def control_influence(chief: ChiefOrbit, t: float) -> np.ndarray:
    """Gauss variational influence of RTN thrust on y at time t.

    Columns are radial, transversal, normal; y' += B u_bar with
    u_bar = a_chief * u.
    """
    u = arg_latitude(chief, t)
    cu, su = math.cos(u), math.sin(u)
    scale = 1.0 / (chief.mean_motion * chief.a)
    return scale * np.array(
        [
            [0.0, 2.0, 0.0],
            [-2.0, 0.0, 0.0],
            [su, 2.0 * cu, 0.0],
            [-cu, 2.0 * su, 0.0],
            [0.0, 0.0, cu],
            [0.0, 0.0, su],
        ]
    )


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_NODES)


def control_convolution(
    chief: ChiefOrbit, t_from: float, t_to: float
) -> np.ndarray:
    """Effect of a constant u_bar held over [t_from, t_to] on y(t_to).

    Psi = integral of Phi(tau -> t_to) B(tau) dtau, evaluated with
    fixed 32-node Gauss-Legendre quadrature.
    """
    half = 0.5 * (t_to - t_from)
    mid = 0.5 * (t_to + t_from)
    psi = np.zeros((6, 3))
    for node, weight in zip(_GL_NODES, _GL_WEIGHTS):
        tau = mid + half * node
        psi += weight * (stm(chief, tau, t_to) @ control_influence(chief, tau))
    return half * psi


def rtn_map(chief: ChiefOrbit, t: float) -> np.ndarray:
    """Linear map T(t) from y (meters) to RTN relative position (meters)."""
    u = arg_latitude(chief, t)
    cu, su = math.cos(u), math.sin(u)
    return np.array(
        [
            [1.0, 0.0, -cu, -su, 0.0, 0.0],
            [0.0, 1.0, 2.0 * su, -2.0 * cu, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, su, -cu],
        ]
    )


@dataclass(frozen=True)
class ArcModel:
    """Discrete model of one grid interval: y_next = phi @ y + psi @ u_bar."""

    phi: np.ndarray
    psi: np.ndarray
    dt: float


def arc_models(chief: ChiefOrbit, grid: TimeGrid) -> tuple[ArcModel, ...]:
    """Precompute per-interval transition and convolution matrices."""
    models = []
    for k in range(grid.n_intervals):
        t0, t1 = float(grid.epochs[k]), float(grid.epochs[k + 1])
        models.append(
            ArcModel(
                phi=stm(chief, t0, t1),
                psi=control_convolution(chief, t0, t1),
                dt=t1 - t0,
            )
        )
    return tuple(models)


def rtn_maps(chief: ChiefOrbit, grid: TimeGrid) -> np.ndarray:
    """RTN projection matrices at every grid epoch, shape (m+2, 3, 6)."""
    return np.array([rtn_map(chief, float(t)) for t in grid.epochs])


def propagate(
    y0: np.ndarray,
    arcs: tuple[ArcModel, ...] | list[ArcModel],
    controls: np.ndarray | None = None,
) -> np.ndarray:
    """Chain the discrete model across all arcs.

    Args:
        y0: initial state, shape (6,).
        arcs: per-interval models.
        controls: scaled thrust per interval, shape (len(arcs), 3);
            None propagates uncontrolled.

    Returns:
        States at every epoch, shape (len(arcs) + 1, 6).
    """
    y0 = np.asarray(y0, dtype=float)
    out = np.empty((len(arcs) + 1, 6))
    out[0] = y0
    for k, arc in enumerate(arcs):
        out[k + 1] = arc.phi @ out[k]
        if controls is not None:
            out[k + 1] += arc.psi @ controls[k]
    return out
