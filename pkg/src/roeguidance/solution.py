"""Guidance solution container and trajectory geometry helpers."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .dynamics import rtn_maps
from .orbits import ChiefOrbit
from .program import FormulationKind
from .solver import SolveStatus
from .timegrid import TimeGrid


@dataclass(frozen=True, eq=False)
class GuidanceSolution:
    """One reconfiguration plan for all deputies.

    states holds the dimensional relative trajectory in meters, shape
    (N, m+2, 6); controls holds the scaled per-arc accelerations
    u_bar = a_chief * u, shape (N, m+1, 3), identically zero on natural
    arcs; gammas holds the per-burn slack magnitudes when the
    formulation carries them. The stored states are re-propagated from
    the initial conditions with the stored controls, so they satisfy
    the discrete dynamics exactly.
    """

    kind: FormulationKind
    states: np.ndarray
    controls: np.ndarray
    gammas: np.ndarray | None
    objective: float
    solver_status: SolveStatus
    dv_per_deputy: np.ndarray
    dv_total: float
    certified_collision_free: bool = False
    scp_iterations: int = 0

    def __post_init__(self) -> None:
        if self.states.ndim != 3 or self.states.shape[2] != 6:
            raise ValueError(f"states must be (N, m+2, 6), got {self.states.shape}")
        if self.controls.ndim != 3 or self.controls.shape[2] != 3:
            raise ValueError(
                f"controls must be (N, m+1, 3), got {self.controls.shape}"
            )
        if self.controls.shape[1] != self.states.shape[1] - 1:
            raise ValueError("controls must cover exactly the state intervals")
        if self.dv_per_deputy.shape != (self.states.shape[0],):
            raise ValueError("dv_per_deputy must have one entry per deputy")

    @property
    def n_deputies(self) -> int:
        return int(self.states.shape[0])

    def physical_controls(self, chief: ChiefOrbit) -> np.ndarray:
        """Thruster accelerations u = u_bar / a_chief in m/s^2."""
        return self.controls / chief.a


def compute_dv(
    controls: np.ndarray, grid: TimeGrid, chief: ChiefOrbit
) -> np.ndarray:
    """Per-deputy Delta-V in m/s: sum over arcs of dt * ||u_bar|| / a_c."""
    norms = np.linalg.norm(controls, axis=2)
    return norms @ grid.durations / chief.a


def rtn_trajectory(
    states: np.ndarray, chief: ChiefOrbit, grid: TimeGrid
) -> np.ndarray:
    """RTN relative positions at every epoch, shape (N, m+2, 3), meters."""
    maps = rtn_maps(chief, grid)
    return np.einsum("kab,ikb->ika", maps, states)


def chief_distances(
    states: np.ndarray, chief: ChiefOrbit, grid: TimeGrid
) -> np.ndarray:
    """Deputy-to-chief RTN separation per epoch, shape (N, m+2), meters."""
    return np.linalg.norm(rtn_trajectory(states, chief, grid), axis=2)


def deputy_pair_distances(
    states: np.ndarray, chief: ChiefOrbit, grid: TimeGrid
) -> tuple[tuple[tuple[int, int], ...], np.ndarray]:
    """Pairwise deputy RTN separations per epoch.

    Returns the ordered pair index list and an array of shape
    (n_pairs, m+2) in meters; the pair list is empty for N = 1.
    """
    pos = rtn_trajectory(states, chief, grid)
    pairs = tuple(combinations(range(states.shape[0]), 2))
    if not pairs:
        return pairs, np.zeros((0, states.shape[1]))
    dists = np.array(
        [np.linalg.norm(pos[i] - pos[j], axis=1) for i, j in pairs]
    )
    return pairs, dists
