"""Polyhedral inner model of the single-thruster feasibility sphere.

The thrust set ||u|| <= Gamma is replaced by facets on the three RTN
coordinate planes: n_dir facets supporting an inscribed polygon in the
transversal-normal plane, plus four fixed diagonal facets in each of the
radial-transversal and radial-normal planes. Vertices of the resulting
polyhedron can poke outside the sphere, so a scale factor c (max vertex
norm) is applied to pull the scaled set strictly inside.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

_DEGENERATE_DET = 1e-12
_FACET_SLACK = 1e-9


@dataclass(frozen=True)
class PolyhedronSpec:
    """Facet count in the T-N plane and the vertex-norm scale factor."""

    n_dir: int
    scale_c: float

    def __post_init__(self) -> None:
        if self.n_dir <= 4:
            raise ValueError(
                f"n_dir must exceed 4 to bound the T-N plane, got {self.n_dir}"
            )
        if not self.scale_c >= 1.0:
            raise ValueError(f"scale_c must be >= 1, got {self.scale_c}")


def facet_matrix(n_dir: int) -> tuple[np.ndarray, np.ndarray]:
    """All facet rows of the unit-Gamma polyhedron.

    Returns (normals, offsets) with normals @ u <= offsets; rows are the
    n_dir transversal-normal facets followed by the 2*4 cross-plane
    facets (radial-transversal, then radial-normal, per angle).
    """
    if n_dir <= 4:
        raise ValueError(f"n_dir must exceed 4, got {n_dir}")
    gamma_max = math.pi / n_dir
    rows = []
    offsets = []
    for d in range(1, n_dir + 1):
        g = (2 * d - 1) * math.pi / n_dir
        rows.append((0.0, math.cos(g), math.sin(g)))
        offsets.append(math.cos(gamma_max))
    cross_max = math.pi / 4.0
    for d in range(1, 5):
        g = (2 * d - 1) * math.pi / 4.0
        rows.append((math.cos(g), math.sin(g), 0.0))
        offsets.append(math.cos(cross_max))
        rows.append((math.cos(g), 0.0, math.sin(g)))
        offsets.append(math.cos(cross_max))
    return np.array(rows), np.array(offsets)


def _vertices_from_triples(
    normals: np.ndarray, offsets: np.ndarray, triples
) -> list[np.ndarray]:
    verts: list[np.ndarray] = []
    for i, j, k in triples:
        mat = normals[[i, j, k]]
        if abs(np.linalg.det(mat)) < _DEGENERATE_DET:
            continue
        v = np.linalg.solve(mat, offsets[[i, j, k]])
        if np.all(normals @ v <= offsets + _FACET_SLACK):
            verts.append(v)
    return verts


def enumerate_vertices(n_dir: int, exhaustive: bool = False) -> np.ndarray:
    """Vertices of the unit-Gamma polyhedron by facet-triple intersection.

    The default enumeration only visits triples that can produce a
    vertex: two adjacent T-N facets (their line is parallel to the
    radial axis, so any other T-N facet cannot close a vertex) with one
    cross facet, one T-N facet with two cross facets, and cross-facet
    triples. exhaustive=True checks every facet triple instead; both
    routes return the same set and the exhaustive one serves as the
    oracle in tests.
    """
    normals, offsets = facet_matrix(n_dir)
    n_rows = len(offsets)
    if exhaustive:
        triples = itertools.combinations(range(n_rows), 3)
    else:
        cross = range(n_dir, n_rows)
        triples = []
        for d in range(n_dir):
            nxt = (d + 1) % n_dir
            triples.extend((d, nxt, c) for c in cross)
        for d in range(n_dir):
            triples.extend(
                (d, c1, c2) for c1, c2 in itertools.combinations(cross, 2)
            )
        triples.extend(itertools.combinations(cross, 3))
    verts = _vertices_from_triples(normals, offsets, triples)
    if not verts:
        raise RuntimeError("vertex enumeration found no vertices")
    arr = np.array(verts)
    # dedupe coincident intersections (degenerate corners touch 4 facets)
    rounded = np.round(arr, 9)
    _, keep = np.unique(rounded, axis=0, return_index=True)
    return arr[np.sort(keep)]


def compute_scale_factor(n_dir: int) -> float:
    """Max Euclidean norm over the unit-Gamma polyhedron vertices.

    Dividing the facet set by this factor guarantees every feasible
    thrust direction stays inside the unit sphere.
    """
    verts = enumerate_vertices(n_dir)
    return float(np.max(np.linalg.norm(verts, axis=1)))


def tn_coverage(n_dir: int) -> float:
    """Area of the u_R = 0 slice of the polyhedron over the unit-disc area.

    At u_R = 0 the cross facets reduce to |u_T| <= 1 and |u_N| <= 1,
    which the fan polygon already satisfies, so the slice is exactly the
    n_dir-gon cut by the T-N facets. Its vertices sit on the unit
    circle, giving the ratio (n/2) sin(2 pi / n) / pi; this quantifies
    how much of the in-plane thrust envelope the facets keep.
    """
    normals, offsets = facet_matrix(n_dir)
    fan_normals = normals[:n_dir, 1:]
    fan_offsets = offsets[:n_dir]
    pts = []
    for d in range(n_dir):
        nxt = (d + 1) % n_dir
        pts.append(
            np.linalg.solve(fan_normals[[d, nxt]], fan_offsets[[d, nxt]])
        )
    arr = np.array(pts)
    x, y = arr[:, 0], arr[:, 1]
    area = 0.5 * abs(
        float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    )
    return area / math.pi
