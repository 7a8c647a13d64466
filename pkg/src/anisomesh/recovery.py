"""Per-vertex Hessian recovery from vertex values of a scalar field.

Each vertex fits a full quadratic by least squares over its vertex patch
(1-ring, extended ring by ring while the scaled normal system is poorly
conditioned or underdetermined) and reads the Hessian off the quadratic
coefficients. Exact for globally quadratic data.
"""

from __future__ import annotations

import numpy as np

from .mesh import TriMesh

COND_LIMIT = 1e8
MAX_RINGS = 3
MIN_SAMPLES = 6


class RecoveryError(RuntimeError):
    def __init__(self, vertex: int, message: str):
        super().__init__(f"vertex {vertex}: {message}")
        self.vertex = vertex


def _vertex_neighbors(mesh: TriMesh):
    nbr = [set() for _ in range(mesh.num_vertices)]
    for i, j in mesh.edges():
        nbr[i].add(int(j))
        nbr[j].add(int(i))
    return nbr


def recover_hessian(mesh: TriMesh, vertex_values) -> np.ndarray:
    """Packed Hessians (nv, 3) recovered from one value per vertex."""
    values = np.asarray(vertex_values, dtype=float)
    if values.shape != (mesh.num_vertices,):
        raise ValueError("need exactly one value per vertex")
    nbr = _vertex_neighbors(mesh)
    coords = mesh.vertices
    out = np.empty((mesh.num_vertices, 3))
    for v in range(mesh.num_vertices):
        patch = set(nbr[v])
        rings = 1
        coeffs = None
        while True:
            ids = np.fromiter(patch, dtype=np.int64)
            if len(ids) + 1 >= MIN_SAMPLES:
                pts = np.vstack([coords[v], coords[ids]])
                vals = np.concatenate([[values[v]], values[ids]])
                coeffs = _fit_quadratic(pts, vals)
                if coeffs is not None:
                    break
            if rings >= MAX_RINGS:
                break
            rings += 1
            grown = set(patch)
            for w in patch:
                grown.update(nbr[w])
            grown.discard(v)
            if grown == patch:
                break
            patch = grown
        if coeffs is None:
            raise RecoveryError(
                v, "patch is rank deficient (collinear or too small)"
            )
        out[v] = coeffs
    return out


def _fit_quadratic(pts, vals):
    """Hessian of the least-squares quadratic through (pts, vals), or None
    if the scaled normal system is unusable."""
    center = pts[0]
    d = pts - center
    radius = np.sqrt((d**2).sum(axis=1).max())
    if radius <= 0.0:
        return None
    d = d / radius
    A = np.column_stack(
        [
            np.ones(len(d)),
            d[:, 0],
            d[:, 1],
            d[:, 0] ** 2,
            d[:, 0] * d[:, 1],
            d[:, 1] ** 2,
        ]
    )
    G = A.T @ A
    if np.linalg.cond(G) > COND_LIMIT:
        return None
    coef = np.linalg.solve(G, A.T @ vals)
    s = radius * radius
    return np.array([2.0 * coef[3] / s, coef[4] / s, 2.0 * coef[5] / s])
