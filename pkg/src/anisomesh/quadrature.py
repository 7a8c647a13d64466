"""Gauss quadrature on the reference triangle.

Rules are built by collapsing a tensor Gauss-Legendre grid onto the triangle
(the extra (1-u) Jacobian is absorbed into the weights), which gives provable
polynomial exactness at any requested degree. Weights are normalized to sum
to one, so an integral over a physical triangle K is area(K) * sum(w * f).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss


@dataclass(frozen=True)
class TriangleRule:
    bary: np.ndarray  # (nq, 3) barycentric coordinates
    weights: np.ndarray  # (nq,), sum 1
    degree: int

    @property
    def num_points(self) -> int:
        return len(self.weights)


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> TriangleRule:
    if degree < 1:
        raise ValueError("degree must be >= 1")
    n = (degree + 3) // 2  # 2n-1 >= degree+1 covers the collapsed Jacobian
    x, w = leggauss(n)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    uu, vv = np.meshgrid(u, u, indexing="ij")
    wgt = np.outer(wu * (1.0 - u), wu).ravel()
    px = uu.ravel()
    py = (vv * (1.0 - uu)).ravel()
    bary = np.column_stack([1.0 - px - py, px, py])
    weights = 2.0 * wgt  # reference triangle area 1/2 -> weights sum to 1
    bary.setflags(write=False)
    weights.setflags(write=False)
    return TriangleRule(bary, weights, degree)


def physical_points(rule: TriangleRule, tri_coords: np.ndarray) -> np.ndarray:
    """Map rule points onto triangles given as (..., 3, 2) vertex arrays;
    returns (..., nq, 2)."""
    return np.einsum("qi,...ij->...qj", rule.bary, tri_coords)
