"""Element-wise interpolation-error formulas and norm-equivalence constants.

The L2 and max-norm closed forms are implemented in the oracle-validated
form (see the arbitration suite in the tests): the edge quantities are
d_i = 0.5 * l_i . H l_i and the max-norm expression uses the diagonal
products D_11 D_22 D_33, which reproduce direct integration. The
transcriptions that fail arbitration remain available behind
``paper_literal=True`` for comparison runs only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mesh import ElementGeometry


def _check_p(p) -> float:
    p = float(p)
    if not (p > 0.0):
        raise ValueError(f"invalid norm exponent p={p}; need p in (0, inf]")
    return p


def _unpack_sym(H):
    H = np.asarray(H, dtype=float)
    if H.shape == (2, 2):
        return float(H[0, 0]), float(0.5 * (H[0, 1] + H[1, 0])), float(H[1, 1])
    if H.shape == (3,):
        return float(H[0]), float(H[1]), float(H[2])
    raise ValueError("H must be a symmetric 2x2 matrix or packed (h11,h12,h22)")


def _quad_forms(ell, h11, h12, h22):
    """l_i . H l_j for the cyclic index pairs used by the formulas."""
    hx = h11 * ell[:, 0] + h12 * ell[:, 1]
    hy = h12 * ell[:, 0] + h22 * ell[:, 1]
    diag = ell[:, 0] * hx + ell[:, 1] * hy
    cross = np.array(
        [
            ell[(i + 1) % 3, 0] * hx[(i + 2) % 3] + ell[(i + 1) % 3, 1] * hy[(i + 2) % 3]
            for i in range(3)
        ]
    )
    return diag, cross


@dataclass(frozen=True)
class EdgeQuadraticForms:
    """Edge-Hessian quadratic forms of one element."""

    d: np.ndarray  # d_i = 0.5 * l_i . H l_i
    cross: np.ndarray  # l_{i+1} . H l_{i+2}, cyclic
    diag_lambda: np.ndarray | None = None  # D_ii for the stretched model


def edge_quadratic_forms(geom: ElementGeometry, H, lam=None) -> EdgeQuadraticForms:
    h11, h12, h22 = _unpack_sym(H)
    diag, cross = _quad_forms(geom.edge_vectors, h11, h12, h22)
    dl = None
    if lam is not None:
        l1, l2 = lam
        ell = geom.edge_vectors
        dl = l1 * ell[:, 0] ** 2 + l2 * ell[:, 1] ** 2
    return EdgeQuadraticForms(0.5 * diag, cross, dl)


def l2_error_sq(geom: ElementGeometry, H, *, paper_literal: bool = False) -> float:
    """||u - u_I||^2_{L2(K)} for u with constant Hessian H."""
    h11, h12, h22 = _unpack_sym(H)
    diag, _ = _quad_forms(geom.edge_vectors, h11, h12, h22)
    if paper_literal:
        d = diag
        bracket = d.sum() ** 2 + d[0] * d[1] + d[1] * d[2] + d[0] * d[2]
    else:
        d = 0.5 * diag
        bracket = d.sum() ** 2 + (d**2).sum()
    return geom.area / 180.0 * float(bracket)


def h1_error_sq(geom: ElementGeometry, H) -> float:
    """||grad(u - u_I)||^2_{L2(K)} for u with constant Hessian H."""
    h11, h12, h22 = _unpack_sym(H)
    _, cross = _quad_forms(geom.edge_vectors, h11, h12, h22)
    l2s = np.sum(geom.edge_vectors**2, axis=1)
    return float((cross**2 * l2s).sum()) / (48.0 * geom.area)


def lp_error_estimate(geom: ElementGeometry, H, p) -> float:
    """Estimate of ||u - u_I||^2_{Lp(K)}: |K|^(2/p - 1) times the L2 form,
    proportionality constant fixed to one (limit 2/p -> 0 at p = inf)."""
    p = _check_p(p)
    expo = 0.0 if math.isinf(p) else 2.0 / p
    return geom.area ** (expo - 1.0) * l2_error_sq(geom, H)


def w1p_error_estimate(geom: ElementGeometry, H, p) -> float:
    """Estimate of ||grad(u - u_I)||^2_{Lp(K)}: |K|^(2/p - 1) times the H1
    form, same limit convention."""
    p = _check_p(p)
    expo = 0.0 if math.isinf(p) else 2.0 / p
    return geom.area ** (expo - 1.0) * h1_error_sq(geom, H)


def linf_error_ds(
    geom: ElementGeometry, lam1: float, lam2: float, *, paper_literal: bool = False
):
    """Closed-form max |u - u_I| for u = lam1 x^2 + lam2 y^2.

    Returns (value, applicable). The value is the squared circumradius of
    the triangle stretched by sqrt(lam1), sqrt(lam2); it equals the true
    maximum exactly when the stretched triangle is acute (contains its
    circumcenter strictly), which is what the flag reports. The literal
    transcription (cross products D_12 D_23 D_31, squared left-hand side)
    is kept for comparison only.
    """
    if not (lam1 > 0.0 and lam2 > 0.0):
        raise ValueError("lam1 and lam2 must be positive")
    ell = geom.edge_vectors
    if geom.area <= 0.0:
        raise ValueError("degenerate element")
    d11 = lam1 * ell[:, 0] ** 2 + lam2 * ell[:, 1] ** 2
    if paper_literal:
        cross = np.array(
            [
                lam1 * ell[(i + 1) % 3, 0] * ell[(i + 2) % 3, 0]
                + lam2 * ell[(i + 1) % 3, 1] * ell[(i + 2) % 3, 1]
                for i in range(3)
            ]
        )
        value = float(np.prod(cross)) / (16.0 * lam1 * lam2 * geom.area**2)
    else:
        value = float(np.prod(d11)) / (16.0 * lam1 * lam2 * geom.area**2)
    # Acute in the stretched coordinates: all cyclic edge inner products
    # (the angles' cosines up to sign) strictly negative.
    cross = np.array(
        [
            lam1 * ell[(i + 1) % 3, 0] * ell[(i + 2) % 3, 0]
            + lam2 * ell[(i + 1) % 3, 1] * ell[(i + 2) % 3, 1]
            for i in range(3)
        ]
    )
    applicable = bool(np.all(cross < 0.0))
    return value, applicable


# ---------------------------------------------------------------------------
# Norm-equivalence constants


@dataclass(frozen=True)
class EquivConstants:
    """Constants of the quadratic-polynomial and vector norm equivalences."""

    p: float
    c_p: float  # upper constant, ||v||_p <= c_p |K|^{1/p-1} ||v||_1
    c_inv_p: float  # the constant at exponent 1/p used in the lower bound
    vec_lower: float  # lower constant of the d-vector p-vs-2 bracket
    vec_upper: float
    d: int = 2


def _poly_upper_constant(p: float, d: int) -> float:
    if p <= 1.0:
        return 1.0
    if math.isinf(p):
        return float((d + 1) * (d + 2))
    prod = 1.0
    for j in range(1, d + 1):
        prod *= p + j
    return (d + 1) * (d + 2) * math.factorial(d) ** (1.0 / p) * prod ** (-1.0 / p)


def vector_norm_equiv_bounds(p: float, d: int):
    """(lower, upper) with lower*||a||_2 <= ||a||_p <= upper*||a||_2 for
    positive d-vectors."""
    p = _check_p(p)
    if math.isinf(p):
        return d ** (-0.5), 1.0
    f = d ** (1.0 / p - 0.5)
    if p < 2.0:
        return 1.0, f
    if p > 2.0:
        return f, 1.0
    return 1.0, 1.0


def norm_equiv_constants(p, d: int = 2) -> EquivConstants:
    p = _check_p(p)
    c_p = _poly_upper_constant(p, d)
    c_inv_p = 1.0 if math.isinf(p) else _poly_upper_constant(1.0 / p, d)
    lo, up = vector_norm_equiv_bounds(p, d)
    return EquivConstants(p, c_p, c_inv_p, lo, up, d)


def lp_sandwich_factors(p, d: int = 2):
    """Multiplicative bracket [lower, upper] relating the oracle Lp norm of
    the interpolation error to |K|^{1/p-1/2} ||e||_{L2}."""
    c = norm_equiv_constants(p, d)
    c2 = norm_equiv_constants(2.0, d)
    if math.isinf(p):
        lower = 1.0 / c2.c_p
    else:
        lower = c.c_inv_p ** (-1.0 / p) / c2.c_p
    return lower, c.c_p


# ---------------------------------------------------------------------------
# Batched forms used by the driver diagnostics


def element_error_estimates(mesh, vertex_hessians, m: int, p) -> np.ndarray:
    """Per-element error-model values on a mesh.

    The element Hessian is the arithmetic mean of the three vertex Hessians
    (exact when H is affine). Returns the m = 0 or m = 1 estimate per
    element.
    """
    p = _check_p(p)
    hv = np.asarray(vertex_hessians, dtype=float)
    t = mesh.triangles
    hk = (hv[t[:, 0]] + hv[t[:, 1]] + hv[t[:, 2]]) / 3.0
    ell = mesh.tri_edge_vectors()
    area = mesh.areas()
    hx = hk[:, 0, None] * ell[:, :, 0] + hk[:, 1, None] * ell[:, :, 1]
    hy = hk[:, 1, None] * ell[:, :, 0] + hk[:, 2, None] * ell[:, :, 1]
    expo = 0.0 if math.isinf(p) else 2.0 / p
    if m == 0:
        d = 0.5 * (ell[:, :, 0] * hx + ell[:, :, 1] * hy)
        bracket = d.sum(axis=1) ** 2 + (d**2).sum(axis=1)
        return area ** (expo - 1.0) * area / 180.0 * bracket
    if m == 1:
        idx1 = [1, 2, 0]
        idx2 = [2, 0, 1]
        cross = (
            ell[:, idx1, 0] * hx[:, idx2] + ell[:, idx1, 1] * hy[:, idx2]
        )
        l2s = (ell**2).sum(axis=2)
        s = (cross**2 * l2s).sum(axis=1)
        return area ** (expo - 1.0) * s / (48.0 * area)
    raise ValueError("m must be 0 or 1")
