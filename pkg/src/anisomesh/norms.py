"""Interpolation-error norms by adaptive high-order quadrature.

This is the independent oracle: it never uses the element-wise closed forms
it arbitrates. Elements are integrated with a degree-8 rule and refined by
4-way splitting until the element contribution stabilizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mesh import ElementGeometry, TriMesh
from .quadrature import physical_points, triangle_rule

DEFAULT_REL_TOL = 1e-4
DEFAULT_MAX_DEPTH = 6
DEFAULT_DEGREE = 8
# A sampled maximum only needs to locate the basin of the true maximum (the
# Newton polish does the rest), so its refinement test can be looser than
# the integral tolerance.
INF_SAMPLING_REL_TOL = 1e-3


@dataclass(frozen=True)
class ErrorBreakdown:
    """Global L^p error with per-element contributions.

    For p < inf ``per_element`` holds the element integrals of |e|^p and
    ``value`` is their sum to the power 1/p; for p = inf it holds element
    maxima and ``value`` is their maximum.
    """

    p: float
    value: float
    per_element: np.ndarray


def _check_p(p) -> float:
    p = float(p)
    if not (p > 0.0):
        raise ValueError(f"invalid norm exponent p={p}; need p in (0, inf]")
    return p


def _interpolant(mesh: TriMesh, values: np.ndarray):
    """Per-element linear interpolant u_I(x) = c0 + gx*x + gy*y."""
    v = mesh.vertices
    t = mesh.triangles
    a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    e1 = b - a
    e2 = c - a
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    df1 = values[t[:, 1]] - values[t[:, 0]]
    df2 = values[t[:, 2]] - values[t[:, 0]]
    gx = (e2[:, 1] * df1 - e1[:, 1] * df2) / det
    gy = (-e2[:, 0] * df1 + e1[:, 0] * df2) / det
    c0 = values[t[:, 0]] - gx * a[:, 0] - gy * a[:, 1]
    return c0, gx, gy


def _tri_areas(sub):
    return 0.5 * np.abs(
        (sub[:, 1, 0] - sub[:, 0, 0]) * (sub[:, 2, 1] - sub[:, 0, 1])
        - (sub[:, 1, 1] - sub[:, 0, 1]) * (sub[:, 2, 0] - sub[:, 0, 0])
    )


def _split4(sub):
    m01 = 0.5 * (sub[:, 0] + sub[:, 1])
    m12 = 0.5 * (sub[:, 1] + sub[:, 2])
    m20 = 0.5 * (sub[:, 2] + sub[:, 0])
    children = np.empty((len(sub) * 4, 3, 2))
    children[0::4, 0], children[0::4, 1], children[0::4, 2] = sub[:, 0], m01, m20
    children[1::4, 0], children[1::4, 1], children[1::4, 2] = m01, sub[:, 1], m12
    children[2::4, 0], children[2::4, 1], children[2::4, 2] = m20, m12, sub[:, 2]
    children[3::4, 0], children[3::4, 1], children[3::4, 2] = m01, m12, m20
    return children


def adaptive_element_lp(
    tri_coords,
    err_fn,
    p,
    *,
    rel_tol=DEFAULT_REL_TOL,
    max_depth=DEFAULT_MAX_DEPTH,
    degree=DEFAULT_DEGREE,
    track_max_points=False,
):
    """Per-element integral of |err|^p (or max for p = inf) over triangles.

    ``err_fn(points, parents)`` evaluates the pointwise error magnitude for
    points lying inside the parent element with the given index. Refinement
    stops per element once the contribution changes by less than ``rel_tol``
    relative, or at ``max_depth`` quartering levels.
    """
    p = _check_p(p)
    tri_coords = np.asarray(tri_coords, dtype=float)
    ne = len(tri_coords)
    rule = triangle_rule(degree)
    is_inf = math.isinf(p)

    sub = tri_coords.copy()
    parent = np.arange(ne)
    result = np.zeros(ne)
    best_pts = np.zeros((ne, 2)) if track_max_points else None
    prev = None
    alive = np.ones(ne, dtype=bool)

    for depth in range(max_depth + 1):
        pts = physical_points(rule, sub)
        if is_inf:
            pts = np.concatenate([pts, sub], axis=1)
        npt = pts.shape[1]
        flat = pts.reshape(-1, 2)
        par_rep = np.repeat(parent, npt)
        vals = np.abs(err_fn(flat, par_rep)).reshape(len(sub), npt)
        level = np.zeros(ne)
        if is_inf:
            sub_best = vals.max(axis=1)
            np.maximum.at(level, parent, sub_best)
            if track_max_points:
                lvl_pts = np.zeros((ne, 2))
                hit = sub_best >= level[parent]
                idx = np.nonzero(hit)[0]
                q = vals[idx].argmax(axis=1)
                lvl_pts[parent[idx]] = pts[idx, q]
        else:
            contrib = _tri_areas(sub) * ((vals[:, : rule.num_points] ** p) @ rule.weights)
            np.add.at(level, parent, contrib)

        if prev is None:
            converged = np.zeros(ne, dtype=bool)
        else:
            old = np.where(alive, prev, 0.0)
            converged = np.abs(level - old) <= rel_tol * np.abs(level) + 1e-300
        if depth >= 1:
            # Elements far below the running global total (or maximum) cannot
            # move the result within tolerance; stop refining them.
            if is_inf:
                gmax = max(
                    float(level[alive].max(initial=0.0)),
                    float(result.max(initial=0.0)),
                )
                converged |= level < 0.125 * gmax
            else:
                total = float(result.sum()) + float(level[alive].sum())
                converged |= level < 0.01 * rel_tol * total / max(ne, 1)
        newly_done = alive & (converged | (depth == max_depth))
        result[newly_done] = level[newly_done]
        if track_max_points:
            best_pts[alive] = lvl_pts[alive]
        alive = alive & ~newly_done
        prev = level
        if not alive.any():
            break
        keep = alive[parent]
        sub = _split4(sub[keep])
        parent = np.repeat(parent[keep], 4)

    if track_max_points:
        return result, best_pts
    return result


def _breakdown(p, per_element) -> ErrorBreakdown:
    if math.isinf(p):
        value = float(per_element.max(initial=0.0))
    else:
        value = float(per_element.sum() ** (1.0 / p))
    return ErrorBreakdown(p, value, per_element)


def interp_error_lp(
    mesh: TriMesh,
    problem,
    p,
    *,
    rel_tol=DEFAULT_REL_TOL,
    max_depth=DEFAULT_MAX_DEPTH,
    degree=DEFAULT_DEGREE,
) -> ErrorBreakdown:
    """L^p norm of u - u_I with u_I the vertex-interpolating linear field."""
    p = _check_p(p)
    values = problem.value(mesh.vertices)
    c0, gx, gy = _interpolant(mesh, values)

    def err(pts, par):
        return problem.value(pts) - (c0[par] + gx[par] * pts[:, 0] + gy[par] * pts[:, 1])

    tri_coords = mesh.vertices[mesh.triangles]
    if math.isinf(p):
        per_elem, best = adaptive_element_lp(
            tri_coords, err, p, rel_tol=rel_tol, max_depth=max_depth,
            degree=degree, track_max_points=True,
        )
        per_elem = _newton_polish(mesh, problem, per_elem, best, c0, gx, gy)
    else:
        per_elem = adaptive_element_lp(
            tri_coords, err, p, rel_tol=rel_tol, max_depth=max_depth, degree=degree
        )
    return _breakdown(p, per_elem)


def _newton_polish(mesh, problem, per_elem, best_pts, c0, gx, gy):
    """One Newton step on the stationarity of e from each element maximum."""
    ids = np.arange(len(per_elem))
    h = problem.hessian(best_pts)
    g = problem.gradient(best_pts)
    g[:, 0] -= gx[ids]
    g[:, 1] -= gy[ids]
    det = h[:, 0] * h[:, 2] - h[:, 1] ** 2
    ok = np.abs(det) > 1e-300
    step = np.zeros_like(g)
    step[ok, 0] = (h[ok, 2] * g[ok, 0] - h[ok, 1] * g[ok, 1]) / det[ok]
    step[ok, 1] = (-h[ok, 1] * g[ok, 0] + h[ok, 0] * g[ok, 1]) / det[ok]
    cand = best_pts - step
    tri = mesh.vertices[mesh.triangles]
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    d = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (
        c[:, 0] - a[:, 0]
    )
    l1 = (
        (b[:, 0] - cand[:, 0]) * (c[:, 1] - cand[:, 1])
        - (b[:, 1] - cand[:, 1]) * (c[:, 0] - cand[:, 0])
    ) / d
    l2 = (
        (c[:, 0] - cand[:, 0]) * (a[:, 1] - cand[:, 1])
        - (c[:, 1] - cand[:, 1]) * (a[:, 0] - cand[:, 0])
    ) / d
    l3 = 1.0 - l1 - l2
    inside = ok & (l1 >= -1e-9) & (l2 >= -1e-9) & (l3 >= -1e-9)
    inside &= np.isfinite(cand).all(axis=1)
    if inside.any():
        pts = cand[inside]
        ev = np.abs(
            problem.value(pts)
            - (c0[inside] + gx[inside] * pts[:, 0] + gy[inside] * pts[:, 1])
        )
        out = per_elem.copy()
        out[inside] = np.maximum(out[inside], ev)
        return out
    return per_elem


def interp_grad_error_lp(
    mesh: TriMesh,
    problem,
    p,
    *,
    rel_tol=DEFAULT_REL_TOL,
    max_depth=DEFAULT_MAX_DEPTH,
    degree=DEFAULT_DEGREE,
) -> ErrorBreakdown:
    """L^p norm of grad(u - u_I), Euclidean norm pointwise."""
    p = _check_p(p)
    values = problem.value(mesh.vertices)
    _, gx, gy = _interpolant(mesh, values)

    def err(pts, par):
        g = problem.gradient(pts)
        return np.hypot(g[:, 0] - gx[par], g[:, 1] - gy[par])

    per_elem = adaptive_element_lp(
        mesh.vertices[mesh.triangles], err, p,
        rel_tol=rel_tol, max_depth=max_depth, degree=degree,
    )
    return _breakdown(p, per_elem)


def _unpack_sym(H):
    H = np.asarray(H, dtype=float)
    if H.shape == (2, 2):
        return float(H[0, 0]), float(0.5 * (H[0, 1] + H[1, 0])), float(H[1, 1])
    if H.shape == (3,):
        return float(H[0]), float(H[1]), float(H[2])
    raise ValueError("H must be a symmetric 2x2 matrix or packed (h11,h12,h22)")


def element_linf_error_quadratic(geom: ElementGeometry, H) -> float:
    """Exact max |u - u_I| over a triangle for u with constant Hessian H.

    The error vanishes at the vertices, so along each edge the restriction
    is a 1D quadratic with its extremum at the midpoint; the only other
    candidate is the interior stationary point.
    """
    h11, h12, h22 = _unpack_sym(H)
    ell = geom.edge_vectors
    best = 0.0
    for i in range(3):
        dx, dy = ell[i]
        q = dx * (h11 * dx + h12 * dy) + dy * (h12 * dx + h22 * dy)
        best = max(best, 0.125 * abs(q))

    # Representative triangle with vertex 1 at the origin.
    p1 = np.zeros(2)
    p2 = p1 + ell[2]
    p3 = p2 + ell[0]

    def q(x):
        return 0.5 * (
            x[0] * (h11 * x[0] + h12 * x[1]) + x[1] * (h12 * x[0] + h22 * x[1])
        )

    # Linear interpolant of q at the vertices: l(x) = c + g.x.
    f1, f2, f3 = q(p1), q(p2), q(p3)
    e1 = p2 - p1
    e2 = p3 - p1
    det = e1[0] * e2[1] - e1[1] * e2[0]
    g = np.array(
        [
            (e2[1] * (f2 - f1) - e1[1] * (f3 - f1)) / det,
            (-e2[0] * (f2 - f1) + e1[0] * (f3 - f1)) / det,
        ]
    )
    c = f1 - g @ p1
    deth = h11 * h22 - h12 * h12
    scale = h11 * h11 + 2 * h12 * h12 + h22 * h22
    if abs(deth) > 1e-14 * max(scale, 1e-300):
        xs = np.array(
            [(h22 * g[0] - h12 * g[1]) / deth, (-h12 * g[0] + h11 * g[1]) / deth]
        )
        l1 = ((p2[0] - xs[0]) * (p3[1] - xs[1]) - (p2[1] - xs[1]) * (p3[0] - xs[0])) / det
        l2 = ((p3[0] - xs[0]) * (p1[1] - xs[1]) - (p3[1] - xs[1]) * (p1[0] - xs[0])) / det
        l3 = 1.0 - l1 - l2
        if l1 >= -1e-12 and l2 >= -1e-12 and l3 >= -1e-12:
            best = max(best, abs(q(xs) - (c + g @ xs)))
    return best


def quadratic_lp_norm(
    tri_coords,
    A,
    b,
    c,
    p,
    *,
    rel_tol=1e-6,
    max_depth=10,
    degree=12,
) -> float:
    """||v||_{L^p} of the quadratic v(x) = x^T A x + b.x + c over one triangle.

    Used by the norm-equivalence (sandwich) suites; |v|^p is not polynomial
    for fractional p, hence the adaptive refinement.
    """
    p = _check_p(p)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)

    def err(pts, par):
        return np.einsum("ni,ij,nj->n", pts, A, pts) + pts @ b + c

    val = adaptive_element_lp(
        np.asarray(tri_coords, dtype=float)[None, :, :], err, p,
        rel_tol=rel_tol, max_depth=max_depth, degree=degree,
    )[0]
    if math.isinf(p):
        return float(val)
    return float(val ** (1.0 / p))


def quadratic_min_on_triangle(tri_coords, A, b, c) -> float:
    """Exact minimum of a quadratic over a closed triangle (vertices, edge
    extrema, interior stationary point)."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    P = np.asarray(tri_coords, dtype=float)

    def v(x):
        return float(x @ A @ x + b @ x + c)

    cands = [v(P[i]) for i in range(3)]
    for i in range(3):
        q0, q1 = P[i], P[(i + 1) % 3]
        d = q1 - q0
        aa = d @ A @ d
        bb = 2 * (q0 @ A @ d) + b @ d
        if abs(aa) > 1e-300:
            t = -bb / (2 * aa)
            if 0.0 < t < 1.0:
                cands.append(v(q0 + t * d))
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if abs(det) > 1e-300:
        xs = np.linalg.solve(2 * A, -b)
        d = (P[1] - P[0])[0] * (P[2] - P[0])[1] - (P[1] - P[0])[1] * (P[2] - P[0])[0]
        l1 = ((P[1][0] - xs[0]) * (P[2][1] - xs[1]) - (P[1][1] - xs[1]) * (P[2][0] - xs[0])) / d
        l2 = ((P[2][0] - xs[0]) * (P[0][1] - xs[1]) - (P[2][1] - xs[1]) * (P[0][0] - xs[0])) / d
        if l1 >= 0 and l2 >= 0 and 1 - l1 - l2 >= 0:
            cands.append(v(xs))
    return min(cands)
