"""Pure-Python fallback for the compiled hot kernels.

Scalar functions use math-module arithmetic (cheaper than numpy for single
values inside the remesher's sequential loops); batched functions are
vectorized numpy. ``anisomesh.kernels`` selects this module when the
compiled extension is unavailable or ANISOMESH_PURE=1 is set.
"""

import math

import numpy as np

IMPLEMENTATION = "python"

_EIG_TOL = 1e-14


def signed_area(ax, ay, bx, by, cx, cy):
    return 0.5 * ((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))


def _quad_form(dx, dy, m11, m12, m22):
    return dx * (m11 * dx + m12 * dy) + dy * (m12 * dx + m22 * dy)


def metric_length_one(dx, dy, a11, a12, a22, b11, b12, b22):
    """Edge length under a metric varying geometrically between endpoints."""
    la = math.sqrt(max(_quad_form(dx, dy, a11, a12, a22), 0.0))
    lb = math.sqrt(max(_quad_form(dx, dy, b11, b12, b22), 0.0))
    if la <= 0.0 or lb <= 0.0:
        return 0.5 * (la + lb)
    if abs(la - lb) < 1e-12 * la:
        return la
    return (la - lb) / math.log(la / lb)


def _sym2_apply(f, fprime, m11, m12, m22):
    # f(S) = a*S + b*I through the spectral decomposition of symmetric S.
    h = 0.5 * (m11 + m22)
    disc = math.hypot(0.5 * (m11 - m22), m12)
    if disc <= _EIG_TOL * max(1.0, abs(h)):
        fh = f(h)
        a = fprime(h)
        b = fh - a * h
    else:
        lam1 = h + disc
        lam2 = h - disc
        f1 = f(lam1)
        f2 = f(lam2)
        a = (f1 - f2) / (lam1 - lam2)
        b = (lam1 * f2 - lam2 * f1) / (lam1 - lam2)
    return a * m11 + b, a * m12, a * m22 + b


def sym2_exp_one(l11, l12, l22):
    return _sym2_apply(math.exp, math.exp, l11, l12, l22)


def sym2_log_one(m11, m12, m22):
    h = 0.5 * (m11 + m22)
    disc = math.hypot(0.5 * (m11 - m22), m12)
    if h - disc <= 0.0:
        raise ValueError("matrix is not positive definite")
    return _sym2_apply(math.log, lambda x: 1.0 / x, m11, m12, m22)


def quality_one(ax, ay, bx, by, cx, cy, l11, l12, l22):
    """Shape quality in the metric exp([[l11,l12],[l12,l22]]); 1 is
    metric-equilateral, 0 degenerate."""
    m11, m12, m22 = sym2_exp_one(l11, l12, l22)
    area = signed_area(ax, ay, bx, by, cx, cy)
    if area <= 0.0:
        return 0.0
    det = m11 * m22 - m12 * m12
    s = (
        _quad_form(cx - bx, cy - by, m11, m12, m22)
        + _quad_form(ax - cx, ay - cy, m11, m12, m22)
        + _quad_form(bx - ax, by - ay, m11, m12, m22)
    )
    if s <= 0.0 or det <= 0.0:
        return 0.0
    return 4.0 * math.sqrt(3.0) * math.sqrt(det) * area / s


def incircle_metric(ax, ay, bx, by, cx, cy, dx, dy, m11, m12, m22):
    """In-circle predicate after mapping points by the metric square root.

    Positive when d lies inside the circumcircle of counter-clockwise
    (a, b, c) measured in the metric.
    """
    u11 = math.sqrt(m11)
    u12 = m12 / u11
    w = m22 - u12 * u12
    u22 = math.sqrt(w) if w > 0.0 else 0.0

    def mapped(x, y):
        return u11 * x + u12 * y, u22 * y

    axm, aym = mapped(ax - dx, ay - dy)
    bxm, bym = mapped(bx - dx, by - dy)
    cxm, cym = mapped(cx - dx, cy - dy)
    a2 = axm * axm + aym * aym
    b2 = bxm * bxm + bym * bym
    c2 = cxm * cxm + cym * cym
    return (
        axm * (bym * c2 - cym * b2)
        - aym * (bxm * c2 - cxm * b2)
        + a2 * (bxm * cym - cxm * bym)
    )


# ---------------------------------------------------------------------------
# Batched variants


def edge_lengths(coords, metrics, edges):
    """Metric lengths of edges (ne, 2) given per-vertex metrics (nv, 3)."""
    i = edges[:, 0]
    j = edges[:, 1]
    d = coords[j] - coords[i]
    ma = metrics[i]
    mb = metrics[j]
    qa = (
        d[:, 0] * (ma[:, 0] * d[:, 0] + ma[:, 1] * d[:, 1])
        + d[:, 1] * (ma[:, 1] * d[:, 0] + ma[:, 2] * d[:, 1])
    )
    qb = (
        d[:, 0] * (mb[:, 0] * d[:, 0] + mb[:, 1] * d[:, 1])
        + d[:, 1] * (mb[:, 1] * d[:, 0] + mb[:, 2] * d[:, 1])
    )
    la = np.sqrt(np.maximum(qa, 0.0))
    lb = np.sqrt(np.maximum(qb, 0.0))
    mean = 0.5 * (la + lb)
    near = np.abs(la - lb) < 1e-12 * np.maximum(la, lb)
    safe = (la > 0.0) & (lb > 0.0) & ~near
    out = np.where(near, la, mean)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(safe, (la - lb) / np.log(np.where(safe, la / lb, 2.0)), 0.0)
    out[safe] = ratio[safe]
    return out


def _sym2_apply_batch(f, fprime, packed):
    m11 = packed[:, 0]
    m12 = packed[:, 1]
    m22 = packed[:, 2]
    h = 0.5 * (m11 + m22)
    disc = np.hypot(0.5 * (m11 - m22), m12)
    small = disc <= _EIG_TOL * np.maximum(1.0, np.abs(h))
    lam1 = h + disc
    lam2 = h - disc
    denom = np.where(small, 1.0, lam1 - lam2)
    f1 = f(lam1)
    f2 = f(np.where(small, lam1, lam2))
    a = np.where(small, fprime(h), (f1 - f2) / denom)
    b = np.where(small, f(h) - fprime(h) * h, (lam1 * f2 - lam2 * f1) / denom)
    out = np.empty_like(packed)
    out[:, 0] = a * m11 + b
    out[:, 1] = a * m12
    out[:, 2] = a * m22 + b
    return out


def sym2_exp_batch(packed):
    return _sym2_apply_batch(np.exp, np.exp, np.asarray(packed, dtype=float))


def sym2_log_batch(packed):
    packed = np.asarray(packed, dtype=float)
    h = 0.5 * (packed[:, 0] + packed[:, 2])
    disc = np.hypot(0.5 * (packed[:, 0] - packed[:, 2]), packed[:, 1])
    if np.any(h - disc <= 0.0):
        raise ValueError("matrix is not positive definite")
    return _sym2_apply_batch(np.log, lambda x: 1.0 / x, packed)


def tri_quality(coords, logms, tris):
    """Per-triangle metric shape quality using the element-averaged (in log
    space) vertex metrics."""
    va = coords[tris[:, 0]]
    vb = coords[tris[:, 1]]
    vc = coords[tris[:, 2]]
    gl = (logms[tris[:, 0]] + logms[tris[:, 1]] + logms[tris[:, 2]]) / 3.0
    m = sym2_exp_batch(gl)
    area = 0.5 * (
        (vb[:, 0] - va[:, 0]) * (vc[:, 1] - va[:, 1])
        - (vb[:, 1] - va[:, 1]) * (vc[:, 0] - va[:, 0])
    )
    det = m[:, 0] * m[:, 2] - m[:, 1] ** 2
    s = np.zeros(len(tris))
    for p, q in ((vc, vb), (va, vc), (vb, va)):
        d = p - q
        s += (
            d[:, 0] * (m[:, 0] * d[:, 0] + m[:, 1] * d[:, 1])
            + d[:, 1] * (m[:, 1] * d[:, 0] + m[:, 2] * d[:, 1])
        )
    q = np.zeros(len(tris))
    ok = (area > 0.0) & (s > 0.0) & (det > 0.0)
    q[ok] = 4.0 * np.sqrt(3.0) * np.sqrt(det[ok]) * area[ok] / s[ok]
    return q
