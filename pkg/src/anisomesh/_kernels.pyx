# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; mirrors anisomesh._kernels_py exactly."""

from libc.math cimport exp, fabs, hypot, log, sqrt

import numpy as np

IMPLEMENTATION = "cython"

cdef double _EIG_TOL = 1e-14


cpdef double signed_area(double ax, double ay, double bx, double by,
                         double cx, double cy):
    return 0.5 * ((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))


cdef inline double _quad_form(double dx, double dy, double m11, double m12,
                              double m22) nogil:
    return dx * (m11 * dx + m12 * dy) + dy * (m12 * dx + m22 * dy)


cpdef double metric_length_one(double dx, double dy, double a11, double a12,
                               double a22, double b11, double b12, double b22):
    cdef double qa = _quad_form(dx, dy, a11, a12, a22)
    cdef double qb = _quad_form(dx, dy, b11, b12, b22)
    cdef double la = sqrt(qa) if qa > 0.0 else 0.0
    cdef double lb = sqrt(qb) if qb > 0.0 else 0.0
    if la <= 0.0 or lb <= 0.0:
        return 0.5 * (la + lb)
    if fabs(la - lb) < 1e-12 * la:
        return la
    return (la - lb) / log(la / lb)


cdef inline void _exp_coeffs(double m11, double m12, double m22,
                             double *a, double *b) nogil:
    cdef double h = 0.5 * (m11 + m22)
    cdef double disc = hypot(0.5 * (m11 - m22), m12)
    cdef double lam1, lam2, f1, f2, fh
    if disc <= _EIG_TOL * (1.0 if fabs(h) < 1.0 else fabs(h)):
        fh = exp(h)
        a[0] = fh
        b[0] = fh - fh * h
    else:
        lam1 = h + disc
        lam2 = h - disc
        f1 = exp(lam1)
        f2 = exp(lam2)
        a[0] = (f1 - f2) / (lam1 - lam2)
        b[0] = (lam1 * f2 - lam2 * f1) / (lam1 - lam2)


cpdef tuple sym2_exp_one(double l11, double l12, double l22):
    cdef double a, b
    _exp_coeffs(l11, l12, l22, &a, &b)
    return (a * l11 + b, a * l12, a * l22 + b)


cpdef tuple sym2_log_one(double m11, double m12, double m22):
    cdef double h = 0.5 * (m11 + m22)
    cdef double disc = hypot(0.5 * (m11 - m22), m12)
    cdef double lam1, lam2, f1, f2, a, b
    if h - disc <= 0.0:
        raise ValueError("matrix is not positive definite")
    if disc <= _EIG_TOL * (1.0 if fabs(h) < 1.0 else fabs(h)):
        a = 1.0 / h
        b = log(h) - 1.0
    else:
        lam1 = h + disc
        lam2 = h - disc
        f1 = log(lam1)
        f2 = log(lam2)
        a = (f1 - f2) / (lam1 - lam2)
        b = (lam1 * f2 - lam2 * f1) / (lam1 - lam2)
    return (a * m11 + b, a * m12, a * m22 + b)


cdef double _quality(double ax, double ay, double bx, double by,
                     double cx, double cy, double l11, double l12,
                     double l22) nogil:
    cdef double a, b, m11, m12, m22, area, det, s
    _exp_coeffs(l11, l12, l22, &a, &b)
    m11 = a * l11 + b
    m12 = a * l12
    m22 = a * l22 + b
    area = 0.5 * ((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))
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
    return 4.0 * sqrt(3.0) * sqrt(det) * area / s


cpdef double quality_one(double ax, double ay, double bx, double by,
                         double cx, double cy, double l11, double l12,
                         double l22):
    return _quality(ax, ay, bx, by, cx, cy, l11, l12, l22)


cpdef double incircle_metric(double ax, double ay, double bx, double by,
                             double cx, double cy, double dx, double dy,
                             double m11, double m12, double m22):
    cdef double u11 = sqrt(m11)
    cdef double u12 = m12 / u11
    cdef double w = m22 - u12 * u12
    cdef double u22 = sqrt(w) if w > 0.0 else 0.0
    cdef double axm = u11 * (ax - dx) + u12 * (ay - dy)
    cdef double aym = u22 * (ay - dy)
    cdef double bxm = u11 * (bx - dx) + u12 * (by - dy)
    cdef double bym = u22 * (by - dy)
    cdef double cxm = u11 * (cx - dx) + u12 * (cy - dy)
    cdef double cym = u22 * (cy - dy)
    cdef double a2 = axm * axm + aym * aym
    cdef double b2 = bxm * bxm + bym * bym
    cdef double c2 = cxm * cxm + cym * cym
    return (
        axm * (bym * c2 - cym * b2)
        - aym * (bxm * c2 - cxm * b2)
        + a2 * (bxm * cym - cxm * bym)
    )


def edge_lengths(const double[:, ::1] coords, const double[:, ::1] metrics,
                 const long[:, ::1] edges):
    cdef Py_ssize_t n = edges.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t k, i, j
    cdef double dx, dy
    with nogil:
        for k in range(n):
            i = edges[k, 0]
            j = edges[k, 1]
            dx = coords[j, 0] - coords[i, 0]
            dy = coords[j, 1] - coords[i, 1]
            out[k] = _metric_length(dx, dy,
                                    metrics[i, 0], metrics[i, 1], metrics[i, 2],
                                    metrics[j, 0], metrics[j, 1], metrics[j, 2])
    return out_arr


cdef double _metric_length(double dx, double dy, double a11, double a12,
                           double a22, double b11, double b12,
                           double b22) nogil:
    cdef double qa = _quad_form(dx, dy, a11, a12, a22)
    cdef double qb = _quad_form(dx, dy, b11, b12, b22)
    cdef double la = sqrt(qa) if qa > 0.0 else 0.0
    cdef double lb = sqrt(qb) if qb > 0.0 else 0.0
    if la <= 0.0 or lb <= 0.0:
        return 0.5 * (la + lb)
    if fabs(la - lb) < 1e-12 * la:
        return la
    return (la - lb) / log(la / lb)


def sym2_exp_batch(packed_in):
    packed_arr = np.ascontiguousarray(packed_in, dtype=np.float64)
    cdef const double[:, ::1] packed = packed_arr
    cdef Py_ssize_t n = packed.shape[0]
    out_arr = np.empty((n, 3), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t k
    cdef double a, b
    with nogil:
        for k in range(n):
            _exp_coeffs(packed[k, 0], packed[k, 1], packed[k, 2], &a, &b)
            out[k, 0] = a * packed[k, 0] + b
            out[k, 1] = a * packed[k, 1]
            out[k, 2] = a * packed[k, 2] + b
    return out_arr


def sym2_log_batch(packed_in):
    packed_arr = np.ascontiguousarray(packed_in, dtype=np.float64)
    cdef const double[:, ::1] packed = packed_arr
    cdef Py_ssize_t n = packed.shape[0]
    out_arr = np.empty((n, 3), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t k
    cdef double h, disc, lam1, lam2, f1, f2, a, b
    cdef int bad = 0
    with nogil:
        for k in range(n):
            h = 0.5 * (packed[k, 0] + packed[k, 2])
            disc = hypot(0.5 * (packed[k, 0] - packed[k, 2]), packed[k, 1])
            if h - disc <= 0.0:
                bad = 1
                break
            if disc <= _EIG_TOL * (1.0 if fabs(h) < 1.0 else fabs(h)):
                a = 1.0 / h
                b = log(h) - 1.0
            else:
                lam1 = h + disc
                lam2 = h - disc
                f1 = log(lam1)
                f2 = log(lam2)
                a = (f1 - f2) / (lam1 - lam2)
                b = (lam1 * f2 - lam2 * f1) / (lam1 - lam2)
            out[k, 0] = a * packed[k, 0] + b
            out[k, 1] = a * packed[k, 1]
            out[k, 2] = a * packed[k, 2] + b
    if bad:
        raise ValueError("matrix is not positive definite")
    return out_arr


def tri_quality(const double[:, ::1] coords, const double[:, ::1] logms,
                const long[:, ::1] tris):
    cdef Py_ssize_t n = tris.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t k, a, b, c
    cdef double g11, g12, g22
    with nogil:
        for k in range(n):
            a = tris[k, 0]
            b = tris[k, 1]
            c = tris[k, 2]
            g11 = (logms[a, 0] + logms[b, 0] + logms[c, 0]) / 3.0
            g12 = (logms[a, 1] + logms[b, 1] + logms[c, 1]) / 3.0
            g22 = (logms[a, 2] + logms[b, 2] + logms[c, 2]) / 3.0
            out[k] = _quality(coords[a, 0], coords[a, 1],
                              coords[b, 0], coords[b, 1],
                              coords[c, 0], coords[c, 1], g11, g12, g22)
    return out_arr
