"""Regularized Hessians, monitor functions, and normalized metric fields.

Tensor fields are stored packed as (n, 3) rows (m11, m12, m22). Metric
interpolation is log-Euclidean throughout; in particular sqrt(det) of the
interpolated metric is the geometric interpolation of the vertex values of
sqrt(det), which makes the normalization integral cheap and exactly
consistent with the interpolation used elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .mesh import TriMesh
from .quadrature import triangle_rule

UNIT_ELEMENT_AREA = math.sqrt(3.0) / 4.0  # metric area of a unit-edge equilateral
VOLUME_RULE_DEGREE = 4


class MetricError(ValueError):
    pass


def _check_p(p) -> float:
    p = float(p)
    if not (p > 0.0):
        raise ValueError(f"invalid norm exponent p={p}; need p in (0, inf]")
    return p


def _as_packed(H) -> np.ndarray:
    H = np.asarray(H, dtype=float)
    if H.shape == (2, 2):
        return np.array([H[0, 0], 0.5 * (H[0, 1] + H[1, 0]), H[1, 1]])
    if H.shape == (3,):
        return H
    raise ValueError("expected a 2x2 symmetric matrix or packed (m11,m12,m22)")


def _as_matrix(packed) -> np.ndarray:
    m11, m12, m22 = packed
    return np.array([[m11, m12], [m12, m22]])


def _field_packed(arr) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 3 and arr.shape[1:] == (2, 2):
        return np.column_stack(
            [arr[:, 0, 0], 0.5 * (arr[:, 0, 1] + arr[:, 1, 0]), arr[:, 1, 1]]
        )
    if arr.ndim == 2 and arr.shape[1] == 3:
        return arr
    raise ValueError("expected (n, 2, 2) or packed (n, 3) tensor array")


def is_spd_packed(packed) -> np.ndarray:
    packed = np.atleast_2d(np.asarray(packed, dtype=float))
    det = packed[:, 0] * packed[:, 2] - packed[:, 1] ** 2
    return (packed[:, 0] > 0.0) & (det > 0.0)


def _abs_eig_batch(packed):
    """Spectral absolute value |H| = R |Lambda| R^T, packed, batched."""
    h = 0.5 * (packed[:, 0] + packed[:, 2])
    disc = np.hypot(0.5 * (packed[:, 0] - packed[:, 2]), packed[:, 1])
    lam1 = h + disc
    lam2 = h - disc
    small = disc <= 1e-14 * np.maximum(1.0, np.abs(h))
    denom = np.where(small, 1.0, lam1 - lam2)
    a = np.where(small, np.sign(h), (np.abs(lam1) - np.abs(lam2)) / denom)
    b = np.where(
        small,
        np.abs(h) - np.sign(h) * h,
        (lam1 * np.abs(lam2) - lam2 * np.abs(lam1)) / denom,
    )
    out = np.empty_like(packed)
    out[:, 0] = a * packed[:, 0] + b
    out[:, 1] = a * packed[:, 1]
    out[:, 2] = a * packed[:, 2] + b
    return out


def regularize_hessian(H, alpha: float):
    """alpha*I plus the spectral absolute value of H; SPD with eigenvalues
    at least alpha."""
    if not alpha > 0.0:
        raise MetricError("flooring parameter alpha must be positive")
    packed = _as_packed(H)[None, :]
    out = _abs_eig_batch(packed)[0]
    out[0] += alpha
    out[2] += alpha
    return _as_matrix(out)


def regularize_hessian_field(vertex_hessians, alpha: float) -> np.ndarray:
    if not alpha > 0.0:
        raise MetricError("flooring parameter alpha must be positive")
    out = _abs_eig_batch(_field_packed(vertex_hessians))
    out[:, 0] += alpha
    out[:, 2] += alpha
    return out


def spectral_norm_field(vertex_hessians) -> np.ndarray:
    packed = _field_packed(vertex_hessians)
    h = 0.5 * (packed[:, 0] + packed[:, 2])
    disc = np.hypot(0.5 * (packed[:, 0] - packed[:, 2]), packed[:, 1])
    return np.maximum(np.abs(h + disc), np.abs(h - disc))


def default_alpha(vertex_hessians) -> float:
    """Relative flooring: a hundredth of the median vertex curvature, which
    caps the metric aspect ratio at about 10 beyond the resolved range."""
    med = float(np.median(spectral_norm_field(vertex_hessians)))
    return max(1e-8, 0.01 * med)


def _monitor_exponents(m: int, p: float):
    if m not in (0, 1):
        raise ValueError("m must be 0 or 1")
    if math.isinf(p):
        return 0.0, float(m)
    denom = 2.0 + p * (2.0 - m)
    return -1.0 / denom, m * p / denom


def _monitor_scale(det, size, m, p):
    e_det, e_size = _monitor_exponents(m, p)
    scale = det**e_det if e_det != 0.0 else np.ones_like(det)
    if e_size != 0.0:
        scale = scale * size**e_size
    return scale


def monitor(Hcal, m: int, p) -> np.ndarray:
    """Monitor tensor det(H)^(-1/(2+p(2-m))) tr(H)^(mp/(2+p(2-m))) H for an
    SPD regularized Hessian; p = inf by its limit."""
    p = _check_p(p)
    packed = _as_packed(Hcal)
    if not is_spd_packed(packed)[0]:
        raise MetricError("monitor input must be symmetric positive definite")
    det = packed[0] * packed[2] - packed[1] ** 2
    tr = packed[0] + packed[2]
    return _as_matrix(_monitor_scale(det, tr, m, p) * packed)


def monitor_hr(Hcal, m: int, p) -> np.ndarray:
    """Huang-Russell variant: the trace factor replaced by the spectral
    norm. Identical to ``monitor`` for m = 0."""
    p = _check_p(p)
    packed = _as_packed(Hcal)
    if not is_spd_packed(packed)[0]:
        raise MetricError("monitor input must be symmetric positive definite")
    det = packed[0] * packed[2] - packed[1] ** 2
    nrm = spectral_norm_field(packed[None, :])[0]
    return _as_matrix(_monitor_scale(det, nrm, m, p) * packed)


def monitor_field(Hcal_packed, m: int, p, variant: str = "new") -> np.ndarray:
    p = _check_p(p)
    packed = _field_packed(Hcal_packed)
    if not np.all(is_spd_packed(packed)):
        raise MetricError("monitor input field must be SPD at every vertex")
    det = packed[:, 0] * packed[:, 2] - packed[:, 1] ** 2
    if variant == "new":
        size = packed[:, 0] + packed[:, 2]
    elif variant == "huang-russell":
        size = spectral_norm_field(packed)
    else:
        raise ValueError(f"unknown variant '{variant}'")
    return _monitor_scale(det, size, m, p)[:, None] * packed


@dataclass(frozen=True)
class MetricField:
    """Per-vertex SPD tensors aligned with a mesh, after normalization."""

    mesh: TriMesh
    tensors: np.ndarray  # (nv, 3) packed, the normalized theta * M
    theta: float
    sigma: float
    m: int
    p: float
    variant: str
    alpha: float
    _logs: np.ndarray = field(repr=False, default=None, compare=False)

    def log_tensors(self) -> np.ndarray:
        logs = self._logs
        if logs is None:
            logs = kernels.sym2_log_batch(self.tensors)
            logs.setflags(write=False)
            object.__setattr__(self, "_logs", logs)
        return logs

    def with_mesh(self, mesh: TriMesh, tensors: np.ndarray) -> "MetricField":
        tensors = np.ascontiguousarray(tensors, dtype=float)
        tensors.setflags(write=False)
        return MetricField(
            mesh, tensors, self.theta, self.sigma, self.m, self.p,
            self.variant, self.alpha,
        )


def _volume_integrals(mesh: TriMesh, tensors: np.ndarray) -> np.ndarray:
    """Per-element integral of sqrt(det) of the log-Euclidean interpolant."""
    det = tensors[:, 0] * tensors[:, 2] - tensors[:, 1] ** 2
    if np.any(det <= 0.0):
        raise MetricError("tensor field is not SPD everywhere")
    half_logdet = 0.5 * np.log(det)
    rule = triangle_rule(VOLUME_RULE_DEGREE)
    s = half_logdet[mesh.triangles]  # (nt, 3)
    vals = np.exp(s @ rule.bary.T)  # (nt, nq)
    return mesh.areas() * (vals @ rule.weights)


def build_metric(
    mesh: TriMesh,
    vertex_hessians,
    m: int,
    p,
    n_target,
    *,
    alpha: float | None = None,
    variant: str = "new",
) -> MetricField:
    """Regularize, apply the monitor map, and normalize so the total metric
    volume is (sqrt(3)/4) * n_target, the area of n_target unit-edge
    equilateral elements."""
    p = _check_p(p)
    if mesh.num_triangles == 0:
        raise MetricError("empty mesh")
    hv = _field_packed(vertex_hessians)
    if len(hv) != mesh.num_vertices:
        raise MetricError("need one Hessian per mesh vertex")
    if not n_target >= 1:
        raise MetricError("n_target must be at least 1")
    if alpha is None:
        alpha = default_alpha(hv)
    mon = monitor_field(regularize_hessian_field(hv, alpha), m, p, variant)
    sigma = float(_volume_integrals(mesh, mon).sum())
    theta = UNIT_ELEMENT_AREA * float(n_target) / sigma
    tensors = np.ascontiguousarray(theta * mon)
    tensors.setflags(write=False)
    return MetricField(mesh, tensors, theta, sigma, m, p, variant, float(alpha))


def metric_interpolate(M_a, M_b, t: float) -> np.ndarray:
    """Log-Euclidean interpolation between two SPD tensors; SPD for all
    t in [0, 1]."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    pa = _as_packed(M_a)
    pb = _as_packed(M_b)
    if not (is_spd_packed(pa)[0] and is_spd_packed(pb)[0]):
        raise MetricError("metric_interpolate needs SPD inputs")
    la = kernels.sym2_log_one(*pa)
    lb = kernels.sym2_log_one(*pb)
    mix = tuple((1.0 - t) * a + t * b for a, b in zip(la, lb))
    return _as_matrix(kernels.sym2_exp_one(*mix))


def metric_edge_length(field: MetricField, v_from: int, v_to: int) -> float:
    """Length of the straight edge under the geometrically varying metric."""
    nv = field.mesh.num_vertices
    if not (0 <= v_from < nv and 0 <= v_to < nv):
        raise IndexError("vertex index out of range")
    d = field.mesh.vertices[v_to] - field.mesh.vertices[v_from]
    ma = field.tensors[v_from]
    mb = field.tensors[v_to]
    return kernels.metric_length_one(
        d[0], d[1], ma[0], ma[1], ma[2], mb[0], mb[1], mb[2]
    )


def metric_volume(field: MetricField, triangle_id: int) -> float:
    if not 0 <= triangle_id < field.mesh.num_triangles:
        raise IndexError(f"triangle id {triangle_id} out of range")
    return float(metric_volumes(field)[triangle_id])


def metric_volumes(field: MetricField) -> np.ndarray:
    return _volume_integrals(field.mesh, field.tensors)
