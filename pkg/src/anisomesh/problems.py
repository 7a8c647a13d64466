"""Analytic test fields with exact gradients and Hessians.

The registry holds the three benchmark fields (a steep quarter-circle front,
a zigzag interior layer, and a ten-layer sum of sigmoids) plus generic
quadratics. Hessians are returned packed as (h11, h12, h22).
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit


class OutsideDomainError(ValueError):
    pass


_DOMAIN_TOL = 1e-9


class Problem:
    """Scalar field u on a rectangle with hand-derived derivatives.

    Subclasses implement ``_value``, ``_gradient`` and ``_hessian`` on
    (n, 2) point arrays; all are exact closed forms.
    """

    name: str = ""
    domain: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0)

    def _check(self, pts):
        x0, x1, y0, y1 = self.domain
        tol = _DOMAIN_TOL * max(x1 - x0, y1 - y0)
        if (
            pts[:, 0].min() < x0 - tol
            or pts[:, 0].max() > x1 + tol
            or pts[:, 1].min() < y0 - tol
            or pts[:, 1].max() > y1 + tol
        ):
            raise OutsideDomainError(
                f"point outside the closed domain of problem '{self.name}'"
            )

    def value(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        self._check(pts)
        return self._value(pts)

    def gradient(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        self._check(pts)
        return self._gradient(pts)

    def hessian(self, pts) -> np.ndarray:
        """Packed Hessians (n, 3)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        self._check(pts)
        return self._hessian(pts)

    def eval(self, point):
        """(value, gradient (2,), hessian (2, 2)) at a single point."""
        pts = np.atleast_2d(np.asarray(point, dtype=float))
        v = self.value(pts)[0]
        g = self.gradient(pts)[0]
        h = self._hessian(pts)[0]
        return float(v), g, np.array([[h[0], h[1]], [h[1], h[2]]])

    def feature_distance(self, pts) -> np.ndarray:
        """Distance to the sharp feature the field is built around."""
        raise NotImplementedError(f"problem '{self.name}' has no feature curve")


class QuadraticProblem(Problem):
    """u = x^T A x + b.x + c with symmetric A; Hessian is 2A everywhere."""

    name = "quadratic"

    def __init__(self, A=((1.0, 0.0), (0.0, 1.0)), b=(0.0, 0.0), c=0.0,
                 domain=(0.0, 1.0, 0.0, 1.0)):
        A = np.asarray(A, dtype=float)
        self.A = 0.5 * (A + A.T)
        self.b = np.asarray(b, dtype=float)
        self.c = float(c)
        self.domain = tuple(map(float, domain))

    def _value(self, pts):
        return np.einsum("ni,ij,nj->n", pts, self.A, pts) + pts @ self.b + self.c

    def _gradient(self, pts):
        return 2.0 * pts @ self.A + self.b

    def _hessian(self, pts):
        h = 2.0 * self.A
        out = np.empty((len(pts), 3))
        out[:] = (h[0, 0], h[0, 1], h[1, 1])
        return out


class CircleFrontProblem(Problem):
    """Sigmoid front of width ~1/steepness along the quarter circle r = r0."""

    name = "circle"
    domain = (0.1, 1.0, 0.1, 1.0)

    def __init__(self, steepness=200.0, r0=0.8):
        self.s = float(steepness)
        self.r0 = float(r0)

    def _parts(self, pts):
        r = np.hypot(pts[:, 0], pts[:, 1])
        w = expit(self.s * (r - self.r0))
        return r, w

    def _value(self, pts):
        return self._parts(pts)[1]

    def _gradient(self, pts):
        r, w = self._parts(pts)
        dr = self.s * w * (1.0 - w)
        return pts * (dr / r)[:, None]

    def _hessian(self, pts):
        r, w = self._parts(pts)
        dr = self.s * w * (1.0 - w)
        drr = self.s * self.s * w * (1.0 - w) * (1.0 - 2.0 * w)
        cx = pts[:, 0] / r
        cy = pts[:, 1] / r
        t = dr / r
        out = np.empty((len(pts), 3))
        out[:, 0] = drr * cx * cx + t * cy * cy
        out[:, 1] = (drr - t) * cx * cy
        out[:, 2] = drr * cy * cy + t * cx * cx
        return out

    def feature_distance(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.abs(np.hypot(pts[:, 0], pts[:, 1]) - self.r0)


class ZigzagProblem(Problem):
    """Cubic background plus a tanh layer along the curve sin(5y) = 2x."""

    name = "zigzag"
    domain = (-1.0, 1.0, -1.0, 1.0)

    def __init__(self, steepness=10.0):
        self.s = float(steepness)

    def _parts(self, pts):
        x = pts[:, 0]
        y = pts[:, 1]
        g = self.s * (np.sin(5.0 * y) - 2.0 * x)
        t = np.tanh(g)
        return x, y, g, t

    def _value(self, pts):
        x, y, g, t = self._parts(pts)
        return x * x * y + y**3 + t

    def _gradient(self, pts):
        x, y, g, t = self._parts(pts)
        sech2 = 1.0 - t * t
        gx = -2.0 * self.s
        gy = 5.0 * self.s * np.cos(5.0 * y)
        out = np.empty_like(pts)
        out[:, 0] = 2.0 * x * y + sech2 * gx
        out[:, 1] = x * x + 3.0 * y * y + sech2 * gy
        return out

    def _hessian(self, pts):
        x, y, g, t = self._parts(pts)
        sech2 = 1.0 - t * t
        dd = -2.0 * t * sech2
        gx = -2.0 * self.s
        gy = 5.0 * self.s * np.cos(5.0 * y)
        gyy = -25.0 * self.s * np.sin(5.0 * y)
        out = np.empty((len(pts), 3))
        out[:, 0] = 2.0 * y + dd * gx * gx
        out[:, 1] = 2.0 * x + dd * gx * gy
        out[:, 2] = 6.0 * y + dd * gy * gy + sech2 * gyy
        return out

    def feature_distance(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        ys = np.linspace(self.domain[2], self.domain[3], 4001)
        xs = 0.5 * np.sin(5.0 * ys)
        d2 = (pts[:, 0, None] - xs[None, :]) ** 2 + (
            pts[:, 1, None] - ys[None, :]
        ) ** 2
        return np.sqrt(d2.min(axis=1))


class TenLayerProblem(Problem):
    """Sum of ten sigmoids with layers on x+y = c_i and x-y = d_i."""

    name = "layers"
    domain = (-1.2, 1.2, -1.2, 1.2)
    offsets = (0.0, -0.6, 0.6, -1.2, 1.2)

    def __init__(self, epsilon=0.01):
        self.eps = float(epsilon)

    def _terms(self, s):
        # 1/(1 + exp(s / 2eps)) and its first two derivatives in s.
        w = expit(-s / (2.0 * self.eps))
        dw = -w * (1.0 - w) / (2.0 * self.eps)
        ddw = w * (1.0 - w) * (1.0 - 2.0 * w) / (4.0 * self.eps**2)
        return w, dw, ddw

    def _value(self, pts):
        x = pts[:, 0]
        y = pts[:, 1]
        out = np.zeros(len(pts))
        for c in self.offsets:
            out += self._terms(x + y - c)[0]
            out += self._terms(x - y - c)[0]
        return out

    def _gradient(self, pts):
        x = pts[:, 0]
        y = pts[:, 1]
        out = np.zeros_like(pts)
        for c in self.offsets:
            dw = self._terms(x + y - c)[1]
            out[:, 0] += dw
            out[:, 1] += dw
            dw = self._terms(x - y - c)[1]
            out[:, 0] += dw
            out[:, 1] -= dw
        return out

    def _hessian(self, pts):
        x = pts[:, 0]
        y = pts[:, 1]
        out = np.zeros((len(pts), 3))
        for c in self.offsets:
            ddw = self._terms(x + y - c)[2]
            out[:, 0] += ddw
            out[:, 1] += ddw
            out[:, 2] += ddw
            ddw = self._terms(x - y - c)[2]
            out[:, 0] += ddw
            out[:, 1] -= ddw
            out[:, 2] += ddw
        return out

    def feature_distance(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        x = pts[:, 0]
        y = pts[:, 1]
        d = np.full(len(pts), np.inf)
        for c in self.offsets:
            d = np.minimum(d, np.abs(x + y - c) / np.sqrt(2.0))
            d = np.minimum(d, np.abs(x - y - c) / np.sqrt(2.0))
        return d


_REGISTRY = {
    "circle": CircleFrontProblem,
    "zigzag": ZigzagProblem,
    "layers": TenLayerProblem,
    "quadratic": QuadraticProblem,
}


def get_problem(name: str, **params) -> Problem:
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown problem '{name}'; choices: {sorted(_REGISTRY)}"
        ) from None
    return cls(**params)


def hessian_analytic_field(problem: Problem, mesh) -> np.ndarray:
    """Packed analytic Hessians (nv, 3) sampled at the mesh vertices."""
    return problem.hessian(mesh.vertices)
