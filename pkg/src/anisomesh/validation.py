"""Randomized arbitration and bound suites.

Shared by the ``validate`` CLI subcommand and the acceptance tests: the
element formulas against the quadrature oracle, the max-norm closed form
against the exact per-element maximum, the norm-equivalence sandwiches, and
the metric-algebra identities.
"""

from __future__ import annotations

import math

import numpy as np

from .estimates import (
    h1_error_sq,
    l2_error_sq,
    linf_error_ds,
    lp_sandwich_factors,
    norm_equiv_constants,
    vector_norm_equiv_bounds,
)
from .mesh import single_triangle_mesh
from .metric import monitor, monitor_field, monitor_hr, regularize_hessian
from .norms import (
    element_linf_error_quadratic,
    interp_error_lp,
    interp_grad_error_lp,
    quadratic_lp_norm,
    quadratic_min_on_triangle,
)
from .problems import QuadraticProblem

_REF_TRI = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])


def random_triangle(rng, max_aspect=100.0):
    """Random rotation and anisotropic scaling of an equilateral triangle."""
    aspect = math.exp(rng.uniform(0.0, math.log(max_aspect)))
    scale = math.exp(rng.uniform(math.log(0.5), math.log(2.0)))
    theta = rng.uniform(0.0, 2.0 * math.pi)
    rot = np.array(
        [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]
    )
    stretch = np.diag([scale, scale / aspect])
    return _REF_TRI @ stretch @ rot.T + rng.uniform(-1.0, 1.0, size=2)


def random_sym(rng, lim=5.0):
    h11, h12, h22 = rng.uniform(-lim, lim, size=3)
    return np.array([[h11, h12], [h12, h22]])


def _problem_on(tri, H, b, c):
    lo = tri.min(axis=0) - 1.0
    hi = tri.max(axis=0) + 1.0
    return QuadraticProblem(
        A=0.5 * H, b=b, c=c, domain=(lo[0], hi[0], lo[1], hi[1])
    )


def arbitration_suite(n_cases=1000, seed=0, max_aspect=100.0):
    """Compare the L2 and H1 closed forms with the quadrature oracle on
    random (triangle, Hessian) pairs; returns the max relative errors."""
    rng = np.random.default_rng(seed)
    worst_l2 = worst_h1 = 0.0
    for _ in range(n_cases):
        tri = random_triangle(rng, max_aspect)
        H = random_sym(rng)
        mesh = single_triangle_mesh(*tri)
        geom = mesh.element_geometry(0)
        prob = _problem_on(tri, H, rng.uniform(-2, 2, size=2), rng.uniform(-2, 2))
        oracle_l2 = float(interp_error_lp(mesh, prob, 2).per_element[0])
        oracle_h1 = float(interp_grad_error_lp(mesh, prob, 2).per_element[0])
        f_l2 = l2_error_sq(geom, H)
        f_h1 = h1_error_sq(geom, H)
        den_l2 = max(abs(oracle_l2), abs(f_l2), 1e-30)
        den_h1 = max(abs(oracle_h1), abs(f_h1), 1e-30)
        worst_l2 = max(worst_l2, abs(f_l2 - oracle_l2) / den_l2)
        worst_h1 = max(worst_h1, abs(f_h1 - oracle_h1) / den_h1)
    return {"cases": n_cases, "max_rel_l2": worst_l2, "max_rel_h1": worst_h1}


def _acute_metric_triangle(rng, lam1, lam2, max_aspect=10.0):
    """Triangle that is acute after stretching by sqrt(lam1), sqrt(lam2):
    draw a mildly perturbed equilateral in stretched coordinates and map
    back."""
    while True:
        tri_hat = _REF_TRI + rng.uniform(-0.18, 0.18, size=(3, 2))
        tri_hat *= math.exp(rng.uniform(math.log(0.5), math.log(2.0)))
        ell = np.roll(tri_hat, -2, axis=0) - np.roll(tri_hat, -1, axis=0)
        dots = [ell[(i + 1) % 3] @ ell[(i + 2) % 3] for i in range(3)]
        if max(dots) < -1e-3:
            break
    return tri_hat / np.sqrt([lam1, lam2])


def maxnorm_suite(n_cases=500, seed=0):
    """Closed-form stretched-circumradius value vs the exact element max on
    acute-in-metric triangles; right triangles must flag not-applicable."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    applicable_all = True
    for _ in range(n_cases):
        lam1 = math.exp(rng.uniform(math.log(0.05), math.log(20.0)))
        lam2 = math.exp(rng.uniform(math.log(0.05), math.log(20.0)))
        tri = _acute_metric_triangle(rng, lam1, lam2)
        mesh = single_triangle_mesh(*tri)
        geom = mesh.element_geometry(0)
        value, applicable = linf_error_ds(geom, lam1, lam2)
        applicable_all &= applicable
        exact = element_linf_error_quadratic(
            geom, np.diag([2.0 * lam1, 2.0 * lam2])
        )
        worst = max(worst, abs(value - exact) / max(exact, 1e-30))
    right_flags_ok = True
    for _ in range(50):
        lam1 = math.exp(rng.uniform(math.log(0.05), math.log(20.0)))
        lam2 = math.exp(rng.uniform(math.log(0.05), math.log(20.0)))
        a, b = rng.uniform(0.3, 2.0, size=2)
        tri_hat = np.array([[0.0, 0.0], [a, 0.0], [0.0, b]])
        tri = tri_hat / np.sqrt([lam1, lam2])
        geom = single_triangle_mesh(*tri).element_geometry(0)
        _, applicable = linf_error_ds(geom, lam1, lam2)
        right_flags_ok &= not applicable
    return {
        "cases": n_cases,
        "max_rel": worst,
        "all_applicable": applicable_all,
        "right_triangles_flagged": right_flags_ok,
    }


def _random_nonneg_quadratic(rng, tri):
    """Random quadratic that is non-negative on the triangle; half of the
    draws touch zero inside."""
    A = random_sym(rng, 2.0)
    b = rng.uniform(-2.0, 2.0, size=2)
    c = rng.uniform(-2.0, 2.0)
    vmin = quadratic_min_on_triangle(tri, A, b, c)
    lift = 0.0 if rng.uniform() < 0.5 else rng.uniform(0.1, 1.0)
    return A, b, c - vmin + lift


def lemma_bounds_suite(n_quadratics=200, seed=0,
                       ps=(0.5, 1.0, 1.5, 2.0, 4.0, 10.0, math.inf),
                       slack=1e-7):
    """Counts violations of the polynomial-norm sandwich, the Lp error
    sandwich, and the vector-norm bracket."""
    rng = np.random.default_rng(seed)
    violations = 0
    checks = 0
    for _ in range(n_quadratics):
        tri = random_triangle(rng, max_aspect=20.0)
        area = single_triangle_mesh(*tri).element_geometry(0).area
        A, b, c = _random_nonneg_quadratic(rng, tri)
        norm1 = quadratic_lp_norm(tri, A, b, c, 1.0)
        for p in ps:
            consts = norm_equiv_constants(p)
            normp = quadratic_lp_norm(tri, A, b, c, p)
            if math.isinf(p):
                lower = 1.0 * area ** (0.0 - 1.0) * norm1
                upper = consts.c_p * area ** (0.0 - 1.0) * norm1
            else:
                lower = consts.c_inv_p ** (-1.0 / p) * area ** (1.0 / p - 1.0) * norm1
                upper = consts.c_p * area ** (1.0 / p - 1.0) * norm1
            checks += 1
            if not (
                lower * (1.0 - slack) <= normp <= upper * (1.0 + slack)
            ):
                violations += 1
    # Lp interpolation-error sandwich on single-signed errors (definite H).
    for _ in range(n_quadratics // 2):
        tri = random_triangle(rng, max_aspect=20.0)
        lam = rng.uniform(0.2, 5.0, size=2)
        sign = 1.0 if rng.uniform() < 0.5 else -1.0
        H = sign * np.diag(lam)
        mesh = single_triangle_mesh(*tri)
        geom = mesh.element_geometry(0)
        prob = _problem_on(tri, H, np.zeros(2), 0.0)
        e2 = math.sqrt(float(interp_error_lp(mesh, prob, 2).per_element[0]))
        for p in ps:
            lo, hi = lp_sandwich_factors(p)
            expo = 0.0 if math.isinf(p) else 1.0 / p
            mid = geom.area ** (expo - 0.5) * e2
            ep = interp_error_lp(mesh, prob, p).value
            checks += 1
            if not (lo * mid * (1 - slack) <= ep <= hi * mid * (1 + slack)):
                violations += 1
    # Vector bracket for positive d-vectors.
    for d in (2, 3, 5):
        for p in (0.5, 1.0, 3.0, 10.0):
            lo, hi = vector_norm_equiv_bounds(p, d)
            for _ in range(50):
                a = rng.uniform(0.01, 10.0, size=d)
                l2 = float(np.sqrt((a**2).sum()))
                lp = float((a**p).sum() ** (1.0 / p))
                checks += 1
                if not (lo * l2 * (1 - slack) <= lp <= hi * l2 * (1 + slack)):
                    violations += 1
    return {"checks": checks, "violations": violations}


def metric_algebra_suite(n_cases=1000, seed=0):
    """Rotation equivariance, scaling laws, p -> inf continuity, SPD
    closure and the m = 0 variant identity on random SPD tensors."""
    rng = np.random.default_rng(seed)
    worst = {
        "rotation": 0.0,
        "scaling": 0.0,
        "p_inf": 0.0,
        "variant_m0": 0.0,
    }
    spd_ok = True
    for _ in range(n_cases):
        lam1 = math.exp(rng.uniform(math.log(1e-3), math.log(1e3)))
        lam2 = lam1 * math.exp(rng.uniform(0.0, math.log(1e3)))
        theta = rng.uniform(0.0, math.pi)
        ct, st = math.cos(theta), math.sin(theta)
        R = np.array([[ct, -st], [st, ct]])
        Hcal = R @ np.diag([lam1, lam2]) @ R.T
        m = int(rng.integers(0, 2))
        p = float(rng.choice([0.5, 1.0, 2.0, 4.0, 10.0]))
        out = monitor(Hcal, m, p)
        ev = np.linalg.eigvalsh(out)
        spd_ok &= bool(ev[0] > 0.0)
        rotated = monitor(R.T @ Hcal @ R, m, p)
        diff = np.abs(R.T @ out @ R - rotated).max() / max(np.abs(out).max(), 1e-30)
        worst["rotation"] = max(worst["rotation"], diff)
        for cc in (2.0, 10.0):
            expo = (p / (p + 1.0)) if m == 0 else (-2.0 / (p + 2.0) + p / (p + 2.0) + 1.0)
            scaled = monitor(cc * Hcal, m, p)
            diff = np.abs(scaled - cc**expo * out).max() / max(
                np.abs(scaled).max(), 1e-30
            )
            worst["scaling"] = max(worst["scaling"], diff)
        big = monitor(Hcal, m, 1e6)
        lim = monitor(Hcal, m, math.inf)
        worst["p_inf"] = max(
            worst["p_inf"], np.abs(big - lim).max() / max(np.abs(lim).max(), 1e-30)
        )
        m0_new = monitor(Hcal, 0, p)
        m0_hr = monitor_hr(Hcal, 0, p)
        worst["variant_m0"] = max(
            worst["variant_m0"],
            np.abs(m0_new - m0_hr).max() / max(np.abs(m0_new).max(), 1e-30),
        )
    # Regularization must floor the eigenvalues of indefinite input.
    for _ in range(100):
        H = random_sym(rng, 10.0)
        alpha = math.exp(rng.uniform(math.log(1e-6), math.log(1.0)))
        ev = np.linalg.eigvalsh(regularize_hessian(H, alpha))
        spd_ok &= bool(ev[0] >= alpha * (1.0 - 1e-12))
    # Field path consistency with the single-tensor path.
    hs = np.column_stack(
        [rng.uniform(0.1, 10.0, 50), rng.uniform(-1, 1, 50), rng.uniform(0.1, 10.0, 50)]
    )
    hs[:, 1] *= np.sqrt(hs[:, 0] * hs[:, 2]) * 0.9
    fld = monitor_field(hs, 1, 2.0)
    for i in range(len(hs)):
        one = monitor(np.array([[hs[i, 0], hs[i, 1]], [hs[i, 1], hs[i, 2]]]), 1, 2.0)
        diff = abs(fld[i, 0] - one[0, 0]) + abs(fld[i, 1] - one[0, 1])
        worst["rotation"] = max(worst["rotation"], diff / max(abs(one[0, 0]), 1e-30))
    return {"cases": n_cases, "spd_closed": spd_ok, **worst}
