import math

import numpy as np
import pytest

from anisomesh.quadrature import physical_points, triangle_rule


def exact_monomial(a, b):
    # integral of x^a y^b over the reference triangle
    return (
        math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)
    )


@pytest.mark.parametrize("degree", [2, 4, 8, 12])
def test_monomial_exactness(degree):
    rule = triangle_rule(degree)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)
    x = rule.bary[:, 1]
    y = rule.bary[:, 2]
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            approx = 0.5 * float((x**a * y**b) @ rule.weights)
            assert approx == pytest.approx(exact_monomial(a, b), abs=1e-13)


def test_points_inside_triangle():
    rule = triangle_rule(8)
    assert rule.bary.min() >= 0.0
    assert np.allclose(rule.bary.sum(axis=1), 1.0)


def test_physical_points_mapping():
    rule = triangle_rule(2)
    tri = np.array([[[1.0, 1.0], [3.0, 1.0], [1.0, 2.0]]])
    pts = physical_points(rule, tri)
    assert pts.shape == (1, rule.num_points, 2)
    assert pts[0, :, 0].min() >= 1.0
    assert pts[0, :, 1].max() <= 2.0


def test_bad_degree():
    with pytest.raises(ValueError):
        triangle_rule(0)
