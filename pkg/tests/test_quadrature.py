from math import factorial

import numpy as np
import pytest

from ldg_orlicz.errors import ConfigurationError
from ldg_orlicz.quadrature import cell_quadrature, face_quadrature, line_rule, triangle_rule


def reference_monomial(a, b):
    return factorial(a) * factorial(b) / factorial(a + b + 2)


@pytest.mark.parametrize("order", [1, 2, 5, 8, 13, 20])
def test_triangle_rule_exact_up_to_order(order):
    x, w = triangle_rule(order)
    for a in range(order + 1):
        for b in range(order + 1 - a):
            got = np.sum(w * x[:, 0] ** a * x[:, 1] ** b)
            assert got == pytest.approx(reference_monomial(a, b), rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("order", [1, 4, 9, 30])
def test_triangle_nodes_strictly_inside(order):
    x, w = triangle_rule(order)
    assert np.all(x > 0) and np.all(x.sum(axis=1) < 1)
    assert np.all(w > 0)
    assert w.sum() == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("order", [1, 3, 6, 11])
def test_line_rule_exact(order):
    s, w = line_rule(order)
    for k in range(order + 1):
        assert np.sum(w * s**k) == pytest.approx(1.0 / (k + 1), rel=1e-13)


def test_physical_rules_measure():
    v = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 3.0]])
    x, w = cell_quadrature(v, 4)
    assert w.sum() == pytest.approx(3.0)
    # centroid from first moments
    assert np.sum(w[:, None] * x, axis=0) / w.sum() == pytest.approx(v.mean(axis=0))
    y, wf = face_quadrature(v[[1, 2]], 3)
    assert wf.sum() == pytest.approx(np.sqrt(13.0))


@pytest.mark.parametrize("bad", [0, -1, 2.5, 1000])
def test_invalid_order(bad):
    with pytest.raises(ConfigurationError):
        triangle_rule(bad)
