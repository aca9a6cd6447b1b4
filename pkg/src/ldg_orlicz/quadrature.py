"""Gauss rules on the reference triangle and the unit interval.

The triangle rules are collapsed (Stroud conical) products of a
Gauss-Jacobi rule and a Gauss-Legendre rule. All nodes are strictly
interior, which matters because the manufactured solution has a gradient
singularity at a mesh vertex.
"""
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import ConfigurationError

MAX_ORDER = 60


def _check_order(order):
    if int(order) != order or order < 1 or order > MAX_ORDER:
        raise ConfigurationError(f"unsupported quadrature order {order!r}")
    return int(order)


@lru_cache(maxsize=None)
def line_rule(order):
    """Gauss-Legendre rule on (0, 1) exact for degree ``order``.

    Returns
    -------
    points : (m,) array
    weights : (m,) array, summing to 1
    """
    order = _check_order(order)
    m = order // 2 + 1
    x, w = roots_legendre(m)
    return (x + 1.0) / 2.0, w / 2.0


@lru_cache(maxsize=None)
def triangle_rule(order):
    """Rule on the reference triangle {x, y > 0, x + y < 1}.

    Exact for polynomials of total degree ``order``. Weights sum to 1/2.
    """
    order = _check_order(order)
    m = order // 2 + 1
    # (1 - xi) weight absorbs the Jacobian of the collapse y = eta (1 - xi)
    xj, wj = roots_jacobi(m, 1.0, 0.0)
    xi = (xj + 1.0) / 2.0
    wxi = wj / 4.0
    eta, weta = line_rule(2 * m - 1)
    X, E = np.meshgrid(xi, eta, indexing="ij")
    pts = np.column_stack([X.ravel(), (E * (1.0 - X)).ravel()])
    wts = np.outer(wxi, weta).ravel()
    return pts, wts


def map_to_triangle(vertices, ref_points):
    """Affine image of reference points in the triangle ``vertices`` (3, 2)."""
    v = np.asarray(vertices, dtype=float)
    B = np.column_stack([v[1] - v[0], v[2] - v[0]])
    return v[0] + ref_points @ B.T


def cell_quadrature(vertices, order):
    """Physical points and weights for one triangle."""
    ref, w = triangle_rule(order)
    v = np.asarray(vertices, dtype=float)
    det = abs(np.linalg.det(np.column_stack([v[1] - v[0], v[2] - v[0]])))
    return map_to_triangle(v, ref), w * det


def face_quadrature(endpoints, order):
    """Physical points and weights on the segment ``endpoints`` (2, 2)."""
    s, w = line_rule(order)
    a, b = np.asarray(endpoints, dtype=float)
    return a + s[:, None] * (b - a), w * np.linalg.norm(b - a)
