"""Gauss rules on the unit interval and on the reference triangle.

The reference triangle has vertices (0, 0), (1, 0), (0, 1).  Triangle rules
are collapsed (Duffy) tensor products of Gauss-Legendre and Gauss-Jacobi
rules, so a rule with ``n`` points per direction integrates polynomials of
total degree ``2n - 1`` exactly.
"""
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi


@lru_cache(maxsize=None)
def gauss_line(n):
    """Gauss-Legendre rule with ``n`` points on [0, 1].

    Returns
    -------
    points : (n,) ndarray
    weights : (n,) ndarray
        Weights sum to 1.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def gauss_triangle(n):
    """Collapsed Gauss rule with ``n * n`` points on the reference triangle.

    Exact for polynomials of total degree ``2n - 1``.  Weights sum to 1/2.
    """
    # Jacobi weight (1 - s)^1 absorbs the Duffy Jacobian
    s, ws = roots_jacobi(n, 1.0, 0.0)
    s = 0.5 * (s + 1.0)
    ws = 0.25 * ws
    r, wr = gauss_line(n)
    S, R = np.meshgrid(s, r, indexing="ij")
    x = S
    y = R * (1.0 - S)
    w = np.outer(ws, wr)
    pts = np.column_stack([x.ravel(), y.ravel()])
    return pts, w.ravel()


def triangle_rule_for_degree(degree):
    """Smallest collapsed rule exact up to ``degree``."""
    return gauss_triangle(max(1, (degree + 2) // 2))


def line_rule_for_degree(degree):
    """Smallest Gauss-Legendre rule exact up to ``degree``."""
    return gauss_line(max(1, (degree + 2) // 2))
