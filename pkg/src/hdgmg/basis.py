"""Polynomial bases on the reference triangle and on the unit interval."""
from functools import lru_cache

import numpy as np

from .quadrature import triangle_rule_for_degree

REF_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def monomial_exponents(degree, homogeneous=False):
    """Exponents (a, b) of x^a y^b ordered by total degree."""
    degs = [degree] if homogeneous else range(degree + 1)
    return np.array([(k - b, b) for k in degs for b in range(k + 1)], dtype=np.int64).reshape(-1, 2)


def eval_monomials(pts, exps):
    pts = np.asarray(pts, dtype=float)
    x, y = pts[..., 0, None], pts[..., 1, None]
    return x ** exps[:, 0] * y ** exps[:, 1]


def eval_monomial_grads(pts, exps):
    pts = np.asarray(pts, dtype=float)
    x, y = pts[..., 0, None], pts[..., 1, None]
    a, b = exps[:, 0], exps[:, 1]
    dx = np.where(a > 0, a * x ** np.maximum(a - 1, 0), 0.0) * y ** b
    dy = x ** a * np.where(b > 0, b * y ** np.maximum(b - 1, 0), 0.0)
    return np.stack([dx, dy], axis=-1)


def _orthonormalize(gram):
    # coefficients C with C^T G C = identity
    L = np.linalg.cholesky(gram)
    return np.linalg.inv(L).T


class ScalarBasis:
    """L2-orthonormal basis of P_degree on the reference triangle."""

    def __init__(self, degree):
        self.degree = degree
        self.exps = monomial_exponents(degree)
        pts, w = triangle_rule_for_degree(2 * degree)
        V = eval_monomials(pts, self.exps)
        self.coef = _orthonormalize(V.T @ (w[:, None] * V))

    @property
    def dim(self):
        return self.coef.shape[1]

    def values(self, pts):
        return eval_monomials(pts, self.exps) @ self.coef

    def grads(self, pts):
        return np.einsum("...mk,mn->...nk", eval_monomial_grads(pts, self.exps), self.coef)


class VectorBasis:
    """L2-orthonormal basis of a vector polynomial space on the reference triangle.

    ``raviart_thomas=False`` gives [P_p]^2; ``True`` gives [P_p]^2 + x P~_p
    with P~_p the homogeneous polynomials of degree p.
    """

    def __init__(self, degree, raviart_thomas=False):
        self.degree = degree
        self.raviart_thomas = raviart_thomas
        top = degree + 1 if raviart_thomas else degree
        self.exps = monomial_exponents(top)
        index = {tuple(e): i for i, e in enumerate(self.exps)}
        fields = []
        for a, b in monomial_exponents(degree):
            for comp in range(2):
                c = np.zeros((len(self.exps), 2))
                c[index[(a, b)], comp] = 1.0
                fields.append(c)
        if raviart_thomas:
            for a, b in monomial_exponents(degree, homogeneous=True):
                c = np.zeros((len(self.exps), 2))
                c[index[(a + 1, b)], 0] = 1.0
                c[index[(a, b + 1)], 1] = 1.0
                fields.append(c)
        raw = np.stack(fields, axis=1)          # (n_mono, n_fields, 2)
        pts, w = triangle_rule_for_degree(2 * top)
        vals = np.einsum("qm,mnk->qnk", eval_monomials(pts, self.exps), raw)
        gram = np.einsum("q,qik,qjk->ij", w, vals, vals)
        self.coef = np.einsum("mik,ij->mjk", raw, _orthonormalize(gram))

    @property
    def dim(self):
        return self.coef.shape[1]

    def values(self, pts):
        return np.einsum("...m,mnk->...nk", eval_monomials(pts, self.exps), self.coef)

    def divergence(self, pts):
        g = eval_monomial_grads(pts, self.exps)
        return np.einsum("...mk,mnk->...n", g, self.coef)


@lru_cache(maxsize=None)
def lagrange_nodes_1d(p):
    """Equidistant nodes t_i = i / p, i = 0..p."""
    return np.linspace(0.0, 1.0, p + 1)


@lru_cache(maxsize=None)
def _lagrange_1d_coef(p):
    t = lagrange_nodes_1d(p)
    return np.linalg.inv(np.vander(t, p + 1, increasing=True))


def lagrange_1d(p, t):
    """Values (..., p + 1) of the equidistant Lagrange basis on [0, 1]."""
    t = np.asarray(t, dtype=float)
    return np.vander(t.ravel(), p + 1, increasing=True).reshape(t.shape + (p + 1,)) @ _lagrange_1d_coef(p)


def edge_points(local_edge, t):
    """Reference-triangle points at parameter ``t`` along local edge ``i``.

    Local edge ``i`` runs from reference vertex ``i+1`` to ``i+2`` (mod 3).
    """
    a = REF_VERTICES[(local_edge + 1) % 3]
    b = REF_VERTICES[(local_edge + 2) % 3]
    t = np.asarray(t, dtype=float)[..., None]
    return a + t * (b - a)


REF_EDGE_LENGTHS = np.array([np.sqrt(2.0), 1.0, 1.0])
REF_NORMALS = np.array([[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]) / REF_EDGE_LENGTHS[:, None]


@lru_cache(maxsize=None)
def lagrange_triangle_nodes(p):
    """Equidistant P_p Lagrange nodes on the reference triangle.

    Returns ``(points, kind, where)``: ``kind`` is 0 for vertex, 1 for
    edge-interior and 2 for cell-interior nodes; ``where`` holds the local
    vertex / local edge index (with the edge parameter stored separately in
    ``points``) or -1.
    """
    pts, kind, where = [], [], []
    for i in range(3):
        pts.append(REF_VERTICES[i]); kind.append(0); where.append(i)
    for e in range(3):
        for k in range(1, p):
            pts.append(edge_points(e, k / p)); kind.append(1); where.append(e)
    for j in range(1, p):
        for i in range(1, p - j):
            pts.append(np.array([i / p, j / p])); kind.append(2); where.append(-1)
    return np.array(pts), np.array(kind), np.array(where)


@lru_cache(maxsize=None)
def _lagrange_triangle_coef(p):
    pts, _, _ = lagrange_triangle_nodes(p)
    return np.linalg.inv(eval_monomials(pts, monomial_exponents(p)))


def lagrange_triangle(p, pts):
    """Nodal P_p basis on the reference triangle evaluated at ``pts``."""
    return eval_monomials(pts, monomial_exponents(p)) @ _lagrange_triangle_coef(p)

