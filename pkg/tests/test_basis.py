import numpy as np
from hypothesis import given, strategies as st

from hdgmg.basis import (REF_NORMALS, ScalarBasis, VectorBasis, edge_points, lagrange_1d,
                         lagrange_nodes_1d, lagrange_triangle, lagrange_triangle_nodes)
from hdgmg.quadrature import triangle_rule_for_degree


def test_lagrange_1d_is_nodal():
    for p in range(1, 6):
        assert np.allclose(lagrange_1d(p, lagrange_nodes_1d(p)), np.eye(p + 1), atol=1e-12)


@given(st.integers(1, 5), st.floats(0, 1))
def test_lagrange_1d_partition_of_unity(p, t):
    assert np.isclose(lagrange_1d(p, t).sum(), 1.0)


def test_lagrange_triangle_is_nodal():
    for p in range(1, 5):
        pts, kind, where = lagrange_triangle_nodes(p)
        assert len(pts) == (p + 1) * (p + 2) // 2
        assert np.allclose(lagrange_triangle(p, pts), np.eye(len(pts)), atol=1e-11)
        assert (kind == 0).sum() == 3 and (kind == 1).sum() == 3 * (p - 1)


def test_scalar_basis_orthonormal():
    for p in range(0, 4):
        B = ScalarBasis(p)
        pts, w = triangle_rule_for_degree(2 * p)
        V = B.values(pts)
        assert B.dim == (p + 1) * (p + 2) // 2
        assert np.allclose(V.T @ (w[:, None] * V), np.eye(B.dim), atol=1e-12)


def test_vector_basis_dimensions():
    for p in range(1, 4):
        assert VectorBasis(p).dim == (p + 1) * (p + 2)
        assert VectorBasis(p, raviart_thomas=True).dim == (p + 1) * (p + 3)


def test_vector_basis_divergence_matches_finite_difference():
    B = VectorBasis(2, raviart_thomas=True)
    x = np.array([[0.2, 0.3]])
    eps = 1e-6
    fd = ((B.values(x + [eps, 0])[..., 0] - B.values(x - [eps, 0])[..., 0])
          + (B.values(x + [0, eps])[..., 1] - B.values(x - [0, eps])[..., 1])) / (2 * eps)
    assert np.allclose(B.divergence(x), fd, atol=1e-6)


def test_rt_normal_traces_are_degree_p():
    # RT fields have normal components of degree p on each edge: the
    # (p+1)-th difference of equally spaced samples must vanish
    p = 2
    B = VectorBasis(p, raviart_thomas=True)
    t = np.linspace(0, 1, p + 2)
    for e in range(3):
        vn = B.values(edge_points(e, t)) @ REF_NORMALS[e]
        assert np.abs(np.diff(vn, n=p + 1, axis=0)).max() < 1e-10


def test_reference_normals_are_outward_unit():
    centroid = np.array([1 / 3, 1 / 3])
    for e in range(3):
        mid = edge_points(e, 0.5)
        assert np.isclose(np.linalg.norm(REF_NORMALS[e]), 1.0)
        assert (mid - centroid) @ REF_NORMALS[e] > 0
