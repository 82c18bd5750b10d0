import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hdgmg.hdg import SolverKind, build_local, reconstruct
from hdgmg.mesh import CHILD_OF_EDGE, INTERIOR_OF_CELL
from hdgmg.skeleton import SkeletonSpace, build_scaled_mass, eval_on_edge, trace_conforming_p1
from hdgmg.transfer import INJECTION_KINDS, build_injection, dump_coo, restrict

_CACHE = {}


def pair(hierarchy, ell, p, tau="1/h"):
    key = (ell, p, tau)
    if key not in _CACHE:
        kind = SolverKind.ldg(p, tau)
        cs, fs = SkeletonSpace(hierarchy[ell - 1], p), SkeletonSpace(hierarchy[ell], p)
        ops = build_local(hierarchy[ell - 1], kind)
        _CACHE[key] = cs, fs, ops, {k: build_injection(k, cs, fs, ops) for k in INJECTION_KINDS}
    return _CACHE[key]


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(INJECTION_KINDS), st.integers(1, 3), st.integers(0, 2 ** 31 - 1))
def test_conforming_p1_traces_are_preserved(hierarchy, kind, p, seed):
    # oracle: fine trace of the same piecewise-linear function, built from the
    # vertex values prolonged on the mesh hierarchy
    cs, fs, _, T = pair(hierarchy, 2, p)
    coarse = hierarchy[1]
    v = np.random.default_rng(seed).standard_normal(coarse.n_vertices)
    v[coarse.boundary_vertices] = 0.0
    fine_v = hierarchy.prolong_p1(2, v)
    got = T[kind] @ trace_conforming_p1(cs, v)
    assert np.abs(got - trace_conforming_p1(fs, fine_v)).max() < 1e-12


@pytest.mark.parametrize("kind", ["I1", "I2", "I3"])
def test_child_edges_copy_the_coarse_trace(hierarchy, kind):
    cs, fs, _, T = pair(hierarchy, 2, 2)
    fine, coarse = hierarchy[2], hierarchy[1]
    lam = np.random.default_rng(0).standard_normal(cs.n_dofs)
    out = T[kind] @ lam
    for d in np.flatnonzero(fine.edge_kind[fs.dof_edge] == CHILD_OF_EDGE)[:40]:
        e = fs.dof_edge[d]
        x = fs.dof_coordinates()[d]
        pe = fine.edge_parent[e]
        a, b = coarse.vertices[coarse.edges[pe]]
        t = np.linalg.norm(x - a) / np.linalg.norm(b - a)
        assert np.isclose(out[d], eval_on_edge(cs, lam, pe, t))


def test_I2_uses_parent_reconstruction(hierarchy):
    cs, fs, ops, T = pair(hierarchy, 2, 2)
    fine, coarse = hierarchy[2], hierarchy[1]
    lam = np.random.default_rng(1).standard_normal(cs.n_dofs)
    field_ = reconstruct(cs, ops, lam)
    inner = np.flatnonzero(fine.edge_kind[fs.dof_edge] == INTERIOR_OF_CELL)
    cells = fine.edge_parent[fs.dof_edge[inner]]
    xhat = coarse.geometry().to_reference(fs.dof_coordinates()[inner], cells)
    assert np.allclose((T["I2"] @ lam)[inner], field_.eval_u(cells, xhat))


def test_I1_interpolates_coarse_midpoints(hierarchy):
    cs, fs, _, T = pair(hierarchy, 2, 3)
    fine, coarse = hierarchy[2], hierarchy[1]
    lam = np.random.default_rng(2).standard_normal(cs.n_dofs)
    out = T["I1"] @ lam
    inner = np.flatnonzero(fine.edge_kind[fs.dof_edge] == INTERIOR_OF_CELL)
    for d in inner[:30]:
        e = fs.dof_edge[d]
        s = fs.nodes[fs.dof_node[d]]
        ma, mb = fine.edges[e] - coarse.n_vertices       # fine vertex -> coarse edge midpoint
        expect = (1 - s) * eval_on_edge(cs, lam, ma, 0.5) + s * eval_on_edge(cs, lam, mb, 0.5)
        assert np.isclose(out[d], expect)


def test_I1_equals_I3_for_linear_traces(hierarchy):
    _, _, _, T = pair(hierarchy, 2, 1)
    assert abs(T["I1"].matrix - T["I3"].matrix).max() < 1e-14


def test_I2_differs_from_I1(hierarchy):
    _, _, _, T = pair(hierarchy, 2, 2)
    assert abs(T["I1"].matrix - T["I2"].matrix).max() > 1e-3


def test_shapes_and_errors(hierarchy):
    cs, fs, ops, T = pair(hierarchy, 2, 1)
    for t in T.values():
        assert t.shape == (fs.n_dofs, cs.n_dofs)
    with pytest.raises(ValueError):
        build_injection("I7", cs, fs, ops)
    with pytest.raises(ValueError):
        build_injection("I2", cs, fs)
    with pytest.raises(ValueError):
        build_injection("I1", cs, cs)


def test_euclidean_restriction_is_transpose(hierarchy):
    cs, fs, _, T = pair(hierarchy, 2, 2)
    r = np.random.default_rng(4).standard_normal(fs.n_dofs)
    mu = np.random.default_rng(5).standard_normal(cs.n_dofs)
    assert np.isclose(restrict(T["I0"], r) @ mu, r @ (T["I0"] @ mu))


def test_scaled_restriction_is_mass_adjoint(hierarchy):
    cs, fs, _, T = pair(hierarchy, 2, 2)
    Mc, Mf = build_scaled_mass(cs), build_scaled_mass(fs)
    r = np.random.default_rng(6).standard_normal(fs.n_dofs)
    mu = np.random.default_rng(7).standard_normal(cs.n_dofs)
    lhs = restrict(T["I3"], r, "scaled", Mc, Mf) @ (Mc @ mu)
    assert np.isclose(lhs, r @ (Mf @ (T["I3"] @ mu)))
    with pytest.raises(ValueError):
        restrict(T["I3"], r, "scaled")
    with pytest.raises(ValueError):
        restrict(T["I3"], r, "bogus")


def test_dump_coo_format(hierarchy):
    _, _, _, T = pair(hierarchy, 2, 1)
    lines = dump_coo(T["I1"]).splitlines()
    rows, cols, nnz, kind = lines[0].split()
    assert (int(rows), int(cols), kind) == (*T["I1"].shape, "I1")
    assert len(lines) == int(nnz) + 1
    entries = [tuple(map(int, ln.split()[:2])) for ln in lines[1:]]
    assert entries == sorted(entries)
    M = np.zeros(T["I1"].shape)
    for ln in lines[1:]:
        r, c, v = ln.split()
        M[int(r), int(c)] = float(v)
    assert np.array_equal(M, T["I1"].matrix.toarray())
