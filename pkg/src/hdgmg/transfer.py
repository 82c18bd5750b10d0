"""Injection operators between consecutive skeleton spaces.

Four rules map a coarse trace to the refined skeleton:

``I0``
    trace of a continuous P_p extension whose vertex values are averages of
    the incident edge values (zero on the boundary), edge nodes copy the
    trace and cell-interior nodes take the local reconstruction U lam;
``I1``
    identity on halves of coarse edges, linear interpolation between the
    two coarse-edge midpoints on edges inside a coarse cell;
``I2``
    identity on halves of coarse edges, U lam of the parent cell on new edges;
``I3``
    as I2, except that endpoint nodes of new edges use the coarse trace.

All four are assembled as sparse matrices (fine dofs x coarse dofs).
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .basis import lagrange_1d, lagrange_triangle, lagrange_triangle_nodes
from .mesh import CHILD_OF_EDGE, INTERIOR_OF_CELL

INJECTION_KINDS = ("I0", "I1", "I2", "I3")


@dataclass
class TransferMatrix:
    matrix: sp.csr_matrix
    kind: str
    coarse: object
    fine: object

    @property
    def shape(self):
        return self.matrix.shape

    def __matmul__(self, x):
        return self.matrix @ x


def _coo(rows, cols, vals, shape):
    rows, cols, vals = (np.concatenate(a) if a else np.zeros(0) for a in (rows, cols, vals))
    keep = (cols >= 0) & (vals != 0.0)
    m = sp.coo_matrix((vals[keep], (rows[keep].astype(np.int64), cols[keep].astype(np.int64))), shape=shape)
    return m.tocsr()


def _edge_rows(coarse_space, edges, t):
    """Lagrange rows evaluating coarse edges ``edges`` at parameters ``t``."""
    p = coarse_space.p
    start = coarse_space.edge_dof[edges]
    w = lagrange_1d(p, t)                                   # (N, p+1)
    cols = np.where(start[:, None] >= 0, start[:, None] + np.arange(p + 1), -1)
    return cols, w


def _cell_rows(coarse_space, coarse_ops, cells, xhat):
    """Rows evaluating U lam of coarse ``cells`` at reference points ``xhat``."""
    phi = coarse_ops.ref.V.values(xhat)                      # (N, nV)
    w = np.einsum("ni,nik->nk", phi, coarse_ops.U[cells])
    return coarse_space.cell_dofs[cells], w


def _vertex_average(coarse_space):
    """(V, ndof) matrix of vertex averages of the trace; zero rows on the boundary."""
    lv = coarse_space.level
    p = coarse_space.p
    degree = np.bincount(lv.edges.ravel(), minlength=lv.n_vertices)
    interior_edges = lv.interior_edges
    start = coarse_space.edge_dof[interior_edges]
    rows, cols = [], []
    for end, node in ((0, 0), (1, p)):
        rows.append(lv.edges[interior_edges, end])
        cols.append(start + node)
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    keep = ~lv.boundary_vertices[rows]
    rows, cols = rows[keep], cols[keep]
    vals = 1.0 / degree[rows]
    return sp.csr_matrix((vals, (rows, cols)), shape=(lv.n_vertices, coarse_space.n_dofs))


def build_injection(kind, coarse_space, fine_space, coarse_ops=None):
    """Sparse injection of ``kind`` from ``coarse_space`` to ``fine_space``.

    ``coarse_ops`` (coarse :class:`~hdgmg.hdg.LocalOperators`) is required for
    I0, I2 and I3.
    """
    if kind not in INJECTION_KINDS:
        raise ValueError(f"unknown injection {kind!r}")
    if kind != "I1" and coarse_ops is None:
        raise ValueError(f"injection {kind} needs the coarse local solvers")
    fine = fine_space.level
    coarse = coarse_space.level
    if fine.n_cells != 4 * coarse.n_cells:
        raise ValueError("fine space is not a refinement of the coarse space")
    p = fine_space.p
    shape = (fine_space.n_dofs, coarse_space.n_dofs)

    dof_edge = fine_space.dof_edge
    dof_node = fine_space.dof_node
    x = fine_space.dof_coordinates()
    ekind = fine.edge_kind[dof_edge]
    parent = fine.edge_parent[dof_edge]
    rows_all = np.arange(fine_space.n_dofs)

    if kind == "I0":
        return TransferMatrix(_injection_i0(coarse_space, fine_space, coarse_ops, x, ekind, parent),
                              kind, coarse_space, fine_space)

    R, C, W = [], [], []
    child = ekind == CHILD_OF_EDGE
    ce = parent[child]
    a = coarse.vertices[coarse.edges[ce, 0]]
    b = coarse.vertices[coarse.edges[ce, 1]]
    tc = np.einsum("ni,ni->n", x[child] - a, b - a) / np.einsum("ni,ni->n", b - a, b - a)
    cols, w = _edge_rows(coarse_space, ce, tc)
    R.append(np.repeat(rows_all[child], p + 1)); C.append(cols.ravel()); W.append(w.ravel())

    inner = ekind == INTERIOR_OF_CELL
    ends = (dof_node == 0) | (dof_node == p)
    linear = inner if kind == "I1" else (inner & ends if kind == "I3" else np.zeros_like(inner))
    recon = inner & ~linear

    if linear.any():
        e = dof_edge[linear]
        s = fine_space.nodes[dof_node[linear]]
        nv = coarse.n_vertices
        for end, weight in ((0, 1.0 - s), (1, s)):
            mid_edge = fine.edges[e, end] - nv
            cols, w = _edge_rows(coarse_space, mid_edge, np.full(len(e), 0.5))
            R.append(np.repeat(rows_all[linear], p + 1)); C.append(cols.ravel())
            W.append((weight[:, None] * w).ravel())

    if recon.any():
        cells = parent[recon]
        xhat = coarse.geometry().to_reference(x[recon], cells)
        cols, w = _cell_rows(coarse_space, coarse_ops, cells, xhat)
        R.append(np.repeat(rows_all[recon], cols.shape[1])); C.append(cols.ravel()); W.append(w.ravel())

    return TransferMatrix(_coo(R, C, W, shape), kind, coarse_space, fine_space)


def _injection_i0(coarse_space, fine_space, coarse_ops, x, ekind, parent):
    coarse = coarse_space.level
    p = coarse_space.p
    nloc = coarse_space.n_local
    owner = np.where(ekind == CHILD_OF_EDGE, coarse.edge_cells[parent, 0], parent)
    xhat = coarse.geometry().to_reference(x, owner)
    Lt = lagrange_triangle(p, xhat)                           # (N, nL)
    nodes, nkind, where = lagrange_triangle_nodes(p)

    # local part: edge-interior nodes copy the trace, interior nodes use U lam
    local = np.zeros((len(x), nloc))
    edge_nodes = np.flatnonzero(nkind == 1)
    # edge nodes are listed edge by edge at parameters k / p, k = 1..p-1
    k = np.tile(np.arange(1, p), 3)
    local[:, where[edge_nodes] * (p + 1) + k] += Lt[:, edge_nodes]
    interior = np.flatnonzero(nkind == 2)
    if len(interior):
        phi = coarse_ops.ref.V.values(nodes[interior])          # (ni, nV)
        Uint = np.einsum("ji,cik->cjk", phi, coarse_ops.U[owner])
        local += np.einsum("nj,njk->nk", Lt[:, interior], Uint)
    local[np.abs(local) < 1e-14] = 0.0
    cols = coarse_space.cell_dofs[owner]
    rows = np.repeat(np.arange(len(x)), nloc)
    local_part = _coo([rows], [cols.ravel()], [local.ravel()], (len(x), coarse_space.n_dofs))

    # vertex nodes: averaged trace values
    vert = coarse.cells[owner]                                 # (N, 3)
    vw = Lt[:, :3].copy()
    vw[np.abs(vw) < 1e-14] = 0.0
    to_vertex = _coo([np.repeat(np.arange(len(x)), 3)], [vert.ravel()], [vw.ravel()],
                     (len(x), coarse.n_vertices))
    return (local_part + to_vertex @ _vertex_average(coarse_space)).tocsr()


def restrict(transfer, residual, mode="euclidean", coarse_mass=None, fine_mass=None):
    """Map a fine residual to the coarse space.

    ``mode="euclidean"`` applies the transpose of the injection matrix;
    ``mode="scaled"`` is the adjoint in the scaled skeleton inner products,
    M_c^{-1} I^T M_f r.
    """
    I = transfer.matrix if isinstance(transfer, TransferMatrix) else transfer
    r = np.asarray(residual, dtype=float)
    if mode == "euclidean":
        return I.T @ r
    if mode == "scaled":
        if coarse_mass is None or fine_mass is None:
            raise ValueError("scaled restriction needs both mass matrices")
        return spla.spsolve(coarse_mass.tocsc(), I.T @ (fine_mass @ r))
    raise ValueError(f"unknown restriction mode {mode!r}")


def dump_coo(transfer):
    """Coordinate text: header ``rows cols nnz kind`` then ``row col value`` lines."""
    m = transfer.matrix.tocoo()
    order = np.lexsort((m.col, m.row))
    lines = [f"{m.shape[0]} {m.shape[1]} {m.nnz} {transfer.kind}"]
    lines += [f"{r} {c} {v!r}" for r, c, v in zip(m.row[order], m.col[order], m.data[order].tolist())]
    return "\n".join(lines) + "\n"
