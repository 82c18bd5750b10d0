"""Discontinuous degree-p Lagrange spaces on the interior edges of a mesh."""
import numpy as np
import scipy.sparse as sp

from .basis import lagrange_1d, lagrange_nodes_1d
from .quadrature import gauss_line

#: Gauss points per edge for integrals of non-polynomial functions
SMOOTH_EDGE_POINTS = 16


class SkeletonSpace:
    """Trace space M of degree ``p`` on ``level``.

    Degrees of freedom are nodal values at t_i = i / p along every interior
    edge, numbered edge by edge in edge order.  Boundary edges carry none.
    Local trace dof ``i * (p + 1) + k`` of a cell is node ``k`` of local
    edge ``i`` counted in the local edge direction.
    """

    def __init__(self, level, p):
        if p < 1:
            raise ValueError("degree must be at least 1")
        self.level = level
        self.p = p
        self.nodes = lagrange_nodes_1d(p)
        interior = ~level.boundary
        self.edge_dof = np.full(level.n_edges, -1, dtype=np.int64)
        self.edge_dof[interior] = np.arange(interior.sum()) * (p + 1)
        self.n_dofs = int(interior.sum()) * (p + 1)
        self.dof_edge = np.repeat(np.flatnonzero(interior), p + 1)
        self.dof_node = np.tile(np.arange(p + 1), int(interior.sum()))

        k = np.arange(p + 1)
        flip = level.local_edge_flip()[:, :, None]
        node = np.where(flip, p - k, k)
        start = self.edge_dof[level.cell_edges][:, :, None]
        self.cell_dofs = np.where(start >= 0, start + node, -1).reshape(level.n_cells, -1)

    @property
    def n_local(self):
        return 3 * (self.p + 1)

    def __len__(self):
        return self.n_dofs

    def edge_points(self, edges, t):
        """Physical points of ``edges`` at (global) parameters ``t``."""
        lv = self.level
        a = lv.vertices[lv.edges[edges, 0]]
        b = lv.vertices[lv.edges[edges, 1]]
        t = np.asarray(t, dtype=float)
        return a + t[..., None] * (b - a)

    def dof_coordinates(self):
        return self.edge_points(self.dof_edge, self.nodes[self.dof_node])

    def gather(self, lam):
        """Local trace coefficients (C, 3(p+1)); boundary entries are 0."""
        lam = np.asarray(lam, dtype=float)
        return np.where(self.cell_dofs >= 0, lam[np.maximum(self.cell_dofs, 0)], 0.0)

    def scatter_add(self, local):
        """Sum local vectors (C, 3(p+1)) into a global vector."""
        mask = self.cell_dofs >= 0
        out = np.zeros(self.n_dofs)
        np.add.at(out, self.cell_dofs[mask], local[mask])
        return out


def eval_on_edge(space, lam, edge, t):
    """Value of ``lam`` on ``edge`` at global parameter ``t``; 0 on the boundary."""
    start = space.edge_dof[edge]
    if start < 0:
        return np.zeros_like(np.asarray(t, dtype=float))
    coeffs = np.asarray(lam, dtype=float)[start:start + space.p + 1]
    return lagrange_1d(space.p, t) @ coeffs


def trace_conforming_p1(space, vertex_values):
    """Skeleton trace of the continuous piecewise-linear function with the
    given vertex values.

    Raises
    ------
    ValueError
        If a boundary vertex carries a nonzero value.
    """
    lv = space.level
    vals = np.asarray(vertex_values, dtype=float)
    if np.any(vals[lv.boundary_vertices] != 0.0):
        raise ValueError("conforming function must vanish on the boundary")
    a = vals[lv.edges[space.dof_edge, 0]]
    b = vals[lv.edges[space.dof_edge, 1]]
    t = space.nodes[space.dof_node]
    return (1.0 - t) * a + t * b


def edge_mass_reference(p):
    """Mass matrix of the edge Lagrange basis on [0, 1]."""
    x, w = gauss_line(p + 2)
    L = lagrange_1d(p, x)
    return L.T @ (w[:, None] * L)


def cell_weights(level):
    """|T| / |dT| for every cell."""
    g = level.geometry()
    return g.area / g.perimeter


def edge_weights(level):
    """Sum of |T| / |dT| over the cells adjacent to each edge."""
    w = cell_weights(level)
    ec = level.edge_cells
    return np.where(ec[:, 0] >= 0, w[ec[:, 0]], 0.0) + np.where(ec[:, 1] >= 0, w[ec[:, 1]], 0.0)


def build_scaled_mass(space):
    """Block-diagonal matrix of the scaled skeleton inner product."""
    p = space.p
    lv = space.level
    edges = np.flatnonzero(~lv.boundary)
    scale = edge_weights(lv)[edges] * lv.edge_lengths[edges]
    blocks = scale[:, None, None] * edge_mass_reference(p)[None]
    return block_diagonal(blocks)


def block_diagonal(blocks):
    """CSR matrix with the square ``blocks`` (n, b, b) on its diagonal."""
    n, b, _ = blocks.shape
    base = (np.arange(n) * b)[:, None, None]
    rows = np.broadcast_to(base + np.arange(b)[:, None], blocks.shape)
    cols = np.broadcast_to(base + np.arange(b)[None, :], blocks.shape)
    return sp.csr_matrix((blocks.ravel(), (rows.ravel(), cols.ravel())), shape=(n * b, n * b))


def scaled_inner_product(space, lam, mu):
    """<lam, mu> = sum_T |T|/|dT| int_dT lam mu, by quadrature over cell boundaries."""
    lv = space.level
    g = lv.geometry()
    x, w = gauss_line(space.p + 2)
    L = lagrange_1d(space.p, x)                            # (q, p+1)
    lam_loc = space.gather(lam).reshape(lv.n_cells, 3, -1)
    mu_loc = space.gather(mu).reshape(lv.n_cells, 3, -1)
    lq = np.einsum("qk,cek->ceq", L, lam_loc)
    mq = np.einsum("qk,cek->ceq", L, mu_loc)
    per_edge = np.einsum("q,ceq,ceq->ce", w, lq, mq) * g.edge_lengths
    return float((per_edge.sum(axis=1) * g.area / g.perimeter).sum())


def skeleton_norm(space, lam, mass=None):
    mass = build_scaled_mass(space) if mass is None else mass
    lam = np.asarray(lam, dtype=float)
    return float(np.sqrt(lam @ (mass @ lam)))


def project_boundary(space, u):
    """Edgewise L2 projection of a pointwise function ``u(x, y)`` onto M."""
    p = space.p
    lv = space.level
    edges = np.flatnonzero(~lv.boundary)
    x, w = gauss_line(SMOOTH_EDGE_POINTS)
    pts = space.edge_points(edges[:, None], x[None, :])        # (E, q, 2)
    vals = np.asarray(u(pts[..., 0], pts[..., 1]), dtype=float)
    L = lagrange_1d(p, x)                                     # (q, p+1)
    rhs = vals @ (w[:, None] * L)                              # (E, p+1)
    coeffs = np.linalg.solve(edge_mass_reference(p), rhs.T).T
    return coeffs.ravel()
