"""Triangular meshes of the unit square and their regular refinement.

A :class:`MeshLevel` stores vertices, cells and edges as integer arrays.
Cell ``c`` has counterclockwise vertices ``cells[c]`` and local edge ``i``
opposite local vertex ``i``.  Edges are stored with the lower vertex id
first and are parameterized from the first to the second endpoint.

Refinement splits every triangle into four congruent children through its
edge midpoints.  Numbering after refinement is fixed:

* fine vertex ``Vc + e`` is the midpoint of coarse edge ``e``;
* fine edges ``2e`` and ``2e + 1`` are the halves of coarse edge ``e``
  touching its first and second endpoint;
* fine edges ``2Ec + 3c + k`` lie inside coarse cell ``c``;
* fine cells ``4c .. 4c + 3`` are the children of coarse cell ``c``, the
  last one being the midpoint triangle.
"""
from dataclasses import dataclass, field

import numpy as np

#: provenance tags for edges
ROOT, CHILD_OF_EDGE, INTERIOR_OF_CELL = 0, 1, 2
_PROVENANCE_NAMES = {ROOT: "root", CHILD_OF_EDGE: "child", INTERIOR_OF_CELL: "interior"}


class DegenerateCellError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MeshLevel:
    vertices: np.ndarray          # (V, 2)
    cells: np.ndarray             # (C, 3)
    cell_edges: np.ndarray        # (C, 3), edge i opposite vertex i
    edges: np.ndarray             # (E, 2), sorted endpoints
    edge_cells: np.ndarray        # (E, 2), -1 where missing
    boundary: np.ndarray          # (E,) bool
    edge_kind: np.ndarray         # (E,) provenance tag
    edge_parent: np.ndarray       # (E,) coarse edge or cell id, -1 for roots
    edge_half: np.ndarray         # (E,) 0/1 for child edges, -1 otherwise
    cell_parent: np.ndarray       # (C,) coarse cell id, -1 for roots
    level_index: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def interior_edges(self):
        return np.flatnonzero(~self.boundary)

    @property
    def edge_lengths(self):
        v = self.vertices[self.edges]
        return np.linalg.norm(v[:, 1] - v[:, 0], axis=1)

    @property
    def h(self):
        """Largest cell diameter."""
        if "h" not in self._cache:
            self._cache["h"] = float(self.edge_lengths.max())
        return self._cache["h"]

    @property
    def boundary_vertices(self):
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.edges[self.boundary].ravel()] = True
        return mask

    def geometry(self):
        """Affine data of all cells, see :func:`cell_geometry`."""
        if "geometry" not in self._cache:
            self._cache["geometry"] = cell_geometry(self.vertices[self.cells])
        return self._cache["geometry"]

    def local_edge_flip(self):
        """(C, 3) bool: local edge orientation opposes the global one.

        Local edge ``i`` runs from local vertex ``i+1`` to ``i+2`` (mod 3).
        """
        if "flip" not in self._cache:
            start = self.cells[:, [1, 2, 0]]
            self._cache["flip"] = start != self.edges[self.cell_edges, 0]
        return self._cache["flip"]


@dataclass(frozen=True)
class CellGeometry:
    """Affine maps x = origin + jacobian @ xhat of a batch of cells."""
    origin: np.ndarray        # (C, 2)
    jacobian: np.ndarray      # (C, 2, 2), columns v1 - v0, v2 - v0
    det: np.ndarray           # (C,) positive for counterclockwise cells
    edge_lengths: np.ndarray  # (C, 3), local edge i opposite vertex i
    normals: np.ndarray       # (C, 3, 2) outward unit normals

    @property
    def area(self):
        return 0.5 * self.det

    @property
    def perimeter(self):
        return self.edge_lengths.sum(axis=1)

    def to_physical(self, xhat):
        """Map reference points (..., 2) of every cell: returns (C, ..., 2)."""
        xhat = np.asarray(xhat, dtype=float)
        return self.origin.reshape((-1,) + (1,) * (xhat.ndim - 1) + (2,)) + np.einsum(
            "cij,...j->c...i", self.jacobian, xhat)

    def to_reference(self, x, cell_ids):
        """Pull back physical points ``x`` (N, 2) lying in ``cell_ids`` (N,)."""
        inv = np.linalg.inv(self.jacobian[cell_ids])
        return np.einsum("nij,nj->ni", inv, x - self.origin[cell_ids])


def cell_geometry(corners):
    """Affine reference maps for triangles given by ``corners`` (C, 3, 2).

    Raises
    ------
    DegenerateCellError
        If any triangle has zero area.
    """
    corners = np.asarray(corners, dtype=float)
    if corners.ndim == 2:
        corners = corners[None]
    v0, v1, v2 = corners[:, 0], corners[:, 1], corners[:, 2]
    jac = np.stack([v1 - v0, v2 - v0], axis=-1)
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    scale = np.einsum("cij,cij->c", jac, jac)
    bad = np.abs(det) <= 1e-14 * scale
    if bad.any():
        raise DegenerateCellError(f"degenerate cells: {np.flatnonzero(bad).tolist()}")
    # local edge i runs from vertex i+1 to vertex i+2
    starts = corners[:, [1, 2, 0]]
    ends = corners[:, [2, 0, 1]]
    tang = ends - starts
    lengths = np.linalg.norm(tang, axis=-1)
    sign = np.sign(det)[:, None, None]
    normals = sign * np.stack([tang[..., 1], -tang[..., 0]], axis=-1) / lengths[..., None]
    return CellGeometry(v0, jac, np.abs(det), lengths, normals)


def _edges_from_cells(cells):
    """Unique sorted edges and the (C, 3) cell-to-edge table, first-seen order."""
    local = cells[:, [[1, 2], [2, 0], [0, 1]]].reshape(-1, 2)
    local = np.sort(local, axis=1)
    uniq, first, inverse = np.unique(local, axis=0, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return uniq[order], rank[inverse.ravel()].reshape(-1, 3)


def _edge_cells(n_edges, cell_edges):
    ec = np.full((n_edges, 2), -1, dtype=np.int64)
    flat = cell_edges.ravel()
    owner = np.repeat(np.arange(len(cell_edges)), 3)
    order = np.argsort(flat, kind="stable")
    flat, owner = flat[order], owner[order]
    first = np.ones(len(flat), dtype=bool)
    first[1:] = flat[1:] != flat[:-1]
    ec[flat[first], 0] = owner[first]
    ec[flat[~first], 1] = owner[~first]
    return ec


def build_initial_mesh():
    """Unit square as a 2x2 grid of squares, each cut along its anti-diagonal.

    Returns the 8-cell mesh: 9 vertices, 16 edges, 8 of them on the boundary.
    """
    xs = np.array([0.0, 0.5, 1.0])
    X, Y = np.meshgrid(xs, xs)
    vertices = np.column_stack([X.ravel(), Y.ravel()])
    cells = []
    for j in range(2):
        for i in range(2):
            a, b = 3 * j + i, 3 * j + i + 1
            d, c = a + 3, b + 3
            # diagonal from top-left d to bottom-right b
            cells += [(a, b, d), (b, c, d)]
    cells = np.array(cells, dtype=np.int64)
    edges, cell_edges = _edges_from_cells(cells)
    edge_cells = _edge_cells(len(edges), cell_edges)
    n_e = len(edges)
    return MeshLevel(
        vertices=vertices,
        cells=cells,
        cell_edges=cell_edges,
        edges=edges,
        edge_cells=edge_cells,
        boundary=edge_cells[:, 1] < 0,
        edge_kind=np.full(n_e, ROOT, dtype=np.int8),
        edge_parent=np.full(n_e, -1, dtype=np.int64),
        edge_half=np.full(n_e, -1, dtype=np.int64),
        cell_parent=np.full(len(cells), -1, dtype=np.int64),
        level_index=0,
    )


def refine(level):
    """Regular (red) refinement of every cell of ``level``."""
    nv, ne, nc = level.n_vertices, level.n_edges, level.n_cells
    vert = level.vertices
    mids = 0.5 * (vert[level.edges[:, 0]] + vert[level.edges[:, 1]])
    vertices = np.vstack([vert, mids])

    v = level.cells
    ce = level.cell_edges
    m = nv + ce                      # midpoint of edge opposite vertex i
    cells = np.empty((nc, 4, 3), dtype=np.int64)
    cells[:, 0] = np.column_stack([v[:, 0], m[:, 2], m[:, 1]])
    cells[:, 1] = np.column_stack([m[:, 2], v[:, 1], m[:, 0]])
    cells[:, 2] = np.column_stack([m[:, 1], m[:, 0], v[:, 2]])
    cells[:, 3] = m
    cells = cells.reshape(-1, 3)

    # fine edges: halves of coarse edges, then 3 per coarse cell
    first, second = level.edges[:, 0], level.edges[:, 1]
    halves = np.empty((ne, 2, 2), dtype=np.int64)
    halves[:, 0] = np.column_stack([first, nv + np.arange(ne)])
    halves[:, 1] = np.column_stack([second, nv + np.arange(ne)])
    inner = np.stack([m[:, [1, 2]], m[:, [2, 0]], m[:, [0, 1]]], axis=1)
    edges = np.vstack([halves.reshape(-1, 2), inner.reshape(-1, 2)])
    edges = np.sort(edges, axis=1)

    def half(e, vtx):
        return 2 * e + (level.edges[e, 0] != vtx)

    inner_id = 2 * ne + 3 * np.arange(nc)[:, None] + np.arange(3)[None, :]
    cell_edges = np.empty((nc, 4, 3), dtype=np.int64)
    # child 0 = (v0, m2, m1)
    cell_edges[:, 0] = np.column_stack([inner_id[:, 0], half(ce[:, 1], v[:, 0]), half(ce[:, 2], v[:, 0])])
    # child 1 = (m2, v1, m0)
    cell_edges[:, 1] = np.column_stack([half(ce[:, 0], v[:, 1]), inner_id[:, 1], half(ce[:, 2], v[:, 1])])
    # child 2 = (m1, m0, v2)
    cell_edges[:, 2] = np.column_stack([half(ce[:, 0], v[:, 2]), half(ce[:, 1], v[:, 2]), inner_id[:, 2]])
    cell_edges[:, 3] = inner_id
    cell_edges = cell_edges.reshape(-1, 3)

    n_fine_e = len(edges)
    edge_cells = _edge_cells(n_fine_e, cell_edges)
    boundary = np.concatenate([np.repeat(level.boundary, 2), np.zeros(3 * nc, dtype=bool)])
    edge_kind = np.concatenate([np.full(2 * ne, CHILD_OF_EDGE), np.full(3 * nc, INTERIOR_OF_CELL)]).astype(np.int8)
    edge_parent = np.concatenate([np.repeat(np.arange(ne), 2), np.repeat(np.arange(nc), 3)])
    edge_half = np.concatenate([np.tile([0, 1], ne), np.full(3 * nc, -1)])
    return MeshLevel(
        vertices=vertices,
        cells=cells,
        cell_edges=cell_edges,
        edges=edges,
        edge_cells=edge_cells,
        boundary=boundary,
        edge_kind=edge_kind,
        edge_parent=edge_parent,
        edge_half=edge_half,
        cell_parent=np.repeat(np.arange(nc), 4),
        level_index=level.level_index + 1,
    )


class MeshHierarchy:
    """Nested levels obtained by repeated regular refinement."""

    def __init__(self, n_levels, initial=None):
        if n_levels < 1:
            raise ValueError("need at least one level")
        levels = [initial if initial is not None else build_initial_mesh()]
        for _ in range(n_levels - 1):
            levels.append(refine(levels[-1]))
        self.levels = levels

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, i):
        return self.levels[i]

    def prolong_p1(self, fine_index, vertex_values):
        """Vertex values of a coarse P1 function on level ``fine_index``."""
        coarse = self.levels[fine_index - 1]
        vals = np.asarray(vertex_values, dtype=float)
        mids = 0.5 * (vals[coarse.edges[:, 0]] + vals[coarse.edges[:, 1]])
        return np.concatenate([vals, mids])


def validate(level, tol=1e-12):
    """Return a list of human-readable invariant violations (empty if valid)."""
    problems = []
    corners = level.vertices[level.cells]
    v0, v1, v2 = corners[:, 0], corners[:, 1], corners[:, 2]
    signed = 0.5 * ((v1[:, 0] - v0[:, 0]) * (v2[:, 1] - v0[:, 1])
                    - (v1[:, 1] - v0[:, 1]) * (v2[:, 0] - v0[:, 0]))
    for c in np.flatnonzero(signed <= 0):
        problems.append(f"orientation: cell {c} has signed area {signed[c]:.3e}")

    if (level.vertices < -tol).any() or (level.vertices > 1 + tol).any():
        problems.append("geometry: vertex outside the unit square")

    # every local edge must join the two other vertices of its cell
    expect = np.sort(level.cells[:, [[1, 2], [2, 0], [0, 1]]], axis=-1)
    got = level.edges[level.cell_edges]
    for c, i in zip(*np.nonzero((expect != got).any(axis=-1))):
        problems.append(f"topology: local edge {i} of cell {c} does not match its vertices")

    counts = np.bincount(level.cell_edges.ravel(), minlength=level.n_edges)
    for e in np.flatnonzero(counts == 0):
        problems.append(f"conformity: edge {e} is dangling (no adjacent cell)")
    for e in np.flatnonzero(counts > 2):
        problems.append(f"conformity: edge {e} is shared by {counts[e]} cells")
    for e in np.flatnonzero((counts == 1) != level.boundary):
        problems.append(f"conformity: edge {e} boundary flag disagrees with its {counts[e]} cells")
    ends = level.vertices[level.edges[level.boundary]]
    on_side = ((np.abs(ends) < tol) | (np.abs(ends - 1) < tol))
    same_side = (on_side[:, 0] & on_side[:, 1]).any(axis=1)
    for e in np.flatnonzero(level.boundary)[~same_side]:
        problems.append(f"conformity: boundary edge {e} is not on the square's boundary")

    euler = level.n_vertices - level.n_edges + level.n_cells + 1
    if euler != 2:
        problems.append(f"euler: V - E + C + 1 = {euler}, expected 2")
    return problems


def dump(level):
    """Plain-text listing used for golden-file comparisons.

    Format (one record per line, whitespace separated)::

        level <index> vertices <V> edges <E> cells <C>
        v <id> <x> <y>
        e <id> <a> <b> <boundary 0|1> <root|child|interior> <parent> <half>
        c <id> <v0> <v1> <v2> <e0> <e1> <e2> <parent>

    Coordinates are written with ``repr`` precision.
    """
    lines = [f"level {level.level_index} vertices {level.n_vertices} "
             f"edges {level.n_edges} cells {level.n_cells}"]
    for i, (x, y) in enumerate(level.vertices):
        lines.append(f"v {i} {x!r} {y!r}")
    for i, (a, b) in enumerate(level.edges):
        lines.append(f"e {i} {a} {b} {int(level.boundary[i])} "
                     f"{_PROVENANCE_NAMES[int(level.edge_kind[i])]} "
                     f"{level.edge_parent[i]} {level.edge_half[i]}")
    for i, (vs, es) in enumerate(zip(level.cells, level.cell_edges)):
        lines.append(f"c {i} {vs[0]} {vs[1]} {vs[2]} {es[0]} {es[1]} {es[2]} {level.cell_parent[i]}")
    return "\n".join(lines) + "\n"
