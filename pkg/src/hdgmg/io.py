"""File output: skeleton traces as CSV and bulk fields as legacy VTK."""
import csv

import numpy as np

from .basis import REF_VERTICES

VTK_TRIANGLE = 5


def write_trace_csv(path, space, lam):
    """One line per skeleton dof: ``edge,t,value``."""
    lam = np.asarray(lam, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["edge", "t", "value"])
        for e, k, v in zip(space.dof_edge, space.dof_node, lam):
            w.writerow([int(e), repr(float(space.nodes[k])), repr(float(v))])


def read_trace_csv(path, space):
    """Inverse of :func:`write_trace_csv` for the same space."""
    lam = np.zeros(space.n_dofs)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if len(rows) != space.n_dofs:
        raise ValueError(f"expected {space.n_dofs} rows, found {len(rows)}")
    for row in rows:
        e = int(row["edge"])
        k = int(round(float(row["t"]) * space.p))
        start = space.edge_dof[e]
        if start < 0:
            raise ValueError(f"edge {e} carries no unknowns")
        lam[start + k] = float(row["value"])
    return lam


def vtk_text(field, title="hdgmg solution"):
    """Legacy ASCII unstructured grid with u and q sampled at cell corners.

    Corners are duplicated per cell so the discontinuous fields are kept.
    """
    level = field.ops.level
    C = level.n_cells
    pts = level.vertices[level.cells].reshape(-1, 2)
    u, q = field.cell_values(REF_VERTICES)                     # (C, 3), (C, 3, 2)
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {3 * C} double"]
    lines += [f"{x!r} {y!r} 0.0" for x, y in pts.tolist()]
    lines.append(f"CELLS {C} {4 * C}")
    lines += [f"3 {3 * c} {3 * c + 1} {3 * c + 2}" for c in range(C)]
    lines.append(f"CELL_TYPES {C}")
    lines += [str(VTK_TRIANGLE)] * C
    lines += [f"POINT_DATA {3 * C}", "SCALARS u double 1", "LOOKUP_TABLE default"]
    lines += [repr(v) for v in u.ravel().tolist()]
    lines.append("VECTORS q double")
    lines += [f"{a!r} {b!r} 0.0" for a, b in q.reshape(-1, 2).tolist()]
    return "\n".join(lines) + "\n"


def write_vtk(path, field, title="hdgmg solution"):
    with open(path, "w") as fh:
        fh.write(vtk_text(field, title))
