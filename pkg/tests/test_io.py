import numpy as np
import scipy.sparse.linalg as spla

from hdgmg.hdg import SolverKind, assemble, reconstruct
from hdgmg.io import read_trace_csv, vtk_text, write_trace_csv, write_vtk
from hdgmg.skeleton import SkeletonSpace


def test_trace_csv_round_trip(tmp_path, hierarchy):
    space = SkeletonSpace(hierarchy[1], 3)
    lam = np.random.default_rng(0).standard_normal(space.n_dofs)
    path = tmp_path / "lam.csv"
    write_trace_csv(path, space, lam)
    lines = path.read_text().splitlines()
    assert lines[0] == "edge,t,value" and len(lines) == space.n_dofs + 1
    assert np.array_equal(read_trace_csv(path, space), lam)


def _field(hierarchy, f=1.0):
    space = SkeletonSpace(hierarchy[1], 2)
    s = assemble(space, SolverKind.ldg(2), f)
    lam = np.zeros(space.n_dofs) if f is None else spla.spsolve(s.A.tocsc(), s.b)
    return reconstruct(space, s.ops, lam, f)


def _section(lines, key):
    i = next(k for k, ln in enumerate(lines) if ln.startswith(key))
    return i, lines[i]


def test_vtk_structure(tmp_path, hierarchy):
    field_ = _field(hierarchy)
    C = hierarchy[1].n_cells
    path = tmp_path / "u.vtk"
    write_vtk(path, field_, "test")
    lines = path.read_text().splitlines()
    assert lines[0] == "# vtk DataFile Version 3.0" and lines[2] == "ASCII"
    _, cells = _section(lines, "CELLS")
    assert cells == f"CELLS {C} {4 * C}"
    i, types = _section(lines, "CELL_TYPES")
    assert types == f"CELL_TYPES {C}" and set(lines[i + 1:i + 1 + C]) == {"5"}
    _, pts = _section(lines, "POINTS")
    assert pts == f"POINTS {3 * C} double"


def test_vtk_values_match_field(hierarchy):
    field_ = _field(hierarchy)
    lines = vtk_text(field_).splitlines()
    i, _ = _section(lines, "SCALARS u")
    C = hierarchy[1].n_cells
    u = np.array([float(v) for v in lines[i + 2:i + 2 + 3 * C]])
    from hdgmg.basis import REF_VERTICES
    assert np.array_equal(u, field_.cell_values(REF_VERTICES)[0].ravel())


def test_zero_load_gives_zero_fields(hierarchy):
    lines = vtk_text(_field(hierarchy, None)).splitlines()
    i, _ = _section(lines, "SCALARS u")
    j, _ = _section(lines, "VECTORS q")
    vals = [float(v) for v in lines[i + 2:j]]
    vecs = [float(x) for ln in lines[j + 1:] for x in ln.split()]
    assert not any(vals) and not any(vecs)
