"""Numerical certificates for the assumptions behind uniform V-cycle convergence.

Every estimate of the form ``N(mu) <= C D(mu)`` is turned into a
generalized eigenvalue problem for two assembled symmetric matrices and
reported as the constant C together with its growth from one level (or
level pair) to the next.  Since the hidden constants are unknown, pass
flags are based on growth rates; exact identities (IA2, LS4,
quasi-orthogonality) are checked against absolute tolerances.
"""
import csv
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .basis import lagrange_triangle_nodes
from .hdg import assemble, assemble_matrix, build_local, l2_errors, reconstruct
from .mesh import CHILD_OF_EDGE, MeshHierarchy
from .quadrature import triangle_rule_for_degree
from .skeleton import (SkeletonSpace, build_scaled_mass, cell_weights, project_boundary,
                       skeleton_norm, trace_conforming_p1)
from .transfer import build_injection

DENSE_LIMIT = 2000
N_TRIALS = 64
CSV_HEADER = ("assumption", "level", "kind", "p", "tau", "injection", "constant", "growth", "pass")

IDENTITY_TOL = 1e-12
LS4_TOL = 1e-11
QO_TOL = 1e-9
GROWTH_LIMIT = 1.10
IA1_GROWTH_LIMIT = 1.05


# ---------------------------------------------------------------- reports

@dataclass
class ReportRow:
    assumption: str
    level: str
    kind: str
    p: int
    tau: str
    injection: str
    constant: float
    growth: float
    passed: bool

    def csv_fields(self):
        growth = "" if not np.isfinite(self.growth) else f"{self.growth:.6e}"
        return [self.assumption, self.level, self.kind, str(self.p), self.tau, self.injection,
                f"{self.constant:.6e}", growth, "pass" if self.passed else "FAIL"]


@dataclass
class AssumptionReport:
    rows: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r.passed for r in self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def extend(self, other):
        self.rows.extend(other.rows if isinstance(other, AssumptionReport) else other)
        return self

    def select(self, assumption):
        return [r for r in self.rows if r.assumption == assumption]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(r.csv_fields())
        return buf.getvalue()


def _growth_rows(assumption, labels, constants, ctx, injection="", limit=GROWTH_LIMIT,
                 lower=False):
    """Rows with growth = C_k / C_{k-1}; a lower bound passes if it does not decay."""
    rows = []
    prev = None
    for label, c in zip(labels, constants):
        growth = np.nan if prev is None else c / prev
        ok = bool(np.isfinite(c) and c > 0)
        if prev is not None:
            ok = ok and (growth >= 1.0 / limit if lower else growth <= limit)
        rows.append(ReportRow(assumption, label, ctx.kind.method, ctx.kind.p, ctx.kind.tau_label,
                              injection, float(c), float(growth), ok))
        prev = c
    return rows


# ---------------------------------------------------------------- sup ratio

def sup_ratio(N, D, semidefinite=False, dense_limit=DENSE_LIMIT, tol=1e-8, seed=0):
    """Largest generalized eigenvalue sup N(x) / D(x) of symmetric ``N``, ``D``.

    With ``semidefinite=True`` the supremum is taken over the complement of
    the null space of ``D`` (which must be annihilated by ``N`` for the
    supremum to be finite).

    Raises
    ------
    ValueError
        If ``D`` is singular and ``semidefinite`` is False.
    """
    n = N.shape[0]
    if n <= dense_limit:
        Nd = N.toarray() if sp.issparse(N) else np.asarray(N, dtype=float)
        Dd = D.toarray() if sp.issparse(D) else np.asarray(D, dtype=float)
        Nd, Dd = 0.5 * (Nd + Nd.T), 0.5 * (Dd + Dd.T)
        if semidefinite:
            evals, V = np.linalg.eigh(Dd)
            keep = evals > 1e-10 * evals.max()
            V = V[:, keep] / np.sqrt(evals[keep])
            return float(np.linalg.eigvalsh(V.T @ Nd @ V)[-1])
        try:
            return float(sla.eigh(Nd, Dd, eigvals_only=True, subset_by_index=[n - 1, n - 1])[0])
        except np.linalg.LinAlgError:
            raise ValueError("denominator form is singular") from None
    N, D = sp.csc_matrix(N), sp.csc_matrix(D)
    if semidefinite:
        # a small mass shift keeps the pencil definite; N vanishes on null(D)
        shift = 1e-10 * abs(D.diagonal()).max()
        D = D + shift * sp.identity(n, format="csc")
    try:
        lu = spla.splu(D)
    except RuntimeError:
        raise ValueError("denominator form is singular") from None
    v0 = np.random.default_rng(seed).standard_normal(n)
    Minv = spla.LinearOperator((n, n), matvec=lu.solve)
    val = spla.eigsh(N, k=1, M=D, Minv=Minv, which="LA", v0=v0, tol=tol,
                     return_eigenvectors=False)
    return float(val[0])


# ---------------------------------------------------------------- context

@dataclass
class LevelData:
    space: SkeletonSpace
    ops: object
    A: sp.csr_matrix
    b: np.ndarray
    _forms: dict = field(default_factory=dict)

    @property
    def h(self):
        return self.space.level.h

    def form(self, name):
        """Assembled quadratic forms on the skeleton space.

        ``mass``    scaled skeleton inner product;
        ``gap``     ||U mu - mu||^2 in the scaled norm;
        ``flux``    ||Q mu||_0^2;
        ``bulk``    ||U mu||_0^2;
        ``defect``  ||Q mu + grad U mu||_0^2.
        """
        if name not in self._forms:
            self._forms[name] = _build_form(self, name)
        return self._forms[name]


def _build_form(ld, name):
    ops, space = ld.ops, ld.space
    if name == "mass":
        return build_scaled_mass(space)
    if name == "gap":
        local = cell_weights(space.level)[:, None, None] * ops.trace_gap()
    elif name == "flux":
        local = ops.flux_energy()
    elif name == "bulk":
        local = ops.bulk_energy()
    elif name == "defect":
        local = _gradient_defect(ops)
    else:
        raise KeyError(name)
    A = assemble_matrix(space, local)
    return (0.5 * (A + A.T)).tocsr()


def _gradient_defect(ops):
    """Local matrices of mu -> ||Q mu + grad U mu||_T^2."""
    geo = ops.level.geometry()
    pts, w = triangle_rule_for_degree(2 * ops.kind.p + 2)
    wv = ops.ref.W.values(pts)                                  # (q, nW, 2)
    gv = ops.ref.V.grads(pts)                                   # (q, nV, 2)
    J = geo.jacobian
    JinvT = np.linalg.inv(J).transpose(0, 2, 1)
    q_ref = np.einsum("qia,cin->cqna", wv, ops.Q, optimize=True)
    g_ref = np.einsum("qia,cin->cqna", gv, ops.U, optimize=True)
    vec = np.einsum("cab,cqnb->cqna", J, q_ref) + np.einsum("cab,cqnb->cqna", JinvT, g_ref)
    return np.einsum("q,c,cqna,cqma->cnm", w, geo.det, vec, vec, optimize=True)


class DiagnosticContext:
    """Assembled levels 0..``max_level`` of one solver kind, built lazily."""

    def __init__(self, kind, max_level, hierarchy=None):
        self.kind = kind
        self.hierarchy = hierarchy if hierarchy is not None else MeshHierarchy(max_level + 1)
        self._levels = {}
        self._transfers = {}

    def level(self, ell):
        if ell not in self._levels:
            space = SkeletonSpace(self.hierarchy[ell], self.kind.p)
            ops = build_local(self.hierarchy[ell], self.kind)
            sys_ = assemble(space, self.kind, 1.0, ops)
            self._levels[ell] = LevelData(space, ops, sys_.A, sys_.b)
        return self._levels[ell]

    def injection(self, ell, kind):
        """Injection of ``kind`` from level ``ell - 1`` to ``ell`` (a matrix)."""
        key = (ell, kind)
        if key not in self._transfers:
            c, f = self.level(ell - 1), self.level(ell)
            if kind == "broken":
                self._transfers[key] = broken_injection(c.space, f.space)
            else:
                self._transfers[key] = build_injection(kind, c.space, f.space, c.ops).matrix
        return self._transfers[key]

    def coarse_solver(self, ell):
        key = ("lu", ell)
        if key not in self._transfers:
            self._transfers[key] = spla.splu(self.level(ell).A.tocsc())
        return self._transfers[key]


def broken_injection(coarse_space, fine_space):
    """Negative control: identity on halves of coarse edges, zero on new edges."""
    I = build_injection("I1", coarse_space, fine_space).matrix.tolil()
    inner = fine_space.level.edge_kind[fine_space.dof_edge] != CHILD_OF_EDGE
    for row in np.flatnonzero(inner):
        I.rows[row] = []
        I.data[row] = []
    return I.tocsr()


def _rng(seed, *keys):
    return np.random.default_rng([seed, *keys])


def _interior_vertices(level):
    return np.flatnonzero(~level.boundary_vertices)


def _pair_label(ell):
    return f"{ell - 1}-{ell}"


def _injection_code(injection):
    return {"I0": 0, "I1": 1, "I2": 2, "I3": 3, "broken": 9}[injection]


# ---------------------------------------------------------------- operators

def ritz_quasi_projection(ctx, ell, injection, lam):
    """P lam on level ``ell - 1``: a_{l-1}(P lam, mu) = a_l(lam, I mu)."""
    I = ctx.injection(ell, injection)
    lam = np.asarray(lam, dtype=float)
    rhs = I.T @ (ctx.level(ell).A @ lam)
    return ctx.coarse_solver(ell - 1).solve(rhs)


def hat_traces(ctx, ell):
    """Traces on levels ``ell - 1`` and ``ell`` of every interior coarse hat.

    Returns ``(vertices, coarse (nv, n_c), fine (nv, n_f))``.
    """
    coarse = ctx.hierarchy[ell - 1]
    verts = _interior_vertices(coarse)
    Sc, Sf = ctx.level(ell - 1).space, ctx.level(ell).space
    C = np.zeros((len(verts), Sc.n_dofs))
    F = np.zeros((len(verts), Sf.n_dofs))
    for k, v in enumerate(verts):
        w = np.zeros(coarse.n_vertices)
        w[v] = 1.0
        C[k] = trace_conforming_p1(Sc, w)
        F[k] = trace_conforming_p1(Sf, ctx.hierarchy.prolong_p1(ell, w))
    return verts, C, F


# ---------------------------------------------------------------- checks

def check_identity_IA2(ctx, ell, injection, tol=IDENTITY_TOL):
    """max |I gamma w - gamma w| over interior coarse hats w."""
    I = ctx.injection(ell, injection)
    _, C, F = hat_traces(ctx, ell)
    err = float(np.abs(C @ I.T - F).max()) if len(C) else 0.0
    row = ReportRow("IA2", _pair_label(ell), ctx.kind.method, ctx.kind.p, ctx.kind.tau_label,
                    injection, err, np.nan, err <= tol)
    return AssumptionReport([row])


def check_LS4(ctx, ell, tol=LS4_TOL):
    """Reconstruction of conforming hats: U gamma w = w and Q gamma w = -grad w."""
    ld = ctx.level(ell)
    lv = ld.space.level
    geo = lv.geometry()
    nodes = lagrange_triangle_nodes(max(ctx.kind.p, 1))[0]
    bary = np.stack([1 - nodes[:, 0] - nodes[:, 1], nodes[:, 0], nodes[:, 1]], axis=1)
    # gradients of the barycentric hats per cell
    JinvT = np.linalg.inv(geo.jacobian).transpose(0, 2, 1)
    ref_grads = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    grads = np.einsum("cab,jb->cja", JinvT, ref_grads)           # (C, 3, 2)
    err = 0.0
    for v in _interior_vertices(lv):
        w = np.zeros(lv.n_vertices)
        w[v] = 1.0
        field_ = reconstruct(ld.space, ld.ops, trace_conforming_p1(ld.space, w))
        u, q = field_.cell_values(nodes)
        wv = w[lv.cells]                                          # (C, 3)
        u_exact = wv @ bary.T
        q_exact = -np.einsum("cj,cja->ca", wv, grads)[:, None, :]
        err = max(err, np.abs(u - u_exact).max(), np.abs(q - q_exact).max())
    row = ReportRow("LS4", str(ell), ctx.kind.method, ctx.kind.p, ctx.kind.tau_label, "",
                    float(err), np.nan, err <= tol)
    return AssumptionReport([row])


def check_quasi_orthogonality(ctx, ell, injection, trials=N_TRIALS, seed=0, tol=QO_TOL):
    """max over random lam and hats w of |(Q_l lam - Q_{l-1} P lam, grad w)|,
    normalized by ||Q_l lam||_0 ||grad w||_0."""
    fine, coarse = ctx.level(ell), ctx.level(ell - 1)
    lv_c = coarse.space.level
    verts = _interior_vertices(lv_c)
    geo_c = lv_c.geometry()
    JinvT = np.linalg.inv(geo_c.jacobian).transpose(0, 2, 1)
    ref_grads = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    grads = np.einsum("cab,jb->cja", JinvT, ref_grads)           # (Cc, 3, 2)
    # hat-gradient matrix G: (nv, Cc, 2), constant per coarse cell
    index = {v: k for k, v in enumerate(verts)}
    G = np.zeros((len(verts), lv_c.n_cells, 2))
    for j in range(3):
        for c, v in enumerate(lv_c.cells[:, j]):
            k = index.get(v)
            if k is not None:
                G[k, c] = grads[c, j]
    grad_norm = np.sqrt(np.einsum("kca,c->k", G ** 2, geo_c.area))
    rng = _rng(seed, ell, _injection_code(injection), 11)
    flux_form = fine.form("flux")
    worst = 0.0
    parent = ctx.hierarchy[ell].cell_parent
    for _ in range(trials):
        lam = rng.standard_normal(fine.space.n_dofs)
        lam /= np.linalg.norm(lam)
        P = ritz_quasi_projection(ctx, ell, injection, lam)
        qf = reconstruct(fine.space, fine.ops, lam).q_integrals()
        qc = reconstruct(coarse.space, coarse.ops, P).q_integrals()
        diff = qc * 0.0
        np.add.at(diff, parent, qf)
        diff -= qc
        vals = np.abs(np.einsum("kca,ca->k", G, diff))
        qnorm = np.sqrt(lam @ (flux_form @ lam))
        worst = max(worst, float((vals / (qnorm * grad_norm)).max()))
    row = ReportRow("QO", _pair_label(ell), ctx.kind.method, ctx.kind.p, ctx.kind.tau_label,
                    injection, worst, np.nan, worst <= tol)
    return AssumptionReport([row])


def ls_constants(ctx, ell):
    """Constants of LS1, LS2 (flux and bulk parts), LS3 and LS6 on one level."""
    ld = ctx.level(ell)
    h2 = ld.h ** 2
    M, gap, flux = ld.form("mass"), ld.form("gap"), ld.form("flux")
    out = {
        "LS1": sup_ratio(gap, h2 * flux),
        "LS2-q": sup_ratio(h2 * flux, M),
        "LS2-u": sup_ratio(ld.form("bulk"), M),
        "LS3": sup_ratio(h2 * ld.form("defect"), gap, semidefinite=True),
        "LS6-lower": 1.0 / sup_ratio(M, ld.A),
        "LS6-upper": sup_ratio(h2 * ld.A, M),
    }
    return out


def check_LS(ctx, levels):
    """Rows for LS1, LS2, LS3, LS6 on ``levels`` with level-to-level growth."""
    levels = list(levels)
    consts = [ls_constants(ctx, ell) for ell in levels]
    report = AssumptionReport()
    for name in consts[0]:
        report.extend(_growth_rows(name, [str(ell) for ell in levels], [c[name] for c in consts],
                                   ctx, lower=(name == "LS6-lower")))
    return report


def injection_stability(ctx, ell, injection):
    """IA1 constant sup ||I lam||_l / ||lam||_{l-1} (scaled norms)."""
    I = ctx.injection(ell, injection)
    N = (I.T @ ctx.level(ell).form("mass") @ I).tocsr()
    return float(np.sqrt(sup_ratio(N, ctx.level(ell - 1).form("mass"))))


def check_IA1(ctx, pairs, injection):
    pairs = list(pairs)
    consts = [injection_stability(ctx, ell, injection) for ell in pairs]
    return AssumptionReport(_growth_rows("IA1", [_pair_label(e) for e in pairs], consts, ctx,
                                         injection, limit=IA1_GROWTH_LIMIT))


def _projection_operators(ctx, ell, injection):
    """Sparse-friendly LinearOperators for I P and the fine A."""
    I = ctx.injection(ell, injection)
    A = ctx.level(ell).A
    lu = ctx.coarse_solver(ell - 1)
    n = A.shape[0]

    def ip(x):
        return I @ lu.solve(I.T @ (A @ x))
    return I, A, lu, n, ip


def energy_constants(ctx, ell, injection):
    """(ES-I, ES-P, A2) sup-ratios for the level pair (ell-1, ell)."""
    I, A, lu, n, ip = _projection_operators(ctx, ell, injection)
    Ac = ctx.level(ell - 1).A
    es_i = sup_ratio((I.T @ A @ I).tocsr(), Ac)
    if n <= DENSE_LIMIT:
        Ad = A.toarray()
        X = lu.solve(np.asarray(I.T @ Ad))                     # P as a dense map
        E = np.eye(n) - I @ X
        es_p = sup_ratio(X.T @ Ac.toarray() @ X, Ad)
        a2 = sup_ratio(E.T @ Ad @ E, Ad)
    else:
        def es_p_mv(x):
            y = lu.solve(I.T @ (A @ x))
            return A @ (I @ y)

        def a2_mv(x):
            e = x - ip(x)
            ae = A @ e
            return ae - A @ (I @ lu.solve(I.T @ ae))
        es_p = _sup_ratio_op(es_p_mv, A, n)
        a2 = _sup_ratio_op(a2_mv, A, n)
    return es_i, es_p, a2


def _sup_ratio_op(matvec, D, n, tol=1e-8, seed=0):
    op = spla.LinearOperator((n, n), matvec=matvec, dtype=float)
    lu = spla.splu(sp.csc_matrix(D))
    Minv = spla.LinearOperator((n, n), matvec=lu.solve, dtype=float)
    v0 = np.random.default_rng(seed).standard_normal(n)
    return float(spla.eigsh(op, k=1, M=D, Minv=Minv, which="LA", v0=v0, tol=tol,
                            return_eigenvectors=False)[0])


def check_energy_stability(ctx, pairs, injection):
    """Rows ES-I, ES-P and A2 over consecutive level pairs."""
    pairs = list(pairs)
    consts = [energy_constants(ctx, ell, injection) for ell in pairs]
    labels = [_pair_label(e) for e in pairs]
    report = AssumptionReport()
    for k, name in enumerate(("ES-I", "ES-P", "A2")):
        report.extend(_growth_rows(name, labels, [c[k] for c in consts], ctx, injection))
    return report


def a1_ratios(ctx, ell, injection, trials=N_TRIALS, seed=0):
    """A1 ratios |a(lam - I P lam, lam)| / (h^2 ||A lam||_l^2) and the variant
    normalized by the largest eigenvalue of the operator A_l instead of h^-2.

    Returns (sampled h^2 ratio, sampled eigenvalue ratio, dense sup of the
    h^2 ratio or NaN when the level is too large).
    """
    I, A, lu, n, ip = _projection_operators(ctx, ell, injection)
    ld = ctx.level(ell)
    M = ld.form("mass")
    Mlu = spla.splu(M.tocsc())
    lam_max = sup_ratio(A, M)
    h2 = ld.h ** 2
    rng = _rng(seed, ell, _injection_code(injection), 21)
    worst = 0.0
    for _ in range(trials):
        lam = rng.standard_normal(n)
        num = abs(lam @ (A @ (lam - ip(lam))))
        Al = A @ lam
        worst = max(worst, num / (h2 * (Al @ Mlu.solve(Al))))
    dense = np.nan
    if n <= DENSE_LIMIT:
        Ad = A.toarray()
        E = np.eye(n) - I @ lu.solve(np.asarray(I.T @ Ad))
        Nd = Ad @ E
        Dd = h2 * Ad @ np.linalg.solve(M.toarray(), Ad)
        vals = sla.eigh(0.5 * (Nd + Nd.T), 0.5 * (Dd + Dd.T), eigvals_only=True)
        dense = float(np.abs(vals).max())
    return worst, worst * h2 * lam_max, dense


def check_A1(ctx, pairs, injection):
    """A1 rows (sampled h^2 form, required not to increase) and A1-eig rows."""
    pairs = list(pairs)
    res = [a1_ratios(ctx, ell, injection) for ell in pairs]
    labels = [_pair_label(e) for e in pairs]
    report = AssumptionReport()
    report.extend(_growth_rows("A1", labels, [r[0] for r in res], ctx, injection, limit=1.0))
    report.extend(_growth_rows("A1-eig", labels, [r[1] for r in res], ctx, injection,
                               limit=GROWTH_LIMIT))
    return report


# ---------------------------------------------------------------- convergence

def exact_solution(x, y):
    return np.sin(np.pi * x) * np.sin(np.pi * y)


def exact_gradient(x, y):
    return (np.pi * np.cos(np.pi * x) * np.sin(np.pi * y),
            np.pi * np.sin(np.pi * x) * np.cos(np.pi * y))


def manufactured_load(x, y):
    return 2.0 * np.pi ** 2 * exact_solution(x, y)


@dataclass
class ConvergenceRow:
    level: int
    h: float
    dofs: int
    trace_error: float
    u_error: float
    q_error: float
    trace_order: float = np.nan
    u_order: float = np.nan
    q_order: float = np.nan


def solve_manufactured(space, kind, ops=None):
    """Direct solve of the manufactured problem: returns (lam, BulkField)."""
    system = assemble(space, kind, manufactured_load, ops)
    lam = spla.spsolve(system.A.tocsc(), system.b)
    return lam, reconstruct(space, system.ops, lam, manufactured_load)


def convergence_study(kind, levels, hierarchy=None):
    """Errors of the manufactured solution u = sin(pi x) sin(pi y) per level."""
    levels = list(levels)
    hierarchy = hierarchy if hierarchy is not None else MeshHierarchy(max(levels) + 1)
    rows = []
    for ell in levels:
        space = SkeletonSpace(hierarchy[ell], kind.p)
        lam, field_ = solve_manufactured(space, kind)
        trace_err = skeleton_norm(space, project_boundary(space, exact_solution) - lam)
        eu, eq = l2_errors(space, field_, exact_solution, exact_gradient)
        row = ConvergenceRow(ell, hierarchy[ell].h, space.n_dofs, trace_err, eu, eq)
        if rows:
            prev = rows[-1]
            r = np.log(prev.h / row.h)
            row.trace_order = np.log(prev.trace_error / trace_err) / r
            row.u_order = np.log(prev.u_error / eu) / r
            row.q_order = np.log(prev.q_error / eq) / r
        rows.append(row)
    return rows


def check_LS5(kind, levels, min_order=1.9, hierarchy=None):
    rows = convergence_study(kind, levels, hierarchy)
    last = rows[-1]
    return AssumptionReport([ReportRow("LS5", f"{rows[-2].level}-{last.level}", kind.method, kind.p,
                                       kind.tau_label, "", float(last.trace_order), np.nan,
                                       bool(last.trace_order >= min_order))])


# ---------------------------------------------------------------- suite

def run_suite(kind, max_level=4, injections=("I0", "I1", "I2", "I3"), seed=0,
              hierarchy=None, include_broken=False):
    """Full report on internal levels 1..``max_level`` (pairs up to that level)."""
    ctx = DiagnosticContext(kind, max_level, hierarchy)
    levels = range(1, max_level + 1)
    pairs = range(2, max_level + 1)
    report = AssumptionReport()
    injections = list(injections) + (["broken"] if include_broken else [])
    for inj in injections:
        for ell in pairs:
            report.extend(check_identity_IA2(ctx, ell, inj))
    for ell in (1, 2):
        report.extend(check_LS4(ctx, ell))
    report.extend(check_LS(ctx, levels))
    for inj in injections:
        for ell in pairs:
            report.extend(check_quasi_orthogonality(ctx, ell, inj, seed=seed))
    for inj in injections:
        if inj == "broken":
            continue
        report.extend(check_IA1(ctx, pairs, inj))
        report.extend(check_energy_stability(ctx, pairs, inj))
        report.extend(check_A1(ctx, [e for e in pairs if e <= 3], inj))
    if max_level >= 2:
        report.extend(check_LS5(kind, range(max(1, max_level - 2), max_level + 1),
                                hierarchy=ctx.hierarchy))
    return report
