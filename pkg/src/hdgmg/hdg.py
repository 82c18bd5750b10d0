"""Hybridized local solvers (LDG-H, RT-H, BDM-H) and static condensation.

Every cell T solves, for a trace ``lam`` on its boundary,

    (q, p)_T - (u, div p)_T       = -<lam, p.n>_dT
    (div q, v)_T + tau <u, v>_dT  =  tau <lam, v>_dT  (+ (f, v)_T)

for all (v, p) in V_T x W_T.  The second line is the flux equation with
the volume term integrated by parts once.  The resulting maps
lam -> (U lam, Q lam) define the condensed form

    a(lam, mu) = (Q lam, Q mu) + tau <U lam - lam, U mu - mu>_dT,

which is assembled from this energy expression so that it is symmetric by
construction.

All cell matrices are computed from reference-element tensors.  Vector
fields are pushed forward as w(x) = J w^(x^); divergence, the pairing
(w, grad v) and boundary fluxes then reduce to reference integrals times
det J.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .basis import (REF_EDGE_LENGTHS, REF_NORMALS, ScalarBasis, VectorBasis,
                    edge_points, lagrange_1d)
from .quadrature import gauss_line, gauss_triangle, triangle_rule_for_degree

METHODS = ("LDG-H", "RT-H", "BDM-H")
#: collapsed-rule order for integrals of non-polynomial data
SMOOTH_TRIANGLE_POINTS = 8


class SingularLocalSystem(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class SolverKind:
    """HDG method, degree and stabilization rule.

    ``tau_over_h=True`` means tau = tau_scale / h on each level, otherwise
    tau = tau_scale.  RT-H and BDM-H always use tau = 0.
    """
    method: str = "LDG-H"
    p: int = 1
    tau_scale: float = 1.0
    tau_over_h: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.p < 1:
            raise ValueError("degree must be at least 1")
        if self.method == "BDM-H" and self.p < 2:
            raise ValueError("BDM-H requires p >= 2")
        if self.method == "LDG-H" and self.tau_scale <= 0:
            raise ValueError("LDG-H requires tau > 0")

    @classmethod
    def ldg(cls, p, tau="1/h"):
        """LDG-H with tau given as "1/h", "1" or a float (constant)."""
        if tau == "1/h":
            return cls("LDG-H", p, 1.0, True)
        return cls("LDG-H", p, float(tau), False)

    @classmethod
    def rt(cls, p):
        return cls("RT-H", p, 0.0, False)

    @classmethod
    def bdm(cls, p):
        return cls("BDM-H", p, 0.0, False)

    def tau(self, h):
        if self.method != "LDG-H":
            return 0.0
        return self.tau_scale / h if self.tau_over_h else self.tau_scale

    @property
    def tau_label(self):
        if self.method != "LDG-H":
            return "0"
        s = "1" if self.tau_scale == 1.0 else repr(self.tau_scale)
        return f"{s}/h" if self.tau_over_h else s

    @property
    def bulk_degree(self):
        return self.p - 1 if self.method == "BDM-H" else self.p


class ReferenceElement:
    """Reference-triangle tensors of one (method, p) pair."""

    def __init__(self, method, p):
        self.method, self.p = method, p
        self.V = ScalarBasis(p - 1 if method == "BDM-H" else p)
        self.W = VectorBasis(p, raviart_thomas=(method == "RT-H"))
        nV, nW = self.V.dim, self.W.dim
        deg = 2 * (p + 1)
        pts, w = triangle_rule_for_degree(deg)
        phi = self.V.values(pts)                       # (q, nV)
        wv = self.W.values(pts)                        # (q, nW, 2)
        div = self.W.divergence(pts)                   # (q, nW)
        self.mass_tensor = np.einsum("q,qia,qjb->abij", w, wv, wv)   # (2, 2, nW, nW)
        self.div_v = np.einsum("q,qi,qj->ij", w, div, phi)            # (nW, nV)
        self.mass_v = np.einsum("q,qi,qj->ij", w, phi, phi)
        self.w_integral = np.einsum("q,qia->ia", w, wv)               # (nW, 2)
        self.v_integral = w @ phi                                     # (nV,)

        t, wt = gauss_line(p + 2)
        L = lagrange_1d(p, t)                                         # (qe, p+1)
        self.edge_flux = np.empty((3, nW, p + 1))
        self.edge_vv = np.empty((3, nV, nV))
        self.edge_vl = np.empty((3, nV, p + 1))
        for e in range(3):
            xe = edge_points(e, t)
            phie = self.V.values(xe)
            wn = self.W.values(xe) @ REF_NORMALS[e]
            # flux term carries the reference edge length; the others are per unit length
            self.edge_flux[e] = REF_EDGE_LENGTHS[e] * np.einsum("q,qi,qk->ik", wt, wn, L)
            self.edge_vv[e] = np.einsum("q,qi,qj->ij", wt, phie, phie)
            self.edge_vl[e] = np.einsum("q,qi,qk->ik", wt, phie, L)
        self.edge_ll = np.einsum("q,qk,ql->kl", wt, L, L)

    @property
    def n_local(self):
        return 3 * (self.p + 1)


@lru_cache(maxsize=None)
def reference_element(method, p):
    return ReferenceElement(method, p)


@dataclass
class LocalOperators:
    """Batched per-cell local solvers of one level.

    ``U`` (C, nV, nloc) and ``Q`` (C, nW, nloc) map local trace coefficients
    to bulk coefficients; ``A`` (C, nloc, nloc) is the condensed cell matrix.
    """
    kind: SolverKind
    ref: ReferenceElement
    level: object
    tau: float
    mass_w: np.ndarray
    div_v: np.ndarray
    flux: np.ndarray
    bnd_vv: np.ndarray
    bnd_vl: np.ndarray
    bnd_ll: np.ndarray
    system: np.ndarray
    U: np.ndarray
    Q: np.ndarray
    A: np.ndarray

    @property
    def n_cells(self):
        return self.U.shape[0]

    def trace_gap(self):
        """Local matrices of mu -> int_dT (U mu - mu)^2 (unweighted)."""
        U = self.U
        G = np.einsum("cin,cij,cjm->cnm", U, self.bnd_vv, U, optimize=True)
        X = U.transpose(0, 2, 1) @ self.bnd_vl
        return _symmetrize(G - X - X.transpose(0, 2, 1) + self.bnd_ll)

    def flux_energy(self):
        """Local matrices of mu -> (Q mu, Q mu)_T."""
        return _symmetrize(np.einsum("cin,cij,cjm->cnm", self.Q, self.mass_w, self.Q, optimize=True))

    def bulk_energy(self):
        """Local matrices of mu -> (U mu, U mu)_T."""
        det = self.level.geometry().det
        return _symmetrize(det[:, None, None] * np.einsum("cin,ij,cjm->cnm", self.U, self.ref.mass_v, self.U, optimize=True))


def _symmetrize(a):
    return 0.5 * (a + a.transpose(0, 2, 1))


def build_local(level, kind):
    """Local solvers of ``kind`` on every cell of ``level``.

    Raises
    ------
    SingularLocalSystem
        If a cell's local system cannot be solved (unsupported kind/degree).
    """
    ref = reference_element(kind.method, kind.p)
    geo = level.geometry()
    tau = kind.tau(level.h)
    p1 = kind.p + 1
    nC = level.n_cells
    nV, nW, nloc = ref.V.dim, ref.W.dim, ref.n_local
    det = geo.det
    G = np.einsum("cka,ckb->cab", geo.jacobian, geo.jacobian)
    mass_w = det[:, None, None] * (G.reshape(nC, 4) @ ref.mass_tensor.reshape(4, -1)).reshape(nC, nW, nW)
    div_v = det[:, None, None] * ref.div_v[None]
    flux = np.zeros((nC, nW, nloc))
    bnd_vv = np.zeros((nC, nV, nV))
    bnd_vl = np.zeros((nC, nV, nloc))
    bnd_ll = np.zeros((nC, nloc, nloc))
    for e in range(3):
        le = geo.edge_lengths[:, e, None, None]
        sl = slice(e * p1, (e + 1) * p1)
        flux[:, :, sl] = det[:, None, None] * ref.edge_flux[e]
        bnd_vv += le * ref.edge_vv[e]
        bnd_vl[:, :, sl] = le * ref.edge_vl[e]
        bnd_ll[:, sl, sl] = le * ref.edge_ll

    K = np.zeros((nC, nW + nV, nW + nV))
    K[:, :nW, :nW] = mass_w
    K[:, :nW, nW:] = -div_v
    K[:, nW:, :nW] = div_v.transpose(0, 2, 1)
    K[:, nW:, nW:] = tau * bnd_vv
    rhs = np.concatenate([-flux, tau * bnd_vl], axis=1)
    X = _solve_cells(K, rhs)
    Q, U = X[:, :nW], X[:, nW:]

    ops = LocalOperators(kind, ref, level, tau, mass_w, div_v, flux, bnd_vv, bnd_vl,
                         bnd_ll, K, U, Q, None)
    A = ops.flux_energy()
    if tau != 0.0:
        A = A + tau * ops.trace_gap()
    ops.A = A
    return ops


def _solve_cells(K, rhs):
    scale = np.abs(K).max(axis=(1, 2))
    try:
        X = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        for c in range(len(K)):
            try:
                np.linalg.solve(K[c], rhs[c])
            except np.linalg.LinAlgError:
                raise SingularLocalSystem(f"local system of cell {c} is singular") from None
        raise
    probe = np.linalg.cond(K[:1] / scale[:1, None, None])
    if not np.isfinite(probe).all() or probe.max() > 1e12:
        raise SingularLocalSystem(f"local system of cell 0 is singular (cond {probe.max():.2e})")
    return X


def load_integrals(level, ref, f):
    """(f, v_i)_T for every cell: (C, nV).  ``f`` is None, a number or f(x, y)."""
    det = level.geometry().det
    if f is None:
        return np.zeros((level.n_cells, ref.V.dim))
    if np.isscalar(f):
        return float(f) * det[:, None] * ref.v_integral[None]
    pts, w = gauss_triangle(SMOOTH_TRIANGLE_POINTS)
    phys = level.geometry().to_physical(pts)                       # (C, q, 2)
    vals = np.asarray(f(phys[..., 0], phys[..., 1]), dtype=float)
    return det[:, None] * np.einsum("cq,q,qi->ci", vals, w, ref.V.values(pts))


def local_load(ops, f):
    """Lift of ``f``: returns (Uf (C, nV), Qf (C, nW), local rhs (C, nloc))."""
    F = load_integrals(ops.level, ops.ref, f)
    nW = ops.ref.W.dim
    rhs = np.concatenate([np.zeros((ops.n_cells, nW)), F], axis=1)
    X = np.linalg.solve(ops.system, rhs[..., None])[..., 0]
    b = np.einsum("cin,ci->cn", ops.U, F)
    return X[:, nW:], X[:, :nW], b


def local_condensed(ops, f=None):
    """Cell matrices A_T and load vectors b_T."""
    return ops.A, local_load(ops, f)[2]


def assemble_matrix(space, local):
    """Scatter cell matrices (C, nloc, nloc) into a CSR matrix over ``space``."""
    dofs = space.cell_dofs
    rows = np.broadcast_to(dofs[:, :, None], local.shape)
    cols = np.broadcast_to(dofs[:, None, :], local.shape)
    keep = (rows >= 0) & (cols >= 0)
    n = space.n_dofs
    return sp.csr_matrix((local[keep], (rows[keep], cols[keep])), shape=(n, n))


@dataclass
class CondensedSystem:
    A: sp.csr_matrix
    b: np.ndarray
    ops: LocalOperators
    space: object


def assemble(space, kind, f=None, ops=None):
    """Global condensed system a(lam, mu) = b(mu) on ``space``."""
    ops = build_local(space.level, kind) if ops is None else ops
    A_loc, b_loc = local_condensed(ops, f)
    A = assemble_matrix(space, A_loc)
    A = 0.5 * (A + A.T)
    return CondensedSystem(A.tocsr(), space.scatter_add(b_loc), ops, space)


@dataclass
class BulkField:
    """Cellwise coefficients of u (C, nV) and q (C, nW)."""
    ops: LocalOperators
    u: np.ndarray
    q: np.ndarray

    def eval_u(self, cells, xhat):
        """u at reference points ``xhat`` (N, 2) of ``cells`` (N,)."""
        phi = self.ops.ref.V.values(xhat)
        return np.einsum("ni,ni->n", phi, self.u[cells])

    def eval_q(self, cells, xhat):
        wv = self.ops.ref.W.values(xhat)                       # (N, nW, 2)
        ref = np.einsum("nia,ni->na", wv, self.q[cells])
        return np.einsum("nab,nb->na", self.ops.level.geometry().jacobian[cells], ref)

    def cell_values(self, xhat):
        """u (C, q) and q (C, q, 2) at the same reference points in every cell."""
        phi = self.ops.ref.V.values(xhat)
        wv = self.ops.ref.W.values(xhat)
        u = np.einsum("qi,ci->cq", phi, self.u)
        ref = np.einsum("qia,ci->cqa", wv, self.q)
        q = np.einsum("cab,cqb->cqa", self.ops.level.geometry().jacobian, ref)
        return u, q

    def q_integrals(self):
        """int_T q dx per cell: (C, 2)."""
        geo = self.ops.level.geometry()
        ref = np.einsum("ia,ci->ca", self.ops.ref.w_integral, self.q)
        return geo.det[:, None] * np.einsum("cab,cb->ca", geo.jacobian, ref)


def reconstruct(space, ops, lam, f=None):
    """Bulk solution u = U lam + U f, q = Q lam + Q f."""
    loc = space.gather(lam)
    u = np.einsum("cin,cn->ci", ops.U, loc)
    q = np.einsum("cin,cn->ci", ops.Q, loc)
    if f is not None:
        uf, qf, _ = local_load(ops, f)
        u, q = u + uf, q + qf
    return BulkField(ops, u, q)


def flux_balance(space, ops, lam, f=None):
    """Vector of sum_T <q.n + tau (u - lam), mu>_dT over the skeleton basis."""
    field = reconstruct(space, ops, lam, f)
    loc = space.gather(lam)
    r = (np.einsum("cin,ci->cn", ops.flux, field.q)
         + ops.tau * (np.einsum("cin,ci->cn", ops.bnd_vl, field.u)
                      - np.einsum("cnm,cm->cn", ops.bnd_ll, loc)))
    return space.scatter_add(r)


def flux_balance_residual(space, ops, lam, f=None):
    """Largest absolute flux-balance functional; vanishes at the solution."""
    return float(np.abs(flux_balance(space, ops, lam, f)).max())


def l2_errors(space, field, u_exact, grad_exact):
    """(||u - u_h||_0, ||grad u + q_h||_0) with a high-order cell rule."""
    pts, w = gauss_triangle(SMOOTH_TRIANGLE_POINTS)
    geo = space.level.geometry()
    phys = geo.to_physical(pts)
    uh, qh = field.cell_values(pts)
    eu = u_exact(phys[..., 0], phys[..., 1]) - uh
    gx, gy = grad_exact(phys[..., 0], phys[..., 1])
    eq = np.stack([gx, gy], axis=-1) + qh
    err_u = np.sqrt(np.sum(geo.det[:, None] * w * eu ** 2))
    err_q = np.sqrt(np.sum(geo.det[:, None] * w * (eq ** 2).sum(-1)))
    return float(err_u), float(err_q)
