"""Smoothers, the V-cycle preconditioner and the stationary outer iteration."""
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from pyamg.relaxation.relaxation import block_gauss_seidel, gauss_seidel

from .hdg import assemble, build_local
from .skeleton import SkeletonSpace, build_scaled_mass
from .transfer import build_injection, restrict

MAX_ITERATIONS = 500
DIVERGENCE_GROWTH = 10.0


SMOOTHERS = ("sgs", "gs", "bgs", "jacobi")


@dataclass(frozen=True)
class Smoother:
    """Pointwise or edgewise relaxation used as R in the V-cycle.

    ``"sgs"``
        symmetric Gauss-Seidel: each step is an ascending sweep followed by
        a descending one, which is self-adjoint;
    ``"gs"``
        one Gauss-Seidel sweep per step, ascending, the adjoint descending;
    ``"bgs"``
        as ``"gs"`` with the p+1 unknowns of an edge relaxed together;
    ``"jacobi"``
        damped Jacobi with factor ``omega`` (self-adjoint).
    """
    kind: str = "sgs"
    omega: float = 2.0 / 3.0

    def __post_init__(self):
        if self.kind not in SMOOTHERS:
            raise ValueError(f"unknown smoother {self.kind!r}")
        if not 0.0 < self.omega <= 1.0:
            raise ValueError("Jacobi damping must lie in (0, 1]")

    @classmethod
    def parse(cls, text):
        """``"sgs"``, ``"gs"``, ``"bgs"``, ``"jacobi"`` or ``"jacobi:0.8"``."""
        name, _, omega = str(text).strip().lower().partition(":")
        name = {"gauss-seidel": "gs", "symmetric-gs": "sgs", "ssor": "sgs"}.get(name, name)
        return cls(name, float(omega)) if omega else cls(name)

    @property
    def label(self):
        return f"jacobi:{self.omega:g}" if self.kind == "jacobi" else self.kind


def smooth(A, x, b, smoother, adjoint=False, diagonal=None, blocksize=1):
    """One smoothing step x + R (b - A x); ``adjoint`` selects R^T.

    ``A`` may be a BSR matrix with ``blocksize`` blocks for ``"bgs"``.
    """
    x = np.array(x, dtype=float)
    b = np.asarray(b, dtype=float)
    if smoother.kind == "jacobi":
        d = A.diagonal() if diagonal is None else diagonal
        if np.any(d == 0.0):
            raise ZeroDivisionError("zero diagonal entry in the smoother")
        return x + smoother.omega * (b - A @ x) / d
    if smoother.kind == "sgs":
        gauss_seidel(A, x, b, sweep="symmetric")
        return x
    first = "backward" if adjoint else "forward"
    if smoother.kind == "bgs":
        if not sp.isspmatrix_bsr(A):
            A = A.tobsr(blocksize=(blocksize, blocksize))
        block_gauss_seidel(A, x, b, sweep=first, blocksize=blocksize)
        return x
    gauss_seidel(A, x, b, sweep=first)
    return x


@dataclass
class Level:
    space: SkeletonSpace
    ops: object
    A: object
    b: np.ndarray
    transfer: object = None          # injection from the next coarser level
    diagonal: np.ndarray = None
    blocked: object = None           # edge-block copy of A for "bgs"


@dataclass
class LevelStack:
    """Operators of all levels 0..L used by the V-cycle."""
    levels: list
    kind: object
    injection: str
    smoother: Smoother = field(default_factory=Smoother)
    m: int = 1
    restriction: str = "euclidean"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("at least one smoothing step is required")
        self._coarse = sla.cho_factor(self.levels[0].A.toarray())
        self._masses = {}
        nb = self.kind.p + 1
        for lv in self.levels:
            if lv.diagonal is None:
                lv.diagonal = lv.A.diagonal()
            if self.smoother.kind == "bgs" and lv.blocked is None:
                lv.blocked = lv.A.tobsr(blocksize=(nb, nb))

    @property
    def top(self):
        return len(self.levels) - 1

    def coarse_solve(self, rhs):
        return sla.cho_solve(self._coarse, rhs)

    def mass(self, ell):
        if ell not in self._masses:
            self._masses[ell] = build_scaled_mass(self.levels[ell].space)
        return self._masses[ell]

    def smooth(self, ell, x, mu, step):
        """Smoothing step number ``step`` (R^step) on level ``ell``."""
        lv = self.levels[ell]
        A = lv.blocked if self.smoother.kind == "bgs" else lv.A
        return smooth(A, x, mu, self.smoother, adjoint=(step % 2 == 0),
                      diagonal=lv.diagonal, blocksize=self.kind.p + 1)

    def restrict(self, ell, r):
        """Residual on level ``ell`` mapped to level ``ell - 1``."""
        T = self.levels[ell].transfer
        if self.restriction == "euclidean":
            return restrict(T, r)
        return restrict(T, r, "scaled", self.mass(ell - 1), self.mass(ell))


def build_levels(hierarchy, kind, top, f=1.0):
    """Spaces, local solvers and condensed systems of levels 0..``top``.

    The load ``f`` enters the right-hand side of every level; only the top
    one is used by :func:`solve_stationary`.
    """
    levels = []
    for ell in range(top + 1):
        space = SkeletonSpace(hierarchy[ell], kind.p)
        ops = build_local(hierarchy[ell], kind)
        system = assemble(space, kind, f, ops)
        levels.append(Level(space, ops, system.A, system.b))
    return levels


def with_injection(levels, injection):
    """Copies of ``levels`` carrying injections of the given kind."""
    out = [replace(levels[0], transfer=None)]
    for prev, lv in zip(levels[:-1], levels[1:]):
        out.append(replace(lv, transfer=build_injection(injection, prev.space, lv.space, prev.ops)))
    return out


def build_stack(hierarchy, kind, injection, top, smoother=None, m=1, f=1.0,
                restriction="euclidean"):
    """LevelStack of levels 0..``top`` of ``hierarchy`` for solver ``kind``."""
    levels = with_injection(build_levels(hierarchy, kind, top, f), injection)
    return LevelStack(levels, kind, injection, smoother or Smoother(), m, restriction)


def vcycle(stack, ell, mu):
    """Apply the V-cycle operator B_ell to ``mu``."""
    mu = np.asarray(mu, dtype=float)
    if ell == 0:
        return stack.coarse_solve(mu)
    lv = stack.levels[ell]
    m = stack.m
    x = np.zeros_like(mu)
    for i in range(1, m + 1):
        x = stack.smooth(ell, x, mu, i)
    q = vcycle(stack, ell - 1, stack.restrict(ell, mu - lv.A @ x))
    x = x + lv.transfer.matrix @ q
    for i in range(m + 1, 2 * m + 1):
        x = stack.smooth(ell, x, mu, i)
    return x


@dataclass
class SolveResult:
    x: np.ndarray
    iterations: int
    residuals: list
    converged: bool

    @property
    def rho(self):
        """Geometric mean residual reduction per iteration."""
        if self.iterations == 0 or self.residuals[0] == 0.0:
            return 0.0
        return float((self.residuals[-1] / self.residuals[0]) ** (1.0 / self.iterations))


def solve_stationary(stack, b=None, tol=1e-6, max_iterations=MAX_ITERATIONS):
    """x_{k+1} = x_k + B (b - A x_k) from x_0 = 0 until ||r||/||b|| < tol.

    Stops unconverged after ``max_iterations`` or when the residual grows
    tenfold above its initial value.
    """
    top = stack.levels[-1]
    b = top.b if b is None else np.asarray(b, dtype=float)
    norm_b = np.linalg.norm(b)
    if norm_b == 0.0:
        raise ValueError("right-hand side must be nonzero")
    x = np.zeros_like(b)
    r = b.copy()
    history = [1.0]
    for k in range(1, max_iterations + 1):
        x = x + vcycle(stack, stack.top, r)
        r = b - top.A @ x
        history.append(np.linalg.norm(r) / norm_b)
        if history[-1] < tol:
            return SolveResult(x, k, history, True)
        if not np.isfinite(history[-1]) or history[-1] > DIVERGENCE_GROWTH:
            break
    return SolveResult(x, len(history) - 1, history, False)
