"""Geometric multigrid for hybridized discontinuous Galerkin discretizations
of the Poisson problem on nested triangular meshes."""
from .hdg import SolverKind, assemble, build_local, reconstruct
from .mesh import MeshHierarchy
from .multigrid import LevelStack, Smoother, build_stack, solve_stationary, vcycle
from .skeleton import SkeletonSpace
from .transfer import INJECTION_KINDS, build_injection

__version__ = "0.1.0"

__all__ = ["INJECTION_KINDS", "LevelStack", "MeshHierarchy", "SkeletonSpace", "Smoother",
           "SolverKind", "assemble", "build_injection", "build_local", "build_stack",
           "reconstruct", "solve_stationary", "vcycle"]
