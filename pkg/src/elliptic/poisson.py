from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.sparse.linalg import splu

from src.fields.domains import PlanarDomainGrid
from src.fields.field import GridField
from src.fields.grids import HolderIndex
from src.fields.holder import holder_norm
from src.utils.errors import SolverError
from src.utils.logging import logger


@dataclass(frozen=True, eq=False)
class PoissonProblem:
    """
    Family of Dirichlet problems  Laplace_tau h = f,  h = phi on the planar boundary.

    Attributes:
        domain: Planar domain (disc or stadium-strip)
        rhs: Values of f at the interior mesh nodes, shape (n_int, ...torus)
        bc: Values of phi at the mesh-boundary points, shape (n_mb, ...torus)
    """
    domain: PlanarDomainGrid
    rhs: np.ndarray
    bc: np.ndarray

    def __post_init__(self):
        n_int = self.domain.interior_nodes.size
        n_mb = self.domain.mesh_boundary_nodes.size
        if np.shape(self.rhs)[0] != n_int:
            raise ValueError(f"rhs has {np.shape(self.rhs)[0]} rows, domain has {n_int} interior nodes")
        if np.shape(self.bc)[0] != n_mb:
            raise ValueError(f"bc has {np.shape(self.bc)[0]} rows, domain has {n_mb} boundary points")
        if np.shape(self.rhs)[1:] != np.shape(self.bc)[1:]:
            raise ValueError("rhs and bc must share their torus shape")
        if not (np.all(np.isfinite(self.rhs)) and np.all(np.isfinite(self.bc))):
            raise ValueError("Poisson data must be finite")

    @classmethod
    def from_fields(cls, rhs: GridField, bc: GridField) -> "PoissonProblem":
        return cls(rhs.domain, rhs.values, bc.values)


@lru_cache(maxsize=8)
def factorized_laplacian(domain: PlanarDomainGrid):
    """Sparse LU of the interior Laplacian block, shared by all torus slices."""
    L_II, _ = domain.laplacian_blocks()
    try:
        lu = splu(L_II.tocsc())
    except RuntimeError as e:
        raise SolverError(f"singular discrete Laplacian on {domain.kind}: {e}") from e
    logger.debug(f"Factorized {domain.kind} Laplacian with {L_II.shape[0]} unknowns")
    return lu


def solve_interior(domain: PlanarDomainGrid, rhs: np.ndarray, bc: np.ndarray) -> np.ndarray:
    """Interior values of the discrete Dirichlet problem for every torus slice at once."""
    _, L_IB = domain.laplacian_blocks()
    rhs = np.asarray(rhs)
    bc = np.asarray(bc)
    rest = rhs.shape[1:]
    b = rhs.reshape(rhs.shape[0], -1) - np.asarray(L_IB @ bc.reshape(bc.shape[0], -1))
    lu = factorized_laplacian(domain)
    if np.iscomplexobj(b):
        u = lu.solve(np.ascontiguousarray(b.real)) + 1j * lu.solve(np.ascontiguousarray(b.imag))
    else:
        u = lu.solve(np.ascontiguousarray(b))
    return u.reshape((rhs.shape[0],) + rest)


def poisson_family_solve(problem: PoissonProblem, torus=None, tol: float = 1e-8) -> GridField:
    """
    Solve Laplace_tau h = f with h = phi on the boundary, slice by slice in the torus.

    Args:
        problem: Poisson family
        torus: Torus grid of the trailing axes (optional, for the returned field)
        tol: Relative residual accepted from the direct solve

    Returns:
        Mesh field (interior nodes followed by mesh-boundary points)

    Raises:
        SolverError: If the discrete system is singular or the residual is too large
    """
    domain = problem.domain
    u_int = solve_interior(domain, problem.rhs, problem.bc)
    residual = domain.laplacian(u_int, problem.bc) - np.asarray(problem.rhs)
    scale = max(1.0, float(np.max(np.abs(problem.rhs), initial=0.0)), float(np.max(np.abs(problem.bc), initial=0.0)))
    res = float(np.max(np.abs(residual), initial=0.0))
    if res > tol * scale * max(1.0, 1.0 / domain.spacing ** 2):
        raise SolverError(f"Poisson residual {res:.3e} exceeds tolerance on {domain.kind}")
    values = np.concatenate([u_int, np.asarray(problem.bc)], axis=0)
    return GridField.on_mesh(values, domain, torus)


def parameter_direction_constant(problem: PoissonProblem, solution: GridField, torus, r: float,
                                 samples: Optional[np.ndarray] = None) -> float:
    """
    Largest ratio |h(tau, .)|_r / (|phi|_r + |f|_r) over sampled interior nodes,
    the torus norms of phi and f being taken as maxima over all planar nodes.
    """
    index = HolderIndex.from_real(r)

    def torus_norm(values: np.ndarray) -> float:
        return holder_norm(GridField.on_torus(values, torus), index).value

    n_int = problem.domain.interior_nodes.size
    if samples is None:
        samples = np.linspace(0, n_int - 1, min(n_int, 12)).astype(int)
    data = max((torus_norm(problem.bc[k]) for k in range(problem.bc.shape[0])), default=0.0)
    data += max((torus_norm(problem.rhs[k]) for k in samples), default=0.0)
    if data == 0.0:
        return 0.0
    return max(torus_norm(solution.values[k]) for k in samples) / data
