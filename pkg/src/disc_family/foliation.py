"""
The leaf map (tau, z) -> (tau, z + f(tau, z)) of a converged disc family and its inverse.

Leaves are evaluated at the planar mesh nodes (interior nodes followed by
mesh-boundary points) and at the boundary curve nodes. Interior values of f
and h come from their holomorphic extension; mesh-boundary values from the
domain's boundary transfer.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.disc_family.state import DiscFamilyState
from src.elliptic.holomorphic import holomorphic_operator
from src.fields.compose import GridMap, compose, interpolate_slice
from src.fields.field import GridField
from src.fields.grids import TorusGrid
from src.fields.holder import norm
from src.fields import torus as torus_ops
from src.tasks.worker import parallel_map
from src.utils.errors import DivergenceError
from src.utils.logging import logger

NEWTON_TOL = 1e-12
NEWTON_MAX_STEPS = 50
BACKTRACK_STEPS = 8


@dataclass(eq=False)
class FoliationMap:
    """
    Discrete foliation map and its inverse.

    Attributes:
        domain: Planar domain
        torus: Torus grid
        f_mesh, h_mesh: Leaf displacement and h at the mesh nodes, shape (n_mesh, n, n)
        f_curve: Leaf displacement at the boundary curve nodes
        inverse_mesh, inverse_curve: Points w with w + f(tau, w) = z, same shapes
        jacobian_min: Smallest Jacobian determinant of z -> z + f(tau, z)
        inverse_residual: sup |w + f(tau, w) - z| after Newton
    """
    domain: object
    torus: TorusGrid
    f_mesh: np.ndarray
    h_mesh: np.ndarray
    f_curve: np.ndarray
    inverse_mesh: np.ndarray
    inverse_curve: np.ndarray
    jacobian_min: float
    inverse_residual: float

    @property
    def is_identity(self) -> bool:
        return not np.any(self.f_mesh) and not np.any(self.f_curve)

    def _displacement(self, field: GridField, forward: bool) -> np.ndarray:
        z = self.torus.z()
        if field.kind == "mesh":
            return self.f_mesh if forward else self.inverse_mesh - z
        if field.kind == "boundary":
            return self.f_curve if forward else self.inverse_curve - z
        raise ValueError(f"foliation maps act on mesh or boundary fields, got {field.kind!r}")

    def pullback(self, field: GridField, method: str = "auto") -> GridField:
        """u -> u o A, i.e. u(tau, z + f(tau, z))."""
        if self.is_identity:
            return field.copy()
        return compose(field, GridMap(self._displacement(field, True)), method)

    def pushforward(self, field: GridField, method: str = "auto") -> GridField:
        """u -> u o A^-1."""
        if self.is_identity:
            return field.copy()
        return compose(field, GridMap(self._displacement(field, False)), method)

    def round_trip_defect(self, field: GridField) -> float:
        """sup |(u o A) o A^-1 - u|."""
        back = self.pushforward(self.pullback(field))
        return float(np.max(np.abs(back.values - field.values), initial=0.0))


def jacobian_determinant(f: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Real Jacobian of z -> z + f(z) on each torus slice."""
    fx = torus_ops.derivative(f, grid, (1, 0))
    fy = torus_ops.derivative(f, grid, (0, 1))
    return (1.0 + fx.real) * (1.0 + fy.imag) - fy.real * fx.imag


def invert_leaf(f: np.ndarray, grid: TorusGrid, method: str = "auto") -> Tuple[np.ndarray, float]:
    """
    Solve w + f(w) = z at every torus node by damped Newton from w = z.

    Returns:
        (w, final residual sup)

    Raises:
        DivergenceError: If the residual stays above 1e-12 after 50 steps
    """
    z = grid.z()
    if not np.any(f):
        return z.copy(), 0.0
    fx = torus_ops.derivative(f, grid, (1, 0))
    fy = torus_ops.derivative(f, grid, (0, 1))

    def residual(w: np.ndarray) -> np.ndarray:
        return w + interpolate_slice(f, grid, w, method) - z

    w = z.astype(complex)
    r = residual(w)
    for _ in range(NEWTON_MAX_STEPS):
        size = np.abs(r)
        if size.max() < NEWTON_TOL:
            return w, float(size.max())
        jx = interpolate_slice(fx, grid, w, method)
        jy = interpolate_slice(fy, grid, w, method)
        a, b = 1.0 + jx.real, jy.real
        c, d = jx.imag, 1.0 + jy.imag
        det = a * d - b * c
        dx = (d * r.real - b * r.imag) / det
        dy = (a * r.imag - c * r.real) / det
        step = dx + 1j * dy
        damping = np.ones(w.shape)
        trial = w - step
        r_trial = residual(trial)
        for _ in range(BACKTRACK_STEPS):
            worse = np.abs(r_trial) > size
            if not worse.any():
                break
            damping = np.where(worse, 0.5 * damping, damping)
            trial = w - damping * step
            r_trial = residual(trial)
        w, r = trial, r_trial
    final = float(np.max(np.abs(r)))
    if final < NEWTON_TOL:
        return w, final
    raise DivergenceError(f"foliation not invertible at resolution: Newton residual {final:.3e}")


def build_foliation_map(state: DiscFamilyState, method: str = "auto", n_jobs=None) -> FoliationMap:
    """
    Foliation map of a converged disc family.

    Raises:
        DivergenceError: If some leaf cannot be inverted
    """
    domain, grid = state.domain, state.torus
    op = holomorphic_operator(domain)
    f_mesh = np.concatenate([op.extend(state.f, domain.interior_nodes), domain.boundary_to_mesh(state.f)])
    h_mesh = np.concatenate([op.extend(state.h, domain.interior_nodes), domain.boundary_to_mesh(state.h)])
    leaves = list(f_mesh) + list(state.f)
    inverses = parallel_map(lambda f: invert_leaf(f, grid, method), leaves, n_jobs)
    w = np.stack([item[0] for item in inverses])
    residual = max((item[1] for item in inverses), default=0.0)
    n_mesh = f_mesh.shape[0]
    jac = jacobian_determinant(np.concatenate([f_mesh, state.f]), grid)
    jac_min = float(np.min(jac))
    if jac_min <= 0.0:
        raise DivergenceError(f"foliation not invertible at resolution: Jacobian {jac_min:.3e}")
    logger.info(f"Built foliation map on {len(leaves)} leaves, min Jacobian {jac_min:.4f}")
    return FoliationMap(domain, grid, f_mesh, h_mesh, state.f.copy(), w[:n_mesh], w[n_mesh:], jac_min, residual)


def foliation_deviation(fmap: FoliationMap, r: float = 2.0 + 1.0 / 3.0) -> float:
    """|A - Id|_r over the leaves at the boundary curve nodes."""
    return norm(GridField.on_boundary(fmap.f_curve, fmap.domain, fmap.torus), r)
