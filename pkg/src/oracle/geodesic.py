"""
Geodesic paths t -> Psi(t, .) of torus potentials and their equation residual.

With g = 1/2 + psi0_{z zbar} + Psi_{z zbar} the geodesic equation reads
Psi_tt - |Psi_tz|^2 / g = 0. Time derivatives use fourth-order differences
on a uniform t grid; torus derivatives are spectral.
"""
from dataclasses import dataclass, field as dataclass_field
from typing import Dict, Iterable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from src.fields.field import GridField
from src.fields.grids import Axis, TorusGrid
from src.fields.holder import norm
from src.fields import torus as torus_ops
from src.utils.errors import DegenerateError, OracleError


@dataclass(eq=False)
class GeodesicPath:
    """
    Attributes:
        values: Psi at the t nodes, shape (n_t, n, n)
        t_values: Uniform t nodes from 0 to 1
        torus: Torus grid
        diagnostics: Solver diagnostics (oracle paths)
    """
    values: np.ndarray
    t_values: np.ndarray
    torus: TorusGrid
    diagnostics: Dict[str, float] = dataclass_field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.t_values = np.asarray(self.t_values, dtype=float)
        if self.values.shape != (self.t_values.size,) + self.torus.shape:
            raise ValueError("path values must be (n_t, n, n) on the torus grid")

    @property
    def phi0(self) -> np.ndarray:
        return self.values[0]

    @property
    def phi1(self) -> np.ndarray:
        return self.values[-1]

    @property
    def dt(self) -> float:
        return float(self.t_values[1] - self.t_values[0])

    def field(self) -> GridField:
        axes = (Axis("t", self.t_values.size, self.dt, False),) + self.torus.axes()
        return GridField(self.values, axes, kind="path", torus=self.torus)

    def resampled(self, t_values: np.ndarray) -> "GeodesicPath":
        if np.array_equal(t_values, self.t_values):
            return self
        values = CubicSpline(self.t_values, self.values, axis=0)(t_values)
        return GeodesicPath(values, t_values, self.torus)

    @classmethod
    def linear(cls, phi0: np.ndarray, phi1: np.ndarray, t_values: np.ndarray, torus: TorusGrid) -> "GeodesicPath":
        t = np.asarray(t_values)[:, None, None]
        return cls((1.0 - t) * phi0 + t * phi1, t_values, torus)


def _second_derivative(u: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order d^2/dt^2 at the interior nodes 1..n-2."""
    n = u.shape[0]
    out = np.empty((n - 2,) + u.shape[1:])
    out[0] = (10 * u[0] - 15 * u[1] - 4 * u[2] + 14 * u[3] - 6 * u[4] + u[5]) / 12.0
    out[-1] = (10 * u[-1] - 15 * u[-2] - 4 * u[-3] + 14 * u[-4] - 6 * u[-5] + u[-6]) / 12.0
    out[1:-1] = (-u[:-4] + 16 * u[1:-3] - 30 * u[2:-2] + 16 * u[3:-1] - u[4:]) / 12.0
    return out / (h * h)


def _first_derivative(u: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order d/dt at the interior nodes 1..n-2."""
    n = u.shape[0]
    out = np.empty((n - 2,) + u.shape[1:])
    out[0] = (-3 * u[0] - 10 * u[1] + 18 * u[2] - 6 * u[3] + u[4]) / 12.0
    out[-1] = (3 * u[-1] + 10 * u[-2] - 18 * u[-3] + 6 * u[-4] - u[-5]) / 12.0
    out[1:-1] = (u[:-4] - 8 * u[1:-3] + 8 * u[3:-1] - u[4:]) / 12.0
    return out / h


def geodesic_residual(path: GeodesicPath, psi0: Optional[np.ndarray] = None) -> float:
    """
    sup over interior t nodes of |Psi_tt - |Psi_tz|^2 / g|.

    Raises:
        DegenerateError: If some slice is not positive ("metric degenerate")
    """
    if path.t_values.size < 6:
        raise ValueError("geodesic residual needs at least six t nodes")
    grid, h = path.torus, path.dt
    background = 0.0 if psi0 is None else torus_ops.d_zzbar(psi0, grid)
    g = 0.5 + background + torus_ops.d_zzbar(path.values, grid)
    if np.min(g) <= 0.0:
        t_bad = path.t_values[int(np.unravel_index(np.argmin(g), g.shape)[0])]
        raise DegenerateError(f"metric degenerate on the slice t={t_bad:.4f}")
    psi_tt = _second_derivative(path.values, h)
    psi_tz = _first_derivative(torus_ops.d_z(path.values, grid), h)
    residual = psi_tt - np.abs(psi_tz) ** 2 / g[1:-1]
    return float(np.max(np.abs(residual), initial=0.0))


def compare_paths(a: GeodesicPath, b: GeodesicPath, indices: Iterable[float] = (0.0, 1.0, 2.0),
                  tol: float = 1e-10, check_endpoints: bool = True) -> Dict[str, object]:
    """
    sup and Hölder-norm differences of two paths with the same endpoints.

    Raises:
        OracleError: If check_endpoints and the endpoints differ beyond tol
    """
    if a.torus != b.torus:
        raise ValueError("paths live on different torus grids")
    mismatch = max(np.max(np.abs(a.phi0 - b.phi0)), np.max(np.abs(a.phi1 - b.phi1)))
    if check_endpoints and mismatch > tol:
        raise OracleError("endpoint mismatch between compared paths")
    b = b.resampled(a.t_values)
    diff = a.field().with_values(a.values - b.values)
    return {
        "sup_diff": diff.sup(),
        "norm_diffs": {float(r): norm(diff, float(r)) for r in indices},
    }
