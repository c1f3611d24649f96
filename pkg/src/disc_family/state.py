from dataclasses import dataclass, field as dataclass_field
from typing import Any, Dict, List, Optional

import numpy as np

from src.fields.domains import PlanarDomainGrid
from src.fields.field import GridField
from src.fields.grids import TorusGrid
from src.fields import torus as torus_ops


@dataclass(frozen=True, eq=False)
class Background:
    """
    Local potential rho0 = |z|^2 / 2 + psi0 on the torus chart.

    Attributes:
        torus: Torus grid
        psi0: Periodic part of the potential (zeros for the flat metric)
    """
    torus: TorusGrid
    psi0: np.ndarray

    @classmethod
    def flat(cls, torus: TorusGrid) -> "Background":
        return cls(torus, np.zeros(torus.shape))

    @property
    def A(self) -> np.ndarray:
        """d^2 rho0 / dz dzbar."""
        return 0.5 + torus_ops.d_zzbar(self.psi0, self.torus)

    @property
    def S(self) -> np.ndarray:
        """d^2 rho0 / dz^2."""
        return torus_ops.d_zz(self.psi0, self.torus)

    @property
    def psi_z(self) -> np.ndarray:
        return torus_ops.d_z(self.psi0, self.torus)

    @property
    def is_flat(self) -> bool:
        return not np.any(self.psi0)

    def positivity_margin(self) -> float:
        return float(np.min(self.A))

    def shifted(self, shift: complex) -> "Background":
        return Background(self.torus, torus_ops.phase_shift(self.psi0, self.torus, shift))


@dataclass
class IterationConfig:
    """
    Parameters of the disc-family iteration.

    Attributes:
        gamma: Regularity index of the data, gamma = 4 + X by default
        X: Hölder exponent in (0, 1)
        l: Radius of the low-norm ball |f|_{2+X} <= l
        H: Radius of the high-norm ball (None: derived from the first step)
        A_weight: Weight of the high norm (None: derived from the first step)
        tol: Stop when the sup of the correction falls below tol
        max_iter: Iteration cap
        interpolation: Torus interpolation method for compositions
        measure_norms: Record weighted norms of the corrections
    """
    gamma: float = 4.0 + 1.0 / 3.0
    X: float = 1.0 / 3.0
    l: float = 0.2
    H: Optional[float] = None
    A_weight: Optional[float] = None
    tol: float = 1e-10
    max_iter: int = 60
    interpolation: str = "auto"
    measure_norms: bool = True

    def __post_init__(self):
        if not 0.0 < self.X < 1.0:
            raise ValueError(f"X must lie in (0, 1), got {self.X}")
        if not self.l < 0.25:
            raise ValueError(f"l must be below 1/4, got {self.l}")
        if self.A_weight is not None and self.A_weight <= 0:
            raise ValueError("A_weight must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(eq=False)
class DiscFamilyState:
    """
    Leafwise holomorphic pair (f, h) given by boundary values on the domain's curve.

    Attributes:
        domain: Planar domain (disc or stadium)
        background: Background potential
        F: Boundary perturbation on the curve nodes, shape (n_b, n, n)
        f, h: Boundary values of the holomorphic families, complex, same shape
        F_mesh: F at the mesh-boundary points (None: spline transfer of F)
        history: One record per iteration step
    """
    domain: PlanarDomainGrid
    background: Background
    F: np.ndarray
    f: np.ndarray
    h: np.ndarray
    F_mesh: Optional[np.ndarray] = None
    history: List[Dict[str, Any]] = dataclass_field(default_factory=list)
    residual: float = float("nan")
    converged: bool = False

    @classmethod
    def initial(cls, domain: PlanarDomainGrid, background: Background, F: np.ndarray,
                F_mesh: Optional[np.ndarray] = None) -> "DiscFamilyState":
        zeros = np.zeros(np.shape(F), dtype=complex)
        return cls(domain, background, np.asarray(F, dtype=float), zeros, zeros.copy(), F_mesh)

    @property
    def torus(self) -> TorusGrid:
        return self.background.torus

    @property
    def iterations(self) -> int:
        return len(self.history)

    def boundary_F_mesh(self) -> np.ndarray:
        if self.F_mesh is not None:
            return self.F_mesh
        return self.domain.boundary_to_mesh(self.F)

    def field(self, values: np.ndarray) -> GridField:
        return GridField.on_boundary(values, self.domain, self.torus)

    def advanced(self, df: np.ndarray, dh: np.ndarray) -> "DiscFamilyState":
        return DiscFamilyState(
            self.domain, self.background, self.F, self.f + df, self.h + dh, self.F_mesh,
            list(self.history), self.residual, False,
        )
