from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.elliptic.poisson import solve_interior
from src.fields.field import GridField
from src.utils.errors import ConfigError, SolverError
from src.utils.logging import logger


@dataclass(frozen=True)
class DecayCertificate:
    """Barrier bound for harmonic functions fed from the far caps of the strip."""
    Theta: float
    delta: float
    measured_ratio: float
    tolerance: float = 1e-8

    @property
    def holds(self) -> bool:
        return self.measured_ratio <= self.delta + self.tolerance


def barrier(t: np.ndarray, theta: np.ndarray, Theta: float) -> np.ndarray:
    """w = 2 sin(pi/4 + pi t/2) cosh(pi theta/2) / cosh(pi Theta/2); harmonic, >= 1 on the caps."""
    return 2.0 * np.sin(np.pi / 4 + np.pi * np.asarray(t) / 2) * np.cosh(np.pi * np.asarray(theta) / 2) / np.cosh(np.pi * Theta / 2)


def barrier_delta(Theta: float, window: float = 2.0) -> float:
    """Barrier value at |theta| = window with the sine factor bounded by 1."""
    return float(2.0 * np.cosh(np.pi * window / 2) / np.cosh(np.pi * Theta / 2))


def strip_harmonic(F: GridField, geom, tolerance: float = 1e-8) -> Tuple[GridField, DecayCertificate]:
    """
    Harmonic function on the stadium with boundary values s(F), restricted to the window.

    Args:
        F: Window field (theta, t, x, y) vanishing on t = 0, 1
        geom: Strip geometry providing the stadium mesh and the s-extension
        tolerance: Grid tolerance added to the barrier bound (negative values tighten it)

    Returns:
        (H on the window, decay certificate)

    Raises:
        ConfigError: If Theta <= 4 or F does not vanish on t = 0, 1
        SolverError: If the measured decay exceeds the barrier bound
    """
    if geom.Theta <= 4.0:
        raise ConfigError(f"strip harmonic decay needs Theta > 4, got {geom.Theta}")
    values = np.asarray(F.values)
    edge = max(np.max(np.abs(values[:, 0]), initial=0.0), np.max(np.abs(values[:, -1]), initial=0.0))
    if edge > 1e-9 * max(1.0, F.sup()):
        raise ConfigError(f"strip data must vanish on t=0,1 (defect {edge:.3e})")
    grid = geom.grid
    bc = geom.s_extend_mesh(values)
    rhs = np.zeros((grid.interior_nodes.size,) + values.shape[2:])
    u_int = solve_interior(grid, rhs, bc)
    H = geom.restrict_to_window(u_int, bc)
    delta = barrier_delta(geom.Theta)
    sup_F = F.sup()
    ratio = float(np.max(np.abs(H))) / sup_F if sup_F > 0 else 0.0
    certificate = DecayCertificate(geom.Theta, delta, ratio, tolerance)
    logger.debug(f"Strip harmonic decay at Theta={geom.Theta:g}: ratio {ratio:.3e}, barrier {delta:.3e}")
    if not certificate.holds:
        raise SolverError(
            f"strip harmonic decay ratio {ratio:.3e} exceeds the barrier bound {delta:.3e} + {tolerance:.1e} "
            f"at Theta={geom.Theta:g}"
        )
    return F.with_values(H), certificate
