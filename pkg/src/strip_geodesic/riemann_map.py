"""
Conformal map T of a Jordan region onto the unit disc with T(tau*) = -i, T(c) = 0.

Generic curves use the harmonic-function construction: with u = -log|zeta - c|
on the boundary and its harmonic conjugate v, G = u + i v extends
holomorphically and

    T(tau) = exp(i alpha) (tau - c) exp(G(tau))

has modulus one on the boundary. alpha fixes T at the basepoint node, where
v vanishes by normalization.

On the stadium that construction crowds: the long straight part squeezes the
cap images to within rounding of the two poles of the disc. Stadium regions
go through the strip 0 < Re Lambda < 1 instead,

    Lambda = L + R - kappa,   L(tau) = log((p+ - tau) / (tau - p-)) / (i pi),

with p-, p+ the lower and upper cap apexes and R holomorphic with
Re R = chi - Re L on the boundary (chi = 0 on the left arc, 1 on the right
arc). kappa puts Lambda(c) = 1/2, and T = tanh(i pi (Lambda - 1/2) / 2).
Lambda stays of size Theta, so the boundary correspondence keeps its order
even where T itself is within 1e-10 of the poles.
"""
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np

from src.elliptic.holomorphic import CauchyOperator, holomorphic_operator
from src.fields.domains import BoundaryCurve
from src.utils.errors import SolverError
from src.utils.logging import logger

INVERSE_TOL = 1e-12
INVERSE_MAX_STEPS = 60
FD_STEP = 1e-3
SAMPLE_COUNT = 200


def strip_to_disc(lam: np.ndarray) -> np.ndarray:
    """The strip 0 < Re Lambda < 1 onto the unit disc; 0 -> -i, 1/2 -> 0, 1 -> i."""
    return np.tanh(0.5j * np.pi * (np.asarray(lam, dtype=complex) - 0.5))


@dataclass(eq=False)
class RiemannMap:
    """
    Attributes:
        curve: Boundary curve of the region
        center: Point sent to 0
        alpha: Rotation fixing the basepoint image
        G: Boundary values of log((T(tau) / (tau - center)) exp(-i alpha))
        boundary_values: T at the curve nodes (the boundary correspondence)
        cr_residual: Cauchy-Riemann defect on the interior sample grid
        containment: Largest excursion of interior points past the disc boundary (negative inside)
    """
    curve: BoundaryCurve
    center: complex
    alpha: float
    G: np.ndarray
    boundary_values: np.ndarray
    operator: CauchyOperator
    cr_residual: float = float("nan")
    containment: float = float("nan")

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=complex)
        G = self.operator.extend(self.G, points.ravel()).reshape(points.shape)
        return np.exp(1j * self.alpha) * (points - self.center) * np.exp(G)

    def derivative(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=complex)
        flat = points.ravel()
        G = self.operator.extend(self.G, flat)
        dG = self.operator.derivative(self.G, flat)
        value = np.exp(1j * self.alpha) * np.exp(G) * (1.0 + (flat - self.center) * dG)
        return value.reshape(points.shape)

    def boundary_angles(self) -> np.ndarray:
        """Unwrapped arguments of T along the curve nodes."""
        return np.unwrap(np.angle(self.boundary_values))

    def angle_steps(self) -> np.ndarray:
        """Increments of the boundary argument between consecutive nodes, wrap step included."""
        angles = self.boundary_angles()
        return np.diff(np.append(angles, angles[0] + 2.0 * np.pi))

    def is_orientation_preserving(self) -> bool:
        return bool(np.all(self.angle_steps() > 0.0))

    def containment_defect(self, points: np.ndarray) -> float:
        """max |T| - 1 over interior points; negative when all of them land inside the disc."""
        return float(np.max(np.abs(self(points)), initial=0.0) - 1.0)

    def residuals(self) -> Dict[str, float]:
        """Report entries of the validated map."""
        return {
            "riemann_cr_defect": self.cr_residual,
            "riemann_containment": self.containment,
            "riemann_min_angle_step": float(self.angle_steps().min()),
        }

    def initial_guess(self, w: np.ndarray) -> np.ndarray:
        """Strip model tanh(i pi (tau - 1/2) / 2) inverted, for strip-like regions."""
        w = np.clip(np.abs(w), 0.0, 1.0 - 1e-12) * np.exp(1j * np.angle(w))
        return self.center + (2.0 / (1j * np.pi)) * np.arctanh(w)

    def inverse(self, w: np.ndarray, guess: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Points tau with T(tau) = w for |w| < 1, by damped Newton.

        Raises:
            SolverError: If Newton stalls; the message carries the worst residual and point
        """
        w = np.asarray(w, dtype=complex)
        flat = w.ravel()
        tau = self.initial_guess(flat) if guess is None else np.asarray(guess, dtype=complex).ravel().copy()
        r = self(tau) - flat
        for _ in range(INVERSE_MAX_STEPS):
            size = np.abs(r)
            if size.max(initial=0.0) < INVERSE_TOL:
                return tau.reshape(w.shape)
            step = r / self.derivative(tau)
            damping = np.ones(tau.shape)
            for _ in range(10):
                trial = tau - damping * step
                r_trial = self(trial) - flat
                worse = np.abs(r_trial) > size
                if not worse.any():
                    break
                damping = np.where(worse, 0.5 * damping, damping)
            tau, r = trial, r_trial
        worst = int(np.argmax(np.abs(r)))
        raise SolverError(
            f"Riemann map inversion stalled: residual {np.abs(r[worst]):.3e} at w={flat[worst]:.6f}"
        )


@dataclass(eq=False)
class StripRiemannMap(RiemannMap):
    """
    Riemann map of a region with two distinguished apexes, through the strip coordinate Lambda.

    Attributes:
        apexes: (p-, p+), sent to +1 and -1
        offset: kappa, so that Lambda(center) = 1/2
        G: Boundary values of R (the apex nodes carry the limit of their neighbours)
    """
    apexes: Tuple[complex, complex] = (0j, 0j)
    offset: complex = 0j

    def apex_log(self, points: np.ndarray) -> np.ndarray:
        lower, upper = self.apexes
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log((upper - points) / (points - lower)) / (1j * np.pi)

    def strip_coordinate(self, points: np.ndarray) -> np.ndarray:
        """Lambda at interior points."""
        points = np.asarray(points, dtype=complex)
        R = self.operator.extend(self.G, points.ravel()).reshape(points.shape)
        return self.apex_log(points) + R - self.offset

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return strip_to_disc(self.strip_coordinate(points))

    def derivative(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=complex)
        flat = points.ravel()
        lower, upper = self.apexes
        dL = (1.0 / (flat - upper) - 1.0 / (flat - lower)) / (1j * np.pi)
        dR = self.operator.derivative(self.G, flat)
        T = self(flat)
        return (0.5j * np.pi * (1.0 - T ** 2) * (dL + dR)).reshape(points.shape)

    def containment_defect(self, points: np.ndarray) -> float:
        """-min(Re Lambda, 1 - Re Lambda); |T| < 1 exactly when this is negative."""
        x = self.strip_coordinate(points).real
        return float(-np.min(np.minimum(x, 1.0 - x), initial=np.inf))


def cr_defect(T: RiemannMap, samples: np.ndarray, step: float = FD_STEP) -> float:
    """sup |T_theta - i T_t| from fourth-order differences at interior samples."""
    samples = np.asarray(samples, dtype=complex)

    def d(direction: complex) -> np.ndarray:
        e = step * direction
        return (-T(samples + 2 * e) + 8 * T(samples + e) - 8 * T(samples - e) + T(samples - 2 * e)) / (12 * step)

    return float(np.max(np.abs(d(1j) - 1j * d(1.0)), initial=0.0))


def _harmonic_map(curve: BoundaryCurve, op: CauchyOperator, center: complex) -> RiemannMap:
    zeta = curve.nodes
    u = -np.log(np.abs(zeta - center))
    G = op.completion(u, "basepoint")
    kb = curve.basepoint_index
    anchor = (zeta[kb] - center) * np.exp(G[kb])
    alpha = float(np.angle(-1j / anchor))
    boundary = np.exp(1j * alpha) * (zeta - center) * np.exp(G)
    boundary[kb] = -1j
    return RiemannMap(curve, complex(center), alpha, G, boundary, op)


def _strip_map(curve: BoundaryCurve, op: CauchyOperator, center: complex) -> StripRiemannMap:
    """Apexes at nodes N/4 (lower) and 3N/4 (upper) of a stadium curve started at tau = 0."""
    n = curve.size
    k_lower, k_upper = n // 4, 3 * n // 4
    zeta = curve.nodes
    apexes = (complex(zeta[k_lower]), complex(zeta[k_upper]))
    T = StripRiemannMap(curve, complex(center), 0.0, np.zeros(n, dtype=complex), np.zeros(n, dtype=complex),
                        op, apexes=apexes)
    k = np.arange(n)
    chi = ((k > k_lower) & (k < k_upper)).astype(float)
    regular = (k != k_lower) & (k != k_upper)
    re_L = np.zeros(n)
    re_L[regular] = T.apex_log(zeta[regular]).real
    re_R = chi - re_L
    for apex in (k_lower, k_upper):
        re_R[apex] = 0.5 * (re_R[apex - 1] + re_R[(apex + 1) % n])
    T.G = op.completion(re_R, "basepoint")
    T.offset = complex(T.apex_log(np.array([center]))[0] + op.extend(T.G, np.array([center]))[0] - 0.5)

    lam = np.empty(n, dtype=complex)
    lam[regular] = chi[regular] + 1j * (T.apex_log(zeta[regular]) + T.G[regular] - T.offset).imag
    boundary = np.empty(n, dtype=complex)
    boundary[regular] = strip_to_disc(lam[regular])
    boundary[k_lower], boundary[k_upper] = 1.0 + 0.0j, -1.0 + 0.0j
    boundary[curve.basepoint_index] = -1j
    T.boundary_values = boundary
    return T


def riemann_map(region: Union[BoundaryCurve, object], tol: float = 1e-6, center: complex = 0.5,
                samples: Optional[np.ndarray] = None) -> RiemannMap:
    """
    Conformal map of the region bounded by `region` (a curve, a planar domain or a strip geometry).

    Stadium grids and strip geometries use the strip coordinate; anything else the
    harmonic-function construction.

    Raises:
        SolverError: If the Cauchy-Riemann defect exceeds tol, the boundary correspondence
            is not orientation preserving, or an interior node maps onto or outside the unit circle
    """
    grid = getattr(region, "grid", region)
    curve = getattr(grid, "curve", region)
    op = holomorphic_operator(curve)
    if getattr(grid, "outline", None) is not None:
        T = _strip_map(curve, op, center)
    else:
        T = _harmonic_map(curve, op, center)

    zeta = curve.nodes
    interior = getattr(grid, "interior_nodes", None)
    if interior is None:
        interior = center + 0.5 * (zeta - center)
    if samples is None:
        clearance = np.min(np.abs(interior[:, None] - zeta[None, :]), axis=1)
        cleared = interior[clearance > 2.0 * float(np.max(curve.weights))]
        samples = cleared[:: max(1, cleared.size // SAMPLE_COUNT)]
    T.cr_residual = cr_defect(T, samples)
    T.containment = T.containment_defect(interior)
    steps = T.angle_steps()
    logger.info(
        f"Riemann map on {curve.size} boundary nodes: CR defect {T.cr_residual:.3e}, "
        f"containment {T.containment:.3e}, smallest boundary angle step {steps.min():.3e}"
    )
    if not T.is_orientation_preserving():
        raise SolverError(
            f"Riemann map boundary correspondence is not orientation preserving: "
            f"{int(np.sum(steps <= 0.0))} of {steps.size} angle steps are <= 0"
        )
    if T.containment >= 0.0:
        raise SolverError(f"Riemann map sends an interior node onto or past the unit circle "
                          f"(containment defect {T.containment:.3e})")
    if T.cr_residual > tol:
        raise SolverError(f"Riemann map Cauchy-Riemann defect {T.cr_residual:.3e} exceeds {tol:.1e}")
    return T
