"""
Iteration maps on the strip.

For endpoints (phi0, phi1) and window data phi vanishing on t = 0, 1, the
boundary data M = phi_t + s(phi) on the stadium boundary determine the
potential Phi, and

    B(phi)   = Phi|window - phi_t,
    P(phi0, phi1, phi) = (phi0, phi1, B(phi) - phi).

The tangent map sends (u0, u1, v) to (u0, u1, H(u_t + s v)|window - u_t - v)
with H the harmonic extension along the leaves of Phi. Its inverse passes
(u0, u1) through and sums the Neumann series of (Id - D2B)^-1 for v.
"""
import hashlib
from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.disc_family.state import Background, IterationConfig
from src.fields.field import GridField
from src.fields.grids import TorusGrid
from src.fields.holder import norm
from src.oracle.geodesic import GeodesicPath
from src.potential.assembly import PotentialBundle, solve_potential
from src.potential.linearization import leafwise_harmonic
from src.strip_geodesic.geometry import StripGeometry
from src.utils.config import settings
from src.utils.errors import ConfigError, DivergenceError
from src.utils.logging import logger

CACHE_SIZE = 4


@dataclass(eq=False)
class StripTriple:
    """
    Endpoints and window data of the strip iteration.

    Attributes:
        phi0, phi1: Endpoint potentials on the torus, shape (n, n)
        phi: Window data (theta, t, n, n), zero on t = 0 and t = 1
        torus: Torus grid
    """
    phi0: np.ndarray
    phi1: np.ndarray
    phi: np.ndarray
    torus: TorusGrid

    def __post_init__(self):
        self.phi0 = np.asarray(self.phi0, dtype=float)
        self.phi1 = np.asarray(self.phi1, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        if self.phi0.shape != self.torus.shape or self.phi1.shape != self.torus.shape:
            raise ConfigError("endpoint potentials must live on the torus grid")
        if self.phi.shape[2:] != self.torus.shape:
            raise ConfigError("window data must carry the torus in the last two axes")

    @classmethod
    def zeros(cls, geom: StripGeometry, torus: TorusGrid) -> "StripTriple":
        zero = np.zeros(torus.shape)
        return cls(zero, zero.copy(), np.zeros(geom.window_shape + torus.shape), torus)

    @classmethod
    def endpoints(cls, geom: StripGeometry, phi0: np.ndarray, phi1: np.ndarray) -> "StripTriple":
        torus = TorusGrid(np.shape(phi0)[-1])
        return cls(phi0, phi1, np.zeros(geom.window_shape + torus.shape), torus)

    def _combine(self, other: "StripTriple", sign: float) -> "StripTriple":
        return StripTriple(self.phi0 + sign * other.phi0, self.phi1 + sign * other.phi1,
                           self.phi + sign * other.phi, self.torus)

    def __add__(self, other: "StripTriple") -> "StripTriple":
        return self._combine(other, 1.0)

    def __sub__(self, other: "StripTriple") -> "StripTriple":
        return self._combine(other, -1.0)

    def __mul__(self, scalar: float) -> "StripTriple":
        return StripTriple(scalar * self.phi0, scalar * self.phi1, scalar * self.phi, self.torus)

    __rmul__ = __mul__

    def sup(self) -> float:
        return float(max(np.max(np.abs(self.phi0)), np.max(np.abs(self.phi1)),
                         np.max(np.abs(self.phi), initial=0.0)))

    def key(self) -> str:
        digest = hashlib.sha1()
        for part in (self.phi0, self.phi1, self.phi):
            digest.update(np.ascontiguousarray(part).tobytes())
        return digest.hexdigest()

    def norm(self, r: float, window) -> float:
        """Largest Hölder norm over the two endpoints and the window field."""
        return max(
            norm(GridField.on_torus(self.phi0, self.torus), r),
            norm(GridField.on_torus(self.phi1, self.torus), r),
            norm(GridField.on_window(self.phi, window, self.torus), r),
        )


@dataclass(eq=False)
class StripSolution:
    """Potential on the stadium for one triple, with its window restriction."""
    triple: StripTriple
    bundle: PotentialBundle
    window_values: np.ndarray
    boundary_data: np.ndarray


@dataclass
class NeumannReport:
    terms: int
    factor: float
    last_increment: float


class StripProblem:
    """
    The maps B, P, DP and DP^-1 of one strip geometry, with a small cache of solves.

    Args:
        geom: Strip geometry
        torus: Torus grid
        background: Background potential (flat by default)
        cfg: Disc-family iteration parameters
    """

    def __init__(self, geom: StripGeometry, torus: TorusGrid, background: Optional[Background] = None,
                 cfg: Optional[IterationConfig] = None, tol: Optional[float] = None,
                 max_terms: Optional[int] = None):
        self.geom = geom
        self.torus = torus
        self.background = background or Background.flat(torus)
        self.cfg = cfg
        self.tol = settings.NEUMANN_TOL if tol is None else tol
        self.max_terms = settings.NEUMANN_MAX_TERMS if max_terms is None else max_terms
        self._cache: "OrderedDict[str, StripSolution]" = OrderedDict()
        t = geom.window.t_values
        self._t = t[None, :, None, None]

    def linear_window(self, phi0: np.ndarray, phi1: np.ndarray) -> np.ndarray:
        """phi_t on the window nodes."""
        shape = self.geom.window_shape + self.torus.shape
        return np.broadcast_to((1.0 - self._t) * phi0 + self._t * phi1, shape)

    def boundary_data(self, triple: StripTriple) -> Tuple[np.ndarray, np.ndarray]:
        """M = phi_t + s(phi) at the curve nodes and at the mesh-boundary points."""
        grid = self.geom.grid
        curve = self.geom.linear_part(triple.phi0, triple.phi1, grid.curve.nodes)
        mesh = self.geom.linear_part(triple.phi0, triple.phi1, grid.mesh_boundary_nodes)
        if np.any(triple.phi):
            curve = curve + self.geom.s_extend_curve(triple.phi)
            mesh = mesh + self.geom.s_extend_mesh(triple.phi)
        return curve, mesh

    def solve(self, triple: StripTriple) -> StripSolution:
        """
        Potential with boundary data phi_t + s(phi) on the stadium.

        Raises:
            DegenerateError: If a slice leaves the Kähler cone (node reported)
        """
        key = triple.key()
        if key in self._cache:
            self._cache.move_to_end(key)
            return self._cache[key]
        curve, mesh = self.boundary_data(triple)
        bundle = solve_potential(curve, self.background, self.geom.grid, self.cfg, F_mesh=mesh,
                                 allow_shrink=False)
        n_int = self.geom.grid.interior_nodes.size
        values = np.asarray(bundle.Phi.values)
        window = self.geom.restrict_to_window(values[:n_int], values[n_int:])
        solution = StripSolution(triple, bundle, window, curve)
        self._cache[key] = solution
        if len(self._cache) > CACHE_SIZE:
            self._cache.popitem(last=False)
        return solution

    @staticmethod
    def _zero_edges(values: np.ndarray) -> np.ndarray:
        values = np.array(values, copy=True)
        values[:, 0] = 0.0
        values[:, -1] = 0.0
        return values

    def B(self, triple: StripTriple) -> np.ndarray:
        solution = self.solve(triple)
        return self._zero_edges(solution.window_values - self.linear_window(triple.phi0, triple.phi1))

    def P(self, triple: StripTriple) -> StripTriple:
        return StripTriple(triple.phi0, triple.phi1, self.B(triple) - triple.phi, self.torus)

    def harmonic_window(self, base: StripTriple, data: np.ndarray) -> np.ndarray:
        """Leafwise harmonic extension (along the foliation of `base`) of curve data, on the window."""
        if not np.any(data):
            return np.zeros(self.geom.window_shape + self.torus.shape)
        fmap = self.solve(base).bundle.foliation
        H = np.asarray(leafwise_harmonic(fmap, data).H.values)
        n_int = self.geom.grid.interior_nodes.size
        return self.geom.restrict_to_window(H[:n_int], H[n_int:])

    def D2B(self, base: StripTriple, v: np.ndarray) -> np.ndarray:
        """H(s v)|window, zero on t = 0, 1."""
        if not np.any(v):
            return np.zeros_like(v)
        return self._zero_edges(self.harmonic_window(base, self.geom.s_extend_curve(v)))

    def _linear_tangent(self, base: StripTriple, u0: np.ndarray, u1: np.ndarray) -> np.ndarray:
        """H(u_t)|window - u_t, zero on t = 0, 1."""
        if not np.any(u0) and not np.any(u1):
            return np.zeros(self.geom.window_shape + self.torus.shape)
        data = self.geom.linear_part(u0, u1, self.geom.grid.curve.nodes)
        return self._zero_edges(self.harmonic_window(base, data) - self.linear_window(u0, u1))

    def dP_apply(self, base: StripTriple, tangent: StripTriple) -> StripTriple:
        v = tangent.phi
        window = self._linear_tangent(base, tangent.phi0, tangent.phi1) + self.D2B(base, v) - v
        return StripTriple(tangent.phi0, tangent.phi1, window, self.torus)

    def dP_inverse(self, base: StripTriple, rhs: StripTriple) -> Tuple[StripTriple, NeumannReport]:
        """
        Solve DP(base) x = rhs.

        Raises:
            DivergenceError: If the measured factor of D2B is >= 1
                ("Theta too small at this resolution") or the series does not
                settle within the term limit
        """
        b = self._linear_tangent(base, rhs.phi0, rhs.phi1) - rhs.phi
        scale = max(1.0, float(np.max(np.abs(b), initial=0.0)))
        total = np.array(b, copy=True)
        term = b
        factor, increment, terms = 0.0, float(np.max(np.abs(b), initial=0.0)), 1
        while increment >= self.tol * scale:
            if terms >= self.max_terms:
                raise DivergenceError(f"Neumann series did not settle in {self.max_terms} terms")
            nxt = self.D2B(base, term)
            previous = float(np.max(np.abs(term)))
            increment = float(np.max(np.abs(nxt), initial=0.0))
            ratio = increment / previous if previous > 0.0 else 0.0
            factor = max(factor, ratio)
            if factor >= 1.0:
                raise DivergenceError(
                    f"Theta too small at this resolution: measured D2B factor {factor:.3e} at Theta={self.geom.Theta}"
                )
            total += nxt
            term = nxt
            terms += 1
        logger.debug(f"Neumann series: {terms} terms, factor {factor:.3e}")
        solution = StripTriple(rhs.phi0, rhs.phi1, total, self.torus)
        return solution, NeumannReport(terms, factor, increment)

    def fixed_point_certificate(self, triple: StripTriple) -> float:
        """sup over the curve of |Phi - s(Phi - phi_t) - phi_t| = |s(phi - B(phi))|."""
        return float(np.max(np.abs(self.geom.s_extend_curve(triple.phi - self.B(triple))), initial=0.0))

    def quadratic_remainder(self, base: StripTriple, v: StripTriple) -> float:
        """sup |P(base + v) - P(base) - DP(base) v| on the window."""
        remainder = self.P(base + v).phi - self.P(base).phi - self.dP_apply(base, v).phi
        return float(np.max(np.abs(remainder), initial=0.0))


def solve_strip(triple: StripTriple, geom: StripGeometry, background: Optional[Background] = None,
                cfg: Optional[IterationConfig] = None) -> StripSolution:
    return StripProblem(geom, triple.torus, background, cfg).solve(triple)


def iter_P(triple: StripTriple, geom: StripGeometry, background: Optional[Background] = None,
           cfg: Optional[IterationConfig] = None) -> StripTriple:
    return StripProblem(geom, triple.torus, background, cfg).P(triple)


def theta_independence(Phi, spacing: Optional[float] = None) -> float:
    """
    sup |d Phi / d theta| over a window array (theta first), fourth-order central differences.

    Args:
        Phi: Window field or array (theta, t, ...)
        spacing: theta spacing (taken from the field's axes when Phi is a GridField)
    """
    if isinstance(Phi, GridField):
        spacing = Phi.axes[0].spacing
        Phi = Phi.values
    values = np.asarray(Phi)
    if values.shape[0] < 5:
        raise ValueError("theta_independence needs at least five theta rows")
    d = (-values[4:] + 8.0 * values[3:-1] - 8.0 * values[1:-3] + values[:-4]) / (12.0 * spacing)
    return float(np.max(np.abs(d), initial=0.0))


def extract_path(Phi, geom: StripGeometry, torus: TorusGrid) -> GeodesicPath:
    """Geodesic path t -> Phi(t, theta = 0) on the window's t-nodes."""
    values = np.asarray(Phi.values if isinstance(Phi, GridField) else Phi)
    row = int(np.argmin(np.abs(geom.window.theta_values)))
    return GeodesicPath(values[row], geom.window.t_values, torus)
