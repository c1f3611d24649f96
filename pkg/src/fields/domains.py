"""
Planar domains: the unit disc, the stadium-shaped strip region and its window.

Every domain carries
  - a closed boundary curve sampled at quadrature nodes (counterclockwise),
    where boundary data of holomorphic families live;
  - a finite-difference mesh: interior nodes plus mesh-boundary points, with
    sparse Laplacian blocks and the sparse complex derivative d/dtau.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy import sparse
from scipy.interpolate import CubicSpline

from src.fields.grids import Axis
from src.utils.errors import ResolutionError

DENSE_CAP_SAMPLES = 20001


@dataclass(frozen=True, eq=False)
class BoundaryCurve:
    """
    Closed curve sampled at a periodic parameter s.

    Attributes:
        nodes: Complex node positions, counterclockwise
        tangent: d(zeta)/ds at the nodes
        weights: Trapezoid weights (uniform parameter spacing)
        parameter: Parameter values s_k
        period: Parameter period
        basepoint_index: Node carrying the normalization point
    """
    nodes: np.ndarray
    tangent: np.ndarray
    weights: np.ndarray
    parameter: np.ndarray
    period: float
    basepoint_index: int

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def basepoint(self) -> complex:
        return complex(self.nodes[self.basepoint_index])


def circle_curve(center: complex, radius: float, points: int, start_angle: float = 0.0,
                 basepoint_index: int = 0) -> BoundaryCurve:
    """Circle sampled at equal angles, node 0 at angle `start_angle`."""
    if points < 8 or points % 2:
        raise ResolutionError(f"circle needs an even number of nodes >= 8, got {points}")
    beta = start_angle + 2.0 * np.pi * np.arange(points) / points
    e = np.exp(1j * beta)
    return BoundaryCurve(
        nodes=center + radius * e,
        tangent=1j * radius * e,
        weights=np.full(points, 2.0 * np.pi / points),
        parameter=beta - start_angle,
        period=2.0 * np.pi,
        basepoint_index=basepoint_index,
    )


class StadiumOutline:
    """
    Boundary of the stadium {0 < t < 1, |theta| <= Theta} plus two convex caps.

    Coordinates: tau = t + i theta. Each cap is the half superellipse
    |2t - 1|^4 + ((|theta| - Theta) / a)^4 = 1 with a = cap_height, which
    meets the lines t = 0, 1 with matching third-order contact. Arclength
    is measured counterclockwise from tau = 0.
    """

    def __init__(self, theta: float, cap_height: float = 0.5):
        self.theta = float(theta)
        self.cap_height = float(cap_height)
        # cap shape without the Theta offset: identical tables for every Theta
        self.cap_profile = self._dense_cap_profile()
        self.upper_cap = self.cap_profile + 1j * self.theta
        self.lower_cap = np.conj(self.upper_cap)[::-1]
        seg = np.abs(np.diff(self.cap_profile))
        self.cap_cumulative = np.concatenate([[0.0], np.cumsum(seg)])
        self.cap_length = float(self.cap_cumulative[-1])
        self.upper_tangent = self._unit_tangent(self.upper_cap, self.cap_cumulative)
        self.lower_cumulative = self.cap_length - self.cap_cumulative[::-1]
        self.lower_tangent = self._unit_tangent(self.lower_cap, self.lower_cumulative)
        th, lc = self.theta, self.cap_length
        self.breaks = np.cumsum([0.0, th, lc, 2.0 * th, lc, th])

    @property
    def length(self) -> float:
        return float(self.breaks[-1])

    def cap_offset(self, t: np.ndarray) -> np.ndarray:
        """Height of the cap above |theta| = Theta over the point t."""
        s = np.clip(1.0 - np.abs(2.0 * np.asarray(t) - 1.0) ** 4, 0.0, None)
        return self.cap_height * s ** 0.25

    def cap_halfwidth(self, height: np.ndarray) -> np.ndarray:
        """Half width in t of the cap at height |theta| - Theta."""
        s = np.clip(1.0 - (np.asarray(height) / self.cap_height) ** 4, 0.0, None)
        return 0.5 * s ** 0.25

    def _dense_cap_profile(self) -> np.ndarray:
        """Upper cap minus i Theta, from t = 1 to t = 0; exact at the corners and the apex."""
        u = np.linspace(0.0, 1.0, DENSE_CAP_SAMPLES)
        w = np.sin(np.pi * (0.5 - u))
        c, s = np.sin(0.5 * np.pi * w), np.sin(0.5 * np.pi * (1.0 - np.abs(w)))
        t = 0.5 * (1.0 + np.sign(c) * np.sqrt(np.abs(c)))
        return t + 1j * self.cap_height * np.sqrt(s)

    @staticmethod
    def _unit_tangent(points: np.ndarray, cumulative: np.ndarray) -> np.ndarray:
        d = np.gradient(points, cumulative)
        return d / np.abs(d)

    def contains(self, points: np.ndarray, strict: bool = True) -> np.ndarray:
        p = np.asarray(points)
        t, th = p.real, np.abs(p.imag)
        if strict:
            in_band = (t > 0.0) & (t < 1.0)
            body = th <= self.theta
            cap = (np.abs(2 * t - 1) ** 4 + (np.clip(th - self.theta, 0, None) / self.cap_height) ** 4) < 1.0
        else:
            in_band = (t >= 0.0) & (t <= 1.0)
            body = th <= self.theta
            cap = (np.abs(2 * t - 1) ** 4 + (np.clip(th - self.theta, 0, None) / self.cap_height) ** 4) <= 1.0
        return in_band & (body | cap)

    def locate(self, s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Segment (0 left-lower, 1 lower cap, 2 right, 3 upper cap, 4 left-upper) and local arclength."""
        s = np.mod(np.asarray(s, dtype=float), self.length)
        seg = np.clip(np.searchsorted(self.breaks, s, side="right") - 1, 0, 4)
        return seg, s - self.breaks[seg]

    def cap_point(self, local: np.ndarray, upper: bool = True) -> np.ndarray:
        """Cap point at arclength `local` from the cap's start (t = 1 upper, t = 0 lower)."""
        x = np.asarray(local, dtype=float) if upper else self.cap_length - np.asarray(local, dtype=float)
        cum, profile = self.cap_cumulative, self.cap_profile
        point = np.interp(x, cum, profile.real) + 1j * (self.theta + np.interp(x, cum, profile.imag))
        return point if upper else np.conj(point)

    def point_at(self, s: np.ndarray) -> np.ndarray:
        seg, local = self.locate(s)
        th = self.theta
        out = np.empty(seg.shape, dtype=complex)
        for k, fn in enumerate((
            lambda x: -1j * x,
            lambda x: self.cap_point(x, upper=False),
            lambda x: 1.0 + 1j * (-th + x),
            lambda x: self.cap_point(x, upper=True),
            lambda x: 1j * (th - x),
        )):
            mask = seg == k
            if np.any(mask):
                out[mask] = fn(local[mask])
        return out

    def tangent_at(self, s: np.ndarray) -> np.ndarray:
        seg, local = self.locate(s)
        out = np.empty(seg.shape, dtype=complex)
        cum = self.cap_cumulative
        low = self.lower_cumulative
        for k, fn in enumerate((
            lambda x: np.full(x.shape, -1j),
            lambda x: np.interp(x, low, self.lower_tangent.real) + 1j * np.interp(x, low, self.lower_tangent.imag),
            lambda x: np.full(x.shape, 1j),
            lambda x: np.interp(x, cum, self.upper_tangent.real) + 1j * np.interp(x, cum, self.upper_tangent.imag),
            lambda x: np.full(x.shape, -1j),
        )):
            mask = seg == k
            if np.any(mask):
                out[mask] = fn(local[mask])
        return out / np.abs(out)

    def arclength_of(self, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Arclength coordinate of points lying on the outline."""
        p = np.asarray(points, dtype=complex)
        t, th = p.real, p.imag
        s = np.empty(p.shape)
        left = (np.abs(t) < tol) & (np.abs(th) <= self.theta + tol)
        right = (np.abs(t - 1.0) < tol) & (np.abs(th) <= self.theta + tol)
        upper = ~left & ~right & (th > 0)
        lower = ~left & ~right & (th < 0)
        s[left & (th <= 0)] = -th[left & (th <= 0)]
        s[left & (th > 0)] = self.length - th[left & (th > 0)]
        s[right] = self.breaks[2] + th[right] + self.theta
        lc = self.lower_cap
        s[lower] = self.breaks[1] + np.interp(t[lower], lc.real, self.lower_cumulative)
        uc = self.upper_cap
        s[upper] = self.breaks[3] + np.interp(t[upper], uc.real[::-1], self.cap_cumulative[::-1])
        return s

    def curve(self, points: int) -> BoundaryCurve:
        """Uniform-arclength sampling with node 0 at tau = 0 and node points/2 at tau = 1."""
        if points < 16 or points % 4:
            raise ResolutionError(f"stadium boundary needs a multiple of 4 nodes >= 16, got {points}")
        ds = self.length / points
        s = ds * np.arange(points)
        return BoundaryCurve(
            nodes=self.point_at(s),
            tangent=self.tangent_at(s),
            weights=np.full(points, ds),
            parameter=s,
            period=self.length,
            basepoint_index=0,
        )


class PlanarDomainGrid(ABC):
    """
    Planar domain with a boundary curve and a finite-difference mesh.

    Subclasses fill the mesh arrays and the sparse blocks
    L_II, L_IB (Laplacian) and D_II, D_IB (d/dtau) in __init__.
    """
    kind: str = ""

    curve: BoundaryCurve
    interior_nodes: np.ndarray
    mesh_boundary_nodes: np.ndarray
    spacing: float
    L_II: sparse.csr_matrix
    L_IB: sparse.csr_matrix
    D_II: sparse.csr_matrix
    D_IB: sparse.csr_matrix

    @property
    def boundary_nodes(self) -> np.ndarray:
        return self.curve.nodes

    @property
    def basepoint(self) -> complex:
        return self.curve.basepoint

    @property
    def mesh_nodes(self) -> np.ndarray:
        return np.concatenate([self.interior_nodes, self.mesh_boundary_nodes])

    def laplacian_blocks(self) -> Tuple[sparse.csr_matrix, sparse.csr_matrix]:
        return self.L_II, self.L_IB

    @staticmethod
    def _apply(matrix: sparse.spmatrix, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u)
        flat = u.reshape(u.shape[0], -1)
        return np.asarray(matrix @ flat).reshape((matrix.shape[0],) + u.shape[1:])

    def laplacian(self, u_int: np.ndarray, u_mb: np.ndarray) -> np.ndarray:
        """Discrete Laplacian at interior nodes."""
        return self._apply(self.L_II, u_int) + self._apply(self.L_IB, u_mb)

    def d_tau(self, u_int: np.ndarray, u_mb: np.ndarray) -> np.ndarray:
        """Discrete d/dtau = (d/dt - i d/dtheta)/2 at interior nodes."""
        return self._apply(self.D_II, u_int) + self._apply(self.D_IB, u_mb)

    @abstractmethod
    def boundary_to_mesh(self, values: np.ndarray) -> np.ndarray:
        """Transfer data on the curve nodes to the mesh-boundary points."""

    @abstractmethod
    def contains(self, points: np.ndarray) -> np.ndarray:
        """Strict interior test."""


class DiscGrid(PlanarDomainGrid):
    """
    Unit disc with a shifted polar mesh.

    Rings r_j = (j - 1/2) dr, dr = 1/(J - 1/2), j = 1..J, the ring j = J being
    the unit circle; M equally spaced angles. The boundary curve nodes coincide
    with the outer ring; the basepoint -i is node 3M/4.
    """
    kind = "disc"

    def __init__(self, radial_points: int = 16, angular_points: int = 64):
        if radial_points < 3:
            raise ResolutionError("disc mesh needs at least 3 rings")
        if angular_points % 4 or angular_points < 8:
            raise ResolutionError("disc mesh needs a multiple of 4 angles, at least 8")
        J, M = radial_points, angular_points
        self.radial_points, self.angular_points = J, M
        self.dr = 1.0 / (J - 0.5)
        self.dbeta = 2.0 * np.pi / M
        self.spacing = self.dr
        self.radii = (np.arange(1, J + 1) - 0.5) * self.dr
        self.angles = self.dbeta * np.arange(M)
        self.curve = circle_curve(0.0, 1.0, M, basepoint_index=3 * M // 4)
        rr, bb = np.meshgrid(self.radii[:-1], self.angles, indexing="ij")
        self.interior_nodes = (rr * np.exp(1j * bb)).ravel()
        self.mesh_boundary_nodes = self.curve.nodes.copy()
        self._assemble()

    def _index(self, j: int, k: int) -> int:
        return (j - 1) * self.angular_points + (k % self.angular_points)

    def _assemble(self) -> None:
        J, M, dr, db = self.radial_points, self.angular_points, self.dr, self.dbeta
        n = (J - 1) * M
        L_II, L_IB = sparse.lil_matrix((n, n)), sparse.lil_matrix((n, M))
        D_II = sparse.lil_matrix((n, n), dtype=complex)
        D_IB = sparse.lil_matrix((n, M), dtype=complex)
        for j in range(1, J):
            r = self.radii[j - 1]
            r_out, r_in = r + 0.5 * dr, r - 0.5 * dr
            a_out = r_out / (r * dr * dr)
            a_in = r_in / (r * dr * dr)
            a_b = 1.0 / (r * r * db * db)
            for k in range(M):
                row = self._index(j, k)
                L_II[row, row] = -(a_out + a_in + 2.0 * a_b)
                L_II[row, self._index(j, k + 1)] += a_b
                L_II[row, self._index(j, k - 1)] += a_b
                if j + 1 < J:
                    L_II[row, self._index(j + 1, k)] += a_out
                else:
                    L_IB[row, k] += a_out
                if j > 1:
                    L_II[row, self._index(j - 1, k)] += a_in

                # d/dtau = e^{-i beta}/2 (d/dr - (i/r) d/dbeta)
                phase = 0.5 * np.exp(-1j * self.angles[k])
                cr = phase / (2.0 * dr)
                if j + 1 < J:
                    D_II[row, self._index(j + 1, k)] += cr
                else:
                    D_IB[row, k] += cr
                if j > 1:
                    D_II[row, self._index(j - 1, k)] -= cr
                else:
                    D_II[row, self._index(1, k + M // 2)] -= cr
                cb = -1j * phase / (r * 2.0 * db)
                D_II[row, self._index(j, k + 1)] += cb
                D_II[row, self._index(j, k - 1)] -= cb
        self.L_II, self.L_IB = L_II.tocsr(), L_IB.tocsr()
        self.D_II, self.D_IB = D_II.tocsr(), D_IB.tocsr()

    def boundary_to_mesh(self, values: np.ndarray) -> np.ndarray:
        return np.array(values, copy=True)

    def contains(self, points: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(points)) < 1.0

    def polar_axes(self) -> Tuple[Axis, Axis]:
        return (
            Axis("r", self.radial_points, self.dr, False),
            Axis("beta", self.angular_points, self.dbeta, True),
        )

    def polar_values(self, u_int: np.ndarray, u_mb: np.ndarray) -> np.ndarray:
        """Mesh values arranged as (J, M, ...) with the boundary as last ring."""
        J, M = self.radial_points, self.angular_points
        inner = np.asarray(u_int).reshape((J - 1, M) + np.shape(u_int)[1:])
        return np.concatenate([inner, np.asarray(u_mb)[None]], axis=0)


class StadiumGrid(PlanarDomainGrid):
    """
    Stadium region with a Cartesian mesh of spacing h = 1/t_points.

    Nodes t_i = i h, theta_j = j h. Next to the caps the five-point stencil
    uses the Shortley-Weller form with the exact distances to the curve.
    The boundary curve is sampled uniformly in arclength at `boundary_points`
    nodes, node 0 at tau = 0.
    """
    kind = "stadium-strip"

    def __init__(self, outline: StadiumOutline, t_points: int = 8, boundary_points: int = 512):
        if t_points < 4:
            raise ResolutionError("stadium mesh needs at least 4 intervals across the strip")
        self.outline = outline
        self.t_points = t_points
        self.spacing = h = 1.0 / t_points
        self.curve = outline.curve(boundary_points)
        th, a = outline.theta, outline.cap_height
        jmax = int(np.floor((th + a) / h + 1e-12))
        self.theta_index = np.arange(-jmax, jmax + 1)
        t = h * np.arange(t_points + 1)
        nodes = []
        for j in self.theta_index:
            for i in range(1, t_points):
                p = t[i] + 1j * h * j
                if outline.contains(np.array([p]))[0]:
                    nodes.append((i, int(j)))
        self.node_ij = nodes
        self._lookup: Dict[Tuple[int, int], int] = {ij: n for n, ij in enumerate(nodes)}
        self.interior_nodes = np.array([h * i + 1j * h * j for i, j in nodes])
        self._assemble()

    def _boundary_point(self, points: Dict[Tuple[float, float], int], p: complex) -> int:
        key = (round(p.real, 12), round(p.imag, 12))
        if key not in points:
            points[key] = len(points)
        return points[key]

    def _neighbours(self, i: int, j: int, points: Dict) -> list:
        """(axis, sign, distance, kind, index) for the four stencil arms."""
        h, outline = self.spacing, self.outline
        arms = []
        for axis, di, dj in ((0, 1, 0), (0, -1, 0), (1, 0, 1), (1, 0, -1)):
            target = (i + di, j + dj)
            if target in self._lookup:
                arms.append((axis, di + dj, h, 0, self._lookup[target]))
                continue
            t0, th0 = i * h, j * h
            if axis == 0:
                if abs(th0) <= outline.theta:
                    tb = t0 + di * h
                else:
                    half = float(outline.cap_halfwidth(abs(th0) - outline.theta))
                    tb = 0.5 + di * half
                dist = abs(tb - t0)
                p = tb + 1j * th0
            else:
                thb = dj * (outline.theta + float(outline.cap_offset(t0)))
                dist = abs(thb - th0)
                p = t0 + 1j * thb
            if dist < 1e-12:
                raise ResolutionError(f"mesh node ({i}, {j}) lies on the boundary curve")
            arms.append((axis, di + dj, dist, 1, self._boundary_point(points, p)))
        return arms

    def _assemble(self) -> None:
        n = len(self.node_ij)
        points: Dict[Tuple[float, float], int] = {}
        rows_arms = [self._neighbours(i, j, points) for i, j in self.node_ij]
        nb = len(points)
        mb = np.empty(nb, dtype=complex)
        for (tr, thr), k in points.items():
            mb[k] = tr + 1j * thr
        self.mesh_boundary_nodes = mb
        self.mesh_boundary_parameter = self.outline.arclength_of(mb)

        L_II, L_IB = sparse.lil_matrix((n, n)), sparse.lil_matrix((n, nb))
        D_II = sparse.lil_matrix((n, n), dtype=complex)
        D_IB = sparse.lil_matrix((n, nb), dtype=complex)
        for row, arms in enumerate(rows_arms):
            for axis in (0, 1):
                plus = next(a for a in arms if a[0] == axis and a[1] > 0)
                minus = next(a for a in arms if a[0] == axis and a[1] < 0)
                hp, hm = plus[2], minus[2]
                c_plus = 2.0 / (hp * (hp + hm))
                c_minus = 2.0 / (hm * (hp + hm))
                L_II[row, row] += -(c_plus + c_minus)
                # first derivative, three-point nonuniform
                w = 1.0 / (hp * hm * (hp + hm))
                d_plus, d_minus, d_center = hm * hm * w, -hp * hp * w, (hp * hp - hm * hm) * w
                factor = 0.5 if axis == 0 else -0.5j
                D_II[row, row] += factor * d_center
                for arm, c, d in ((plus, c_plus, d_plus), (minus, c_minus, d_minus)):
                    target_L = L_II if arm[3] == 0 else L_IB
                    target_D = D_II if arm[3] == 0 else D_IB
                    target_L[row, arm[4]] += c
                    target_D[row, arm[4]] += factor * d
        self.L_II, self.L_IB = L_II.tocsr(), L_IB.tocsr()
        self.D_II, self.D_IB = D_II.tocsr(), D_IB.tocsr()

    def boundary_to_mesh(self, values: np.ndarray) -> np.ndarray:
        """Periodic cubic spline in arclength from the curve nodes to the mesh-boundary points."""
        values = np.asarray(values)
        s = np.append(self.curve.parameter, self.curve.period)
        closed = np.concatenate([values, values[:1]], axis=0)

        def spline(part: np.ndarray) -> np.ndarray:
            return CubicSpline(s, part, axis=0, bc_type="periodic")(self.mesh_boundary_parameter)

        if np.iscomplexobj(values):
            return spline(closed.real) + 1j * spline(closed.imag)
        return spline(closed)

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self.outline.contains(points)

    def window_layout(self, extent: float = 2.0) -> Tuple[np.ndarray, np.ndarray]:
        """
        Index map of the window {|theta| <= extent} x [0, 1].

        Returns:
            (theta_values, index_map) where index_map[a, i] indexes the
            concatenation of interior and mesh-boundary values for the node
            (theta_a, t_i), i = 0..t_points.
        """
        h = self.spacing
        jw = int(round(extent / h))
        if abs(jw * h - extent) > 1e-12:
            raise ResolutionError(f"window extent {extent} is not a multiple of the spacing {h}")
        n_int = len(self.node_ij)
        mb_lookup = {
            (round(p.real, 12), round(p.imag, 12)): k for k, p in enumerate(self.mesh_boundary_nodes)
        }
        index = np.empty((2 * jw + 1, self.t_points + 1), dtype=int)
        for a, j in enumerate(range(-jw, jw + 1)):
            for i in range(self.t_points + 1):
                if (i, j) in self._lookup:
                    index[a, i] = self._lookup[(i, j)]
                else:
                    key = (round(i * h, 12), round(j * h, 12))
                    index[a, i] = n_int + mb_lookup[key]
        return h * np.arange(-jw, jw + 1), index


@dataclass(frozen=True)
class WindowGrid:
    """The rectangle window {|theta| <= extent} x [0, 1], spacing h in both directions."""
    extent: float
    t_points: int
    kind: str = "rectangle-window"

    @property
    def spacing(self) -> float:
        return 1.0 / self.t_points

    @property
    def theta_values(self) -> np.ndarray:
        n = int(round(self.extent * self.t_points))
        return self.spacing * np.arange(-n, n + 1)

    @property
    def t_values(self) -> np.ndarray:
        return self.spacing * np.arange(self.t_points + 1)

    def axes(self) -> Tuple[Axis, Axis]:
        return (
            Axis("theta", self.theta_values.size, self.spacing, False),
            Axis("t", self.t_points + 1, self.spacing, False),
        )

    def selectors(self) -> Dict[str, Tuple[int, int]]:
        return {"t=0": (1, 0), "t=1": (1, self.t_points)}
