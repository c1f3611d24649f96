"""
Long-strip geometry: the stadium region, its window and the cap extension s.

The region is {0 < t < 1, |theta| <= Theta} closed by two convex caps. The
caps are the caps of a master region (straight part |theta| <= 1) translated
by +-(Theta - 1), so that s moves window data onto the caps by the same
translation:

    s(phi)(tau) = phi(theta -+ (Theta - 1), t)   on the caps,
    s(phi)(tau) = 0                               for |theta| <= Theta.
"""
from dataclasses import dataclass, field as dataclass_field
from typing import Any, Dict, Optional

import numpy as np
from scipy import ndimage

from src.fields.domains import StadiumGrid, StadiumOutline, WindowGrid
from src.fields.field import GridField
from src.utils.config import settings
from src.utils.errors import ConfigError
from src.utils.logging import logger

MASTER_THETA = 1.0
CAP_HEIGHT = 0.5
WINDOW_EXTENT = 2.0
NODE_SNAP = 1e-9
CAP_TRANSLATE_TOL = 1e-12


@dataclass(eq=False)
class StripGeometry:
    """
    Attributes:
        Theta: Half length of the straight part, > 4
        outline: Stadium outline of the region
        master: Master outline whose caps are translated onto the region
        grid: Stadium mesh and boundary curve
        window: Rectangle window {|theta| <= 2} x [0, 1]
        window_index: Index of each window node in [interior; mesh-boundary]
    """
    Theta: float
    outline: StadiumOutline
    master: StadiumOutline
    grid: StadiumGrid
    window: WindowGrid
    window_index: np.ndarray
    _matrices: Dict[str, np.ndarray] = dataclass_field(default_factory=dict, repr=False)

    @property
    def shift(self) -> float:
        return self.Theta - MASTER_THETA

    @property
    def window_shape(self):
        return self.window_index.shape

    def _cap_interpolation(self, points: np.ndarray) -> np.ndarray:
        """
        Dense matrix W with s(phi)(points) = W @ phi.ravel() (torus axes aside).

        Translated points are read off the window by bilinear weights, so a point
        landing on a window node copies that node's value and no cap value leaves
        the range of the window values.
        """
        t, th = points.real, points.imag
        upper, lower = th > self.Theta + 1e-12, th < -self.Theta - 1e-12
        shifted = np.where(upper, th - self.shift, np.where(lower, th + self.shift, 0.0))
        h = self.window.spacing
        coords = np.stack([(shifted + WINDOW_EXTENT) / h, t / h])
        nearest = np.round(coords)
        coords = np.where(np.abs(coords - nearest) < NODE_SNAP, nearest, coords)
        caps = upper | lower
        n_window = int(np.prod(self.window_shape))
        W = np.zeros((points.size, n_window))
        if not np.any(caps):
            return W
        basis = np.zeros(n_window)
        for k in range(n_window):
            basis[:] = 0.0
            basis[k] = 1.0
            column = ndimage.map_coordinates(basis.reshape(self.window_shape), coords[:, caps], order=1,
                                             mode="nearest")
            W[caps, k] = column
        return W

    def _matrix(self, name: str) -> np.ndarray:
        if name not in self._matrices:
            points = self.grid.curve.nodes if name == "curve" else self.grid.mesh_boundary_nodes
            self._matrices[name] = self._cap_interpolation(points)
        return self._matrices[name]

    def _apply(self, name: str, window_values: np.ndarray) -> np.ndarray:
        values = np.asarray(window_values)
        rest = values.shape[2:]
        flat = values.reshape((-1,) + (int(np.prod(rest)) if rest else 1,))
        if np.iscomplexobj(flat):
            out = self._matrix(name) @ flat.real + 1j * (self._matrix(name) @ flat.imag)
        else:
            out = self._matrix(name) @ flat
        return out.reshape((out.shape[0],) + rest)

    def s_extend_curve(self, window_values: np.ndarray) -> np.ndarray:
        """s(phi) at the boundary curve nodes."""
        return self._apply("curve", window_values)

    def s_extend_mesh(self, window_values: np.ndarray) -> np.ndarray:
        """s(phi) at the mesh-boundary points."""
        return self._apply("mesh", window_values)

    def restrict_to_window(self, u_int: np.ndarray, u_mb: np.ndarray) -> np.ndarray:
        """Window array (theta, t, ...) from interior and mesh-boundary values."""
        values = np.concatenate([np.asarray(u_int), np.asarray(u_mb)], axis=0)
        return values[self.window_index]

    def window_field(self, values: np.ndarray, torus=None) -> GridField:
        return GridField.on_window(values, self.window, torus)

    def linear_part(self, phi0: np.ndarray, phi1: np.ndarray, points: np.ndarray) -> np.ndarray:
        """phi_t = (1 - t) phi0 + t phi1 at planar points (t = Re point)."""
        t = np.clip(np.asarray(points).real, 0.0, 1.0)[:, None, None]
        return (1.0 - t) * np.asarray(phi0)[None] + t * np.asarray(phi1)[None]

    def cap_translate_defect(self) -> float:
        """Largest distance between translated cap nodes and the master cap points at equal cap arclength."""
        curve = self.grid.curve
        seg, local = self.outline.locate(curve.parameter)
        defect = 0.0
        for k, sign in ((1, -1.0), (3, 1.0)):
            on_cap = seg == k
            if not np.any(on_cap):
                continue
            moved = curve.nodes[on_cap] - 1j * sign * self.shift
            expected = self.master.cap_point(local[on_cap], upper=sign > 0)
            defect = max(defect, float(np.max(np.abs(moved - expected))))
        return defect

    def containment_violations(self, samples: int = 1000) -> int:
        """Master-outline samples violating {|theta| < 1} inside, {|theta| < 7/4} outside."""
        s = np.linspace(0.0, self.master.length, samples, endpoint=False)
        points = self.master.point_at(s)
        th, t = np.abs(points.imag), points.real
        outer = np.sum(th >= 1.75)
        band = np.sum((t < -1e-12) | (t > 1.0 + 1e-12))
        inner_probe = (np.linspace(0.05, 0.95, 19)[:, None] + 1j * np.linspace(-0.99, 0.99, 41)[None, :]).ravel()
        inner = np.sum(~self.master.contains(inner_probe))
        return int(outer + band + inner)

    def manifest(self) -> Dict[str, Any]:
        """Geometry description written next to the boundary-node snapshot."""
        return {
            "version": "GEOM v1",
            "Theta": self.Theta,
            "cap_height": self.outline.cap_height,
            "master_theta": MASTER_THETA,
            "t_points": self.grid.t_points,
            "boundary_points": self.grid.curve.size,
            "interior_nodes": int(self.grid.interior_nodes.size),
            "mesh_boundary_nodes": int(self.grid.mesh_boundary_nodes.size),
            "window_extent": self.window.extent,
        }


def build_strip(Theta: Optional[float] = None, t_points: int = 8, boundary_points: int = 512) -> StripGeometry:
    """
    Strip geometry with caps translated from one master region.

    Raises:
        ConfigError: If Theta <= 4
    """
    Theta = settings.DEFAULT_THETA if Theta is None else float(Theta)
    if Theta <= 4.0:
        raise ConfigError(f"strip geometry needs Theta > 4, got {Theta}")
    outline = StadiumOutline(Theta, CAP_HEIGHT)
    master = StadiumOutline(MASTER_THETA, CAP_HEIGHT)
    grid = StadiumGrid(outline, t_points, boundary_points)
    _, index = grid.window_layout(WINDOW_EXTENT)
    window = WindowGrid(WINDOW_EXTENT, t_points)
    logger.info(
        f"Built strip geometry Theta={Theta}: {grid.interior_nodes.size} interior nodes, "
        f"{grid.curve.size} boundary nodes"
    )
    return StripGeometry(Theta, outline, master, grid, window, index)


def s_extend(phi: GridField, geom: StripGeometry) -> GridField:
    """Cap extension of a window field onto the boundary curve."""
    return GridField.on_boundary(geom.s_extend_curve(phi.values), geom.grid, phi.torus)
