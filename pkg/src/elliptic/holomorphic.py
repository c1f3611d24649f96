"""
Holomorphic functions on a planar domain, stored by their boundary values.

Two representations share one interface:
  - DiscFourierOperator: boundary Fourier modes on the unit circle; the
    conjugate function is the multiplier -i sgn(m), interior values are the
    power series of the nonnegative modes.
  - CauchyOperator: any smooth closed curve; boundary values satisfy the
    Plemelj relation g = S g with the principal-value Cauchy operator S,
    discretized by the alternating-point trapezoid rule. Interior values use
    the barycentric Cauchy formula, a rational function of the evaluation
    point and hence exactly holomorphic.
"""
from abc import ABC, abstractmethod
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np
from scipy import linalg

from src.fields.domains import BoundaryCurve, DiscGrid, PlanarDomainGrid
from src.fields.field import GridField
from src.utils.logging import logger


def _flat(u: np.ndarray) -> Tuple[np.ndarray, Tuple[int, ...]]:
    u = np.asarray(u)
    return u.reshape(u.shape[0], -1), u.shape[1:]


class HolomorphicBoundaryOperator(ABC):
    """Operations on boundary values of holomorphic functions."""

    curve: BoundaryCurve

    @property
    def basepoint_index(self) -> int:
        return self.curve.basepoint_index

    @abstractmethod
    def conjugate(self, u: np.ndarray, normalization: str = "basepoint") -> np.ndarray:
        """
        Boundary values of the harmonic conjugate of real boundary data u.

        normalization: "basepoint" (v = 0 at the basepoint node) or "mean"
        (v has zero boundary mean).
        """

    @abstractmethod
    def extend(self, g: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Values at `points` of the holomorphic function with boundary values g."""

    @abstractmethod
    def derivative(self, g: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Complex derivative at interior `points`."""

    @abstractmethod
    def holomorphy_defect(self, g: np.ndarray) -> float:
        """Relative distance of boundary data g from holomorphic boundary values."""

    def completion(self, u: np.ndarray, normalization: str = "basepoint") -> np.ndarray:
        return np.asarray(u) + 1j * self.conjugate(u, normalization)

    def harmonic_extension(self, u: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Harmonic extension of real boundary data (complex data: part by part)."""
        u = np.asarray(u)
        if np.iscomplexobj(u):
            return self.harmonic_extension(u.real, points) + 1j * self.harmonic_extension(u.imag, points)
        return self.extend(self.completion(u), points).real

    def _normalize(self, v: np.ndarray, normalization: str) -> np.ndarray:
        if normalization == "basepoint":
            return v - v[self.basepoint_index]
        if normalization == "mean":
            w = self.curve.weights
            mean = np.tensordot(w, v, axes=(0, 0)) / w.sum()
            return v - mean
        raise ValueError(f"unknown normalization {normalization!r}")


class DiscFourierOperator(HolomorphicBoundaryOperator):
    """Unit-circle boundary with nodes e^{2 pi i k / M}."""

    def __init__(self, curve: BoundaryCurve):
        self.curve = curve
        self.size = curve.size
        m = np.fft.fftfreq(self.size, d=1.0 / self.size)
        self.modes = m
        self.multiplier = -1j * np.sign(m)
        self.multiplier[self.size // 2] = 0.0

    def conjugate(self, u: np.ndarray, normalization: str = "basepoint") -> np.ndarray:
        flat, rest = _flat(u)
        v = np.fft.ifft(np.fft.fft(flat, axis=0) * self.multiplier[:, None], axis=0).real
        return self._normalize(v.reshape((self.size,) + rest), normalization)

    def _coefficients(self, g: np.ndarray) -> Tuple[np.ndarray, Tuple[int, ...]]:
        flat, rest = _flat(g)
        c = np.fft.fft(flat, axis=0) / self.size
        return c[: self.size // 2], rest

    def extend(self, g: np.ndarray, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=complex).ravel()
        c, rest = self._coefficients(g)
        powers = points[:, None] ** np.arange(c.shape[0])[None, :]
        return (powers @ c).reshape((points.size,) + rest)

    def derivative(self, g: np.ndarray, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=complex).ravel()
        c, rest = self._coefficients(g)
        m = np.arange(c.shape[0])
        powers = np.zeros((points.size, m.size), dtype=complex)
        powers[:, 1:] = m[None, 1:] * points[:, None] ** (m[None, 1:] - 1)
        return (powers @ c).reshape((points.size,) + rest)

    def holomorphy_defect(self, g: np.ndarray) -> float:
        flat, _ = _flat(g)
        c = np.fft.fft(flat, axis=0) / self.size
        scale = np.max(np.abs(flat)) if flat.size else 0.0
        if scale == 0.0:
            return 0.0
        negative = c[self.size // 2 + 1:]
        return float(np.max(np.abs(negative), initial=0.0) / scale)


class CauchyOperator(HolomorphicBoundaryOperator):
    """Cauchy-integral representation on a smooth closed curve."""

    def __init__(self, curve: BoundaryCurve, node_tolerance: float = 1e-13):
        self.curve = curve
        self.size = n = curve.size
        zeta, c = curve.nodes, curve.weights * curve.tangent
        self.cauchy_weights = c
        diff = zeta[None, :] - zeta[:, None]
        odd = (np.subtract.outer(np.arange(n), np.arange(n)) % 2) == 1
        safe = np.where(odd, diff, 1.0)
        # S[k, j] = (1 / (pi i)) * 2 c_j / (zeta_j - zeta_k) on odd offsets
        self.plemelj = np.where(odd, 2.0 * c[None, :] / (np.pi * 1j * safe), 0.0)
        s_r, s_i = self.plemelj.real, self.plemelj.imag
        system = np.eye(n) - s_r
        system[:, curve.basepoint_index] += 1.0
        lu = linalg.lu_factor(system)
        self.conjugate_matrix = linalg.lu_solve(lu, s_i)
        self.node_tolerance = node_tolerance * max(1.0, float(np.max(np.abs(zeta))))
        self._kernels: Dict[Tuple[int, int], Tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        logger.debug(f"Built Cauchy operator on {n} boundary nodes")

    def conjugate(self, u: np.ndarray, normalization: str = "basepoint") -> np.ndarray:
        flat, rest = _flat(u)
        v = self.conjugate_matrix @ flat
        return self._normalize(v.reshape((self.size,) + rest), normalization)

    def _kernel(self, points: np.ndarray):
        key = (points.size, hash(points.tobytes()))
        if key not in self._kernels:
            if len(self._kernels) > 16:
                self._kernels.clear()
            d = self.curve.nodes[None, :] - points[:, None]
            hit = np.abs(d) < self.node_tolerance
            on_node = hit.any(axis=1)
            d = np.where(hit, 1.0, d)
            k = self.cauchy_weights[None, :] / d
            k[on_node] = 0.0
            k[hit] = 1.0
            self._kernels[key] = (k, d, on_node)
        return self._kernels[key]

    def extend(self, g: np.ndarray, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=complex).ravel()
        flat, rest = _flat(g)
        k, _, _ = self._kernel(points)
        values = (k @ flat) / k.sum(axis=1)[:, None]
        return values.reshape((points.size,) + rest)

    def derivative(self, g: np.ndarray, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=complex).ravel()
        flat, rest = _flat(g)
        k, d, on_node = self._kernel(points)
        if np.any(on_node):
            raise ValueError("derivative is only available at interior points")
        k2 = k / d
        num, den = k @ flat, k.sum(axis=1)[:, None]
        dnum, dden = k2 @ flat, k2.sum(axis=1)[:, None]
        return ((dnum * den - num * dden) / den ** 2).reshape((points.size,) + rest)

    def holomorphy_defect(self, g: np.ndarray) -> float:
        flat, _ = _flat(g)
        scale = np.max(np.abs(flat)) if flat.size else 0.0
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(flat - self.plemelj @ flat)) / scale)


@lru_cache(maxsize=8)
def holomorphic_operator(domain) -> HolomorphicBoundaryOperator:
    """Boundary operator of a planar domain (or of a bare boundary curve)."""
    if isinstance(domain, DiscGrid):
        return DiscFourierOperator(domain.curve)
    curve = domain.curve if isinstance(domain, PlanarDomainGrid) else domain
    return CauchyOperator(curve)


def harmonic_conjugate(u_boundary: GridField, normalization: str = "mean") -> GridField:
    """
    Harmonic conjugate of real boundary data.

    Args:
        u_boundary: Boundary field whose `domain` is a planar domain; values
            have the curve nodes along axis 0
        normalization: "mean" (zero boundary mean) or "basepoint"

    Returns:
        Boundary field v such that u + iv is the boundary trace of a
        holomorphic function
    """
    if u_boundary.is_complex:
        raise ValueError("harmonic_conjugate needs real boundary data")
    op = holomorphic_operator(u_boundary.domain)
    return u_boundary.with_values(op.conjugate(u_boundary.values, normalization))
