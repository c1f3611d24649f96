from dataclasses import dataclass
from typing import Tuple
import math

import numpy as np

from src.utils.errors import ResolutionError


@dataclass(frozen=True)
class Axis:
    """
    One sampled array axis.

    Args:
        name: Axis label ("x", "y", "t", "theta", "r", "beta", ...)
        size: Number of samples
        spacing: Distance between neighbouring samples
        periodic: Whether index arithmetic wraps
    """
    name: str
    size: int
    spacing: float
    periodic: bool = False

    def distance(self, separation: int) -> float:
        """Physical distance of an index separation along this axis."""
        if self.periodic:
            separation = min(separation % self.size, self.size - separation % self.size)
        return abs(separation) * self.spacing


@dataclass(frozen=True)
class TorusGrid:
    """
    Uniform grid on the flat torus R^2 / (period Z)^2, complex coordinate z = x + iy.

    Values on the torus are stored with x along the second-to-last array axis
    and y along the last one.
    """
    points_per_dim: int
    period: float = 2.0 * math.pi
    dim: int = 1

    def __post_init__(self):
        if self.dim != 1:
            raise ValueError("only complex dimension 1 is supported")
        if self.points_per_dim < 4 or self.points_per_dim % 2:
            raise ResolutionError(
                f"torus needs an even number of points >= 4, got {self.points_per_dim}"
            )
        if self.period <= 0:
            raise ValueError("torus period must be positive")

    @property
    def spacing(self) -> float:
        return self.period / self.points_per_dim

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.points_per_dim, self.points_per_dim)

    def axes(self) -> Tuple[Axis, Axis]:
        n, h = self.points_per_dim, self.spacing
        return (Axis("x", n, h, True), Axis("y", n, h, True))

    def coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        """Node coordinates (X, Y), each of shape (n, n), ij-indexed."""
        s = np.arange(self.points_per_dim) * self.spacing
        return np.meshgrid(s, s, indexing="ij")

    def z(self) -> np.ndarray:
        x, y = self.coordinates()
        return x + 1j * y

    def wavenumbers(self) -> Tuple[np.ndarray, np.ndarray]:
        """Angular wavenumbers (K1, K2) matching numpy's FFT ordering."""
        n = self.points_per_dim
        k = np.fft.fftfreq(n, d=1.0 / n) * (2.0 * math.pi / self.period)
        return np.meshgrid(k, k, indexing="ij")

    def wrap(self, index: int) -> int:
        return index % self.points_per_dim

    def node_index(self, point: complex) -> Tuple[int, int]:
        """Index of the grid node nearest to a torus point."""
        h = self.spacing
        return (
            self.wrap(int(round(point.real / h))),
            self.wrap(int(round(point.imag / h))),
        )


@dataclass(frozen=True)
class HolderIndex:
    """Hölder index r = m + alpha with integer m and alpha in [0, 1)."""
    m: int
    alpha: float = 0.0

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("Hölder index order must be nonnegative")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"Hölder exponent must lie in [0, 1), got {self.alpha}")

    @classmethod
    def from_real(cls, r: float) -> "HolderIndex":
        if r < 0:
            raise ValueError("Hölder index must be nonnegative")
        m = int(math.floor(r + 1e-12))
        alpha = max(0.0, r - m)
        if alpha < 1e-12:
            alpha = 0.0
        return cls(m, alpha)

    @property
    def value(self) -> float:
        return self.m + self.alpha

    def __float__(self) -> float:
        return self.value

    def __le__(self, other: "HolderIndex") -> bool:
        return self.value <= other.value

    def __lt__(self, other: "HolderIndex") -> bool:
        return self.value < other.value
