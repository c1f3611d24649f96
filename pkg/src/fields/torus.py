"""Spectral calculus on the flat torus; torus directions are the last two array axes."""
from typing import Tuple

import numpy as np

from src.fields.grids import TorusGrid

TORUS_AXES = (-2, -1)


def _fft(u: np.ndarray) -> np.ndarray:
    return np.fft.fft2(u, axes=TORUS_AXES)


def _ifft(u_hat: np.ndarray, real: bool) -> np.ndarray:
    out = np.fft.ifft2(u_hat, axes=TORUS_AXES)
    return out.real if real else out


def _multiplier(grid: TorusGrid, order: Tuple[int, int]) -> np.ndarray:
    k1, k2 = grid.wavenumbers()
    a, b = order
    symbol = (1j * k1) ** a * (1j * k2) ** b
    n = grid.points_per_dim
    # Odd derivatives of the Nyquist mode are not representable on the grid.
    if a % 2:
        symbol[n // 2, :] = 0.0
    if b % 2:
        symbol[:, n // 2] = 0.0
    return symbol


def derivative(u: np.ndarray, grid: TorusGrid, order: Tuple[int, int]) -> np.ndarray:
    """Spectral partial derivative d^a/dx^a d^b/dy^b."""
    real = not np.iscomplexobj(u)
    return _ifft(_fft(u) * _multiplier(grid, order), real)


def d_z(u: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Complex derivative (d/dx - i d/dy) / 2."""
    return 0.5 * (derivative(u, grid, (1, 0)) - 1j * derivative(u, grid, (0, 1)))


def d_zbar(u: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Complex derivative (d/dx + i d/dy) / 2."""
    return 0.5 * (derivative(u, grid, (1, 0)) + 1j * derivative(u, grid, (0, 1)))


def d_zz(u: np.ndarray, grid: TorusGrid) -> np.ndarray:
    k1, k2 = grid.wavenumbers()
    symbol = ((1j * k1 + k2) / 2.0) ** 2
    n = grid.points_per_dim
    symbol[n // 2, :] = 0.0
    symbol[:, n // 2] = 0.0
    return _ifft(_fft(u) * symbol, real=False)


def d_zzbar(u: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Quarter Laplacian, d^2/dz dzbar."""
    k1, k2 = grid.wavenumbers()
    real = not np.iscomplexobj(u)
    return _ifft(_fft(u) * (-(k1 ** 2 + k2 ** 2) / 4.0), real)


def antiderivative_z(g: np.ndarray, grid: TorusGrid) -> Tuple[np.ndarray, np.ndarray]:
    """
    Real potential p with d_z p = g on every slice.

    Args:
        g: Complex (1,0)-form coefficient, torus in the last two axes
        grid: Torus grid

    Returns:
        (p, mean) where p is real with zero torus mean and `mean` is the
        torus mean of g per slice, i.e. the exactness defect.
    """
    k1, k2 = grid.wavenumbers()
    g_hat = _fft(g)
    symbol = (1j * k1 + k2) / 2.0
    n = grid.points_per_dim
    nonzero = np.abs(symbol) > 0
    p_hat = np.zeros_like(g_hat)
    p_hat[..., nonzero] = g_hat[..., nonzero] / symbol[nonzero]
    # The Nyquist lines of a (1,0)-form of a real function are not resolvable.
    p_hat[..., n // 2, :] = 0.0
    p_hat[..., :, n // 2] = 0.0
    p = np.fft.ifft2(p_hat, axes=TORUS_AXES).real
    mean = g_hat[..., 0, 0] / (n * n)
    return p, mean


def phase_shift(u: np.ndarray, grid: TorusGrid, shift: complex) -> np.ndarray:
    """Exact translate u(z + shift) of a band-limited field."""
    shift = complex(shift)
    dx = np.fmod(shift.real, grid.period)
    dy = np.fmod(shift.imag, grid.period)
    if dx == 0.0 and dy == 0.0:
        return np.array(u, copy=True)
    k1, k2 = grid.wavenumbers()
    n = grid.points_per_dim
    phase = np.exp(1j * (k1 * dx + k2 * dy))
    # Nyquist modes shift as cosines so real input stays real.
    phase[n // 2, :] = np.cos(k1[n // 2, :] * dx) * np.exp(1j * k2[n // 2, :] * dy)
    phase[:, n // 2] = np.exp(1j * k1[:, n // 2] * dx) * np.cos(k2[:, n // 2] * dy)
    phase[n // 2, n // 2] = np.cos(k1[n // 2, n // 2] * dx) * np.cos(k2[n // 2, n // 2] * dy)
    real = not np.iscomplexobj(u)
    return _ifft(_fft(u) * phase, real)


def evaluation_matrices(x: np.ndarray, y: np.ndarray, grid: TorusGrid) -> Tuple[np.ndarray, np.ndarray]:
    """
    Trigonometric evaluation matrices Ex (P, n), Ey (P, n) for points (x, y).

    A slice with FFT coefficients c is evaluated as sum((Ex @ c) * Ey, axis=1) / n^2.
    The Nyquist column is replaced by its cosine so real data interpolate to real values.
    """
    n = grid.points_per_dim
    k = np.fft.fftfreq(n, d=1.0 / n) * (2.0 * np.pi / grid.period)
    ex = np.exp(1j * np.outer(x, k))
    ey = np.exp(1j * np.outer(y, k))
    ex[:, n // 2] = np.cos(k[n // 2] * x)
    ey[:, n // 2] = np.cos(k[n // 2] * y)
    return ex, ey


def evaluate_at(u: np.ndarray, grid: TorusGrid, points: np.ndarray) -> np.ndarray:
    """
    Exact trigonometric interpolant of a torus slice at arbitrary points.

    Args:
        u: Slice values, shape (n, n)
        grid: Torus grid
        points: Complex points x + iy, any shape

    Returns:
        Interpolated values with the shape of `points`
    """
    points = np.asarray(points)
    ex, ey = evaluation_matrices(points.real.ravel(), points.imag.ravel(), grid)
    n = grid.points_per_dim
    c = np.fft.fft2(u)
    values = np.sum((ex @ c) * ey, axis=1) / (n * n)
    if not np.iscomplexobj(u):
        values = values.real
    return values.reshape(points.shape)


def sample(profile, grid: TorusGrid) -> np.ndarray:
    """Evaluate a callable profile(x, y) on the torus nodes."""
    x, y = grid.coordinates()
    return np.asarray(profile(x, y), dtype=float) * np.ones(grid.shape)
