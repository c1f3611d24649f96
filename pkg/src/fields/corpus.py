"""Seeded smooth test fields used by the verification batteries."""
import numpy as np

from src.fields.field import GridField
from src.fields.grids import TorusGrid


def random_smooth_field(grid: TorusGrid, seed: int, decay: float = 4.0, max_mode: int = 6,
                        amplitude: float = 1.0) -> GridField:
    """
    Real trigonometric polynomial with random coefficients decaying like (1 + |k|)^-decay.

    Modes are limited to |k_i| <= max_mode so the field is band-limited on the grid.
    """
    rng = np.random.default_rng(seed)
    n = grid.points_per_dim
    max_mode = min(max_mode, n // 2 - 1)
    x, y = grid.coordinates()
    values = np.zeros(grid.shape)
    for k1 in range(-max_mode, max_mode + 1):
        for k2 in range(0, max_mode + 1):
            if k2 == 0 and k1 < 0:
                continue
            weight = (1.0 + np.hypot(k1, k2)) ** (-decay)
            a, b = rng.standard_normal(2) * weight
            phase = k1 * x + k2 * y
            values += a * np.cos(phase) + b * np.sin(phase)
    peak = np.max(np.abs(values))
    if peak > 0:
        values *= amplitude / peak
    return GridField.on_torus(values, grid)


def seeded_corpus(grid: TorusGrid, size: int = 20, seed: int = 0, **kwargs) -> list:
    return [random_smooth_field(grid, seed + i, **kwargs) for i in range(size)]


BUILTIN_PROFILES = {
    "zero": lambda x, y: np.zeros_like(x),
    "cos_x": lambda x, y: np.cos(x),
    "cos_y": lambda x, y: np.cos(y),
    "cos_x_plus_sin_y": lambda x, y: np.cos(x) + np.sin(y),
    "cos_2x": lambda x, y: np.cos(2.0 * x),
}


def builtin_profile(name: str, grid: TorusGrid, amplitude: float = 1.0, seed: int = 0) -> np.ndarray:
    """
    Named endpoint profile on the torus, scaled by `amplitude`.

    "random" draws a seeded smooth field normalized to sup = amplitude.
    """
    if name == "random":
        return np.asarray(random_smooth_field(grid, seed, amplitude=amplitude).values)
    if name not in BUILTIN_PROFILES:
        raise ValueError(f"unknown profile {name!r}; available: {sorted(BUILTIN_PROFILES) + ['random']}")
    x, y = grid.coordinates()
    return amplitude * np.asarray(BUILTIN_PROFILES[name](x, y), dtype=float) * np.ones(grid.shape)
