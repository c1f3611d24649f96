from dataclasses import dataclass, field as dataclass_field
from math import comb
from typing import Dict, Iterable, List, Tuple

import numpy as np
from tqdm import tqdm

from src.fields.field import GridField
from src.fields.grids import HolderIndex
from src.fields.holder import holder_norm
from src.utils.config import settings
from src.utils.errors import ConfigError
from src.utils.logging import logger

SMOOTHSTEP_ORDER = 7


def smoothstep(x: np.ndarray, order: int = SMOOTHSTEP_ORDER) -> np.ndarray:
    """Polynomial smoothstep of the given order on [0, 1], clamped outside."""
    x = np.clip(x, 0.0, 1.0)
    total = np.zeros_like(x)
    for k in range(order + 1):
        total += comb(order + k, k) * comb(2 * order + 1, order - k) * (-x) ** k
    return x ** (order + 1) * total


def low_pass(s: np.ndarray) -> np.ndarray:
    """Radial profile: 1 on [0, 1/2], 0 on [1, inf), smoothstep in between."""
    return 1.0 - smoothstep(2.0 * np.asarray(s) - 1.0)


def eta(t: np.ndarray) -> np.ndarray:
    """Cutoff equal to 1 for |t| <= 1/6 and 0 for |t| >= 1/3."""
    return 1.0 - smoothstep(6.0 * np.abs(np.asarray(t)) - 1.0)


def _reflect(u: np.ndarray, axis: int, odd: bool) -> np.ndarray:
    n = u.shape[axis]
    tail = np.flip(np.take(u, np.arange(1, n - 1), axis=axis), axis=axis)
    return np.concatenate([u, -tail if odd else tail], axis=axis)


@dataclass(frozen=True)
class SmoothingOperator:
    """
    Linear frequency cutoff S_Q with radial symbol low_pass(|k| / Q).

    Periodic axes are transformed directly; each bounded axis is first
    extended to a periodic one by reflection (even by default, odd for the
    axes listed in `odd_axes`).
    """
    Q: float
    odd_axes: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.Q < 1.0:
            raise ValueError(f"smoothing scale Q must be >= 1, got {self.Q}")

    def __call__(self, field: GridField) -> GridField:
        values = np.asarray(field.values)
        sizes = values.shape
        extended = values
        wavenumbers = []
        for axis, spec in enumerate(field.axes):
            if spec.periodic:
                n = spec.size
            else:
                extended = _reflect(extended, axis, axis in self.odd_axes)
                n = 2 * (spec.size - 1)
            wavenumbers.append(2.0 * np.pi * np.fft.fftfreq(n, d=spec.spacing))
        grids = np.meshgrid(*wavenumbers, indexing="ij")
        radius = np.sqrt(sum(g ** 2 for g in grids))
        symbol = low_pass(radius / self.Q)
        out = np.fft.ifftn(np.fft.fftn(extended) * symbol)
        out = out[tuple(slice(0, s) for s in sizes)]
        if not np.iscomplexobj(values):
            out = out.real
        return field.with_values(out)


@dataclass(frozen=True)
class BoundaryVanishingSmoother:
    """
    Smoother for window fields that vanish on {t = 0} and {t = 1}.

    The extension E is the odd reflection across t = 0 and t = 1 (covering
    -1 < t < 2) and the even reflection in theta (covering the margin
    -3 < theta < 3); after mollification the eta-weighted traces at t = 0
    and t = 1 are subtracted so the output vanishes exactly there.
    """
    base: SmoothingOperator
    t_axis: int = 1
    tolerance: float = 1e-9

    def __call__(self, field: GridField) -> GridField:
        values = np.asarray(field.values)
        scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
        first = np.take(values, 0, axis=self.t_axis)
        last = np.take(values, -1, axis=self.t_axis)
        defect = max(float(np.max(np.abs(first), initial=0.0)), float(np.max(np.abs(last), initial=0.0)))
        if defect > self.tolerance * scale:
            raise ConfigError(f"field does not vanish on t=0,1 (defect {defect:.3e})")
        odd = SmoothingOperator(self.base.Q, odd_axes=(self.t_axis,))
        smoothed = np.asarray(odd(field).values)
        spec = field.axes[self.t_axis]
        t = spec.spacing * np.arange(spec.size)
        shape = [1] * values.ndim
        shape[self.t_axis] = spec.size
        w0 = eta(t).reshape(shape)
        w1 = eta(1.0 - t).reshape(shape)
        tr0 = np.expand_dims(np.take(smoothed, 0, axis=self.t_axis), self.t_axis)
        tr1 = np.expand_dims(np.take(smoothed, -1, axis=self.t_axis), self.t_axis)
        out = smoothed - w0 * tr0 - w1 * tr1
        # eta(0) = 1 and eta(1) = 0, so the traces cancel up to round-off.
        idx0 = [slice(None)] * values.ndim
        idx0[self.t_axis] = 0
        idx1 = list(idx0)
        idx1[self.t_axis] = -1
        out[tuple(idx0)] = 0.0
        out[tuple(idx1)] = 0.0
        return field.with_values(out)


def smooth(field: GridField, Q: float) -> GridField:
    """
    Nash-type smoothing S_Q of a grid field.

    Args:
        field: Field on periodic and/or bounded axes
        Q: Cutoff scale, Q >= 1

    Returns:
        Smoothed field on the same grid
    """
    return SmoothingOperator(Q)(field)


def smooth_vanishing(field: GridField, N: float, t_axis: int = 1) -> GridField:
    """
    Boundary-vanishing smoothing of a window field.

    Raises:
        ConfigError: If the input does not vanish on {t = 0, 1}
    """
    return BoundaryVanishingSmoother(SmoothingOperator(N), t_axis=t_axis)(field)


@dataclass
class SmoothingConstants:
    """Largest measured ratios per (nu, rho) pair for the two smoothing bounds."""
    blow_up: Dict[Tuple[float, float], float] = dataclass_field(default_factory=dict)
    convergence: Dict[Tuple[float, float], float] = dataclass_field(default_factory=dict)

    def as_rows(self) -> List[Dict[str, float]]:
        rows = []
        for (nu, rho), value in sorted(self.blow_up.items()):
            rows.append({"bound": "blow_up", "nu": nu, "rho": rho, "constant": value})
        for (nu, rho), value in sorted(self.convergence.items()):
            rows.append({"bound": "convergence", "nu": nu, "rho": rho, "constant": value})
        return rows


def measure_smoothing_constants(
    corpus: Iterable[GridField],
    scales: Iterable[float] = (2, 4, 8, 16, 32),
    pairs: Iterable[Tuple[float, float]] = ((2.0, 1.0), (1.0, 2.0), (3.0, 4.0 / 3.0)),
) -> SmoothingConstants:
    """
    Measure |S_Q u|_nu / (Q^(nu-rho) |u|_rho) for nu >= rho and
    |S_Q u - u|_nu / (Q^(nu-rho) |u|_rho) for nu <= rho over a corpus.
    """
    constants = SmoothingConstants()
    fields = list(corpus)
    pairs = list(pairs)
    for u in tqdm(fields, desc="smoothing corpus", disable=not settings.PROGRESS):
        rho_norms = {rho: holder_norm(u, HolderIndex.from_real(rho)).value for _, rho in pairs}
        for Q in scales:
            s = smooth(u, Q)
            diff = s - u
            for nu, rho in pairs:
                base = Q ** (nu - rho) * rho_norms[rho]
                if base == 0.0:
                    continue
                index = HolderIndex.from_real(nu)
                if nu >= rho:
                    ratio = holder_norm(s, index).value / base
                    constants.blow_up[(nu, rho)] = max(constants.blow_up.get((nu, rho), 0.0), ratio)
                if nu <= rho:
                    ratio = holder_norm(diff, index).value / base
                    constants.convergence[(nu, rho)] = max(constants.convergence.get((nu, rho), 0.0), ratio)
    logger.info(f"Measured smoothing constants over {len(fields)} fields: {constants.as_rows()}")
    return constants
