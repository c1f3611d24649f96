from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import ndimage

from src.fields.field import GridField
from src.fields.grids import TorusGrid
from src.fields import torus as torus_ops
from src.utils.errors import DivergenceError

SPECTRAL_LIMIT = 32
UPSAMPLE = 4


@dataclass(frozen=True, eq=False)
class GridMap:
    """
    Map of the torus directions z -> z + displacement, slice by slice.

    `displacement` is a complex scalar (a rigid translation) or an array
    broadcastable to the field's shape. `planar_targets`, when given, holds
    fractional index coordinates for the leading planar axes, shape
    (n_planar_axes, *field_shape), and `planar_margin` the number of nodes
    the targets may lie outside the index range.
    """
    displacement: Union[complex, np.ndarray] = 0.0
    planar_targets: Optional[np.ndarray] = None
    planar_margin: float = 0.0

    @classmethod
    def identity(cls) -> "GridMap":
        return cls()

    @property
    def is_identity(self) -> bool:
        return (
            self.planar_targets is None
            and np.isscalar(self.displacement)
            and complex(self.displacement) == 0.0
        )

    def inverse_translation(self) -> "GridMap":
        if not np.isscalar(self.displacement) or self.planar_targets is not None:
            raise ValueError("only rigid translations have a closed-form inverse")
        return GridMap(-complex(self.displacement))


def interpolate_slice(u: np.ndarray, grid: TorusGrid, points: np.ndarray, method: str = "auto") -> np.ndarray:
    """
    Periodic interpolation of one torus slice at complex points.

    Methods: "spectral" (exact trigonometric sum), "upsampled" (zero-padded
    x4 then quintic splines), "cubic" (cubic splines); "auto" picks spectral
    up to 32 points per direction and upsampled above.
    """
    n = grid.points_per_dim
    if method == "auto":
        method = "spectral" if n <= SPECTRAL_LIMIT else "upsampled"
    if method == "spectral":
        return torus_ops.evaluate_at(u, grid, points)
    if method == "upsampled":
        data, factor, order = _zero_pad(u, UPSAMPLE), UPSAMPLE, 5
    elif method == "cubic":
        data, factor, order = np.asarray(u), 1, 3
    else:
        raise ValueError(f"unknown interpolation method {method!r}")
    h = grid.spacing / factor
    coords = np.stack([np.ravel(points.real) / h, np.ravel(points.imag) / h])

    def spline(part: np.ndarray) -> np.ndarray:
        return ndimage.map_coordinates(part, coords, order=order, mode="grid-wrap")

    if np.iscomplexobj(data):
        values = spline(data.real) + 1j * spline(data.imag)
    else:
        values = spline(data)
    return values.reshape(np.shape(points))


def _zero_pad(u: np.ndarray, factor: int) -> np.ndarray:
    n = u.shape[-1]
    m = n * factor
    u_hat = np.fft.fftshift(np.fft.fft2(u))
    padded = np.zeros((m, m), dtype=complex)
    lo = (m - n) // 2
    padded[lo:lo + n, lo:lo + n] = u_hat
    # Split the Nyquist lines symmetrically.
    padded[lo, :] *= 0.5
    padded[:, lo] *= 0.5
    padded[lo + n, :] = padded[lo, :]
    padded[:, lo + n] = padded[:, lo]
    out = np.fft.ifft2(np.fft.ifftshift(padded)) * factor * factor
    return out.real if not np.iscomplexobj(u) else out


def compose(field: GridField, gmap: GridMap, method: str = "auto") -> GridField:
    """
    Values of `field` at mapped points.

    Torus directions are interpolated periodically; leading structured planar
    axes, when the map moves them, bicubically.

    Args:
        field: Field with torus directions in its last two axes
        gmap: Grid map
        method: Torus interpolation method (see interpolate_slice)

    Returns:
        Composed field on the same grid

    Raises:
        DivergenceError: If the map exits the planar domain beyond its margin
    """
    if gmap.is_identity:
        return field.copy()
    grid = field.torus
    if grid is None:
        raise ValueError("compose needs a field with torus directions")
    values = np.asarray(field.values)
    if gmap.planar_targets is None and np.isscalar(gmap.displacement):
        return field.with_values(torus_ops.phase_shift(values, grid, complex(gmap.displacement)))

    z = grid.z()
    disp = np.broadcast_to(np.asarray(gmap.displacement), values.shape)
    lead = values.shape[:-2]
    out = np.empty(values.shape, dtype=values.dtype)
    for idx in np.ndindex(*lead):
        out[idx] = interpolate_slice(values[idx], grid, z + disp[idx], method)

    if gmap.planar_targets is not None:
        out = _planar_resample(out, gmap.planar_targets, gmap.planar_margin)
    return field.with_values(out)


def _planar_resample(values: np.ndarray, targets: np.ndarray, margin: float) -> np.ndarray:
    n_planar = targets.shape[0]
    sizes = values.shape[:n_planar]
    for axis, size in enumerate(sizes):
        lo, hi = targets[axis].min(), targets[axis].max()
        if lo < -margin or hi > size - 1 + margin:
            raise DivergenceError(
                f"map exits the planar domain beyond the extension margin on axis {axis}"
            )
    torus_index = np.indices(values.shape)[n_planar:]
    coords = np.concatenate([targets, torus_index], axis=0)

    def spline(part: np.ndarray) -> np.ndarray:
        return ndimage.map_coordinates(part, coords, order=3, mode="nearest")

    if np.iscomplexobj(values):
        return spline(values.real) + 1j * spline(values.imag)
    return spline(values)
