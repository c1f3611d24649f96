from dataclasses import dataclass, field as dataclass_field, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.fields.grids import Axis, TorusGrid
from src.utils.errors import ConfigError


@dataclass(frozen=True, eq=False)
class GridField:
    """
    Sampled real or complex function on a product grid.

    The value array has one entry per node; its axes are described by `axes`.
    Torus directions, when present, are always the last two axes (x, y).
    Planar data on unstructured meshes use a single "node" axis.

    Attributes:
        values: Value array (real or complex)
        axes: Axis description, one per array axis
        kind: Snapshot tag, e.g. "torus", "boundary", "mesh", "window", "path"
        torus: Torus grid of the trailing axes, if any
        domain: Planar domain the leading axes refer to, if any
        selectors: Named boundary components, mapping to (axis, index)
        components: 1 for potentials; the complex dimension for f, h
    """
    values: np.ndarray
    axes: Tuple[Axis, ...]
    kind: str = "torus"
    torus: Optional[TorusGrid] = None
    domain: Any = None
    selectors: Dict[str, Tuple[int, Any]] = dataclass_field(default_factory=dict)
    components: int = 1

    def __post_init__(self):
        values = np.array(self.values)
        if values.shape != tuple(a.size for a in self.axes):
            raise ValueError(
                f"value shape {values.shape} does not match axes "
                f"{tuple(a.size for a in self.axes)}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError(f"{self.kind} field contains NaN or infinite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def on_torus(cls, values: np.ndarray, torus: TorusGrid) -> "GridField":
        return cls(np.asarray(values), torus.axes(), kind="torus", torus=torus)

    @classmethod
    def zeros_like(cls, other: "GridField", dtype=None) -> "GridField":
        return other.with_values(np.zeros(other.values.shape, dtype=dtype or other.values.dtype))

    @classmethod
    def on_boundary(cls, values: np.ndarray, domain: Any, torus: Optional[TorusGrid] = None) -> "GridField":
        """Field on the boundary curve nodes of a planar domain (x torus)."""
        curve = domain.curve
        axes = (Axis("boundary", curve.size, float(curve.weights[0]), True),)
        if torus is not None:
            axes += torus.axes()
        return cls(np.asarray(values), axes, kind="boundary", torus=torus, domain=domain)

    @classmethod
    def on_mesh(cls, values: np.ndarray, domain: Any, torus: Optional[TorusGrid] = None) -> "GridField":
        """Field on the interior nodes followed by the mesh-boundary points."""
        n_int = domain.interior_nodes.size
        n_all = n_int + domain.mesh_boundary_nodes.size
        axes = (Axis("node", n_all, domain.spacing, False),)
        if torus is not None:
            axes += torus.axes()
        return cls(
            np.asarray(values),
            axes,
            kind="mesh",
            torus=torus,
            domain=domain,
            selectors={"boundary": (0, np.arange(n_int, n_all))},
        )

    @classmethod
    def on_window(cls, values: np.ndarray, window: Any, torus: Optional[TorusGrid] = None) -> "GridField":
        """Field on the rectangle window, axes (theta, t) x torus."""
        axes = window.axes()
        if torus is not None:
            axes += torus.axes()
        return cls(
            np.asarray(values), axes, kind="window", torus=torus, domain=window,
            selectors=window.selectors(),
        )

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def with_values(self, values: np.ndarray) -> "GridField":
        return replace(self, values=np.asarray(values))

    def copy(self) -> "GridField":
        return self.with_values(np.array(self.values, copy=True))

    def sup(self) -> float:
        if self.values.size == 0:
            return 0.0
        return float(np.max(np.abs(self.values)))

    def __add__(self, other: "GridField") -> "GridField":
        return self.with_values(self.values + _values_of(other))

    def __sub__(self, other: "GridField") -> "GridField":
        return self.with_values(self.values - _values_of(other))

    def __mul__(self, scalar: float) -> "GridField":
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "GridField":
        return self.with_values(-self.values)


def _values_of(other) -> np.ndarray:
    return other.values if isinstance(other, GridField) else np.asarray(other)


def trace(field: GridField, boundary: str) -> GridField:
    """
    Restrict a field to one of its stored boundary components.

    Args:
        field: Field carrying a selector for `boundary`
        boundary: Selector name, e.g. "t=0", "t=1", "boundary"

    Returns:
        Boundary-only field (the selected axis removed)

    Raises:
        ConfigError: If the selector is unknown
    """
    if boundary not in field.selectors:
        raise ConfigError(
            f"unknown boundary selector {boundary!r}; available: {sorted(field.selectors)}"
        )
    axis, index = field.selectors[boundary]
    values = np.take(field.values, index, axis=axis)
    if np.ndim(index) == 0:
        axes = tuple(a for i, a in enumerate(field.axes) if i != axis)
    else:
        kept = field.axes[axis]
        axes = tuple(
            Axis(kept.name, values.shape[axis], kept.spacing, False) if i == axis else a
            for i, a in enumerate(field.axes)
        )
    return GridField(
        values,
        axes,
        kind="boundary",
        torus=field.torus,
        domain=field.domain,
        components=field.components,
    )
