from src.fields.grids import Axis, TorusGrid, HolderIndex
from src.fields.field import GridField, trace
from src.fields.holder import NormReport, holder_norm, interpolation_check, norm, slicewise_norm, wiener_norm
from src.fields.compose import GridMap, compose, interpolate_slice
from src.fields.snapshot import read_snapshot, write_snapshot

__all__ = [
    "Axis",
    "TorusGrid",
    "HolderIndex",
    "GridField",
    "trace",
    "NormReport",
    "holder_norm",
    "interpolation_check",
    "norm",
    "slicewise_norm",
    "wiener_norm",
    "GridMap",
    "compose",
    "interpolate_slice",
    "read_snapshot",
    "write_snapshot",
]

from src.fields.domains import (  # noqa: E402
    BoundaryCurve,
    DiscGrid,
    PlanarDomainGrid,
    StadiumGrid,
    StadiumOutline,
    WindowGrid,
    circle_curve,
)
from src.fields.corpus import BUILTIN_PROFILES, builtin_profile, random_smooth_field, seeded_corpus  # noqa: E402

__all__ += [
    "BoundaryCurve",
    "DiscGrid",
    "PlanarDomainGrid",
    "StadiumGrid",
    "StadiumOutline",
    "WindowGrid",
    "circle_curve",
    "BUILTIN_PROFILES",
    "builtin_profile",
    "random_smooth_field",
    "seeded_corpus",
]
