from src.oracle.geodesic import GeodesicPath, compare_paths, geodesic_residual
from src.oracle.invariant import invariant_geodesic_oracle, legendre_path, space_time_newton

__all__ = [
    "GeodesicPath",
    "compare_paths",
    "geodesic_residual",
    "invariant_geodesic_oracle",
    "legendre_path",
    "space_time_newton",
]
