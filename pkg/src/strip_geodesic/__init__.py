from src.strip_geodesic.geometry import StripGeometry, build_strip, s_extend
from src.strip_geodesic.riemann_map import RiemannMap, StripRiemannMap, cr_defect, riemann_map, strip_to_disc
from src.strip_geodesic.iteration import (
    NeumannReport,
    StripProblem,
    StripSolution,
    StripTriple,
    extract_path,
    iter_P,
    solve_strip,
    theta_independence,
)

__all__ = [
    "StripGeometry",
    "build_strip",
    "s_extend",
    "RiemannMap",
    "StripRiemannMap",
    "cr_defect",
    "riemann_map",
    "strip_to_disc",
    "NeumannReport",
    "StripProblem",
    "StripSolution",
    "StripTriple",
    "extract_path",
    "iter_P",
    "solve_strip",
    "theta_independence",
]
