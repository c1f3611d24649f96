from src.smoothing.operators import (
    BoundaryVanishingSmoother,
    SmoothingConstants,
    SmoothingOperator,
    eta,
    low_pass,
    measure_smoothing_constants,
    smooth,
    smooth_vanishing,
    smoothstep,
)

__all__ = [
    "BoundaryVanishingSmoother",
    "SmoothingConstants",
    "SmoothingOperator",
    "eta",
    "low_pass",
    "measure_smoothing_constants",
    "smooth",
    "smooth_vanishing",
    "smoothstep",
]
