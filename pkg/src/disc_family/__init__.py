from src.disc_family.state import Background, DiscFamilyState, IterationConfig
from src.disc_family.iteration import (
    boundary_residual,
    calibrate_smallness,
    contraction_history,
    data_lipschitz_constant,
    disc_iteration_step,
    is_contracting,
    periodic_consistency,
    solve_disc_family,
)
from src.disc_family.foliation import (
    FoliationMap,
    build_foliation_map,
    foliation_deviation,
    invert_leaf,
    jacobian_determinant,
)

__all__ = [
    "Background",
    "DiscFamilyState",
    "IterationConfig",
    "boundary_residual",
    "calibrate_smallness",
    "contraction_history",
    "data_lipschitz_constant",
    "disc_iteration_step",
    "is_contracting",
    "periodic_consistency",
    "solve_disc_family",
    "FoliationMap",
    "build_foliation_map",
    "foliation_deviation",
    "invert_leaf",
    "jacobian_determinant",
]
