from src.potential.assembly import (
    PotentialBundle,
    assemble_and_check,
    boundary_margin,
    comparison_constant,
    compute_Q,
    exactness_defect,
    kernel_identity_defect,
    recover_P,
    solve_potential,
)
from src.potential.linearization import (
    LinearizationReport,
    TangentField,
    leafwise_harmonic,
    linearized_comparison,
)

__all__ = [
    "PotentialBundle",
    "assemble_and_check",
    "boundary_margin",
    "comparison_constant",
    "compute_Q",
    "exactness_defect",
    "kernel_identity_defect",
    "recover_P",
    "solve_potential",
    "LinearizationReport",
    "TangentField",
    "leafwise_harmonic",
    "linearized_comparison",
]
