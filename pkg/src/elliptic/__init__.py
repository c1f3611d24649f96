from src.elliptic.holomorphic import (
    CauchyOperator,
    DiscFourierOperator,
    HolomorphicBoundaryOperator,
    harmonic_conjugate,
    holomorphic_operator,
)
from src.elliptic.poisson import (
    PoissonProblem,
    factorized_laplacian,
    parameter_direction_constant,
    poisson_family_solve,
    solve_interior,
)
from src.elliptic.riemann_hilbert import RHProblem, RHSolution, rh_family_solve, rh_family_solve_fourier
from src.elliptic.strip_harmonic import DecayCertificate, barrier, barrier_delta, strip_harmonic

__all__ = [
    "CauchyOperator",
    "DiscFourierOperator",
    "HolomorphicBoundaryOperator",
    "harmonic_conjugate",
    "holomorphic_operator",
    "PoissonProblem",
    "factorized_laplacian",
    "parameter_direction_constant",
    "poisson_family_solve",
    "solve_interior",
    "RHProblem",
    "RHSolution",
    "rh_family_solve",
    "rh_family_solve_fourier",
    "DecayCertificate",
    "barrier",
    "barrier_delta",
    "strip_harmonic",
]
