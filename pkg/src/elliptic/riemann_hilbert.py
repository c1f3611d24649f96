"""
Constant-coefficient Riemann-Hilbert families.

Find holomorphic (f, h) on the planar domain, for every torus point, with

    A conj(f) + S f - h = b   on the boundary,     f(basepoint) = 0,

A and S depending on the torus point only. With holomorphic g1, g2 whose
real parts are Re b and Im b, the pair

    f = (g1 - i g2) / (2 conj(A)),    h = (S + conj(A)) f - g1

solves the boundary relation; the imaginary constants of g1, g2 are fixed by
f(basepoint) = 0.
"""
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from src.elliptic.holomorphic import holomorphic_operator
from src.fields.domains import DiscGrid, PlanarDomainGrid
from src.utils.errors import DegenerateError

Coefficient = Union[complex, np.ndarray]


@dataclass(frozen=True, eq=False)
class RHProblem:
    """
    Attributes:
        A: Coefficient d^2 rho0 / dz dzbar, scalar or torus array
        S: Coefficient d^2 rho0 / dz^2, scalar or torus array
        b: Boundary data, shape (n_boundary, ...torus)
        domain: Planar domain; its curve basepoint carries the normalization
        threshold: Smallest admissible |A|
    """
    A: Coefficient
    S: Coefficient
    b: np.ndarray
    domain: PlanarDomainGrid
    threshold: float = 1e-10

    def __post_init__(self):
        if np.shape(self.b)[0] != self.domain.curve.size:
            raise ValueError("RH boundary data must have one row per boundary node")


@dataclass(frozen=True, eq=False)
class RHSolution:
    f: np.ndarray
    h: np.ndarray
    holomorphy_defect: float
    boundary_residual: float


def rh_family_solve(problem: RHProblem) -> RHSolution:
    """
    Solve the normalized Riemann-Hilbert family through two real Dirichlet problems.

    Raises:
        DegenerateError: If |A| falls below the threshold ("A not invertible")
    """
    A = np.asarray(problem.A, dtype=complex)
    S = np.asarray(problem.S, dtype=complex)
    if np.min(np.abs(A)) < problem.threshold:
        raise DegenerateError(f"A not invertible: min |A| = {np.min(np.abs(A)):.3e}")
    op = holomorphic_operator(problem.domain)
    b = np.asarray(problem.b, dtype=complex)
    kb = op.basepoint_index
    u1, u2 = b.real, b.imag
    c1 = u2[kb]
    c2 = -u1[kb]
    g1 = u1 + 1j * (op.conjugate(u1, "basepoint") + c1)
    g2 = u2 + 1j * (op.conjugate(u2, "basepoint") + c2)
    f = (g1 - 1j * g2) / (2.0 * np.conj(A))
    f[kb] = 0.0
    h = (S + np.conj(A)) * f - g1
    residual = A * np.conj(f) + S * f - h - b
    scale = max(1.0, float(np.max(np.abs(b), initial=0.0)))
    defect = max(op.holomorphy_defect(f), op.holomorphy_defect(h))
    return RHSolution(f, h, defect, float(np.max(np.abs(residual), initial=0.0)) / scale)


def rh_family_solve_fourier(problem: RHProblem) -> Tuple[np.ndarray, np.ndarray]:
    """
    Mode-by-mode solve on the unit disc, an independent check of rh_family_solve.

    Mode -m (m > 0) of the boundary relation gives A conj(f_m) = b_{-m};
    mode m > 0 gives h_m = S f_m - b_m; f_0 follows from f(-i) = 0 and h_0
    from mode 0.
    """
    if not isinstance(problem.domain, DiscGrid):
        raise ValueError("the Fourier RH solver needs the unit disc")
    A = np.asarray(problem.A, dtype=complex)
    S = np.asarray(problem.S, dtype=complex)
    if np.min(np.abs(A)) < problem.threshold:
        raise DegenerateError(f"A not invertible: min |A| = {np.min(np.abs(A)):.3e}")
    b = np.asarray(problem.b, dtype=complex)
    M = b.shape[0]
    b_hat = np.fft.fft(b, axis=0) / M
    f_hat = np.zeros_like(b_hat)
    h_hat = np.zeros_like(b_hat)
    half = M // 2
    for m in range(1, half):
        f_hat[m] = np.conj(b_hat[M - m] / A)
        h_hat[m] = S * f_hat[m] - b_hat[m]
    basepoint = problem.domain.basepoint
    f_hat[0] = -sum(f_hat[m] * basepoint ** m for m in range(1, half))
    h_hat[0] = A * np.conj(f_hat[0]) + S * f_hat[0] - b_hat[0]
    f = np.fft.ifft(f_hat, axis=0) * M
    h = np.fft.ifft(h_hat, axis=0) * M
    return f, h
