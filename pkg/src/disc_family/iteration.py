"""
Fixed-point iteration for holomorphic disc families.

For boundary data F on the planar boundary, (f, h) are holomorphic in tau
and satisfy, at every boundary point tau and torus point z,

    d(rho0 + F)(tau, z + f) = d rho0(z) + h,     f(basepoint, z) = 0.

One step evaluates the boundary residual b = h - (d(rho0 + F))(tau, z + f)
+ d rho0(z), solves the Riemann-Hilbert family A conj(df) + S df - dh = b
with the frozen coefficients of rho0, and adds the correction.
"""
from typing import Callable, Optional

import numpy as np

from src.disc_family.state import Background, DiscFamilyState, IterationConfig
from src.elliptic.riemann_hilbert import RHProblem, rh_family_solve
from src.fields.compose import interpolate_slice
from src.fields.holder import norm
from src.fields import torus as torus_ops
from src.utils.errors import DivergenceError
from src.utils.logging import logger

MARGIN_FRACTION = 0.25
NON_CONTRACTING_LIMIT = 3


def boundary_residual(state: DiscFamilyState, method: str = "auto") -> np.ndarray:
    """b = h - conj(f)/2 - (psi_z + F_z)(tau, z + f) + psi_z(z) on the boundary nodes."""
    grid = state.torus
    f = state.f
    if np.max(np.abs(f), initial=0.0) > MARGIN_FRACTION * grid.period:
        raise DivergenceError(
            f"perturbation too large: |f| = {np.max(np.abs(f)):.3e} exceeds the interpolation margin"
        )
    psi_z = state.background.psi_z
    slope = torus_ops.d_z(state.F, grid) + psi_z
    z = grid.z()
    shifted = np.empty_like(f)
    for k in range(f.shape[0]):
        shifted[k] = interpolate_slice(slope[k], grid, z + f[k], method)
    return state.h - 0.5 * np.conj(f) - shifted + psi_z


def _weighted_norm(state: DiscFamilyState, df: np.ndarray, dh: np.ndarray, cfg: IterationConfig,
                   weight: float) -> float:
    low, high = cfg.gamma - 2.0, 2.0 + cfg.X
    total = 0.0
    for part in (df, dh):
        field = state.field(part)
        total += norm(field, low) + weight * norm(field, high)
    return total


def disc_iteration_step(state: DiscFamilyState, cfg: IterationConfig):
    """
    One step of the disc-family map (f, h) -> (f, h) + (df, dh).

    Returns:
        (new state, df, dh, boundary residual sup before the step)

    Raises:
        DivergenceError: If z + f leaves the interpolation margin
    """
    b = boundary_residual(state, cfg.interpolation)
    bg = state.background
    solution = rh_family_solve(RHProblem(bg.A, bg.S, b, state.domain))
    residual = float(np.max(np.abs(b), initial=0.0))
    return state.advanced(solution.f, solution.h), solution.f, solution.h, residual


def _derive_weights(state: DiscFamilyState, df: np.ndarray, cfg: IterationConfig) -> float:
    """A = 6 C4 (H + |F|_gamma) with H = 16 C (|F|_{gamma-1} + 1), C measured from the first correction."""
    F_field = state.field(state.F)
    F_low = norm(F_field, cfg.gamma - 1.0)
    measured = norm(state.field(df), 2.0 + cfg.X) / max(F_low, 1e-300)
    C = max(1.0, measured)
    H = cfg.H if cfg.H is not None else 16.0 * C * (F_low + 1.0)
    return 6.0 * C * (H + norm(F_field, cfg.gamma))


def solve_disc_family(F: np.ndarray, background: Background, domain, cfg: Optional[IterationConfig] = None,
                      initial: Optional[DiscFamilyState] = None, F_mesh: Optional[np.ndarray] = None,
                      on_step: Optional[Callable[[dict], None]] = None) -> DiscFamilyState:
    """
    Iterate the disc-family map from (0, 0) (or `initial`) to its fixed point.

    Args:
        F: Boundary perturbation on the curve nodes, shape (n_b, n, n)
        background: Background potential
        domain: Planar domain
        cfg: Iteration parameters
        initial: Admissible starting state
        F_mesh: F at the mesh-boundary points, if known exactly
        on_step: Callback receiving each history record

    Returns:
        Converged state with its iteration history

    Raises:
        DivergenceError: If the correction ratio stays >= 1 for three steps
            ("outside contraction regime") or the iteration cap is reached
    """
    cfg = cfg or IterationConfig()
    if initial is not None:
        state = DiscFamilyState(domain, background, np.asarray(F, dtype=float), initial.f.copy(),
                                initial.h.copy(), F_mesh)
    else:
        state = DiscFamilyState.initial(domain, background, F, F_mesh)
    weight = cfg.A_weight
    previous_norm = None
    non_contracting = 0
    for n in range(1, cfg.max_iter + 1):
        state, df, dh, residual = disc_iteration_step(state, cfg)
        step_sup = float(max(np.max(np.abs(df), initial=0.0), np.max(np.abs(dh), initial=0.0)))
        record = {"step": n, "residual": residual, "correction_sup": step_sup}
        if cfg.measure_norms and step_sup > 0.0:
            if weight is None:
                weight = _derive_weights(state, df, cfg)
            current = _weighted_norm(state, df, dh, cfg, weight)
            record["weighted_norm"] = current
            if previous_norm:
                ratio = current / previous_norm
                record["contraction"] = ratio
                non_contracting = non_contracting + 1 if ratio >= 1.0 else 0
            previous_norm = current
            low = norm(state.field(state.f), 2.0 + cfg.X)
            record["f_low_norm"] = low
            if low > cfg.l:
                logger.warning(f"disc family step {n}: |f|_(2+X) = {low:.3e} outside the ball of radius {cfg.l}")
        state.history.append(record)
        if on_step:
            on_step(record)
        logger.debug(f"disc family step {n}: residual={residual:.3e} correction={step_sup:.3e}")
        if non_contracting >= NON_CONTRACTING_LIMIT:
            raise DivergenceError(f"outside contraction regime after {n} steps")
        if step_sup < cfg.tol:
            state.residual = float(np.max(np.abs(boundary_residual(state, cfg.interpolation)), initial=0.0))
            state.converged = True
            logger.info(f"Disc family converged in {n} steps, residual {state.residual:.3e}")
            return state
    raise DivergenceError(f"disc family did not converge in {cfg.max_iter} steps")


def contraction_history(state: DiscFamilyState) -> list:
    return [r["contraction"] for r in state.history if "contraction" in r]


def periodic_consistency(state: DiscFamilyState, shift: complex, cfg: Optional[IterationConfig] = None) -> float:
    """
    Solve the family on the chart translated by `shift` and compare after translating back.

    Returns:
        sup |f_shifted(tau, z - shift) - f(tau, z)|
    """
    grid = state.torus
    if not np.any(state.F) and state.background.is_flat:
        return 0.0
    F_s = torus_ops.phase_shift(state.F, grid, shift)
    F_mesh = None if state.F_mesh is None else torus_ops.phase_shift(state.F_mesh, grid, shift)
    shifted = solve_disc_family(F_s, state.background.shifted(shift), state.domain, cfg, F_mesh=F_mesh)
    back = torus_ops.phase_shift(shifted.f, grid, -shift)
    return float(np.max(np.abs(back - state.f)))


def data_lipschitz_constant(first: DiscFamilyState, second: DiscFamilyState, X: float = 1.0 / 3.0) -> float:
    """Measured C in |f - f'|_{2+X} <= C |F - F'|_{3+X}."""
    dF = norm(first.field(first.F - second.F), 3.0 + X)
    if dF == 0.0:
        return 0.0
    return norm(first.field(first.f - second.f), 2.0 + X) / dF


def is_contracting(state: DiscFamilyState, bound: float = 0.70) -> bool:
    ratios = contraction_history(state)
    return bool(state.converged and all(r <= bound for r in ratios))


def calibrate_smallness(profile: np.ndarray, background: Background, domain, cfg: Optional[IterationConfig] = None,
                        upper: float = 1.0, steps: int = 8, bound: float = 0.70) -> float:
    """
    Empirical smallness threshold: largest eps (by bisection on [0, upper]) for
    which F = eps * profile converges with every correction ratio <= bound.
    """
    lo, hi = 0.0, upper

    def contracting(eps: float) -> bool:
        try:
            return is_contracting(solve_disc_family(eps * profile, background, domain, cfg), bound)
        except DivergenceError:
            return False

    if contracting(hi):
        return hi
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if contracting(mid):
            lo = mid
        else:
            hi = mid
    logger.info(f"Calibrated disc-family smallness threshold: {lo:.4e}")
    return lo
