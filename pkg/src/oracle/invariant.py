"""
Reference geodesics for endpoints depending on x only.

For Psi = 2 v(x, t) the geodesic equation reduces to

    (1 + v_xx) v_tt = v_tx^2.

It is solved twice, independently:
  - Legendre: with u = x^2/2 + v, the Legendre transform of u(., t) in x is
    affine in t, so the path is the inverse transform of the interpolated
    endpoint transforms.
  - Space-time Newton: Fourier collocation in x, Chebyshev-Lobatto nodes in
    t, damped Newton on the full discrete system.
The Newton path is returned once the two agree.
"""
from typing import Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.interpolate import BarycentricInterpolator, CubicHermiteSpline
from scipy.sparse.linalg import spsolve

from src.fields.grids import TorusGrid
from src.oracle.geodesic import GeodesicPath
from src.utils.errors import ConfigError, OracleError
from src.utils.logging import logger

NEWTON_TOL = 1e-11
NEWTON_MAX_STEPS = 50
AGREEMENT_FACTOR = 10.0
ESTIMATE_FLOOR = 1e-11


def _wavenumbers(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, d=1.0 / n)


def trig_eval(v: np.ndarray, points: np.ndarray, order: int = 0) -> np.ndarray:
    """order-th derivative of the trigonometric interpolant of periodic samples v at points."""
    n = v.size
    c = np.fft.fft(v) / n
    k = _wavenumbers(n)
    return np.real(np.exp(1j * np.outer(points, k)) @ (c * (1j * k) ** order))


def _profile(phi: np.ndarray, n: int) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    if phi.ndim == 1:
        return phi
    spread = float(np.max(np.ptp(phi, axis=-1)))
    if spread > 1e-12 * max(1.0, float(np.max(np.abs(phi)))):
        raise ConfigError(f"invariant oracle needs endpoints depending on x only (y-variation {spread:.3e})")
    return phi[:, 0]


def legendre_path(v0: np.ndarray, v1: np.ndarray, t_values: np.ndarray, refine: int = 16) -> np.ndarray:
    """v(x_j, t) on the x nodes of v0 by interpolating Legendre transforms."""
    n = v0.size
    x = 2.0 * np.pi * np.arange(n) / n
    m = refine * n
    xf = np.linspace(-np.pi, 3.0 * np.pi, 2 * m + 1)

    def transform(v):
        vf, dv, ddv = trig_eval(v, xf), trig_eval(v, xf, 1), trig_eval(v, xf, 2)
        p = xf + dv
        star = p * xf - (0.5 * xf ** 2 + vf)
        return p, star, 1.0 / (1.0 + ddv)

    p0, s0, dx0 = transform(v0)
    p1, s1, dx1 = transform(v1)
    pc = np.linspace(max(p0[0], p1[0]), min(p0[-1], p1[-1]), 2 * m + 1)
    x0 = CubicHermiteSpline(p0, xf, dx0)(pc)
    x1 = CubicHermiteSpline(p1, xf, dx1)(pc)
    star0 = CubicHermiteSpline(p0, s0, xf)(pc)
    star1 = CubicHermiteSpline(p1, s1, xf)(pc)
    out = np.empty((t_values.size, n))
    for k, t in enumerate(t_values):
        X = (1.0 - t) * x0 + t * x1
        U = pc * X - ((1.0 - t) * star0 + t * star1)
        out[k] = CubicHermiteSpline(X, U, pc)(x) - 0.5 * x ** 2
    return out


def chebyshev(K: int) -> Tuple[np.ndarray, np.ndarray]:
    """Lobatto nodes on [0, 1] (t_0 = 0) and the differentiation matrix."""
    s = np.cos(np.pi * np.arange(K + 1) / K)
    c = np.hstack([2.0, np.ones(K - 1), 2.0]) * (-1.0) ** np.arange(K + 1)
    S = np.tile(s, (K + 1, 1)).T
    D = np.outer(c, 1.0 / c) / (S - S.T + np.eye(K + 1))
    D -= np.diag(D.sum(axis=1))
    return 0.5 * (1.0 - s), -2.0 * D


def fourier_matrices(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Periodic spectral first and second derivative matrices on [0, 2 pi)."""
    k = _wavenumbers(n)
    first = 1j * k
    first[n // 2] = 0.0
    eye = np.eye(n)
    Dx = np.real(np.fft.ifft(first[:, None] * np.fft.fft(eye, axis=0), axis=0))
    Dxx = np.real(np.fft.ifft((-(k ** 2))[:, None] * np.fft.fft(eye, axis=0), axis=0))
    return Dx, Dxx


def space_time_newton(v0: np.ndarray, v1: np.ndarray, K: int = 24) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Collocation solve of (1 + v_xx) v_tt = v_tx^2.

    Returns:
        (Chebyshev t nodes, v at (t_k, x_j), Newton steps)
    """
    n = v0.size
    t, Dt = chebyshev(K)
    Dtt = Dt @ Dt
    Dx, Dxx = fourier_matrices(n)
    V = (1.0 - t)[:, None] * v0[None, :] + t[:, None] * v1[None, :]
    I_t, I_x = sparse.identity(K + 1), sparse.identity(n)
    A_xx = sparse.kron(I_t, sparse.csr_matrix(Dxx))
    A_tt = sparse.kron(sparse.csr_matrix(Dtt), I_x)
    A_tx = sparse.kron(sparse.csr_matrix(Dt), sparse.csr_matrix(Dx))
    inner = np.arange(n, K * n)

    def residual(V: np.ndarray):
        Vtt, Vxx, Vtx = Dtt @ V, V @ Dxx.T, Dt @ V @ Dx.T
        return (1.0 + Vxx) * Vtt - Vtx ** 2, Vtt, Vxx, Vtx

    R, Vtt, Vxx, Vtx = residual(V)
    for step in range(NEWTON_MAX_STEPS):
        size = float(np.max(np.abs(R[1:K])))
        if size < NEWTON_TOL:
            return t, V, step
        J = (sparse.diags(Vtt.ravel()) @ A_xx + sparse.diags((1.0 + Vxx).ravel()) @ A_tt
             - 2.0 * sparse.diags(Vtx.ravel()) @ A_tx).tocsr()
        J_inner = J[inner][:, inner]
        delta = np.zeros(V.size)
        delta[inner] = spsolve(J_inner.tocsc(), -R.ravel()[inner])
        damping = 1.0
        for _ in range(20):
            trial = V + damping * delta.reshape(V.shape)
            R_trial = residual(trial)
            if np.max(np.abs(R_trial[0][1:K])) < size:
                break
            damping *= 0.5
        V = trial
        R, Vtt, Vxx, Vtx = R_trial
    size = float(np.max(np.abs(R[1:K])))
    if size < NEWTON_TOL * 100:
        return t, V, NEWTON_MAX_STEPS
    raise OracleError(f"oracle invalid: space-time Newton stalled at residual {size:.3e}")


def _on_grid(values: np.ndarray, n: int) -> np.ndarray:
    """Zero-pad spectral interpolation along the last axis from m <= n points to n."""
    m = values.shape[-1]
    if m == n:
        return values
    c = np.fft.fft(values, axis=-1)
    padded = np.zeros(values.shape[:-1] + (n,), dtype=complex)
    half = m // 2
    padded[..., :half] = c[..., :half]
    padded[..., n - half + 1:] = c[..., half + 1:]
    padded[..., half] = 0.5 * c[..., half]
    padded[..., n - half] = 0.5 * c[..., half]
    return np.real(np.fft.ifft(padded, axis=-1)) * (n / m)


def _newton_on(v0: np.ndarray, v1: np.ndarray, t_values: np.ndarray, K: int, n: int) -> Tuple[np.ndarray, int]:
    t_nodes, V, steps = space_time_newton(v0, v1, K)
    V = BarycentricInterpolator(t_nodes, V, axis=0)(t_values)
    return _on_grid(V, n), steps


def invariant_geodesic_oracle(phi0: np.ndarray, phi1: np.ndarray, t_steps: int, torus: Optional[TorusGrid] = None,
                              x_points: Optional[int] = None, K: int = 24, refine: int = 16) -> GeodesicPath:
    """
    Cross-validated geodesic between x-only endpoints.

    Args:
        phi0, phi1: Endpoints as torus arrays (n, n) constant in y, or profiles (n,)
        t_steps: Number of uniform t intervals of the returned path
        torus: Torus grid (derived from the endpoints when omitted)
        x_points: Fourier points of the collocation solve (min(n, 64) by default)
        K: Chebyshev intervals in t
        refine: Oversampling of the Legendre transforms

    Returns:
        Newton path, with the agreement diagnostics attached

    Raises:
        ConfigError: If the endpoints are not x-only or not strictly convex
        OracleError: If the two methods disagree ("oracle invalid")
    """
    n = np.shape(phi0)[0]
    torus = torus or TorusGrid(n)
    v0 = 0.5 * _profile(phi0, n)
    v1 = 0.5 * _profile(phi1, n)
    x = 2.0 * np.pi * np.arange(n) / n
    for label, v in (("phi0", v0), ("phi1", v1)):
        margin = float(np.min(1.0 + trig_eval(v, x, 2)))
        if margin <= 0.0:
            raise ConfigError(f"endpoint {label} is not convex: 1 + v_xx = {margin:.3e}")
    t_values = np.linspace(0.0, 1.0, t_steps + 1)

    m = min(n, x_points or 64)
    v0_m, v1_m = _on_grid_down(v0, m), _on_grid_down(v1, m)
    newton, steps = _newton_on(v0_m, v1_m, t_values, K, n)
    newton_coarse, _ = _newton_on(v0_m, v1_m, t_values, max(8, K - 8), n)
    legendre = legendre_path(v0, v1, t_values, refine)
    legendre_fine = legendre_path(v0, v1, t_values, 2 * refine)

    estimate = max(float(np.max(np.abs(newton - newton_coarse))), float(np.max(np.abs(legendre - legendre_fine))),
                   ESTIMATE_FLOOR)
    disagreement = float(np.max(np.abs(newton - legendre)))
    if disagreement > AGREEMENT_FACTOR * estimate:
        raise OracleError(
            f"oracle invalid: methods differ by {disagreement:.3e}, discretization estimate {estimate:.3e}"
        )
    newton[0], newton[-1] = v0, v1
    values = np.repeat((2.0 * newton)[:, :, None], n, axis=2)
    logger.info(f"Invariant oracle: {steps} Newton steps, methods agree to {disagreement:.3e}")
    return GeodesicPath(
        values, t_values, torus,
        diagnostics={"disagreement": disagreement, "estimate": estimate, "newton_steps": float(steps)},
    )


def _on_grid_down(v: np.ndarray, m: int) -> np.ndarray:
    """Restriction of a band-limited profile to m equispaced points."""
    n = v.size
    if m == n:
        return v
    return trig_eval(v, 2.0 * np.pi * np.arange(m) / m)
