"""
Potential of the geodesic from a converged disc family.

Phi = P + Q, where P(tau, .) is recovered leaf by leaf from the (1,0)-form
that the disc family pins down, and Q depends on tau only and solves the
Poisson problem Laplace_tau Q = 4 R with Q = F(., z0) on the boundary, where

    R = -P_{tau taubar} + |P_{tau zbar}|^2 / g,     g = A + P_{z zbar}.

Conventions: d_tau = (d_t - i d_theta)/2 on the planar side, so
Laplace_tau = 4 d_tau d_taubar; the determinant residual is
g Phi_{tau taubar} - |Phi_{tau zbar}|^2.
"""
from dataclasses import dataclass, field as dataclass_field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.disc_family.foliation import FoliationMap, build_foliation_map
from src.disc_family.iteration import solve_disc_family
from src.disc_family.state import Background, DiscFamilyState, IterationConfig
from src.elliptic.holomorphic import holomorphic_operator
from src.elliptic.poisson import solve_interior
from src.fields.compose import GridMap, compose, interpolate_slice
from src.fields.field import GridField
from src.fields.holder import slicewise_norm
from src.fields import torus as torus_ops
from src.utils.errors import DegenerateError
from src.utils.logging import logger

INTEGRABILITY_TOL = 1e-6
SHRINK_LIMIT = 8

TorusNode = Tuple[int, int]


@dataclass(eq=False)
class PotentialBundle:
    """
    Phi = P + Q on the planar mesh x torus with its residuals.

    Attributes:
        P: Leafwise potential, mesh field (n_mesh, n, n)
        Q: tau-only part, mesh field (n_mesh,)
        Phi: P + Q
        basepoint: Torus node z0 with P(tau, z0) = 0
        residuals: hcma, boundary, q_consistency, exactness, positivity_margin
        shrink: Factor applied to the boundary data by the positivity fallback
        state, foliation: Disc family and foliation the bundle was built from
    """
    P: GridField
    Q: GridField
    Phi: GridField
    basepoint: TorusNode
    residuals: Dict[str, float] = dataclass_field(default_factory=dict)
    shrink: float = 1.0
    state: Optional[DiscFamilyState] = None
    foliation: Optional[FoliationMap] = None

    def summary(self) -> Dict[str, Any]:
        return {"basepoint": list(self.basepoint), "shrink": self.shrink, **self.residuals}


def pulled_one_form(state: DiscFamilyState, fmap: FoliationMap) -> np.ndarray:
    """
    d_z P at the mesh nodes: h(tau, w) - conj(z - w)/2 + psi_z(w) - psi_z(z)
    with w = A^-1(tau, z).
    """
    grid, domain = state.torus, state.domain
    z = grid.z()
    w = fmap.inverse_mesh
    h_field = GridField.on_mesh(fmap.h_mesh, domain, grid)
    h_at_w = fmap.pushforward(h_field).values
    psi_z = state.background.psi_z
    if state.background.is_flat:
        psi_w = np.zeros_like(w)
    else:
        psi_w = np.stack([interpolate_slice(psi_z, grid, w[k]) for k in range(w.shape[0])])
    return h_at_w - 0.5 * np.conj(z - w) + psi_w - psi_z


def exactness_defect(state: DiscFamilyState, fmap: FoliationMap) -> float:
    """Largest torus mean of the pulled-back (1,0)-form; zero for an exact form."""
    _, mean = torus_ops.antiderivative_z(pulled_one_form(state, fmap), state.torus)
    return float(np.max(np.abs(mean), initial=0.0))


def recover_P(state: DiscFamilyState, fmap: FoliationMap, basepoint: TorusNode = (0, 0),
              tol: float = INTEGRABILITY_TOL) -> GridField:
    """
    Leafwise potential P with d_z P given by the disc family, P(tau, z0) = 0.

    Raises:
        DegenerateError: If the pulled-back form is not exact ("integrability violated")
    """
    grid = state.torus
    form = pulled_one_form(state, fmap)
    p, mean = torus_ops.antiderivative_z(form, grid)
    defect = float(np.max(np.abs(mean), initial=0.0))
    scale = max(1.0, float(np.max(np.abs(form), initial=0.0)))
    if defect > tol * scale:
        raise DegenerateError(f"integrability violated: torus mean of the 1-form {defect:.3e}")
    i0, j0 = basepoint
    p = p - p[..., i0, j0][..., None, None]
    return GridField.on_mesh(p, state.domain, grid)


def _split(values: np.ndarray, domain) -> Tuple[np.ndarray, np.ndarray]:
    n_int = domain.interior_nodes.size
    return values[:n_int], values[n_int:]


def metric(P: GridField, background: Background) -> np.ndarray:
    """g = A + P_{z zbar} at every mesh node."""
    return background.A + torus_ops.d_zzbar(np.asarray(P.values), P.torus)


def mixed_derivative(u: GridField) -> np.ndarray:
    """u_{tau zbar} at the interior nodes."""
    domain = u.domain
    u_zbar = torus_ops.d_zbar(np.asarray(u.values), u.torus)
    return domain.d_tau(*_split(u_zbar, domain))


def compute_Q(P: GridField, background: Background, F_curve: np.ndarray,
              basepoint: TorusNode = (0, 0)) -> Tuple[GridField, float]:
    """
    tau-only part Q of the potential.

    Args:
        P: Leafwise potential (mesh field)
        background: Background potential
        F_curve: Boundary data on the curve nodes, shape (n_b, n, n)
        basepoint: Torus node z0

    Returns:
        (Q as a mesh field without torus axes, q_consistency = sup over tau of
        the z-variation of R)

    Raises:
        DegenerateError: If g <= 0 somewhere ("metric degenerate")
    """
    domain = P.domain
    g = metric(P, background)
    if np.min(g) <= 0.0:
        raise DegenerateError(f"metric degenerate: min g = {np.min(g):.3e}")
    P_int, P_mb = _split(np.asarray(P.values), domain)
    g_int, _ = _split(g, domain)
    p_tt = domain.laplacian(P_int, P_mb) / 4.0
    R = -p_tt + np.abs(mixed_derivative(P)) ** 2 / g_int
    R_mean = R.mean(axis=(-2, -1))
    q_consistency = float(np.max(np.abs(R - R_mean[..., None, None]), initial=0.0))
    i0, j0 = basepoint
    boundary = np.asarray(F_curve)[:, i0, j0]
    op = holomorphic_operator(domain)
    Q_int = op.harmonic_extension(boundary, domain.interior_nodes)
    Q_mb = domain.boundary_to_mesh(boundary)
    if np.any(R_mean):
        Q_int = Q_int + solve_interior(domain, 4.0 * R_mean, np.zeros(Q_mb.shape))
    return GridField.on_mesh(np.concatenate([Q_int, Q_mb]), domain), q_consistency


def assemble_and_check(P: GridField, Q: GridField, F_mesh: np.ndarray, background: Background,
                       basepoint: TorusNode = (0, 0), q_consistency: float = 0.0) -> PotentialBundle:
    """
    Phi = P + Q with its determinant, boundary and positivity residuals.

    Raises:
        DegenerateError: If A + Phi_{z zbar} <= 0 on some slice ("left the Kähler cone")
    """
    domain = P.domain
    Phi = P.with_values(np.asarray(P.values) + np.asarray(Q.values)[:, None, None])
    g = metric(Phi, background)
    margin = float(np.min(g))
    if margin <= 0.0:
        node = int(np.unravel_index(np.argmin(g), g.shape)[0])
        raise DegenerateError(f"left the Kähler cone at mesh node {node}: min g = {margin:.3e}")
    phi_int, phi_mb = _split(np.asarray(Phi.values), domain)
    g_int, _ = _split(g, domain)
    phi_tt = domain.laplacian(phi_int, phi_mb) / 4.0
    mixed = np.abs(mixed_derivative(Phi)) ** 2
    det = g_int * phi_tt - mixed
    scale = max(1.0, float(np.max(np.abs(g_int * phi_tt), initial=0.0)), float(np.max(mixed, initial=0.0)))
    residuals = {
        "hcma": float(np.max(np.abs(det), initial=0.0)) / scale,
        "boundary": float(np.max(np.abs(phi_mb - np.asarray(F_mesh)), initial=0.0)),
        "q_consistency": q_consistency,
        "positivity_margin": margin,
    }
    return PotentialBundle(P, Q, Phi, basepoint, residuals)


def kernel_identity_defect(bundle: PotentialBundle) -> float:
    """sup |f_tau + (P_{tau zbar} / g) o A| over the interior nodes."""
    state, fmap = bundle.state, bundle.foliation
    if state is None or fmap is None:
        raise ValueError("kernel identity needs the disc family and its foliation")
    domain = state.domain
    op = holomorphic_operator(domain)
    f_tau = op.derivative(state.f, domain.interior_nodes)
    g_int, _ = _split(metric(bundle.P, state.background), domain)
    ratio = mixed_derivative(bundle.P) / g_int
    n_int = domain.interior_nodes.size
    field = GridField.on_mesh(np.concatenate([ratio, np.zeros((fmap.f_mesh.shape[0] - n_int,) + ratio.shape[1:])]),
                              domain, state.torus)
    along_leaves = compose(field, GridMap(fmap.f_mesh)).values[:n_int]
    return float(np.max(np.abs(f_tau + along_leaves), initial=0.0))


def boundary_margin(F: np.ndarray, background: Background) -> float:
    """min of A + F_{z zbar} over the boundary data."""
    return float(np.min(background.A + torus_ops.d_zzbar(np.asarray(F), background.torus)))


def solve_potential(F: np.ndarray, background: Background, domain, cfg: Optional[IterationConfig] = None,
                    basepoint: TorusNode = (0, 0), F_mesh: Optional[np.ndarray] = None,
                    allow_shrink: bool = True) -> PotentialBundle:
    """
    Disc family, foliation, P, Q and Phi for boundary data F.

    With allow_shrink, data whose positivity margin is below 10 machine epsilon
    are halved (repeatedly) before solving; the applied factor is reported.

    Raises:
        DegenerateError: If the data stay degenerate after shrinking
        DivergenceError: Propagated from the disc family or the foliation
    """
    F = np.asarray(F, dtype=float)
    shrink = 1.0
    threshold = 10.0 * np.finfo(float).eps
    while boundary_margin(shrink * F, background) < threshold:
        if not allow_shrink or shrink < 0.5 ** SHRINK_LIMIT:
            raise DegenerateError("metric degenerate: boundary data leave the Kähler cone")
        shrink *= 0.5
        logger.warning(f"Boundary data too close to degenerate, shrinking by {shrink}")
    F = shrink * F
    if F_mesh is not None:
        F_mesh = shrink * np.asarray(F_mesh, dtype=float)
    state = solve_disc_family(F, background, domain, cfg, F_mesh=F_mesh)
    fmap = build_foliation_map(state)
    P = recover_P(state, fmap, basepoint)
    Q, q_consistency = compute_Q(P, background, F, basepoint)
    bundle = assemble_and_check(P, Q, state.boundary_F_mesh(), background, basepoint, q_consistency)
    bundle.residuals["exactness"] = exactness_defect(state, fmap)
    bundle.residuals["iterations"] = float(state.iterations)
    bundle.shrink, bundle.state, bundle.foliation = shrink, state, fmap
    logger.info(
        f"Assembled potential on {domain.kind}: hcma={bundle.residuals['hcma']:.3e} "
        f"boundary={bundle.residuals['boundary']:.3e}"
    )
    return bundle


def comparison_constant(first: PotentialBundle, second: PotentialBundle, gamma: float = 4.0 + 1.0 / 3.0) -> float:
    """
    Measured C in
    |Phi - Phi'|_{gamma-2} <= C (|F - F'|_{gamma-2} + (1 + |F|_gamma + |F'|_gamma) |F - F'|_2).
    """
    torus = first.Phi.torus
    F_a, F_b = first.state.F, second.state.F
    dF = F_a - F_b
    data = slicewise_norm(dF, torus, gamma - 2.0) + (
        1.0 + slicewise_norm(F_a, torus, gamma) + slicewise_norm(F_b, torus, gamma)
    ) * slicewise_norm(dF, torus, 2.0)
    if data == 0.0:
        return 0.0
    return slicewise_norm(np.asarray(first.Phi.values) - np.asarray(second.Phi.values), torus, gamma - 2.0) / data
