"""
Leafwise harmonic functions and the comparison Phi_1 - Phi_0 = integral of H_lambda.

For boundary data F_lambda = (1 - lambda) F_0 + lambda F_1 the derivative
d Phi_lambda / d lambda is the function harmonic along the leaves of the
foliation of Phi_lambda with boundary values F_1 - F_0.
"""
from dataclasses import asdict, dataclass, field as dataclass_field
from typing import Dict, List, Optional, Union

import numpy as np
from scipy.integrate import trapezoid

from src.disc_family.foliation import FoliationMap
from src.disc_family.state import Background, IterationConfig
from src.elliptic.holomorphic import holomorphic_operator
from src.fields.field import GridField
from src.potential.assembly import PotentialBundle, solve_potential
from src.tasks.worker import parallel_map
from src.utils.errors import GeodesicLabError
from src.utils.logging import logger


@dataclass(eq=False)
class TangentField:
    """
    Leafwise harmonic function on the planar mesh x torus.

    Attributes:
        H: Mesh field
        boundary_data: Boundary field on the curve nodes
        laplace_residual: sup of the discrete Laplacian along the straightened leaves
        boundary_residual: sup |H - g| at the mesh-boundary points
    """
    H: GridField
    boundary_data: GridField
    laplace_residual: float = 0.0
    boundary_residual: float = 0.0


def leafwise_harmonic(fmap: FoliationMap, g: Union[GridField, np.ndarray]) -> TangentField:
    """
    Harmonic extension of g along the leaves: pull back, extend, push forward.

    Args:
        fmap: Foliation map
        g: Boundary data on the curve nodes x torus

    Returns:
        TangentField with its residuals
    """
    domain, torus = fmap.domain, fmap.torus
    if not isinstance(g, GridField):
        g = GridField.on_boundary(np.asarray(g), domain, torus)
    pulled = np.asarray(fmap.pullback(g).values)
    op = holomorphic_operator(domain)
    straight_int = op.harmonic_extension(pulled, domain.interior_nodes)
    straight_mb = domain.boundary_to_mesh(pulled)
    scale = max(1.0, g.sup())
    laplace = float(np.max(np.abs(domain.laplacian(straight_int, straight_mb)), initial=0.0)) / scale
    straight = GridField.on_mesh(np.concatenate([straight_int, straight_mb]), domain, torus)
    H = fmap.pushforward(straight)
    n_int = domain.interior_nodes.size
    target = domain.boundary_to_mesh(np.asarray(g.values))
    boundary = float(np.max(np.abs(np.asarray(H.values)[n_int:] - target), initial=0.0))
    return TangentField(H, g, laplace, boundary)


@dataclass
class LinearizationReport:
    """
    Attributes:
        n_lambda: Number of lambda intervals
        difference_sup: sup |Phi_1 - Phi_0|
        integral_sup: sup of the trapezoid integral of H_lambda
        quadrature_error: sup |Phi_1 - Phi_0 - integral|
        remainder_ratios: |Phi_s - Phi_0 - s H_0|_0 / s^2 at s = 2/n and 1/n
        continuity: largest |H_{j+1} - H_j|_0 / d lambda
        linearization_constant: largest |H_lambda|_0 / |F_1 - F_0|_0
    """
    n_lambda: int
    difference_sup: float
    integral_sup: float
    quadrature_error: float
    remainder_ratios: List[float] = dataclass_field(default_factory=list)
    continuity: float = 0.0
    linearization_constant: float = 0.0

    def as_dict(self) -> Dict:
        return asdict(self)


def _sup(values: np.ndarray) -> float:
    return float(np.max(np.abs(values), initial=0.0))


def linearized_comparison(F0: np.ndarray, F1: np.ndarray, background: Background, domain,
                          cfg: Optional[IterationConfig] = None, n_lambda: int = 8,
                          basepoint=(0, 0), n_jobs: Optional[int] = None) -> LinearizationReport:
    """
    Compare Phi_1 - Phi_0 with the trapezoid integral of H_lambda over [0, 1].

    Raises:
        GeodesicLabError: Of the failing solve, its message prefixed with the lambda value
    """
    if n_lambda < 2:
        raise ValueError("linearized comparison needs at least two lambda intervals")
    F0, F1 = np.asarray(F0, dtype=float), np.asarray(F1, dtype=float)
    dF = F1 - F0
    lams = np.linspace(0.0, 1.0, n_lambda + 1)

    def solve_at(lam: float):
        try:
            bundle: PotentialBundle = solve_potential((1.0 - lam) * F0 + lam * F1, background, domain, cfg,
                                                      basepoint, allow_shrink=False)
            tangent = leafwise_harmonic(bundle.foliation, dF)
        except GeodesicLabError as exc:
            raise type(exc)(f"lambda={lam:.4f}: {exc}") from exc
        return np.asarray(bundle.Phi.values), np.asarray(tangent.H.values)

    results = parallel_map(solve_at, lams, n_jobs)
    Phi = np.stack([r[0] for r in results])
    H = np.stack([r[1] for r in results])
    difference = Phi[-1] - Phi[0]
    integral = trapezoid(H, lams, axis=0)
    step = lams[1] - lams[0]
    ratios = [_sup(Phi[j] - Phi[0] - lams[j] * H[0]) / lams[j] ** 2 for j in (2, 1)]
    data = _sup(dF)
    report = LinearizationReport(
        n_lambda=n_lambda,
        difference_sup=_sup(difference),
        integral_sup=_sup(integral),
        quadrature_error=_sup(difference - integral),
        remainder_ratios=ratios,
        continuity=max(_sup(H[j + 1] - H[j]) / step for j in range(n_lambda)),
        linearization_constant=max(_sup(h) for h in H) / data if data > 0.0 else 0.0,
    )
    logger.info(f"Linearized comparison: quadrature error {report.quadrature_error:.3e} over {n_lambda} intervals")
    return report
