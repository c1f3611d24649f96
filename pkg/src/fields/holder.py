"""
Discrete Hölder norms on product grids.

The C^{m,alpha} norm of a sampled field is the maximum over multi-indices
|j| <= m of sup|D^j u| plus the directional alpha-seminorm of the m-th
derivatives. Derivatives are centered differences on periodic axes and
second-order one-sided differences at the ends of bounded axes. Joint
norms on products are taken as this max of directional quantities over
all axes, mixed derivatives included.
"""
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from src.fields.field import GridField
from src.fields.grids import Axis, HolderIndex
from src.utils.config import settings
from src.utils.errors import ResolutionError


@dataclass(frozen=True)
class NormReport:
    index: HolderIndex
    value: float
    seminorm_pairs_sampled: int
    sup_part: float = 0.0
    seminorm: float = 0.0
    sampling: str = "full"


def _difference(u: np.ndarray, axis: int, spec: Axis) -> np.ndarray:
    if spec.periodic:
        return (np.roll(u, -1, axis=axis) - np.roll(u, 1, axis=axis)) / (2.0 * spec.spacing)
    return np.gradient(u, spec.spacing, axis=axis, edge_order=2)


def derivatives(field: GridField, order: int) -> Iterator[Tuple[Tuple[int, ...], np.ndarray]]:
    """
    Yield (multi-index, D^j u) for every multi-index of exactly `order`.

    Multi-indices are sorted axis tuples, so each mixed derivative appears once.
    """
    axes = field.axes
    for spec in axes:
        minimum = 2 if spec.periodic else 3
        if order > 0 and spec.size < max(minimum, order + 2):
            raise ResolutionError(
                f"insufficient resolution: axis {spec.name} has {spec.size} points, "
                f"order {order} needs at least {max(minimum, order + 2)}"
            )
    cache: Dict[Tuple[int, ...], np.ndarray] = {(): np.asarray(field.values)}
    for multi in combinations_with_replacement(range(len(axes)), order):
        for depth in range(1, len(multi) + 1):
            key = multi[:depth]
            if key not in cache:
                axis = key[-1]
                cache[key] = _difference(cache[key[:-1]], axis, axes[axis])
        yield multi, cache[multi]


def _separations(spec: Axis, rng: np.random.Generator) -> Tuple[List[int], str]:
    n = spec.size
    upper = n // 2 if spec.periodic else n - 1
    if upper < 1:
        return [], "full"
    if n <= settings.HOLDER_FULL_PAIR_LIMIT:
        return list(range(1, upper + 1)), "full"
    dyadic = {1 << p for p in range(int(np.log2(upper)) + 1)}
    extra = rng.integers(1, upper + 1, size=min(32, upper))
    return sorted(dyadic | {int(d) for d in extra}), "stratified"


def holder_seminorm(
    u: np.ndarray, axes: Tuple[Axis, ...], alpha: float, seed: Optional[int] = None
) -> Tuple[float, int, str]:
    """
    Directional alpha-seminorm: max over axes and separations d of |u(x+d) - u(x)| / |d|^alpha.

    Returns:
        (seminorm, number of node pairs compared, sampling rule)
    """
    if alpha == 0.0:
        return 0.0, 0, "none"
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    best, pairs, rule = 0.0, 0, "full"
    for axis, spec in enumerate(axes):
        separations, axis_rule = _separations(spec, rng)
        if axis_rule != "full":
            rule = axis_rule
        for d in separations:
            if spec.periodic:
                diff = np.abs(np.roll(u, -d, axis=axis) - u)
            else:
                n = spec.size
                diff = np.abs(
                    np.take(u, np.arange(d, n), axis=axis) - np.take(u, np.arange(0, n - d), axis=axis)
                )
            pairs += diff.size
            if diff.size:
                best = max(best, float(diff.max()) / spec.distance(d) ** alpha)
    return best, pairs, rule


def holder_norm(field: GridField, r: HolderIndex, seed: Optional[int] = None) -> NormReport:
    """
    Discrete C^{m,alpha} norm of a field.

    Args:
        field: Field to measure
        r: Hölder index m + alpha
        seed: Seed of the stratified pair sampler (settings.SEED by default)

    Returns:
        NormReport with the value and the number of seminorm pairs sampled

    Raises:
        ResolutionError: If some axis is too short for m-th differences
    """
    sup_part = 0.0
    top: List[np.ndarray] = []
    for order in range(r.m + 1):
        for _, d in derivatives(field, order):
            if d.size:
                sup_part = max(sup_part, float(np.max(np.abs(d))))
            if order == r.m:
                top.append(d)
    seminorm, pairs, rule = 0.0, 0, "none"
    for d in top:
        s, p, rule = holder_seminorm(d, field.axes, r.alpha, seed)
        seminorm = max(seminorm, s)
        pairs += p
    return NormReport(
        index=r,
        value=sup_part + seminorm,
        seminorm_pairs_sampled=pairs,
        sup_part=sup_part,
        seminorm=seminorm,
        sampling=rule,
    )


def norm(field: GridField, r: float) -> float:
    """Shorthand: value of holder_norm at a real index."""
    return holder_norm(field, HolderIndex.from_real(r)).value


def interpolation_check(field: GridField, kappa: HolderIndex, nu: HolderIndex, rho: HolderIndex) -> float:
    """
    Interpolation ratio |u|_nu^(rho-kappa) / (|u|_kappa^(rho-nu) |u|_rho^(nu-kappa)).

    A zero field returns 1 (the 0/0 convention).
    """
    if not (kappa <= nu <= rho):
        raise ValueError("interpolation_check needs kappa <= nu <= rho")
    if field.sup() == 0.0:
        return 1.0
    k, n, p = kappa.value, nu.value, rho.value
    if p == k:
        return 1.0
    a = holder_norm(field, kappa).value
    b = holder_norm(field, nu).value
    c = holder_norm(field, rho).value
    log_ratio = (p - k) * np.log(b) - (p - n) * np.log(a) - (n - k) * np.log(c)
    return float(np.exp(log_ratio))


def wiener_norm(values: np.ndarray, index: float, floor: float = 1e-13) -> float:
    """
    Spectral majorant sum |u_k| (1 + |k|)^index of a field periodic in every axis.

    Coefficients below `floor` times the largest one are treated as round-off,
    which keeps high indices meaningful on band-limited data.
    """
    u_hat = np.fft.fftn(values) / values.size
    mags = np.abs(u_hat)
    peak = mags.max() if mags.size else 0.0
    if peak == 0.0:
        return 0.0
    grids = np.meshgrid(*[np.fft.fftfreq(n, d=1.0 / n) for n in values.shape], indexing="ij")
    k = np.sqrt(sum(g ** 2 for g in grids))
    mask = mags > floor * peak
    return float(np.sum(mags[mask] * (1.0 + k[mask]) ** index))


def slicewise_norm(values: np.ndarray, torus, r: float) -> float:
    """Largest torus-direction norm over the leading (planar) index of a mesh array."""
    values = np.asarray(values)
    flat = values.reshape((-1,) + values.shape[-2:])
    return max((norm(GridField.on_torus(s, torus), r) for s in flat), default=0.0)
