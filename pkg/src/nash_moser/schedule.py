"""
Parameter schedule of the Nash-Moser iteration.

With K = 1 + 2l/r and lambda = B / (K^2 (r - B)), A is the first point of the
grid A_min * 2^i satisfying

    e^{A(K-1)} >= max(2, 4 C C0),
    e^{AK(lambda(2-K) - (lambda+K) chi/r)} >= 48 C0^3,

and the two cutoff intervals being nonempty at n = 1:

    (3C)^{1/B} e^{AK^n lambda K/B}        <= N_n <= C^{-1/(r-B)} e^{AK^n/(r-B)},
    36 C0^3 C e^{AK^n (1 + lambda K)/r}   <= M_n <= (12 C0^2 C)^{-1/l} e^{AK^n (K-1)/l}.

N_n and M_n are the geometric means of their intervals. All quantities are
kept as logarithms; the cutoffs overflow doubles long before the schedule
stops being meaningful.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from src.nash_moser.indices import NMIndices
from src.utils.errors import ConfigError
from src.utils.logging import logger

A_GRID_STEPS = 20
DEFAULT_MAX_STEPS = 20
LOG_CUTOFF_CAP = 700.0


def _log(value: float) -> float:
    return math.log(value) if value > 0.0 else -math.inf


@dataclass
class NMSchedule:
    """
    Attributes:
        indices: Index set the schedule was derived for
        K, lam, A: Growth rate, decay exponent and scale of the schedule
        log_mu: log of mu = 2 |h|_B e^{lambda A K} (-inf for h = 0)
        C0, C, epsilon: Constants of the map, of the smoothing and of the neighbourhood N^b
        h_norm_B: |h|_B the schedule was derived for
        log_smallness: log of the closed-form smallness threshold on |h|_B
        max_steps: Number of steps with certified intervals
        log_N, log_M: log of the cutoffs N_n and M_n, n = 1 .. max_steps
    """
    indices: NMIndices
    K: float
    lam: float
    A: float
    log_mu: float
    C0: float
    C: float
    epsilon: float
    h_norm_B: float
    log_smallness: float
    max_steps: int
    log_N: List[float] = field(default_factory=list)
    log_M: List[float] = field(default_factory=list)
    intervals: List[Dict[str, float]] = field(default_factory=list)

    @property
    def trivial(self) -> bool:
        return self.h_norm_B == 0.0

    @property
    def mu(self) -> float:
        return math.exp(min(self.log_mu, LOG_CUTOFF_CAP))

    @property
    def below_smallness(self) -> bool:
        return _log(self.h_norm_B) <= self.log_smallness

    def N(self, n: int, cap: float = math.inf) -> float:
        return min(math.exp(min(self.log_N[n - 1], LOG_CUTOFF_CAP)), cap)

    def M(self, n: int, cap: float = math.inf) -> float:
        return min(math.exp(min(self.log_M[n - 1], LOG_CUTOFF_CAP)), cap)

    def log_residual_bound(self, n: int) -> float:
        """log of mu e^{-lambda A K^n}, the bound on |P(f_n) - h_n|_0."""
        return self.log_mu - self.lam * self.A * self.K ** n

    def log_growth_bound(self, n: int) -> float:
        """log of mu e^{A K^n}, the bound on |f_n|_{r+l} and |h_n|_r."""
        return self.log_mu + self.A * self.K ** n

    def log_approximation_bound(self, n: int) -> float:
        """log of (1/3) mu e^{-lambda A K^{n+1}}, the bound on |h_n - h|_0."""
        return self.log_mu - math.log(3.0) - self.lam * self.A * self.K ** (n + 1)

    def as_dict(self) -> Dict[str, object]:
        return {
            "indices": self.indices.as_dict(),
            "K": self.K,
            "lambda": self.lam,
            "A": self.A,
            "log_mu": self.log_mu if math.isfinite(self.log_mu) else None,
            "C0": self.C0,
            "C": self.C,
            "epsilon": self.epsilon,
            "h_norm_B": self.h_norm_B,
            "log_smallness": self.log_smallness,
            "below_smallness": self.below_smallness,
            "max_steps": self.max_steps,
            "intervals": self.intervals,
        }


def _exponents(idx: NMIndices, K: float, lam: float) -> Dict[str, float]:
    r, B, b, l, chi = idx.r, idx.B, idx.b, idx.l, idx.chi
    return {
        "quadratic": lam * (2.0 - K) - (lam + K) * chi / r,
        "neighbourhood": -lam + b * lam / (r + l) + K * b / (r + l),
    }


def cutoff_intervals(idx: NMIndices, K: float, lam: float, A: float, C0: float, C: float,
                     n: int) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """log-endpoints of the intervals for N_n and M_n."""
    r, B, l = idx.r, idx.B, idx.l
    growth = A * K ** n
    n_lo = math.log(3.0 * C) / B + growth * lam * K / B
    n_hi = -math.log(C) / (r - B) + growth / (r - B)
    m_lo = math.log(36.0 * C0 ** 3 * C) + growth * (1.0 + lam * K) / r
    m_hi = -math.log(12.0 * C0 ** 2 * C) / l + growth * (K - 1.0) / l
    return (n_lo, n_hi), (m_lo, m_hi)


def _feasible(idx: NMIndices, K: float, lam: float, A: float, C0: float, C: float) -> bool:
    quadratic = _exponents(idx, K, lam)["quadratic"]
    if A * (K - 1.0) < max(math.log(2.0), math.log(4.0 * C * C0)):
        return False
    if A * K * quadratic < math.log(48.0 * C0 ** 3):
        return False
    (n_lo, n_hi), (m_lo, m_hi) = cutoff_intervals(idx, K, lam, A, C0, C, 1)
    return n_lo <= n_hi and m_lo <= m_hi


def smallness_threshold(idx: NMIndices, K: float, lam: float, A: float, C0: float, C: float,
                        epsilon: float) -> float:
    """log of min{eps (1 - e^{A(K-1) e}) e^{-lambda A K} / (4 C C0), e^{-lambda A K} / 4}."""
    e = _exponents(idx, K, lam)["neighbourhood"]
    first = _log(epsilon) + math.log1p(-math.exp(A * (K - 1.0) * e)) - lam * A * K - math.log(4.0 * C * C0)
    second = -lam * A * K - math.log(4.0)
    return min(first, second)


def derive_schedule(idx: NMIndices, C0: float, C: float, epsilon: float, h_norm_B: float,
                    max_steps: int = DEFAULT_MAX_STEPS, A_min: float = 1.0, strict: bool = False) -> NMSchedule:
    """
    Derive K, lambda, A, mu and the cutoffs N_n, M_n.

    Args:
        idx: Validated index set
        C0: Constant of the map (Conditions 1-4), > 1
        C: Smoothing constant, >= 1
        epsilon: Radius of the neighbourhood N^b
        h_norm_B: |h|_B of the data
        max_steps: Steps for which the cutoff intervals are certified
        A_min: First point of the A search grid
        strict: Reject data above the closed-form smallness threshold

    Returns:
        NMSchedule (trivial when h_norm_B == 0)

    Raises:
        ConfigError: If the indices are invalid, no A on the grid is feasible,
            an interval is empty at some n, or (strict) h is too large
    """
    failing = idx.failing()
    if failing:
        raise ConfigError(f"index set violates {', '.join(failing)}")
    if C0 <= 1.0 or C < 1.0 or epsilon <= 0.0 or h_norm_B < 0.0:
        raise ConfigError(f"schedule constants out of range: C0={C0}, C={C}, epsilon={epsilon}, |h|_B={h_norm_B}")
    K = idx.K
    lam = idx.B / (K ** 2 * (idx.r - idx.B))
    exps = _exponents(idx, K, lam)
    if not lam > idx.b / (idx.r - idx.b):
        raise ConfigError(f"lambda={lam:.6g} does not exceed b/(r-b)")
    if not lam > (idx.B - idx.alpha) * (lam + K) / (idx.r + idx.l):
        raise ConfigError(f"lambda={lam:.6g} too small for convergence in the B-alpha norm")
    if exps["quadratic"] <= 0.0:
        raise ConfigError("quadratic exponent lambda(2-K) - (lambda+K) chi/r is not positive")

    A = next((A_min * 2.0 ** i for i in range(A_GRID_STEPS + 1) if _feasible(idx, K, lam, A_min * 2.0 ** i, C0, C)),
             None)
    if A is None:
        raise ConfigError(f"no feasible A on the grid {A_min} * 2^0..2^{A_GRID_STEPS}")

    log_N, log_M, intervals = [], [], []
    for n in range(1, max_steps + 1):
        (n_lo, n_hi), (m_lo, m_hi) = cutoff_intervals(idx, K, lam, A, C0, C, n)
        if n_lo > n_hi or m_lo > m_hi:
            raise ConfigError(f"cutoff interval empty at n={n}")
        log_N.append(0.5 * (n_lo + n_hi))
        log_M.append(0.5 * (m_lo + m_hi))
        intervals.append({"n": n, "log_N_low": n_lo, "log_N_high": n_hi, "log_M_low": m_lo, "log_M_high": m_hi})

    log_smallness = smallness_threshold(idx, K, lam, A, C0, C, epsilon)
    log_mu = math.log(2.0) + _log(h_norm_B) + lam * A * K
    schedule = NMSchedule(idx, K, lam, A, log_mu, C0, C, epsilon, h_norm_B, log_smallness, max_steps,
                          log_N, log_M, intervals)
    if h_norm_B > 0.0 and not schedule.below_smallness:
        message = f"h too large: log|h|_B={_log(h_norm_B):.3f} above threshold {log_smallness:.3f}"
        if strict:
            raise ConfigError(message)
        logger.warning(f"{message}; continuing with measured constants")
    logger.info(f"Schedule: K={K:.6g}, lambda={lam:.6g}, A={A:.6g}, steps certified={max_steps}")
    return schedule
