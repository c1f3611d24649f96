"""
Index set of the inverse function theorem and its selection from (k, J).

Given the regularity k of the endpoints and the loss J:

    X = min(1/3, (k - 4)/3),  B = k,  alpha = J,  b = 4 + X,  l = 2,  chi = 4,

and r = zeta + 1/3 with zeta the smallest integer for which the five index
inequalities hold. Fractional part 1/3 keeps every index off the integers.
"""
from dataclasses import asdict, dataclass
from typing import Dict

from src.utils.errors import ConfigError
from src.utils.logging import logger

ZETA_SCAN_LIMIT = 100_000
FRACTIONAL_PART = 1.0 / 3.0


@dataclass(frozen=True)
class NMIndices:
    """
    Attributes:
        r: Top index of the scale (Condition-1 range)
        B: Regularity of the data h
        b: Index of the neighbourhood N^b
        l: Derivative loss of P
        chi: Exponent of the quadratic remainder
        alpha: Loss in the conclusion |f|_{B - alpha} <= C |h|_B
        zeta: Integer part of r
        k, J: The inputs the indices were chosen from
    """
    r: float
    B: float
    b: float
    l: float
    chi: float
    alpha: float
    zeta: int = 0
    k: float = 0.0
    J: float = 0.0

    @property
    def K(self) -> float:
        return 1.0 + 2.0 * self.l / self.r

    def inequalities(self) -> Dict[str, bool]:
        """Truth value of each index condition, keyed by a short name."""
        r, B, b, l, chi, a = self.r, self.B, self.b, self.l, self.chi, self.alpha
        K = self.K
        return {
            "order": r > B > B - a > b > l >= 1.0,
            "B_over_chi": r > 2 * l + chi and B / chi > K ** 3 * (r - B) / (r - 2 * l - chi),
            "B_over_r_minus_B": B / (r - B) < K,
            "b_ratio": B * (r - b) / (b * (r - B)) > K ** 2,
            "B_minus_alpha": r ** 3 * (r + l - B + a) / ((r + 2 * l) ** 3 * (r - B)) > (B - a) / B,
        }

    def failing(self) -> list:
        return [name for name, ok in self.inequalities().items() if not ok]

    @property
    def valid(self) -> bool:
        return not self.failing()

    def as_dict(self) -> Dict[str, float]:
        out = asdict(self)
        out["K"] = self.K
        return out


def check_hypotheses(k: float, J: float) -> None:
    """
    Raises:
        ConfigError: Unless k > 4 and 0 < J < min(1/4, (k - 4)/4)
    """
    if not k > 4.0:
        raise ConfigError(f"regularity k must exceed 4, got k={k}")
    bound = min(0.25, (k - 4.0) / 4.0)
    if not 0.0 < J < bound:
        raise ConfigError(f"loss J must satisfy 0 < J < {bound:.6g} for k={k}, got J={J}")


def indices_for(k: float, J: float, zeta: int) -> NMIndices:
    X = min(1.0 / 3.0, (k - 4.0) / 3.0)
    return NMIndices(
        r=zeta + FRACTIONAL_PART, B=float(k), b=4.0 + X, l=2.0, chi=4.0, alpha=float(J),
        zeta=int(zeta), k=float(k), J=float(J),
    )


def choose_indices(k: float, J: float) -> NMIndices:
    """
    Smallest admissible index set for the pair (k, J).

    Args:
        k: Endpoint regularity, k > 4
        J: Regularity loss, 0 < J < min(1/4, (k - 4)/4)

    Returns:
        Validated NMIndices with the smallest integer zeta

    Raises:
        ConfigError: If (k, J) violate the hypotheses or no zeta is found below the scan limit
    """
    check_hypotheses(k, J)
    for zeta in range(max(1, int(k)), ZETA_SCAN_LIMIT):
        idx = indices_for(k, J, zeta)
        if idx.valid:
            logger.info(f"Indices for k={k}, J={J}: zeta={zeta}, r={idx.r:.6g}, b={idx.b:.6g}, K={idx.K:.6g}")
            return idx
    raise ConfigError(f"no admissible zeta below {ZETA_SCAN_LIMIT} for k={k}, J={J}")
