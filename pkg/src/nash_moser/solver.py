"""
Nash-Moser iteration

    h_n = S_{N_n} h,   F_n = DP_{f_n}^-1 (h_n - P(f_n)),   v_n = S_{M_n} F_n,   f_{n+1} = f_n + v_n

with f_1 = 0, driven by an NMSchedule and monitored against the schedule's
per-step bounds. Bounds that fail numerically are recorded and logged; only
leaving the neighbourhood |f_n|_b < epsilon stops the run.
"""
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.fields.field import GridField
from src.fields.grids import TorusGrid
from src.fields.holder import norm as holder_value
from src.nash_moser.schedule import NMSchedule
from src.smoothing.operators import smooth
from src.utils.errors import DivergenceError
from src.utils.logging import logger

INDEX_CAP = 4.0 + 1.0 / 3.0
CONSTANT_INFLATION = 1.5
PROBE_SCALES = (2.0, 4.0, 8.0)


class NashMoserProblem(ABC):
    """
    A map P on a scale of grid spaces with its derivative, inverse and smoothers.

    Elements support +, - and multiplication by scalars. Norm indices above
    `index_cap` are evaluated at the cap.
    """
    index_cap: float = INDEX_CAP

    @abstractmethod
    def apply(self, f: Any) -> Any:
        """P(f)."""

    @abstractmethod
    def derivative(self, f: Any, v: Any) -> Any:
        """DP_f(v)."""

    @abstractmethod
    def inverse(self, f: Any, w: Any) -> Any:
        """DP_f^-1(w)."""

    @abstractmethod
    def smooth(self, u: Any, Q: float) -> Any:
        """S_Q u."""

    @abstractmethod
    def holder(self, u: Any, r: float) -> float:
        """|u|_r for r <= index_cap."""

    @abstractmethod
    def sup(self, u: Any) -> float:
        """|u|_0."""

    @abstractmethod
    def zero_like(self, u: Any) -> Any:
        """Zero element of the space of u."""

    def norm(self, u: Any, r: float) -> float:
        if r <= 0.0:
            return self.sup(u)
        return self.holder(u, min(r, self.index_cap))

    def cutoff_cap(self) -> float:
        """Largest useful smoothing scale (the grid's resolved frequencies)."""
        return 1e6

    def diagnostics(self) -> Dict[str, float]:
        """Extra per-step values recorded in the trace."""
        return {}


@dataclass
class Constants:
    """Measured constants, inflated, with the raw probe ratios."""
    C0: float
    C: float
    probes: Dict[str, float] = field(default_factory=dict)


def _ratio(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator > 0.0 else 0.0


def measure_constants(problem: NashMoserProblem, h: Any, schedule_indices=None,
                      scales: Tuple[float, ...] = PROBE_SCALES) -> Constants:
    """
    Probe C0 (Conditions 1-4) and C (smoothing bounds) on the data h.

    The probes use f = DP_0^-1 h and its halves; every ratio is maximized over
    the probe points and the result inflated by 1.5. C0 is at least 1.5.
    """
    idx = schedule_indices
    r = idx.r if idx is not None else problem.index_cap
    l = idx.l if idx is not None else 2.0
    b = idx.b if idx is not None else problem.index_cap
    chi = idx.chi if idx is not None else 4.0
    zero = problem.zero_like(h)
    probes: Dict[str, float] = {}

    def record(name: str, value: float):
        probes[name] = max(probes.get(name, 0.0), float(value))

    base = problem.inverse(zero, h)
    points = [base * 0.5, base]
    for f in points:
        Pf = problem.apply(f)
        f_rl = problem.norm(f, r + l)
        record("growth", _ratio(problem.norm(Pf, r), f_rl))
        v = base * 0.25
        record("lipschitz", _ratio(problem.sup(problem.apply(f + v) - Pf), problem.norm(v, b)))
        remainder = problem.sup(problem.apply(f + v) - Pf - problem.derivative(f, v))
        scale = problem.norm(v, r + l) + (1.0 + f_rl) * problem.norm(v, b)
        v0 = problem.sup(v)
        if v0 > 0.0 and scale > 0.0:
            record("quadratic", remainder / (v0 ** (2.0 - chi / r) * scale ** (chi / r)))
        record("derivative_sup", _ratio(problem.sup(problem.derivative(f, v)), v0))
        w = problem.inverse(f, v)
        record("inverse_sup", _ratio(problem.sup(w), v0))
        record("inverse_top", _ratio(problem.norm(w, r), (f_rl + 1.0) * problem.norm(v, b) + problem.norm(v, r)))

    h_low, h_high = problem.norm(h, 1.0), problem.norm(h, 2.0)
    for Q in scales:
        s = problem.smooth(h, Q)
        record("smoothing_blow_up", _ratio(problem.norm(s, 2.0), Q * h_low))
        record("smoothing_convergence", _ratio(problem.norm(s - h, 1.0), h_high / Q))

    C0 = CONSTANT_INFLATION * max([1.0] + [v for k, v in probes.items() if not k.startswith("smoothing")])
    C = CONSTANT_INFLATION * max([1.0] + [v for k, v in probes.items() if k.startswith("smoothing")])
    logger.info(f"Measured constants: C0={C0:.4g}, C={C:.4g}")
    return Constants(C0, C, probes)


@dataclass
class IterationTrace:
    """Per-step records of a Nash-Moser run and the bound violations seen."""
    records: List[Dict[str, float]] = field(default_factory=list)
    violations: List[Dict[str, Any]] = field(default_factory=list)
    converged: bool = False
    final_residual: float = float("nan")
    norm_constant: float = float("nan")

    @property
    def steps(self) -> int:
        return len(self.records)

    @property
    def certified(self) -> bool:
        return not self.violations

    def residuals(self) -> List[float]:
        return [rec["residual"] for rec in self.records]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.records)

    def summary(self) -> Dict[str, Any]:
        return {
            "steps": self.steps,
            "converged": self.converged,
            "certified": self.certified,
            "final_residual": self.final_residual,
            "norm_constant": self.norm_constant,
            "violations": len(self.violations),
        }


def _check(trace: IterationTrace, n: int, name: str, value: float, log_bound: float):
    if value > 0.0 and math.log(value) > log_bound + 1e-12:
        trace.violations.append({"n": n, "bound": name, "value": value, "log_bound": log_bound})
        logger.warning(f"step {n}: {name} bound violated (log value {math.log(value):.3f} > {log_bound:.3f})")


def nash_moser_solve(problem: NashMoserProblem, h: Any, schedule: NMSchedule, target: float = 1e-6,
                     smoother: Optional[Callable[[Any, float], Any]] = None,
                     on_step: Optional[Callable[[int, Any, Dict[str, float]], None]] = None) -> Tuple[Any, IterationTrace]:
    """
    Solve P(f) = h.

    Args:
        problem: Map with derivative, inverse, smoothers and norms
        h: Data
        schedule: Parameter schedule (its max_steps bounds the run)
        target: Stop once |P(f_n) - h|_0 < target
        smoother: Replacement for problem.smooth
        on_step: Called as on_step(n, f_n, record) after every step

    Returns:
        (f, trace)

    Raises:
        DivergenceError: If |f_n|_b exceeds epsilon ("left N^b")
    """
    smoother = smoother or problem.smooth
    idx = schedule.indices
    trace = IterationTrace()
    f = problem.zero_like(h)
    h_sup = problem.sup(h)
    if schedule.trivial or h_sup == 0.0:
        trace.converged, trace.final_residual, trace.norm_constant = True, 0.0, 0.0
        logger.info("Nash-Moser: zero data, f = 0 in 0 steps")
        return f, trace

    cap = problem.cutoff_cap()
    for n in range(1, schedule.max_steps + 1):
        Pf = problem.apply(f)
        residual = problem.sup(Pf - h)
        if residual < target:
            break
        N, M = schedule.N(n, cap), schedule.M(n, cap)
        h_n = smoother(h, N)
        defect = h_n - Pf
        f_b = problem.norm(f, idx.b)
        if f_b > schedule.epsilon:
            raise DivergenceError(f"left N^b at step {n}: |f_n|_b = {f_b:.3e} > epsilon = {schedule.epsilon:.3e}")
        F = problem.inverse(f, defect)
        v = smoother(F, M)
        record = {
            "n": float(n),
            "residual": residual,
            "step_residual": problem.sup(defect),
            "data_error": problem.sup(h_n - h),
            "f_top": problem.norm(f, idx.r + idx.l),
            "f_b": f_b,
            "v_sup": problem.sup(v),
            "v_b": problem.norm(v, idx.b),
            "v_B_minus_alpha": problem.norm(v, idx.B - idx.alpha),
            "N": N,
            "M": M,
        }
        record.update(problem.diagnostics())
        _check(trace, n, "step_residual", record["step_residual"], schedule.log_residual_bound(n))
        _check(trace, n, "data_error", record["data_error"], schedule.log_approximation_bound(n))
        _check(trace, n, "f_top", record["f_top"], schedule.log_growth_bound(n))
        trace.records.append(record)
        logger.info(f"Nash-Moser step {n}: |P(f)-h|_0={residual:.3e}, |v|_0={record['v_sup']:.3e}")
        f = f + v
        if on_step is not None:
            on_step(n, f, record)
    trace.final_residual = problem.sup(problem.apply(f) - h)
    trace.converged = trace.final_residual < target
    trace.norm_constant = _ratio(problem.norm(f, idx.B - idx.alpha), problem.norm(h, idx.B))
    logger.info(
        f"Nash-Moser finished after {trace.steps} steps: residual {trace.final_residual:.3e}, "
        f"|f|_(B-alpha) <= {trace.norm_constant:.3e} |h|_B"
    )
    return f, trace


class ToyProblem(NashMoserProblem):
    """P(f) = f + f^2 on the torus; DP_f^-1 w = w / (1 + 2 f)."""

    def __init__(self, torus: TorusGrid):
        self.torus = torus

    def _field(self, values: np.ndarray) -> GridField:
        return GridField.on_torus(values, self.torus)

    def apply(self, f: GridField) -> GridField:
        return self._field(f.values + f.values ** 2)

    def derivative(self, f: GridField, v: GridField) -> GridField:
        return self._field((1.0 + 2.0 * f.values) * v.values)

    def inverse(self, f: GridField, w: GridField) -> GridField:
        return self._field(w.values / (1.0 + 2.0 * f.values))

    def smooth(self, u: GridField, Q: float) -> GridField:
        return smooth(u, max(1.0, Q))

    def holder(self, u: GridField, r: float) -> float:
        return holder_value(u, r)

    def sup(self, u: GridField) -> float:
        return u.sup()

    def zero_like(self, u: GridField) -> GridField:
        return GridField.zeros_like(u)

    def cutoff_cap(self) -> float:
        return 2.0 * self.torus.points_per_dim
