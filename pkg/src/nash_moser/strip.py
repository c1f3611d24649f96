"""The strip maps P, DP and DP^-1 as a Nash-Moser problem on triples (phi0, phi1, phi)."""
from typing import Dict, Optional

import numpy as np

from src.fields.field import GridField
from src.nash_moser.solver import NashMoserProblem
from src.smoothing.operators import smooth, smooth_vanishing
from src.strip_geodesic.iteration import NeumannReport, StripProblem, StripTriple


class StripNashMoser(NashMoserProblem):
    """
    Args:
        strip: Strip maps for one geometry and torus
        cutoff: Largest smoothing scale used (every resolved frequency passes below it)
    """

    def __init__(self, strip: StripProblem, cutoff: float = 1e6):
        self.strip = strip
        self.cutoff = cutoff
        self.last_neumann: Optional[NeumannReport] = None

    @property
    def geom(self):
        return self.strip.geom

    def apply(self, f: StripTriple) -> StripTriple:
        return self.strip.P(f)

    def derivative(self, f: StripTriple, v: StripTriple) -> StripTriple:
        return self.strip.dP_apply(f, v)

    def inverse(self, f: StripTriple, w: StripTriple) -> StripTriple:
        solution, report = self.strip.dP_inverse(f, w)
        self.last_neumann = report
        return solution

    def smooth(self, u: StripTriple, Q: float) -> StripTriple:
        Q = max(1.0, Q)
        torus = u.torus
        phi0 = smooth(GridField.on_torus(u.phi0, torus), Q).values
        phi1 = smooth(GridField.on_torus(u.phi1, torus), Q).values
        if np.any(u.phi):
            phi = smooth_vanishing(GridField.on_window(u.phi, self.geom.window, torus), Q).values
        else:
            phi = u.phi
        return StripTriple(phi0, phi1, phi, torus)

    def holder(self, u: StripTriple, r: float) -> float:
        return u.norm(r, self.geom.window)

    def sup(self, u: StripTriple) -> float:
        return u.sup()

    def zero_like(self, u: StripTriple) -> StripTriple:
        return u * 0.0

    def cutoff_cap(self) -> float:
        return self.cutoff

    def diagnostics(self) -> Dict[str, float]:
        if self.last_neumann is None:
            return {}
        return {"neumann_terms": float(self.last_neumann.terms), "neumann_factor": self.last_neumann.factor}
