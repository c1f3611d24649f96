from src.nash_moser.indices import NMIndices, check_hypotheses, choose_indices, indices_for
from src.nash_moser.schedule import NMSchedule, cutoff_intervals, derive_schedule, smallness_threshold
from src.nash_moser.solver import (
    Constants,
    IterationTrace,
    NashMoserProblem,
    ToyProblem,
    measure_constants,
    nash_moser_solve,
)
from src.nash_moser.strip import StripNashMoser

__all__ = [
    "NMIndices",
    "check_hypotheses",
    "choose_indices",
    "indices_for",
    "NMSchedule",
    "cutoff_intervals",
    "derive_schedule",
    "smallness_threshold",
    "Constants",
    "IterationTrace",
    "NashMoserProblem",
    "ToyProblem",
    "measure_constants",
    "nash_moser_solve",
    "StripNashMoser",
]
