import math

import numpy as np
import pytest

from src.fields.corpus import random_smooth_field
from src.fields.field import GridField
from src.nash_moser.indices import check_hypotheses, choose_indices, indices_for
from src.nash_moser.schedule import derive_schedule
from src.nash_moser.solver import ToyProblem, measure_constants, nash_moser_solve
from src.steps.verify_steps import brute_force_zeta
from src.utils.errors import ConfigError


@pytest.mark.parametrize("k, J", [(4.0, 0.1), (5.0, 0.0), (5.0, 0.3), (4.2, 0.06), (4.2, -0.01)])
def test_hypotheses_are_enforced(k, J):
    with pytest.raises(ConfigError):
        check_hypotheses(k, J)


@pytest.mark.parametrize("k, J", [(5.0, 0.1), (6.0, 0.2), (4.5, 0.1), (7.0, 0.24)])
def test_smallest_zeta_matches_independent_scan(k, J):
    idx = choose_indices(k, J)
    assert idx.valid
    assert idx.zeta == brute_force_zeta(k, J)
    assert idx.r - idx.zeta == pytest.approx(1.0 / 3.0)
    assert idx.B == k
    assert idx.alpha == J
    if idx.zeta - 1 >= max(1, int(k)):
        assert not indices_for(k, J, idx.zeta - 1).valid


def test_index_dictionary_carries_growth_rate():
    idx = choose_indices(5.0, 0.1)
    data = idx.as_dict()
    assert data["K"] == pytest.approx(1.0 + 4.0 / idx.r)
    assert data["zeta"] == idx.zeta


def test_schedule_intervals_are_nonempty():
    idx = choose_indices(5.0, 0.1)
    schedule = derive_schedule(idx, 1.5, 1.5, 1.0, 1e-3, max_steps=12)
    assert len(schedule.intervals) == 12
    for interval in schedule.intervals:
        assert interval["log_N_low"] <= interval["log_N_high"]
        assert interval["log_M_low"] <= interval["log_M_high"]
    assert schedule.N(1) <= schedule.N(2)
    assert schedule.M(1, cap=8.0) <= 8.0
    assert schedule.log_residual_bound(2) < schedule.log_residual_bound(1)


def test_schedule_rejects_bad_constants():
    idx = choose_indices(5.0, 0.1)
    with pytest.raises(ConfigError):
        derive_schedule(idx, 1.0, 1.5, 1.0, 1e-3)
    with pytest.raises(ConfigError):
        derive_schedule(idx, 1.5, 0.5, 1.0, 1e-3)
    with pytest.raises(ConfigError):
        derive_schedule(idx, 1.5, 1.5, 0.0, 1e-3)


def test_schedule_rejects_invalid_indices():
    idx = indices_for(5.0, 0.1, 5)
    assert not idx.valid
    with pytest.raises(ConfigError):
        derive_schedule(idx, 1.5, 1.5, 1.0, 1e-3)


def test_strict_schedule_rejects_large_data():
    idx = choose_indices(5.0, 0.1)
    schedule = derive_schedule(idx, 1.5, 1.5, 1.0, 1e6)
    assert not schedule.below_smallness
    with pytest.raises(ConfigError):
        derive_schedule(idx, 1.5, 1.5, 1.0, 1e6, strict=True)


def test_zero_data_take_no_steps(torus8):
    idx = choose_indices(5.0, 0.1)
    schedule = derive_schedule(idx, 1.5, 1.5, 1.0, 0.0)
    assert schedule.trivial
    assert schedule.log_mu == -math.inf
    h = GridField.on_torus(np.zeros(torus8.shape), torus8)
    f, trace = nash_moser_solve(ToyProblem(torus8), h, schedule)
    assert trace.steps == 0
    assert trace.converged
    assert f.sup() == 0.0


def test_toy_problem_converges(torus16):
    problem = ToyProblem(torus16)
    h = random_smooth_field(torus16, seed=5, amplitude=1e-3)
    idx = choose_indices(5.0, 0.1)
    constants = measure_constants(problem, h, idx)
    assert constants.C0 >= 1.5
    assert constants.C >= 1.5
    schedule = derive_schedule(idx, constants.C0, constants.C, 1.0, problem.norm(h, idx.B))
    steps = []
    f, trace = nash_moser_solve(problem, h, schedule, target=1e-10, on_step=lambda n, f, rec: steps.append(n))
    assert trace.converged
    assert trace.final_residual < 1e-10
    assert steps == list(range(1, trace.steps + 1))
    assert np.allclose(problem.apply(f).values, h.values, atol=1e-10)
    frame = trace.to_frame()
    assert list(frame["n"]) == [float(n) for n in steps]
    assert trace.summary()["steps"] == trace.steps
