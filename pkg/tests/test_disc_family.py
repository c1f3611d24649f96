import numpy as np
import pytest

from src.disc_family.foliation import build_foliation_map, foliation_deviation, invert_leaf
from src.disc_family.iteration import (
    calibrate_smallness,
    disc_iteration_step,
    contraction_history,
    is_contracting,
    periodic_consistency,
    solve_disc_family,
)
from src.disc_family.state import Background, DiscFamilyState, IterationConfig
from src.fields.domains import DiscGrid
from src.fields.field import GridField
from src.steps.mode_steps import disc_boundary_data
from src.utils.errors import DivergenceError


@pytest.fixture
def small_disc():
    return DiscGrid(6, 16)


def _data(domain, torus, amplitude):
    x, y = torus.coordinates()
    phi1 = amplitude * (np.cos(x) + 0.5 * np.sin(y))
    return disc_boundary_data(np.zeros(torus.shape), phi1, domain.curve.nodes)


@pytest.mark.parametrize("kwargs", [{"X": 1.0}, {"X": 0.0}, {"l": 0.25}, {"max_iter": 0}, {"A_weight": -1.0}])
def test_iteration_config_validation(kwargs):
    with pytest.raises(ValueError):
        IterationConfig(**kwargs)


def test_zero_data_is_a_fixed_point(small_disc, torus8, disc_cfg):
    F = np.zeros((small_disc.curve.size,) + torus8.shape)
    state = solve_disc_family(F, Background.flat(torus8), small_disc, disc_cfg)
    assert state.converged
    assert state.iterations == 1
    assert not np.any(state.f)


def test_small_data_converges_and_contracts(small_disc, torus8, disc_cfg):
    state = solve_disc_family(_data(small_disc, torus8, 0.02), Background.flat(torus8), small_disc, disc_cfg)
    assert state.converged
    assert state.residual < 1e-8
    assert np.max(np.abs(state.f[small_disc.curve.basepoint_index])) < 1e-14
    assert all(ratio <= 0.70 for ratio in contraction_history(state))
    assert is_contracting(state)


def test_fixed_point_does_not_depend_on_the_start(small_disc, torus8, disc_cfg):
    bg = Background.flat(torus8)
    F = _data(small_disc, torus8, 0.02)
    state = solve_disc_family(F, bg, small_disc, disc_cfg)
    perturbed = state.advanced(-0.5 * state.f, -0.5 * state.h)
    again = solve_disc_family(F, bg, small_disc, disc_cfg, initial=perturbed)
    assert np.max(np.abs(again.f - state.f)) <= 10 * disc_cfg.tol


def test_translated_chart_gives_the_same_family(small_disc, torus8, disc_cfg):
    state = solve_disc_family(_data(small_disc, torus8, 0.02), Background.flat(torus8), small_disc, disc_cfg)
    assert periodic_consistency(state, 0.7 + 0.3j, disc_cfg) <= 1e-6


def test_large_data_diverges(small_disc, torus8):
    with pytest.raises(DivergenceError):
        solve_disc_family(_data(small_disc, torus8, 50.0), Background.flat(torus8), small_disc,
                          IterationConfig(max_iter=10))


def test_step_callback_sees_every_record(small_disc, torus8, disc_cfg):
    records = []
    state = solve_disc_family(_data(small_disc, torus8, 0.02), Background.flat(torus8), small_disc, disc_cfg,
                              on_step=records.append)
    assert records == state.history
    assert [r["step"] for r in records] == list(range(1, state.iterations + 1))


def test_calibration_keeps_contracting_upper_bound(small_disc, torus8, disc_cfg):
    profile = _data(small_disc, torus8, 1.0)
    eps = calibrate_smallness(profile, Background.flat(torus8), small_disc, disc_cfg, upper=0.01, steps=2)
    assert eps == pytest.approx(0.01)


def test_leaf_inversion_of_zero_displacement(torus8):
    w, residual = invert_leaf(np.zeros(torus8.shape, dtype=complex), torus8)
    assert np.array_equal(w, torus8.z())
    assert residual == 0.0


def test_foliation_map_is_invertible(small_disc, torus8, disc_cfg):
    state = solve_disc_family(_data(small_disc, torus8, 0.02), Background.flat(torus8), small_disc, disc_cfg)
    fmap = build_foliation_map(state, n_jobs=1)
    assert fmap.jacobian_min > 0.0
    assert fmap.inverse_residual < 1e-11
    x, _ = torus8.coordinates()
    values = np.broadcast_to(np.cos(x), (small_disc.curve.size,) + torus8.shape)
    field = GridField.on_boundary(values, small_disc, torus8)
    assert fmap.round_trip_defect(field) < 1e-6
    deviation = foliation_deviation(fmap)
    assert 0.0 < deviation < float("inf")


def test_single_steps_reduce_the_boundary_residual(small_disc, torus8, disc_cfg):
    F = _data(small_disc, torus8, 0.01)
    state = DiscFamilyState.initial(small_disc, Background.flat(torus8), F)
    first, df, dh, before = disc_iteration_step(state, disc_cfg)
    assert before > 0.0
    assert np.allclose(first.f, df)
    assert np.allclose(first.h, dh)
    assert np.array_equal(state.f, np.zeros_like(state.f))
    _, _, _, after = disc_iteration_step(first, disc_cfg)
    assert after < before
