import numpy as np
import pytest

from src.fields.domains import WindowGrid
from src.fields.field import GridField
from src.smoothing.operators import (
    SmoothingOperator,
    eta,
    low_pass,
    measure_smoothing_constants,
    smooth,
    smooth_vanishing,
    smoothstep,
)
from src.utils.errors import ConfigError


def test_smoothstep_endpoints_and_monotonicity():
    x = np.linspace(0.0, 1.0, 101)
    s = smoothstep(x)
    assert s[0] == 0.0
    assert s[-1] == pytest.approx(1.0)
    assert np.all(np.diff(s) >= -1e-15)


def test_cutoff_profiles():
    assert np.allclose(low_pass(np.array([0.0, 0.25, 0.5])), 1.0)
    assert np.allclose(low_pass(np.array([1.0, 2.0])), 0.0)
    assert np.allclose(eta(np.array([0.0, 0.1, -1.0 / 6.0])), 1.0)
    assert np.allclose(eta(np.array([1.0 / 3.0, 0.5, -1.0])), 0.0)


def test_low_modes_pass_unchanged(torus16):
    x, y = torus16.coordinates()
    field = GridField.on_torus(np.cos(x) + np.sin(y), torus16)
    assert np.allclose(smooth(field, 4.0).values, field.values, atol=1e-13)


def test_high_modes_are_removed(torus16):
    x, _ = torus16.coordinates()
    field = GridField.on_torus(np.cos(6.0 * x), torus16)
    assert smooth(field, 4.0).sup() < 1e-13


def test_scale_below_one_is_rejected():
    with pytest.raises(ValueError):
        SmoothingOperator(0.5)


def _window_field(torus, profile):
    window = WindowGrid(2.0, 4)
    theta, t = window.theta_values, window.t_values
    x, _ = torus.coordinates()
    values = profile(theta[:, None], t[None, :])[:, :, None, None] * (1.0 + np.cos(x))[None, None]
    return GridField.on_window(values, window, torus)


def test_vanishing_smoother_keeps_zero_traces(torus8):
    field = _window_field(torus8, lambda theta, t: np.exp(-theta ** 2) * np.sin(np.pi * t) * (1.0 + t))
    out = np.asarray(smooth_vanishing(field, 3.0).values)
    assert np.max(np.abs(out[:, 0])) == 0.0
    assert np.max(np.abs(out[:, -1])) == 0.0
    assert np.max(np.abs(out)) > 0.0


def test_vanishing_smoother_rejects_nonzero_traces(torus8):
    field = _window_field(torus8, lambda theta, t: np.ones_like(theta * t))
    with pytest.raises(ConfigError):
        smooth_vanishing(field, 3.0)


def test_measured_constants_cover_every_pair(corpus):
    pairs = ((2.0, 1.0), (1.0, 2.0))
    constants = measure_smoothing_constants(corpus, scales=(2, 4), pairs=pairs)
    assert set(constants.blow_up) == {(2.0, 1.0)}
    assert set(constants.convergence) == {(1.0, 2.0)}
    assert all(np.isfinite(v) and v > 0.0 for v in constants.blow_up.values())
    rows = constants.as_rows()
    assert {row["bound"] for row in rows} == {"blow_up", "convergence"}
