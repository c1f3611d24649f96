import numpy as np
import pytest

from src.fields.corpus import builtin_profile
from src.fields.grids import TorusGrid
from src.oracle.geodesic import GeodesicPath, compare_paths, geodesic_residual
from src.oracle.invariant import invariant_geodesic_oracle, trig_eval
from src.utils.errors import ConfigError, DegenerateError, OracleError


def _t(steps):
    return np.linspace(0.0, 1.0, steps + 1)


def test_constant_path_is_a_geodesic(torus8):
    phi = builtin_profile("random", torus8, 0.05, seed=3)
    path = GeodesicPath.linear(phi, phi, _t(16), torus8)
    assert geodesic_residual(path) < 1e-12


def test_path_validation(torus8):
    with pytest.raises(ValueError):
        GeodesicPath(np.zeros((5,) + torus8.shape), _t(5), torus8)
    short = GeodesicPath.linear(np.zeros(torus8.shape), np.zeros(torus8.shape), _t(4), torus8)
    with pytest.raises(ValueError):
        geodesic_residual(short)


def test_degenerate_slice_is_reported(torus8):
    x, _ = torus8.coordinates()
    phi = -10.0 * np.cos(x)
    with pytest.raises(DegenerateError):
        geodesic_residual(GeodesicPath.linear(phi, phi, _t(8), torus8))


def test_trig_interpolant_derivatives():
    x = 2.0 * np.pi * np.arange(16) / 16
    points = np.array([0.1, 1.3, 4.0])
    assert np.allclose(trig_eval(np.cos(2.0 * x), points), np.cos(2.0 * points))
    assert np.allclose(trig_eval(np.cos(2.0 * x), points, 2), -4.0 * np.cos(2.0 * points))


def test_oracle_solves_the_geodesic_equation(torus16):
    phi0 = np.zeros(torus16.shape)
    phi1 = builtin_profile("cos_x", torus16, 0.05)
    path = invariant_geodesic_oracle(phi0, phi1, 128, torus16)
    assert np.array_equal(path.phi0, phi0)
    assert np.allclose(path.phi1, phi1)
    assert path.diagnostics["disagreement"] <= 10.0 * path.diagnostics["estimate"]
    assert geodesic_residual(path) < 1e-5
    assert np.ptp(path.values, axis=-1).max() == 0.0


def test_zero_endpoints_give_the_zero_path(torus8):
    zero = np.zeros(torus8.shape)
    path = invariant_geodesic_oracle(zero, zero, 16, torus8)
    assert np.max(np.abs(path.values)) < 1e-12


def test_oracle_approaches_the_linear_path_quadratically(torus16):
    deviations = []
    for amplitude in (0.05, 0.025):
        phi1 = builtin_profile("cos_x", torus16, amplitude)
        path = invariant_geodesic_oracle(np.zeros(torus16.shape), phi1, 64, torus16)
        linear = GeodesicPath.linear(path.phi0, path.phi1, path.t_values, torus16)
        deviations.append(np.max(np.abs(path.values - linear.values)))
    assert 3.0 <= deviations[0] / deviations[1] <= 5.0


def test_oracle_rejects_unsupported_endpoints(torus8):
    x, y = torus8.coordinates()
    zero = np.zeros(torus8.shape)
    with pytest.raises(ConfigError):
        invariant_geodesic_oracle(zero, -10.0 * np.cos(x), 16, torus8)
    with pytest.raises(ConfigError):
        invariant_geodesic_oracle(zero, 0.05 * np.cos(y), 16, torus8)


def test_compare_paths(torus8):
    x, _ = torus8.coordinates()
    phi1 = 0.05 * np.cos(x)
    a = GeodesicPath.linear(np.zeros(torus8.shape), phi1, _t(8), torus8)
    b = GeodesicPath.linear(np.zeros(torus8.shape), phi1, _t(16), torus8)
    result = compare_paths(a, b)
    assert result["sup_diff"] < 1e-12
    assert set(result["norm_diffs"]) == {0.0, 1.0, 2.0}
    c = GeodesicPath.linear(np.zeros(torus8.shape), 2.0 * phi1, _t(8), torus8)
    with pytest.raises(OracleError):
        compare_paths(a, c)
    assert compare_paths(a, c, check_endpoints=False)["sup_diff"] > 0.0
    other = TorusGrid(16)
    d = GeodesicPath.linear(np.zeros(other.shape), np.zeros(other.shape), _t(8), other)
    with pytest.raises(ValueError):
        compare_paths(a, d)
