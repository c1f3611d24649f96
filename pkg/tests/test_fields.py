import numpy as np
import pytest

from src.fields import torus as torus_ops
from src.fields.compose import GridMap, compose
from src.fields.corpus import builtin_profile, random_smooth_field
from src.fields.domains import DiscGrid
from src.fields.field import GridField, trace
from src.fields.grids import HolderIndex, TorusGrid
from src.fields.holder import holder_norm, interpolation_check, norm
from src.fields.snapshot import read_snapshot, write_snapshot
from src.utils.errors import ConfigError, ResolutionError, SnapshotError


def test_torus_grid_needs_even_resolution():
    with pytest.raises(ResolutionError):
        TorusGrid(7)
    with pytest.raises(ResolutionError):
        TorusGrid(2)


def test_holder_index_splits_integer_and_fractional_parts():
    r = HolderIndex.from_real(4.0 + 1.0 / 3.0)
    assert r.m == 4
    assert r.alpha == pytest.approx(1.0 / 3.0)
    assert HolderIndex.from_real(3.0) == HolderIndex(3, 0.0)
    with pytest.raises(ValueError):
        HolderIndex(1, 1.0)


def test_norm_of_constant_is_its_value(torus8):
    field = GridField.on_torus(3.0 * np.ones(torus8.shape), torus8)
    assert norm(field, 2.0) == pytest.approx(3.0)
    assert norm(field, 1.5) == pytest.approx(3.0)


def test_norm_grows_with_index(torus16):
    x, _ = torus16.coordinates()
    field = GridField.on_torus(np.cos(2.0 * x), torus16)
    assert norm(field, 0.0) == pytest.approx(1.0)
    values = [norm(field, r) for r in (0.0, 1.0, 2.0, 2.5)]
    assert values == sorted(values)


def test_seminorm_reports_sampled_pairs(torus8):
    x, _ = torus8.coordinates()
    report = holder_norm(GridField.on_torus(np.sin(x), torus8), HolderIndex(0, 0.5))
    assert report.seminorm > 0.0
    assert report.seminorm_pairs_sampled > 0
    assert report.sampling == "full"


def test_high_order_on_short_axis_is_rejected():
    grid = TorusGrid(4)
    field = GridField.on_torus(np.ones(grid.shape), grid)
    with pytest.raises(ResolutionError):
        norm(field, 3.0)


def test_interpolation_check_zero_field(torus8):
    field = GridField.on_torus(np.zeros(torus8.shape), torus8)
    assert interpolation_check(field, HolderIndex(0), HolderIndex(1), HolderIndex(2)) == 1.0


def test_field_rejects_non_finite_values(torus8):
    values = np.zeros(torus8.shape)
    values[0, 0] = np.nan
    with pytest.raises(ValueError):
        GridField.on_torus(values, torus8)


def test_trace_unknown_selector(torus8):
    field = GridField.on_torus(np.zeros(torus8.shape), torus8)
    with pytest.raises(ConfigError):
        trace(field, "t=0")


def test_quarter_laplacian_of_cosine(torus16):
    x, y = torus16.coordinates()
    u = np.cos(x) + np.sin(2.0 * y)
    expected = -(np.cos(x) + 4.0 * np.sin(2.0 * y)) / 4.0
    assert np.allclose(torus_ops.d_zzbar(u, torus16), expected, atol=1e-12)


def test_d_z_of_plane_wave(torus16):
    x, _ = torus16.coordinates()
    assert np.allclose(torus_ops.d_z(np.sin(x), torus16), 0.5 * np.cos(x), atol=1e-12)


def test_antiderivative_inverts_d_z(torus16):
    x, y = torus16.coordinates()
    p = np.cos(x) + 0.3 * np.sin(x + 2.0 * y)
    g = torus_ops.d_z(p, torus16)
    q, mean = torus_ops.antiderivative_z(g, torus16)
    assert np.allclose(torus_ops.d_z(q, torus16), g, atol=1e-10)
    assert np.max(np.abs(mean)) < 1e-12


def test_phase_shift_by_a_period_is_identity(torus16):
    u = np.asarray(random_smooth_field(torus16, seed=3).values)
    shifted = torus_ops.phase_shift(u, torus16, 2.0 * np.pi + 2.0j * np.pi)
    assert np.allclose(shifted, u, atol=1e-10)
    there = torus_ops.phase_shift(u, torus16, 0.37 - 0.2j)
    back = torus_ops.phase_shift(there, torus16, -0.37 + 0.2j)
    assert np.allclose(back, u, atol=1e-10)


def test_identity_composition(torus8):
    field = random_smooth_field(torus8, seed=1)
    assert np.array_equal(compose(field, GridMap.identity()).values, field.values)


def test_builtin_profiles(torus8):
    x, _ = torus8.coordinates()
    assert np.allclose(builtin_profile("cos_x", torus8, 0.05), 0.05 * np.cos(x))
    assert np.max(np.abs(builtin_profile("random", torus8, 0.2, seed=4))) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        builtin_profile("sawtooth", torus8)


def test_disc_grid_basepoint_and_validation():
    domain = DiscGrid(6, 16)
    assert domain.basepoint == pytest.approx(-1j)
    assert domain.mesh_boundary_nodes.size == 16
    with pytest.raises(ResolutionError):
        DiscGrid(6, 18)


def test_snapshot_preserves_values(tmp_path, torus8):
    values = np.asarray(random_smooth_field(torus8, seed=2).values) * (1.0 + 0.5j)
    path = write_snapshot(tmp_path / "u.gfld", values, "torus")
    kind, loaded = read_snapshot(path)
    assert kind == "torus"
    assert np.array_equal(loaded, values)


def test_truncated_snapshot_is_rejected(tmp_path, torus8):
    path = write_snapshot(tmp_path / "u.gfld", np.ones(torus8.shape), "torus")
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(SnapshotError):
        read_snapshot(path)
    with pytest.raises(SnapshotError):
        read_snapshot(tmp_path / "missing.gfld")
