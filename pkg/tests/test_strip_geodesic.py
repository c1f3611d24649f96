import numpy as np
import pytest

from src.fields.domains import circle_curve
from src.fields.grids import TorusGrid
from src.schemas.config import load_config
from src.schemas.report import RunReport
from src.steps.verify_steps import StripBattery
from src.strip_geodesic.geometry import build_strip, s_extend
from src.strip_geodesic.iteration import (
    StripProblem,
    StripTriple,
    extract_path,
    iter_P,
    solve_strip,
    theta_independence,
)
from src.strip_geodesic.riemann_map import RiemannMap, riemann_map
from src.utils.errors import ConfigError, SolverError


def test_strip_needs_theta_above_four():
    with pytest.raises(ConfigError):
        build_strip(4.0)


def test_geometry_caps_are_translates_of_the_master(strip_geometry):
    assert strip_geometry.shift == pytest.approx(5.0)
    assert strip_geometry.cap_translate_defect() <= 1e-13
    assert strip_geometry.containment_violations() == 0
    manifest = strip_geometry.manifest()
    assert manifest["version"] == "GEOM v1"
    assert manifest["boundary_points"] == strip_geometry.grid.curve.size


def test_window_shape(strip_geometry):
    assert strip_geometry.window_shape == (17, 5)


def test_cap_extension_vanishes_for_zero_window(strip_geometry, torus8):
    zero = np.zeros(strip_geometry.window_shape + torus8.shape)
    extended = s_extend(strip_geometry.window_field(zero, torus8), strip_geometry)
    assert extended.kind == "boundary"
    assert extended.sup() == 0.0


def test_cap_extension_reproduces_theta_independent_data(strip_geometry):
    t = strip_geometry.window.t_values
    profile = np.sin(np.pi * t)
    values = np.broadcast_to(profile[None, :, None, None], strip_geometry.window_shape + (1, 1))
    nodes = strip_geometry.grid.curve.nodes
    caps = np.abs(nodes.imag) > strip_geometry.Theta + 1e-12
    extended = strip_geometry.s_extend_curve(values)[:, 0, 0]
    expected = np.interp(nodes.real, t, profile)
    assert np.max(np.abs(extended[caps] - expected[caps])) < 1e-14
    assert not np.any(extended[~caps])
    assert np.max(np.abs(extended)) == np.max(np.abs(values)) == 1.0


def test_cap_extension_copies_window_nodes(strip_geometry, rng):
    n = strip_geometry.grid.curve.size
    h = strip_geometry.window.spacing
    values = rng.standard_normal(strip_geometry.window_shape)
    extended = strip_geometry.s_extend_curve(values)
    # the apexes (1/2, +-(Theta + 1/2)) translate onto window nodes
    for apex, theta in ((n // 4, -1.5), (3 * n // 4, 1.5)):
        node = values[int(round((theta + 2.0) / h)), int(round(0.5 / h))]
        assert extended[apex] == node


def test_cap_extension_never_overshoots(strip_geometry, rng):
    values = np.zeros(strip_geometry.window_shape + (2, 2))
    spikes = rng.integers(0, values.size, 12)
    values.flat[spikes] = rng.uniform(-1.0, 1.0, 12) * 1e3
    extended = strip_geometry.s_extend_curve(values)
    bound = np.max(np.abs(values)) * (1.0 + 4.0 * np.finfo(float).eps)
    assert np.max(np.abs(extended)) <= bound
    assert np.max(extended) <= np.max(values) * (1.0 + 4.0 * np.finfo(float).eps)


def test_theta_independence():
    flat = np.ones((7, 3, 2, 2))
    assert theta_independence(flat, 0.25) == 0.0
    theta = 0.25 * np.arange(-3, 4)
    assert theta_independence(2.0 * theta[:, None] * np.ones((7, 3)), 0.25) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        theta_independence(np.ones((4, 3)), 0.25)


def test_extract_path_reads_the_middle_row(strip_geometry, torus8):
    values = np.zeros(strip_geometry.window_shape + torus8.shape)
    row = strip_geometry.window_shape[0] // 2
    values[row] = 1.0
    path = extract_path(values, strip_geometry, torus8)
    assert np.array_equal(path.values, np.ones((strip_geometry.window_shape[1],) + torus8.shape))


def test_triple_shapes_are_checked(strip_geometry, torus8):
    with pytest.raises(ConfigError):
        StripTriple(np.zeros((4, 4)), np.zeros(torus8.shape), np.zeros(strip_geometry.window_shape + torus8.shape),
                    torus8)
    with pytest.raises(ConfigError):
        StripTriple(np.zeros(torus8.shape), np.zeros(torus8.shape), np.zeros((3, 3, 4, 4)), torus8)


def test_triple_arithmetic(strip_geometry, torus8):
    x, _ = torus8.coordinates()
    a = StripTriple.endpoints(strip_geometry, np.cos(x), np.zeros(torus8.shape))
    b = 2.0 * a - a
    assert b.sup() == pytest.approx(1.0)
    assert b.key() == a.key()
    assert (a - a).sup() == 0.0


def test_zero_endpoints_are_a_fixed_point(strip_geometry, torus8):
    problem = StripProblem(strip_geometry, torus8)
    zero = StripTriple.zeros(strip_geometry, torus8)
    assert np.max(np.abs(problem.B(zero))) < 1e-12
    assert problem.P(zero).sup() < 1e-12
    assert problem.fixed_point_certificate(zero) < 1e-12


@pytest.mark.slow
def test_neumann_inverse_round_trip(strip_geometry, torus8, rng):
    problem = StripProblem(strip_geometry, torus8)
    base = StripTriple.zeros(strip_geometry, torus8)
    t = strip_geometry.window.t_values
    phi = rng.standard_normal(strip_geometry.window_shape + torus8.shape) * 1e-3
    phi *= np.sin(np.pi * t)[None, :, None, None]
    phi[:, 0] = phi[:, -1] = 0.0
    rhs = StripTriple(np.zeros(torus8.shape), np.zeros(torus8.shape), phi, torus8)
    solution, report = problem.dP_inverse(base, rhs)
    assert report.factor < 1.0
    back = problem.dP_apply(base, solution)
    assert np.max(np.abs(back.phi - rhs.phi)) <= 1e-8


def test_riemann_map_of_a_circle():
    curve = circle_curve(0.5, 0.4, 64, start_angle=-np.pi / 2)
    T = riemann_map(curve, center=0.5)
    assert T.boundary_values[curve.basepoint_index] == pytest.approx(-1j)
    assert abs(T(np.array([0.5]))[0]) < 1e-12
    assert abs(T(np.array([0.7]))[0]) == pytest.approx(0.5, abs=1e-8)
    assert np.allclose(np.abs(T.boundary_values), 1.0, atol=1e-8)
    assert T.is_orientation_preserving()
    points = np.array([0.6 + 0.1j, 0.45 - 0.2j])
    assert np.allclose(T.inverse(T(points), guess=np.full(2, 0.5 + 0.0j)), points, atol=1e-10)


def test_riemann_map_reports_cauchy_riemann_failure():
    curve = circle_curve(0.5, 0.4, 16, start_angle=-np.pi / 2)
    T = riemann_map(curve, tol=np.inf, center=0.6)
    assert T.cr_residual > 0.0
    with pytest.raises(SolverError, match="Cauchy-Riemann"):
        riemann_map(curve, tol=0.5 * T.cr_residual, center=0.6)


def test_reversed_boundary_correspondence_is_not_orientation_preserving():
    curve = circle_curve(0.5, 0.4, 16, start_angle=-np.pi / 2)
    T = riemann_map(curve)
    reversed_map = RiemannMap(curve, T.center, T.alpha, T.G, np.conj(T.boundary_values), T.operator)
    assert not reversed_map.is_orientation_preserving()
    assert np.count_nonzero(reversed_map.angle_steps() < 0.0) == curve.size - 1


def _check_strip_map(geom, T):
    interior = geom.grid.interior_nodes
    n = T.curve.size
    assert T.is_orientation_preserving()
    assert np.all(T.angle_steps() > 0.0)
    assert np.allclose(np.abs(T.boundary_values), 1.0, atol=1e-12)
    assert T.boundary_values[0] == -1j
    assert T.boundary_values[n // 4] == 1.0
    assert T.boundary_values[3 * n // 4] == -1.0
    assert T.containment < 0.0
    assert np.max(np.abs(T(interior))) < 1.0
    assert abs(T(np.array([0.5]))[0]) < 1e-12


def test_riemann_map_of_the_strip(strip_geometry):
    T = riemann_map(strip_geometry, tol=1e-6)
    assert T.cr_residual <= 1e-6
    _check_strip_map(strip_geometry, T)
    points = np.array([0.3 + 2.0j, 0.7 - 4.0j, 0.5 + 5.5j])
    assert np.allclose(T(1.0 - points), -T(points), atol=1e-6)
    assert np.allclose(T(np.conj(points)), -np.conj(T(points)), atol=1e-6)
    inner = np.array([0.3 + 1.0j, 0.7 - 2.0j, 0.5 + 0.5j])
    assert np.allclose(T.inverse(T(inner)), inner, atol=1e-7)


def test_riemann_map_keeps_boundary_order_at_default_resolution():
    geom = build_strip(6.0, t_points=8, boundary_points=512)
    T = riemann_map(geom)
    _check_strip_map(geom, T)


def test_torus_of_endpoint_triple(strip_geometry):
    grid = TorusGrid(8)
    triple = StripTriple.endpoints(strip_geometry, np.zeros(grid.shape), np.zeros(grid.shape))
    assert triple.torus == grid
    assert triple.phi.shape == strip_geometry.window_shape + grid.shape


def test_module_level_helpers_on_zero_endpoints(strip_geometry, torus8):
    zero = StripTriple.zeros(strip_geometry, torus8)
    solution = solve_strip(zero, strip_geometry)
    assert solution.window_values.shape == strip_geometry.window_shape + torus8.shape
    assert np.max(np.abs(solution.window_values)) < 1e-12
    image = iter_P(zero, strip_geometry)
    assert np.array_equal(image.phi0, zero.phi0)
    assert image.sup() < 1e-12


def _strip_verify_context(tmp_path):
    config = load_config({"mode": "verify-suite", "only": "strip_geodesic", "output_dir": str(tmp_path / "run"),
                          "resolutions": [8], "iteration": {"t_points": 4, "boundary_points": 256}})
    return {"config": config, "report": RunReport(mode="verify-suite", config={})}


def test_strip_battery_reports_riemann_map_defects(tmp_path):
    context = _strip_verify_context(tmp_path)
    criteria = StripBattery().conformal(context)
    assert all(c.passed for c in criteria), [c.name for c in criteria if not c.passed]
    residuals = context["report"].residuals
    assert residuals["riemann_cr_defect"] <= 1e-6
    assert residuals["riemann_containment"] < 0.0
    assert residuals["riemann_min_angle_step"] > 0.0
    assert residuals["cap_translate_defect"] <= 1e-13


def test_strip_battery_applies_its_cr_tolerance(tmp_path):
    context = _strip_verify_context(tmp_path)
    with pytest.raises(SolverError, match="Cauchy-Riemann"):
        StripBattery({"cr_tol": 1e-300}).conformal(context)
