import numpy as np
import pytest

from src.elliptic.holomorphic import harmonic_conjugate, holomorphic_operator
from src.elliptic.poisson import PoissonProblem, parameter_direction_constant, poisson_family_solve
from src.elliptic.riemann_hilbert import RHProblem, rh_family_solve, rh_family_solve_fourier
from src.elliptic.strip_harmonic import barrier, barrier_delta, strip_harmonic
from src.fields.domains import DiscGrid, circle_curve
from src.fields.field import GridField
from src.utils.errors import ConfigError, DegenerateError, SolverError


def _harmonic(points):
    points = np.asarray(points)
    return (points ** 2).real + 0.5 * points.imag + 1.0


def _poisson_error(domain, torus):
    x, _ = torus.coordinates()
    profile = 1.0 + 0.2 * np.cos(x)
    exact = _harmonic(domain.interior_nodes)[:, None, None] * profile
    bc = _harmonic(domain.mesh_boundary_nodes)[:, None, None] * profile
    solution = poisson_family_solve(PoissonProblem(domain, np.zeros_like(exact), bc), torus)
    return float(np.max(np.abs(np.asarray(solution.values)[: exact.shape[0]] - exact)))


def test_disc_poisson_converges_at_second_order(torus8):
    coarse = _poisson_error(DiscGrid(8, 32), torus8)
    fine = _poisson_error(DiscGrid(16, 64), torus8)
    assert fine < coarse / 3.0


def test_stadium_poisson_is_accurate(torus8, strip_geometry):
    assert _poisson_error(strip_geometry.grid, torus8) < 5e-2


def test_poisson_solution_keeps_boundary_values(disc, torus8):
    n_int, n_mb = disc.interior_nodes.size, disc.mesh_boundary_nodes.size
    bc = np.ones((n_mb,) + torus8.shape)
    solution = poisson_family_solve(PoissonProblem(disc, np.zeros((n_int,) + torus8.shape), bc), torus8)
    values = np.asarray(solution.values)
    assert np.allclose(values[n_int:], 1.0)
    assert np.allclose(values[:n_int], 1.0, atol=1e-10)


def test_poisson_problem_shape_checks(disc, torus8):
    n_int, n_mb = disc.interior_nodes.size, disc.mesh_boundary_nodes.size
    with pytest.raises(ValueError):
        PoissonProblem(disc, np.zeros((n_int + 1,) + torus8.shape), np.zeros((n_mb,) + torus8.shape))
    with pytest.raises(ValueError):
        PoissonProblem(disc, np.zeros((n_int, 4, 4)), np.zeros((n_mb,) + torus8.shape))


def test_parameter_direction_constant_obeys_maximum_principle(disc, torus8):
    x, y = torus8.coordinates()
    profile = np.cos(x) + 0.5 * np.sin(y)
    bc = _harmonic(disc.mesh_boundary_nodes)[:, None, None] * profile
    problem = PoissonProblem(disc, np.zeros((disc.interior_nodes.size,) + torus8.shape), bc)
    solution = poisson_family_solve(problem, torus8)
    assert parameter_direction_constant(problem, solution, torus8, 1.0) <= 1.0 + 1e-6


@pytest.mark.parametrize("curve_kind", ["disc", "circle"])
def test_harmonic_conjugate_on_the_circle(curve_kind):
    domain = DiscGrid(6, 64)
    if curve_kind == "circle":
        curve = circle_curve(0.0, 1.0, 64)
        op = holomorphic_operator(curve)
        beta = np.angle(curve.nodes)
        v = op.conjugate(np.cos(2.0 * beta), "mean")
    else:
        beta = np.angle(domain.curve.nodes)
        v = harmonic_conjugate(GridField.on_boundary(np.cos(2.0 * beta), domain)).values
    assert np.allclose(v, np.sin(2.0 * beta), atol=1e-8)


def _rh_exact(domain):
    zeta = domain.curve.nodes
    return 0.3 * (zeta + 1j) + 0.1 * (zeta ** 2 + 1.0), 0.1 + 0.2 * zeta + 0.05 * zeta ** 3


def test_riemann_hilbert_recovers_constructed_pair():
    domain = DiscGrid(6, 64)
    f, h = _rh_exact(domain)
    A, S = 0.5, 0.1 + 0.05j
    problem = RHProblem(A, S, A * np.conj(f) + S * f - h, domain)
    solution = rh_family_solve(problem)
    assert np.max(np.abs(solution.f - f)) < 1e-10
    assert np.max(np.abs(solution.h - h)) < 1e-10
    assert solution.boundary_residual < 1e-12
    assert solution.holomorphy_defect < 1e-10
    f_fourier, h_fourier = rh_family_solve_fourier(problem)
    assert np.allclose(f_fourier, f, atol=1e-10)
    assert np.allclose(h_fourier, h, atol=1e-10)


def test_riemann_hilbert_normalizes_at_basepoint(torus8):
    domain = DiscGrid(6, 32)
    rng = np.random.default_rng(1)
    b = rng.standard_normal((32,) + torus8.shape) * 0.01
    solution = rh_family_solve(RHProblem(0.5 * np.ones(torus8.shape), np.zeros(torus8.shape), b, domain))
    assert np.max(np.abs(solution.f[domain.curve.basepoint_index])) == 0.0


def test_riemann_hilbert_rejects_singular_coefficient():
    domain = DiscGrid(6, 32)
    with pytest.raises(DegenerateError):
        rh_family_solve(RHProblem(0.0, 0.0, np.zeros(32, dtype=complex), domain))


def test_fourier_solver_needs_the_disc(strip_geometry):
    grid = strip_geometry.grid
    with pytest.raises(ValueError):
        rh_family_solve_fourier(RHProblem(0.5, 0.0, np.zeros(grid.curve.size, dtype=complex), grid))


def test_barrier_value_at_theta_six():
    assert barrier_delta(6.0) == pytest.approx(3.74e-3, rel=1e-2)
    assert barrier(np.array([0.0]), np.array([6.0]), 6.0)[0] >= 1.0


def test_strip_harmonic_decays_through_the_strip(torus8, strip_geometry):
    window = strip_geometry.window
    x, _ = torus8.coordinates()
    values = np.sin(np.pi * window.t_values)[None, :, None, None] * (1.0 + 0.5 * np.cos(x))[None, None]
    values = np.broadcast_to(values, strip_geometry.window_shape + torus8.shape)
    H, certificate = strip_harmonic(strip_geometry.window_field(values, torus8), strip_geometry)
    assert certificate.holds
    assert H.shape == values.shape


def test_strip_harmonic_needs_vanishing_data(torus8, strip_geometry):
    values = np.ones(strip_geometry.window_shape + torus8.shape)
    with pytest.raises(ConfigError):
        strip_harmonic(strip_geometry.window_field(values, torus8), strip_geometry)


def test_strip_harmonic_enforces_the_barrier_bound(torus8, strip_geometry):
    x, _ = torus8.coordinates()
    t = strip_geometry.window.t_values
    values = np.sin(np.pi * t)[None, :, None, None] * np.cos(x)[None, None]
    field = strip_geometry.window_field(np.broadcast_to(values, strip_geometry.window_shape + torus8.shape), torus8)
    _, certificate = strip_harmonic(field, strip_geometry)
    assert 0.0 < certificate.measured_ratio <= certificate.delta
    with pytest.raises(SolverError, match="barrier"):
        strip_harmonic(field, strip_geometry, tolerance=-certificate.delta)
