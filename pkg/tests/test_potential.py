import numpy as np
import pytest

from src.disc_family.state import Background
from src.fields.corpus import random_smooth_field
from src.fields.domains import DiscGrid
from src.potential.assembly import boundary_margin, comparison_constant, kernel_identity_defect, solve_potential
from src.potential.linearization import linearized_comparison
from src.steps.mode_steps import disc_boundary_data
from src.utils.errors import DegenerateError


def _data(domain, torus, seed, amplitude):
    phi0 = np.asarray(random_smooth_field(torus, seed, amplitude=amplitude).values)
    phi1 = np.asarray(random_smooth_field(torus, seed + 1, amplitude=amplitude).values)
    return (disc_boundary_data(phi0, phi1, domain.curve.nodes),
            disc_boundary_data(phi0, phi1, domain.mesh_boundary_nodes))


def test_zero_data_give_zero_potential(disc, torus8, disc_cfg):
    F = np.zeros((disc.curve.size,) + torus8.shape)
    bundle = solve_potential(F, Background.flat(torus8), disc, disc_cfg)
    assert bundle.Phi.sup() < 1e-14
    assert bundle.residuals["hcma"] < 1e-14
    assert bundle.shrink == 1.0


def test_assembled_potential_residuals(disc, torus8, disc_cfg):
    F, F_mesh = _data(disc, torus8, 11, 0.02)
    bundle = solve_potential(F, Background.flat(torus8), disc, disc_cfg, basepoint=(2, 3), F_mesh=F_mesh)
    residuals = bundle.residuals
    assert residuals["boundary"] < 1e-6
    assert residuals["exactness"] < 1e-6
    assert residuals["positivity_margin"] > 0.0
    assert residuals["hcma"] < 1e-2
    assert np.max(np.abs(np.asarray(bundle.P.values)[:, 2, 3])) < 1e-12
    assert set(bundle.summary()) >= {"basepoint", "shrink", "hcma", "boundary", "q_consistency", "exactness"}


def test_kernel_identity_needs_the_family(disc, torus8, disc_cfg):
    F, F_mesh = _data(disc, torus8, 11, 0.02)
    bundle = solve_potential(F, Background.flat(torus8), disc, disc_cfg, F_mesh=F_mesh)
    assert np.isfinite(kernel_identity_defect(bundle))
    bundle.state = None
    with pytest.raises(ValueError):
        kernel_identity_defect(bundle)


def test_comparison_follows_the_maximum_principle(disc, torus8, disc_cfg):
    bg = Background.flat(torus8)
    F, F_mesh = _data(disc, torus8, 21, 0.02)
    G, G_mesh = _data(disc, torus8, 26, 0.004)
    first = solve_potential(F, bg, disc, disc_cfg, F_mesh=F_mesh)
    second = solve_potential(F + G, bg, disc, disc_cfg, F_mesh=F_mesh + G_mesh)
    gap = np.max(np.abs(np.asarray(first.Phi.values) - np.asarray(second.Phi.values)))
    assert gap <= max(np.max(np.abs(G)), np.max(np.abs(G_mesh))) + 1e-6
    assert comparison_constant(first, second) > 0.0
    assert comparison_constant(first, first) == 0.0


def test_degenerate_data_are_rejected(disc, torus8):
    x, _ = torus8.coordinates()
    F = np.broadcast_to(-10.0 * np.cos(x), (disc.curve.size,) + torus8.shape)
    bg = Background.flat(torus8)
    assert boundary_margin(F, bg) == pytest.approx(0.5 - 2.5)
    with pytest.raises(DegenerateError):
        solve_potential(F, bg, disc, allow_shrink=False)


def test_linearized_comparison_needs_two_intervals(disc, torus8):
    F = np.zeros((disc.curve.size,) + torus8.shape)
    with pytest.raises(ValueError):
        linearized_comparison(F, F, Background.flat(torus8), disc, n_lambda=1)


@pytest.mark.slow
def test_lambda_integral_matches_the_difference(torus8, disc_cfg):
    domain = DiscGrid(6, 16)
    F0, _ = _data(domain, torus8, 31, 0.02)
    G, _ = _data(domain, torus8, 36, 0.004)
    report = linearized_comparison(F0, F0 + G, Background.flat(torus8), domain, disc_cfg, n_lambda=4, n_jobs=1)
    assert report.quadrature_error <= 1e-2 * report.difference_sup + 1e-9
    assert report.linearization_constant <= 1.0 + 1e-3
    assert len(report.remainder_ratios) == 2
