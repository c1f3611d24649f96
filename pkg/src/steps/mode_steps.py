"""
Steps of the run modes: solve-geodesic, shift-background, disc-solve and schedule.

Every step reads the validated RunConfig and the RunReport from the context
and adds its objects under fixed keys.
"""
import json
import os
from typing import Any, Dict

import numpy as np

from src.disc_family.foliation import foliation_deviation
from src.disc_family.iteration import contraction_history
from src.disc_family.state import Background, IterationConfig
from src.exporters.csv_exporter import CSVExporter
from src.exporters.report_exporter import ReportExporter
from src.exporters.snapshot_exporter import SnapshotExporter
from src.fields.domains import DiscGrid
from src.fields.field import GridField
from src.fields.grids import TorusGrid
from src.fields.holder import norm
from src.fields import torus as torus_ops
from src.nash_moser.indices import choose_indices
from src.nash_moser.schedule import derive_schedule
from src.nash_moser.solver import INDEX_CAP, measure_constants, nash_moser_solve
from src.nash_moser.strip import StripNashMoser
from src.oracle.geodesic import GeodesicPath, compare_paths, geodesic_residual
from src.oracle.invariant import invariant_geodesic_oracle
from src.pipeline_engine import BaseStep, Context
from src.potential.assembly import kernel_identity_defect, solve_potential
from src.strip_geodesic.geometry import build_strip
from src.strip_geodesic.iteration import StripProblem, StripTriple, extract_path, theta_independence
from src.strip_geodesic.riemann_map import riemann_map
from src.utils.config import settings
from src.utils.errors import AcceptanceError, ConfigError
from src.utils.logging import logger


def _output_dir(context: Context) -> str:
    return context["output_dir"]


def _is_x_only(values: np.ndarray) -> bool:
    return bool(np.max(np.ptp(values, axis=-1), initial=0.0) <= 1e-12 * max(1.0, float(np.max(np.abs(values)))))


def disc_boundary_data(phi0: np.ndarray, phi1: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Harmonic interpolation (1 - Im tau)/2 phi0 + (1 + Im tau)/2 phi1 at planar points."""
    s = (1.0 + np.asarray(points).imag)[:, None, None] / 2.0
    return (1.0 - s) * phi0[None] + s * phi1[None]


class PrepareRun(BaseStep):
    """Torus grid, background and endpoints (relative to the background) for the first resolution."""

    def _validate_params(self) -> None:
        pass

    def apply(self, context: Context) -> Context:
        config = context["config"]
        torus = TorusGrid(config.resolution)
        psi0 = np.zeros(torus.shape)
        if config.background is not None:
            psi0 = config.background.values(torus, config.seed)
        background = Background(torus, psi0)
        if background.positivity_margin() <= 0.0:
            raise ConfigError(f"background leaves the Kähler cone: min A = {background.positivity_margin():.3e}")
        endpoints = {}
        for name, spec in (("phi0", config.phi0), ("phi1", config.phi1)):
            values = spec.values(torus, config.seed)
            margin = float(np.min(0.5 + torus_ops.d_zzbar(values, torus)))
            if margin <= 0.0:
                raise ConfigError(f"endpoint {name} is not a Kähler potential: min g = {margin:.3e}")
            endpoints[name] = values - psi0
        threads = config.effective_thread_count()
        if threads:
            settings.THREAD_COUNT = threads
        context.update(torus=torus, background=background, psi0=psi0, **endpoints)
        logger.info(f"Prepared {config.mode} run on a {torus.points_per_dim}-point torus")
        return context


class StripSetup(BaseStep):
    """Strip geometry, its manifest and the validated Riemann map."""

    def _validate_params(self) -> None:
        if self.params["cr_tol"] <= 0:
            raise ValueError("cr_tol must be positive")

    @classmethod
    def get_default_params(cls) -> Dict[str, Any]:
        return {"cr_tol": 1e-6, "riemann_map": True}

    def apply(self, context: Context) -> Context:
        config = context["config"]
        geom = build_strip(config.Theta, config.iteration.t_points, config.iteration.boundary_points)
        SnapshotExporter(_output_dir(context)).export_geometry(geom)
        report = context["report"]
        report.residuals["cap_translate_defect"] = geom.cap_translate_defect()
        if self.params["riemann_map"]:
            T = riemann_map(geom, tol=self.params["cr_tol"])
            report.residuals.update(T.residuals())
            context["riemann_map"] = T
        context["geom"] = geom
        return context


class NashMoserRun(BaseStep):
    """Indices, measured constants, schedule and the Nash-Moser solve of P(f) = h on the strip."""

    def _validate_params(self) -> None:
        pass

    def apply(self, context: Context) -> Context:
        config = context["config"]
        settings_ = config.iteration
        report = context["report"]
        geom, torus = context["geom"], context["torus"]
        cfg = IterationConfig(tol=settings_.disc_tol)
        strip = StripProblem(geom, torus, context["background"], cfg)
        problem = StripNashMoser(strip)
        h = StripTriple(context["phi0"], context["phi1"], np.zeros(geom.window_shape + torus.shape), torus)
        idx = choose_indices(config.k, config.J)
        snapshots = SnapshotExporter(_output_dir(context))

        if h.sup() == 0.0:
            C0 = C = 1.5
        else:
            constants = measure_constants(problem, h, idx)
            C0, C = constants.C0, constants.C
            report.constants.update({f"probe_{k}": v for k, v in sorted(constants.probes.items())})
        h_norm_B = problem.norm(h, idx.B)
        if idx.B > problem.index_cap:
            logger.info(f"Norm indices above {problem.index_cap:.4f} (B = {idx.B:.4f}) are evaluated at the cap")
        schedule = derive_schedule(idx, C0, C, settings_.epsilon, h_norm_B, settings_.max_steps,
                                   strict=settings_.strict_smallness)

        def checkpoint(n: int, f: StripTriple, record: Dict[str, float]) -> None:
            every = settings_.checkpoint_every
            if every and n % every == 0:
                snapshots.export(f.phi, f"checkpoints/f_{n:03d}.gfld", kind="window")

        f, trace = nash_moser_solve(problem, h, schedule, settings_.target, on_step=checkpoint)
        trace_path = CSVExporter(_output_dir(context)).export(
            trace.to_frame() if trace.records else {"n": [], "residual": []}, "nash_moser_trace.csv"
        )
        _write_json(context, "schedule.json", schedule.as_dict())
        report.trace_path = os.path.basename(trace_path)
        report.constants.update({"C0": C0, "C": C, "K": schedule.K, "lambda": schedule.lam, "A": schedule.A,
                                 "zeta": float(idx.zeta), "norm_constant": trace.norm_constant,
                                 "holder_index_cap": problem.index_cap})
        report.residuals.update({"nash_moser_residual": trace.final_residual,
                                 "nash_moser_steps": float(trace.steps),
                                 "nash_moser_violations": float(len(trace.violations))})
        if not trace.converged:
            logger.warning(f"Nash-Moser stopped at residual {trace.final_residual:.3e} above {settings_.target:.1e}")
        context.update(strip=strip, problem=problem, f=f, trace=trace, schedule=schedule)
        return context


class ExtractGeodesic(BaseStep):
    """Phi on the window, its theta-variation, the geodesic along theta = 0 and its residual."""

    def _validate_params(self) -> None:
        pass

    def apply(self, context: Context) -> Context:
        geom, torus, strip, f = context["geom"], context["torus"], context["strip"], context["f"]
        report = context["report"]
        psi0 = context["psi0"]
        Phi = strip.solve(f).window_values
        path = extract_path(Phi, geom, torus)
        report.residuals["theta_variation"] = theta_independence(Phi, geom.window.spacing)
        report.residuals["fixed_point_certificate"] = strip.fixed_point_certificate(f)
        report.residuals["geodesic_residual"] = geodesic_residual(path, psi0)
        absolute = GeodesicPath(path.values + psi0[None], path.t_values, torus)
        snapshots = SnapshotExporter(_output_dir(context))
        report.artifacts.append(os.path.basename(snapshots.export(absolute.values, "geodesic.gfld", kind="path")))
        report.artifacts.append(os.path.basename(snapshots.export(Phi, "Phi_window.gfld", kind="window")))
        row0 = int(np.argmin(np.abs(geom.window.theta_values)))
        profile = [
            {"theta": float(theta), "sup_deviation": float(np.max(np.abs(Phi[a] - Phi[row0])))}
            for a, theta in enumerate(geom.window.theta_values)
        ]
        CSVExporter(_output_dir(context)).export(profile, "theta_profile.csv")
        context.update(Phi=Phi, path=path, absolute_path=absolute)
        return context


class OracleComparison(BaseStep):
    """Cross-check against the invariant oracle when both endpoints depend on x only."""

    def _validate_params(self) -> None:
        pass

    def apply(self, context: Context) -> Context:
        path = context["absolute_path"]
        config = context["config"]
        phi0, phi1 = path.phi0, path.phi1
        if not context["background"].is_flat or not (_is_x_only(phi0) and _is_x_only(phi1)):
            logger.info("Endpoints are not x-only on a flat background; oracle comparison skipped")
            return context
        oracle = invariant_geodesic_oracle(phi0, phi1, config.iteration.oracle_t_steps, path.torus)
        comparison = compare_paths(path, oracle.resampled(path.t_values), tol=1e-8)
        report = context["report"]
        report.residuals["oracle_sup_diff"] = float(comparison["sup_diff"])
        report.residuals["oracle_disagreement"] = oracle.diagnostics["disagreement"]
        report.artifacts.append(os.path.basename(
            SnapshotExporter(_output_dir(context)).export(oracle.values, "oracle_path.gfld", kind="path")
        ))
        context["oracle"] = oracle
        return context


class DiscSolve(BaseStep):
    """Disc family, foliation and potential on the unit disc for the interpolated endpoint data."""

    def _validate_params(self) -> None:
        if self.params["radial_points"] < 4 or self.params["angular_points"] < 16:
            raise ValueError("disc grid too coarse")

    @classmethod
    def get_default_params(cls) -> Dict[str, Any]:
        return {"radial_points": 16, "angular_points": 64}

    def apply(self, context: Context) -> Context:
        config = context["config"]
        report = context["report"]
        domain = DiscGrid(self.params["radial_points"], self.params["angular_points"])
        F = disc_boundary_data(context["phi0"], context["phi1"], domain.curve.nodes)
        F_mesh = disc_boundary_data(context["phi0"], context["phi1"], domain.mesh_boundary_nodes)
        cfg = IterationConfig(tol=config.iteration.disc_tol)
        bundle = solve_potential(F, context["background"], domain, cfg, F_mesh=F_mesh)
        report.residuals.update({f"disc_{k}": float(v) for k, v in bundle.residuals.items()})
        report.residuals["kernel_identity"] = kernel_identity_defect(bundle)
        report.residuals["foliation_deviation"] = foliation_deviation(bundle.foliation)
        report.constants["shrink"] = bundle.shrink
        history = [{k: v for k, v in rec.items() if isinstance(v, (int, float))} for rec in bundle.state.history]
        trace_path = CSVExporter(_output_dir(context)).export(history or {"step": []}, "disc_trace.csv")
        report.trace_path = os.path.basename(trace_path)
        ratios = contraction_history(bundle.state)
        report.residuals["max_contraction"] = max(ratios, default=0.0)
        report.artifacts.append(os.path.basename(
            SnapshotExporter(_output_dir(context)).export(bundle.Phi, "Phi_disc.gfld")
        ))
        context["bundle"] = bundle
        return context


class ScheduleOnly(BaseStep):
    """Index set and schedule for (k, J) with given or unit constants; nothing is solved."""

    def _validate_params(self) -> None:
        if self.params["C0"] <= 1.0 or self.params["C"] < 1.0:
            raise ValueError("schedule needs C0 > 1 and C >= 1")

    @classmethod
    def get_default_params(cls) -> Dict[str, Any]:
        return {"C0": 1.5, "C": 1.5}

    def apply(self, context: Context) -> Context:
        config = context["config"]
        report = context["report"]
        idx = choose_indices(config.k, config.J)
        torus = context["torus"]
        h_norm_B = max(norm(GridField.on_torus(context[name], torus), min(idx.B, INDEX_CAP)) for name in ("phi0", "phi1"))
        schedule = derive_schedule(idx, self.params["C0"], self.params["C"], config.iteration.epsilon, h_norm_B,
                                   config.iteration.max_steps, strict=config.iteration.strict_smallness)
        payload = schedule.as_dict()
        _write_json(context, "schedule.json", payload)
        report.constants.update({"zeta": float(idx.zeta), "r": idx.r, "b": idx.b, "K": schedule.K,
                                 "lambda": schedule.lam, "A": schedule.A, "holder_index_cap": INDEX_CAP})
        context["schedule"] = schedule
        context["stdout"] = json.dumps({"indices": idx.as_dict(), "schedule": payload}, indent=2, sort_keys=True,
                                       default=str)
        return context


class FinalizeReport(BaseStep):
    """Write the report; with `enforce`, failed criteria raise AcceptanceError after writing."""

    def _validate_params(self) -> None:
        pass

    @classmethod
    def get_default_params(cls) -> Dict[str, Any]:
        return {"enforce": False}

    def apply(self, context: Context) -> Context:
        report = context["report"]
        failed = report.failed()
        if self.params["enforce"] and failed:
            report.exit_code = AcceptanceError.exit_code
        context["report_path"] = ReportExporter(_output_dir(context)).export(report)
        if self.params["enforce"] and failed:
            names = ", ".join(f"{c.module}:{c.name}" for c in failed)
            raise AcceptanceError(f"{len(failed)} criteria failed: {names}")
        return context


def _write_json(context: Context, name: str, payload: Dict[str, Any]) -> str:
    path = SnapshotExporter(_output_dir(context)).save_metadata(payload, name)
    context["report"].artifacts.append(name)
    return path
