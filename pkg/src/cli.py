"""
Batch command line: `run --config path.json` and `verify --config path.json [--only module]`.

Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 acceptance failure.
"""
from typing import Any, Dict, Optional

import typer
from pydantic import ValidationError

from src.exporters.report_exporter import ReportExporter
from src.pipeline_engine import registry
from src.schemas.config import RunConfig, load_config
from src.schemas.report import RunReport
from src.utils.errors import AcceptanceError, ConfigError, GeodesicLabError
from src.utils.config import settings
from src.utils.logging import logger, run_log

app = typer.Typer(add_completion=False, help="Geodesics in the space of Kähler potentials on the flat torus.")


def _registry():
    if not registry.steps:
        registry.discover_steps("src.steps")
    if not registry.templates:
        registry.discover_templates()
    return registry


def execute(config: RunConfig) -> Dict[str, Any]:
    """
    Run the pipeline registered for the config's mode.

    Everything logged during the run is also written to `<output_dir>/run.log`.

    Returns:
        The final run context (config, report, intermediate objects)

    Raises:
        GeodesicLabError: From the failing step; the report is written first with its exit code
    """
    report = RunReport(mode=config.mode, config=config.model_dump(mode="json"))
    context: Dict[str, Any] = {"config": config, "report": report, "output_dir": config.output_dir}
    try:
        pipeline = _registry().build(config.mode)
    except KeyError as e:
        raise ConfigError(f"no pipeline for mode {config.mode!r}") from e
    with run_log(config.output_dir):
        logger.info(f"{settings.APP_NAME}: mode {config.mode}, output {config.output_dir}")
        try:
            return pipeline.process(context)
        except AcceptanceError:
            raise
        except (GeodesicLabError, ValueError) as e:
            report.exit_code = _exit_code(e)
            ReportExporter(config.output_dir).export(report)
            raise


def _verify_config(path: str, only: Optional[str]) -> RunConfig:
    config = load_config(path)
    data = config.model_dump()
    data.update(mode="verify-suite", only=only if only is not None else config.only)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid config: {e}") from e


def _exit_code(error: Exception) -> int:
    if isinstance(error, GeodesicLabError):
        return error.exit_code
    if isinstance(error, ValueError):
        return ConfigError.exit_code
    return 1


def _guarded(action) -> None:
    try:
        action()
    except (GeodesicLabError, ValueError) as e:
        code = _exit_code(e)
        logger.error(f"{type(e).__name__}: {e}")
        raise typer.Exit(code)


@app.command()
def run(config: str = typer.Option(..., "--config", "-c", help="Path of the JSON run configuration")) -> None:
    """Execute the pipeline of the configured mode and write its report."""

    def action():
        context = execute(load_config(config))
        if "stdout" in context:
            typer.echo(context["stdout"])
        logger.info(f"Report written to {context.get('report_path')}")

    _guarded(action)


@app.command()
def verify(
    config: str = typer.Option(..., "--config", "-c", help="Path of the JSON run configuration"),
    only: Optional[str] = typer.Option(None, "--only", help="Run the battery of one module only"),
) -> None:
    """Run the acceptance batteries; exit 4 if any criterion fails."""

    def action():
        context = execute(_verify_config(config, only))
        report = context["report"]
        typer.echo(f"{len(report.criteria) - len(report.failed())}/{len(report.criteria)} criteria passed")

    _guarded(action)


if __name__ == "__main__":
    app()
