import json
from typing import Any, Dict

import pandas as pd
import pytest

from src.exporters.csv_exporter import CSVExporter
from src.exporters.report_exporter import ReportExporter
from src.pipeline_engine import BaseStep, Pipeline, PipelineRegistry
from src.schemas.config import RunConfig, load_config
from src.schemas.report import Criterion, RunReport
from src.steps.verify_steps import Battery
from src.utils.errors import ConfigError, DivergenceError


def _config(tmp_path, **overrides):
    data = {"mode": "schedule", "output_dir": str(tmp_path / "run"), "resolutions": [8]}
    data.update(overrides)
    return load_config(data)


def test_defaults_are_filled_in(tmp_path):
    config = _config(tmp_path)
    assert config.schema_version == "CFG v1"
    assert config.k == 5.0
    assert config.resolution == 8
    assert config.iteration.t_points == 8


@pytest.mark.parametrize("overrides", [
    {"schema_version": "CFG v2"},
    {"mode": "interpolate"},
    {"resolutions": [7]},
    {"resolutions": []},
    {"k": 4.0},
    {"J": 0.5},
    {"Theta": 4.0},
    {"mode": "shift-background"},
    {"mode": "verify-suite", "only": "fields"},
    {"iteration": {"t_points": 2}},
])
def test_invalid_configs_are_rejected(tmp_path, overrides):
    with pytest.raises(ConfigError):
        _config(tmp_path, **overrides)


def test_config_file_errors(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(broken)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    listing = tmp_path / "list.json"
    listing.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(listing)


def test_verify_suite_accepts_known_module(tmp_path):
    config = _config(tmp_path, mode="verify-suite", only="nash_moser")
    assert config.only == "nash_moser"


@pytest.mark.parametrize("measured, threshold, comparison, passed", [
    (1.0, 2.0, "<=", True),
    (2.0, 2.0, "<", False),
    (3.0, 2.0, ">=", True),
    (2.0, 2.0, "==", True),
    (float("nan"), 2.0, "<=", False),
    (float("inf"), 2.0, ">=", False),
])
def test_criterion_check(measured, threshold, comparison, passed):
    assert Criterion.check("c", "m", measured, threshold, comparison).passed is passed


def test_report_is_deterministic(tmp_path):
    report = RunReport(mode="schedule", config={"b": 1, "a": 2})
    report.residuals["theta"] = float("nan")
    report.criteria.append(Criterion.check("c", "m", 1.0, 2.0))
    exporter = ReportExporter(str(tmp_path))
    first = open(exporter.export(report, "a.json")).read()
    second = open(exporter.export(report, "b.json")).read()
    assert first == second
    data = json.loads(first)
    assert list(data["config"]) == ["a", "b"]
    assert data["residuals"]["theta"] is None
    assert data["schema_version"] == "RPT v1"


def test_csv_exporter_writes_rows(tmp_path):
    path = CSVExporter(str(tmp_path)).export([{"n": 1, "residual": 0.5}, {"n": 2, "residual": 0.25}], "trace.csv",
                                             metadata={"rows": 2})
    frame = pd.read_csv(path)
    assert list(frame["residual"]) == [0.5, 0.25]
    assert (tmp_path / "trace.json").exists()


class Recorder(BaseStep):
    def _validate_params(self) -> None:
        if self.params["tag"] == "":
            raise ValueError("tag must not be empty")

    @classmethod
    def get_default_params(cls) -> Dict[str, Any]:
        return {"tag": "x"}

    def apply(self, context):
        context.setdefault("seen", []).append(self.params["tag"])
        return context


def test_registry_builds_pipelines_from_templates():
    registry = PipelineRegistry()
    registry.register_step(Recorder)
    registry.register_template("twice", {"steps": [{"class": "Recorder"}, {"class": "Recorder", "params": {"tag": "y"}}]})
    pipeline = registry.build("twice", overrides={"Recorder": {"tag": "z"}})
    assert pipeline.process({})["seen"] == ["z", "z"]
    assert registry.build("twice").process({})["seen"] == ["x", "y"]
    with pytest.raises(KeyError):
        registry.build("missing")
    with pytest.raises(TypeError):
        registry.register_step(dict)
    with pytest.raises(ValueError):
        Recorder({"tag": ""})


def test_pipeline_round_trips_through_dict():
    pipeline = Pipeline([Recorder({"tag": "a"})], "demo")
    again = Pipeline.from_dict(pipeline.to_dict())
    assert again.name == "demo"
    assert again.process({})["seen"] == ["a"]


def test_builtin_templates_cover_every_mode():
    registry = PipelineRegistry()
    registry.discover_steps("src.steps")
    registry.discover_templates()
    for mode in ("solve-geodesic", "disc-solve", "verify-suite", "schedule", "shift-background"):
        pipeline = registry.build(mode)
        assert type(pipeline.steps[-1]).__name__ == "FinalizeReport"
    assert "Battery" not in registry.steps


class ExplodingBattery(Battery):
    module = "nash_moser"

    def checks(self):
        return [("fine", self.fine), ("boom", self.boom)]

    def fine(self, context):
        return [self.check("value", 1.0, 2.0)]

    def boom(self, context):
        raise DivergenceError("left the neighbourhood")


def test_battery_records_failures_and_goes_on(tmp_path):
    config = _config(tmp_path, mode="verify-suite")
    report = RunReport(mode="verify-suite", config={})
    ExplodingBattery().apply({"config": config, "report": report})
    assert [c.name for c in report.criteria] == ["value", "boom"]
    assert report.criteria[0].passed
    assert not report.criteria[1].passed
    assert "DivergenceError" in report.criteria[1].detail


def test_battery_honours_module_filter(tmp_path):
    config = RunConfig.model_validate({"mode": "verify-suite", "only": "oracle", "output_dir": str(tmp_path)})
    report = RunReport(mode="verify-suite", config={})
    ExplodingBattery().apply({"config": config, "report": report})
    assert report.criteria == []


def test_templates_are_validated(tmp_path):
    registry = PipelineRegistry()
    with pytest.raises(ConfigError):
        registry.register_template("empty", {"steps": []})
    with pytest.raises(ConfigError):
        registry.register_template("nameless", {"steps": [{"params": {}}]})
    (tmp_path / "broken.json").write_text("{")
    with pytest.raises(ConfigError):
        registry.discover_templates(tmp_path)


def test_pipeline_records_completed_steps():
    context = Pipeline([Recorder(), Recorder({"tag": "b"})], "demo").process({})
    assert context["completed_steps"] == ["Recorder", "Recorder"]
    data = Pipeline([Recorder()], "demo").to_dict()
    assert data["steps"][0]["class"] == "Recorder"
    assert data["steps"][0]["module"] == __name__
