import json

import numpy as np
import pytest
from typer.testing import CliRunner

from src.cli import app
from src.fields.snapshot import write_snapshot

runner = CliRunner()


def _write_config(tmp_path, **overrides):
    data = {"schema_version": "CFG v1", "mode": "schedule", "resolutions": [8], "output_dir": str(tmp_path / "run")}
    data.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_schedule_mode_prints_indices(tmp_path):
    result = runner.invoke(app, ["run", "--config", _write_config(tmp_path)])
    assert result.exit_code == 0
    assert '"indices"' in result.stdout
    report = json.loads((tmp_path / "run" / "report.json").read_text())
    assert report["mode"] == "schedule"
    assert report["exit_code"] == 0
    assert "schedule.json" in report["artifacts"]
    assert "mode schedule" in (tmp_path / "run" / "run.log").read_text()
    assert report["constants"]["holder_index_cap"] == pytest.approx(4.0 + 1.0 / 3.0)


def test_invalid_config_exits_with_two(tmp_path):
    result = runner.invoke(app, ["run", "--config", _write_config(tmp_path, k=3.0)])
    assert result.exit_code == 2


def test_missing_config_exits_with_two(tmp_path):
    result = runner.invoke(app, ["run", "-c", str(tmp_path / "nope.json")])
    assert result.exit_code == 2


def test_corrupted_snapshot_exits_with_two(tmp_path):
    path = write_snapshot(tmp_path / "phi1.gfld", np.zeros((8, 8)), "torus")
    path.write_bytes(path.read_bytes()[:-16])
    config = _write_config(tmp_path, phi1={"snapshot": str(path)})
    result = runner.invoke(app, ["run", "--config", config])
    assert result.exit_code == 2
    report = json.loads((tmp_path / "run" / "report.json").read_text())
    assert report["exit_code"] == 2


def test_verify_rejects_unknown_module(tmp_path):
    result = runner.invoke(app, ["verify", "--config", _write_config(tmp_path), "--only", "fields"])
    assert result.exit_code == 2


@pytest.mark.slow
def test_verify_single_module(tmp_path):
    result = runner.invoke(app, ["verify", "--config", _write_config(tmp_path), "--only", "nash_moser"])
    assert result.exit_code == 0
    assert "criteria passed" in result.stdout
    report = json.loads((tmp_path / "run" / "report.json").read_text())
    assert report["mode"] == "verify-suite"
    assert {c["module"] for c in report["criteria"]} == {"nash_moser"}
