import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from swirlframe.cli import IDENTITY_COLUMNS, main, run_scenario
from swirlframe.config import from_dict, load_config
from swirlframe.errors import ConfigError
from swirlframe.identities import SCAN_COLUMNS, ScanParams
from swirlframe.report import SCHEMA_VERSION, document, emit_report, read_json
from swirlframe.trajectory import TRAJECTORY_COLUMNS, read_csv

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write_toml(tmp_path, text, name="scenario.toml"):
    path = tmp_path / name
    path.write_text("schema_version = 1\n" + text)
    return path


def csv_header(path):
    return next(l for l in Path(path).read_text().splitlines() if not l.startswith("#")).split(",")


# -- configuration ------------------------------------------------------------------


def test_shipped_configs_load():
    for path in sorted(CONFIGS.glob("*.toml")):
        cfg = load_config(path, environ={})
        assert cfg.schema_version == 1


def test_unknown_keys_rejected(tmp_path):
    with pytest.raises(ConfigError, match="unknown keys in \\[trace\\]: bogus"):
        load_config(write_toml(tmp_path, "[trace]\nbogus = 1\n"), environ={})
    with pytest.raises(ConfigError, match="top-level"):
        load_config(write_toml(tmp_path, "colour = 'red'\n"), environ={})


def test_schema_version_checked(tmp_path):
    (tmp_path / "a.toml").write_text("output = 'x'\n")
    with pytest.raises(ConfigError, match="schema_version is required"):
        load_config(tmp_path / "a.toml", environ={})
    (tmp_path / "b.toml").write_text("schema_version = 7\n")
    with pytest.raises(ConfigError, match="unsupported schema_version"):
        load_config(tmp_path / "b.toml", environ={})


def test_tolerances_must_be_positive(tmp_path):
    with pytest.raises(ConfigError, match="rel_tol must be positive"):
        load_config(write_toml(tmp_path, "[tolerances]\nrel_tol = -1e-8\n"), environ={})


def test_wrong_types_rejected(tmp_path):
    with pytest.raises(ConfigError, match="must be a number"):
        load_config(write_toml(tmp_path, "[atlas]\nt = 'noon'\n"), environ={})


def test_missing_field_parameters_listed(tmp_path):
    cfg = load_config(write_toml(tmp_path, "[field]\nname = 'rigid_swirl_pulsatile'\nparams = {}\n"), environ={})
    with pytest.raises(ConfigError, match="missing parameters: omega, g"):
        cfg.field.build()


def test_environment_override(tmp_path):
    path = CONFIGS / "helix_trace.toml"
    cfg = load_config(path, environ={"SWIRLFRAME_TRACE__T_RANGE": "[0.0, 1.0]",
                                     "SWIRLFRAME_TOLERANCES__REL_TOL": "1e-9",
                                     "SWIRLFRAME_OUTPUT": "elsewhere"})
    assert cfg.trace.t_range == [0.0, 1.0]
    assert cfg.tolerances.rel_tol == 1e-9
    assert cfg.output == "elsewhere"


def test_config_echo_reproduces_config():
    cfg = load_config(CONFIGS / "nozzle_atlas.toml", environ={})
    doc = json.loads(json.dumps(document("atlas", {}, cfg.echo())))
    again = from_dict(doc["config"])
    assert again.field == cfg.field and again.atlas.r0_grid == cfg.atlas.r0_grid
    assert math.isnan(again.atlas.z_in)


# -- subcommands --------------------------------------------------------------------


def test_trace_endpoint_matches_helix(tmp_path):
    assert main(["trace", "--config", str(CONFIGS / "helix_trace.toml"), "--out", str(tmp_path)]) == 0
    header, data = read_csv(tmp_path / "trajectory_0.csv")
    assert tuple(header) == TRAJECTORY_COLUMNS
    last = dict(zip(header, data[-1]))
    assert last["t"] == pytest.approx(2 * math.pi)
    assert last["R"] == pytest.approx(1.0, abs=1e-9)
    assert last["Theta"] == pytest.approx(2 * math.pi, rel=1e-9)
    assert last["Z"] == pytest.approx(2 * math.pi, rel=1e-9)
    assert last["s"] == pytest.approx(2 * math.pi * math.sqrt(2), rel=1e-9)
    doc = read_json(tmp_path / "trace.json")
    assert doc["schema_version"] == SCHEMA_VERSION and doc["kind"] == "trace"


def test_identities_report(tmp_path):
    assert main(["identities", "--config", str(CONFIGS / "rigid_swirl_identities.toml"), "--out", str(tmp_path)]) == 0
    assert csv_header(tmp_path / "identities.csv")[:5] == [
        "probe_s", "residual_tau", "residual_n", "residual_rbar", "residual_zbar"]
    assert tuple(csv_header(tmp_path / "identities.csv")) == IDENTITY_COLUMNS
    doc = read_json(tmp_path / "identities.json")
    probes = doc["report"]["probes"]
    assert len(probes) == 5
    for p in probes:
        rel = p["identities"]["relative"]
        assert max(rel.values()) < 1e-4, rel


def test_fields_frames_atlas_subcommands(tmp_path):
    assert main(["fields", "--config", str(CONFIGS / "rigid_swirl_identities.toml"), "--out", str(tmp_path)]) == 0
    assert read_json(tmp_path / "fields.json")["report"]["certification"]["exact_euler"] is True
    assert main(["frames", "--config", str(CONFIGS / "helix_trace.toml"), "--out", str(tmp_path)]) == 0
    header, data = read_csv(tmp_path / "frames.csv")
    assert data[:, header.index("kappa")] == pytest.approx([0.5] * len(data), rel=1e-6)
    assert main(["atlas", "--config", str(CONFIGS / "nozzle_atlas.toml"), "--out", str(tmp_path)]) == 0
    header, data = read_csv(tmp_path / "rates.csv")
    assert len(data) == 12 and min(data[:, header.index("L_x")]) >= 2.0


def test_empty_scan_exits_zero(tmp_path):
    path = write_toml(tmp_path, "[scan]\neps = 2.0\nbeta = 0.5\n")
    assert main(["scan", "--config", str(path), "--out", str(tmp_path)]) == 0
    assert tuple(csv_header(tmp_path / "scan.csv")) == SCAN_COLUMNS
    assert len((tmp_path / "scan.csv").read_text().splitlines()) == 2
    report = read_json(tmp_path / "scan.json")["report"]
    assert report["rows"] == [] and report["diagnostic"].startswith("empty admissible set")


def test_scan_rows_match_admissible_points(tmp_path):
    text = "[scan]\ng1_values = [5.0, 20.0, 40.0]\ng2_factors = [0.5, 2.0]\n"
    path = write_toml(tmp_path, text)
    assert main(["scan", "--config", str(path), "--out", str(tmp_path), "--threads", "2"]) == 0
    params = load_config(path, environ={}).scan.params(load_config(path, environ={}).tolerances)
    admissible = [g for g in params.grid() if not params.flux_admissibility(*g)]
    _, data = read_csv_rows(tmp_path / "scan.csv")
    assert len(data) == len(admissible) == 2


def read_csv_rows(path):
    lines = [l for l in Path(path).read_text().splitlines() if not l.startswith("#")]
    return lines[0].split(","), [l.split(",") for l in lines[1:]]


def test_reruns_are_byte_identical(tmp_path):
    cfg = CONFIGS / "nozzle_atlas.toml"
    for sub in ("a", "b"):
        assert main(["atlas", "--config", str(cfg), "--out", str(tmp_path / sub)]) == 0
    for name in ("map.csv", "rates.csv", "atlas.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_validation_failures_exit_one(tmp_path):
    assert main(["trace", "--config", str(write_toml(tmp_path, "[trace]\nbogus = 1\n"))]) == 1
    bad_field = write_toml(tmp_path, "[field]\nname = 'rigid_swirl_pulsatile'\nparams = { g = '1 + t' }\n", "b.toml")
    assert main(["trace", "--config", str(bad_field), "--out", str(tmp_path)]) == 1
    uncertified = write_toml(tmp_path, "[field]\nname = 'sheared_swirl'\n[identities]\nseed = [0.5, 0.0, -1.0]\n", "c.toml")
    assert main(["identities", "--config", str(uncertified), "--out", str(tmp_path)]) == 1
    assert main(["trace", "--config", str(tmp_path / "missing.toml")]) == 1
    assert main(["trace", "--threads", "0"]) == 1


def test_numerical_failure_exits_two_with_probe(tmp_path):
    path = write_toml(tmp_path, "[field]\nname = 'uniform'\nparams = { g = '1 + t' }\n[frames]\nseed = [0.5, 0.0, 0.0]\n")
    assert main(["frames", "--config", str(path), "--out", str(tmp_path)]) == 2
    doc = read_json(tmp_path / "error.json")
    assert doc["report"]["error"] == "FrameUndefinedError"
    assert "s" in doc["report"]["probe"]


def test_run_scenario_default_output(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = load_config(CONFIGS / "helix_trace.toml", environ={})
    assert run_scenario(cfg, "trace") == 0
    assert (tmp_path / "out" / "helix_trace" / "trajectory_0.csv").exists()


def test_console_script(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "swirlframe.cli", "trace", "--config",
                           str(CONFIGS / "helix_trace.toml"), "--out", str(tmp_path), "--verbose"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "wrote" in proc.stderr


# -- reports ------------------------------------------------------------------------


def test_json_round_trip(tmp_path):
    report = {"a": 1.0000000000000002, "b": [0.1, 2.5e-300], "c": {"d": "text", "e": 3}, "nan": math.nan}
    emit_report(tmp_path / "r.json", "json", kind="demo", report=report, config_echo={"x": 1})
    back = read_json(tmp_path / "r.json")
    assert back["report"] == {**report, "nan": None}
    assert back["schema_version"] == SCHEMA_VERSION and back["config"] == {"x": 1}


def test_csv_header_comment(tmp_path):
    emit_report(tmp_path / "r.csv", "csv", columns=("x", "y"), rows=[[0.1, 1], [1e-17, 2]], description="demo")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0].startswith("#") and "x" in lines[0]
    assert lines[1:] == ["x,y", "0.1,1", "1e-17,2"]


def test_unknown_report_format(tmp_path):
    with pytest.raises(ValueError):
        emit_report(tmp_path / "r.xml", "xml")
