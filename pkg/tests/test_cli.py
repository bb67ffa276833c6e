import math

import pytest

from camroute import cli
from camroute.config import ConfigError, MacConfig, ScenarioConfig, parse_config
from camroute.experiment import run_experiment


def test_defaults():
    cfg = parse_config()
    assert cfg == ScenarioConfig()
    assert (cfg.node_count, cfg.area, cfg.comm_range, cfg.dov) == (400, (2000.0, 2000.0), 150.0, 125.0)
    assert cfg.aov == pytest.approx(math.pi / 3)
    assert (cfg.bitrate, cfg.payload, cfg.packet_count, cfg.display_timer) == (250_000.0, 90, 205, 10.0)
    assert cfg.routing == "gpsr" and cfg.sink_start == (1000.0, 1000.0)
    assert parse_config(overrides={"scenario": "3"}).routing == "tgpsr"


def test_empty_file_gives_defaults(tmp_path):
    f = tmp_path / "empty.cfg"
    f.write_text("# nothing\n\n")
    assert parse_config(f) == ScenarioConfig()


def test_file_then_flags(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("nodes = 80\narea = 500x400\ncapture-rate = 2\nmac_max_retries = 3\n")
    cfg = parse_config(f, {"nodes": 50, "seed": None})
    assert cfg.node_count == 50 and cfg.area == (500.0, 400.0) and cfg.capture_rate == 2.0
    assert cfg.mac == MacConfig(max_retries=3)


def test_unknown_key_rejected(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("nodes = 10\nwarp_speed = 9\n")
    with pytest.raises(ConfigError, match=r"bad.cfg:2: unknown key 'warp_speed'"):
        parse_config(f)


def test_malformed_value_names_key_and_line(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("seed = 1\n\nnodes = many\n")
    with pytest.raises(ConfigError, match=r"bad.cfg:3: malformed value 'many' for key 'nodes'"):
        parse_config(f)
    f.write_text("nodes 10\n")
    with pytest.raises(ConfigError, match="bad.cfg:1"):
        parse_config(f)


@pytest.mark.parametrize("over", [{"scenario": 4}, {"alpha": 0.7}, {"nodes": 0}, {"sentry-fraction": 1.5},
                                  {"path-factor": 0}, {"capture-rate": -1}])
def test_invalid_values(over):
    with pytest.raises(ConfigError):
        parse_config(overrides=over)


def test_runs_give_distinct_deterministic_seeds():
    cfg = ScenarioConfig(node_count=30, area=(400.0, 400.0), runs=3, seed=4)
    a = run_experiment(cfg)
    assert [m.seed for m in a] == [4, 5, 6]
    assert run_experiment(cfg) == a


def test_dry_run(capsys):
    assert cli.main(["--dry-run", "--nodes", "50", "--scenario", "3"]) == 0
    out = capsys.readouterr().out
    assert "node_count = 50" in out and "routing = tgpsr" in out and "mac_max_retries = 5" in out


def test_bad_scenario_exit_code(capsys):
    assert cli.main(["--scenario", "4", "--dry-run"]) == 2
    assert "scenario must be 1, 2 or 3" in capsys.readouterr().err


def test_set_requires_key_value(capsys):
    assert cli.main(["--set", "events", "--dry-run"]) == 2


def test_end_to_end_csv(tmp_path, capsys):
    out = tmp_path / "res"
    args = ["--nodes", "40", "--area", "500x500", "--scenario", "all", "--runs", "2", "--set", "events=1",
            "--set", "coverage_spacing=1e9", "--set", "sentry-fraction=1", "--out", str(out)]
    assert cli.main(args) == 0
    text = (out / "runs.csv").read_text()
    assert len(text.splitlines()) == 1 + 6
    assert (out / "summary.csv").exists()
    assert cli.main(args + ["--format", "structured"]) == 0
    assert (out / "runs.json").exists()
    printed = capsys.readouterr().out
    assert "scenario 3:" in printed
