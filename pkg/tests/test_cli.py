"""CLI subcommands end to end: outputs, figures, exit codes."""

import json
from pathlib import Path

import pytest

from vsarm.cli import main


@pytest.fixture(scope="module")
def small_config(tmp_path_factory):
    """Config with a small sweep grid and short stab list so CLI runs are
    quick; physics settings stay at the defaults."""
    tmp = tmp_path_factory.mktemp("cfg")
    cfg = {
        "workspace": {"grid": {"l1_mm": [660.0, 690.0, 2.0],
                               "l2_mm": [530.0, 560.0, 2.0],
                               "theta1_max_deg": [65.0, 65.0, 5.0],
                               "theta2_max_deg": [120.0, 130.0, 5.0]}},
        "stab": {"velocities_mps": [0.3, 0.6], "cases": [1, 2]},
    }
    path = tmp / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_optimize_workspace_cli(small_config, tmp_path, capsys):
    rc = main(["optimize-workspace", str(small_config), "--out", str(tmp_path),
               "--occupancy-csv"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "l1 = 674" in out
    result = json.loads((tmp_path / "workspace_result.json").read_text())
    assert result["theta2_max_deg"] == 125.0
    assert (tmp_path / "workspace.png").exists()
    occ = (tmp_path / "workspace_occupancy.csv").read_text().splitlines()
    assert occ[0] == "x_mm,y_mm,region_label"
    assert any("cooperative" in line for line in occ[1:])


def test_track_cli(small_config, tmp_path, capsys):
    rc = main(["track", str(small_config), "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads((tmp_path / "track_summary.json").read_text())
    assert summary["final_cartesian_error_mm"] < 3.0
    assert summary["detection"] is None
    csv_head = (tmp_path / "track.csv").read_text().splitlines()[0]
    assert csv_head == ("t,q1_d,q2_d,q1,q2,phi1,phi2,k1,k2,tau1,tau2,"
                        "r1,r2,x,y,eps_r1,eps_r2")
    assert (tmp_path / "track.png").exists()


def test_track_cli_explicit_target(small_config, tmp_path):
    rc = main(["track", str(small_config), "--out", str(tmp_path),
               "--x", "-50.0", "--y", "660.0", "--no-plots"])
    assert rc == 0
    summary = json.loads((tmp_path / "track_summary.json").read_text())
    assert summary["target_mm"] == [-50.0, 660.0]


def test_stab_sweep_cli(small_config, tmp_path, capsys):
    rc = main(["stab-sweep", str(small_config), "--out", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "stab_sweep.csv").read_text().splitlines()
    assert lines[0] == "case,velocity_mps,F_p_N,d_p_mm,detected_at_s"
    assert len(lines) == 1 + 4   # 2 cases x 2 velocities
    assert (tmp_path / "stab_sweep.png").exists()


def test_fsm_demo_cli(small_config, tmp_path):
    script = tmp_path / "events.jsonl"
    script.write_text('{"t": 0.5, "button": "B1", "value": true}\n'
                      '{"t": 8.0, "button": "B1", "value": false}\n')
    rc = main(["fsm-demo", str(small_config), "--events", str(script),
               "--out", str(tmp_path), "--duration", "12", "--no-plots"])
    assert rc == 0
    lines = (tmp_path / "fsm_demo.csv").read_text().splitlines()
    assert len(lines) == 1 + 12000
    assert "S2" in lines[4000]


def test_simulate_cli(small_config, tmp_path):
    rc = main(["simulate", str(small_config), "--out", str(tmp_path),
               "--duration", "2", "--no-plots"])
    assert rc == 0
    assert (tmp_path / "simulate.csv").exists()


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"arm": {"k_min": 9000.0}}')
    rc = main(["track", str(bad), "--out", str(tmp_path)])
    assert rc == 1


def test_missing_config_exit_code(tmp_path):
    rc = main(["simulate", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
    assert rc == 1


def test_runtime_error_exit_code(tmp_path):
    # links far too short for the default scene -> no feasible candidate
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "workspace": {"grid": {"l1_mm": [200.0, 210.0, 10.0],
                               "l2_mm": [150.0, 160.0, 10.0],
                               "theta1_max_deg": [65.0, 65.0, 5.0],
                               "theta2_max_deg": [125.0, 125.0, 5.0]}},
    }))
    rc = main(["optimize-workspace", str(cfg), "--out", str(tmp_path),
               "--no-plots"])
    assert rc == 2


def test_log_dir_env_var(small_config, tmp_path, monkeypatch):
    monkeypatch.setenv("VSARM_LOG_DIR", str(tmp_path / "env_runs"))
    rc = main(["simulate", str(small_config), "--duration", "1", "--no-plots"])
    assert rc == 0
    assert (tmp_path / "env_runs" / "simulate.csv").exists()
