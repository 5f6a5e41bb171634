"""Command-line interface: subcommands, outputs, exit codes."""

import json

import pytest

from signedflow.cli import main


def _write_cfg(tmp_path, extra=None):
    cfg = {
        "potential": {"kind": "wall"},
        "regime": {"m": 2},
        "initial": {"kind": "density", "components": [
            {"sign": 1, "mass": 1.0, "center": 0.0, "width": 1.0}]},
        "n_list": [16, 32],
        "t_end": 0.1,
        "snapshot_times": [0.1],
        "grid": {"half_width": 2.0, "nodes": 160, "rho": 0.5},
    }
    cfg.update(extra or {})
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    return p


def test_check_potential_writes_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["check-potential", "--pot", "wall", "--profile", "hj3",
                 "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["passed"]
    assert any(it["item"] == "even" for it in report["items"])


def test_check_potential_failure_exit_code(tmp_path):
    code = main(["check-potential", "--pot", "riesz", "--a", "2.0",
                 "--profile", "hj1"])
    assert code == 2


def test_simulate_writes_outputs(tmp_path):
    cfg = _write_cfg(tmp_path, {
        "initial": {"kind": "particles", "x": [-0.5, 0.5], "b": [1, -1]},
        "potential": {"kind": "log"},
        "regime": {"m": 1, "alpha": 1.0},
        "t_end": 0.6,
        "snapshot_times": [0.3, 0.6],
    })
    traj = tmp_path / "traj.csv"
    events = tmp_path / "events.jsonl"
    code = main(["simulate", "--config", str(cfg), "--traj", str(traj),
                 "--events", str(events)])
    assert code == 0
    assert traj.read_text().splitlines()[0] == "t,x_0,x_1,b_0,b_1"
    ev = json.loads(events.read_text().splitlines()[0])
    assert ev["b_after"] == [0, 0]


def test_pde_subcommand(tmp_path):
    cfg = _write_cfg(tmp_path)
    out = tmp_path / "grid.csv"
    code = main(["pde", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    assert out.read_text().splitlines()[0] == "x,u"


def test_converge_subcommand(tmp_path):
    cfg = _write_cfg(tmp_path)
    rep = tmp_path / "report.json"
    csv = tmp_path / "rows.csv"
    code = main(["converge", "--config", str(cfg), "--out", str(rep),
                 "--csv", str(csv)])
    assert code == 0
    report = json.loads(rep.read_text())
    assert report["passed"]
    assert csv.read_text().splitlines()[0] == "n,t,distance"


def test_hamiltonian_test_rhs(tmp_path):
    cfg = _write_cfg(tmp_path, {"potential": {"kind": "wall"},
                                "regime": {"m": 3, "beta": 1.0}})
    out = tmp_path / "rhs.csv"
    code = main(["hamiltonian-test", "--lemma", "rhs", "--config", str(cfg),
                 "--out", str(out)])
    assert code == 0
    assert out.read_text().splitlines()[0] == "eps,value,abs_err"


def test_fit_exponent_subcommand(tmp_path):
    cfg = _write_cfg(tmp_path, {
        "initial": {"kind": "particles", "x": [-0.5, 0.5], "b": [1, -1]},
        "potential": {"kind": "power_law_force", "a": 0.5},
        "regime": {"m": 1, "alpha": 1.0},
        "t_end": 1.1,
        "snapshot_times": [],
    })
    out = tmp_path / "fit.json"
    code = main(["fit-exponent", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    fit = json.loads(out.read_text())
    assert fit["passed"]
    assert fit["slope"] == pytest.approx(0.4, abs=0.04)


def test_runtime_error_exit_code(tmp_path):
    code = main(["converge", "--config", str(tmp_path / "missing.json")])
    assert code == 1


def test_invalid_config_exit_code(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"potential": {"kind": "wall"},
                             "regime": {"m": 9}}))
    code = main(["converge", "--config", str(p)])
    assert code == 1
