"""
Tests for the command-line interface and its exit codes.
"""

import json

import pandas as pd
import pytest

from cli import EXIT_CONFIG, EXIT_OK, EXIT_ORACLE, build_parser, main, resolve_config
from data_io import SIMULATION_COLUMNS, TRAJECTORY_COLUMNS, load_level_set, save_problem
from models import IsingProblem


@pytest.fixture
def triangle_file(tmp_path):
    path = tmp_path / "triangle.json"
    save_problem(IsingProblem(n=3, couplings=[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]), path)
    return str(path)


def test_generate_sk1_is_reproducible(tmp_path):
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    assert main(["generate-sk1", "--n", "16", "--seed", "7", "--out", str(first)]) == EXIT_OK
    assert main(["generate-sk1", "--n", "16", "--seed", "7", "--out", str(second)]) == EXIT_OK

    data = json.loads(first.read_text())
    assert data["n"] == 16
    assert len(data["couplings"]) == 120
    assert {c[2] for c in data["couplings"]} <= {-1.0, 1.0}
    assert first.read_bytes() == second.read_bytes()


def test_generate_sk1_rejects_tiny_instance(tmp_path):
    assert main(["generate-sk1", "--n", "1", "--out", str(tmp_path / "x.json")]) == EXIT_CONFIG


def test_enumerate_writes_levels(tmp_path, triangle_file):
    out = tmp_path / "levels.json"
    assert main(["enumerate", "--problem", triangle_file, "--out", str(out)]) == EXIT_OK
    levels = load_level_set(out)
    assert levels.energies == [-6.0, 2.0]
    assert levels.n_conf == 4


def test_enumerate_budget_exit_code(tmp_path):
    problem = tmp_path / "big.json"
    assert main(["generate-sk1", "--n", "30", "--out", str(problem)]) == EXIT_OK
    code = main(["enumerate", "--problem", str(problem), "--method", "brute", "--out", str(tmp_path / "l.json")])
    assert code == EXIT_ORACLE


def test_missing_problem_file(tmp_path):
    code = main(["enumerate", "--problem", str(tmp_path / "none.json"), "--out", str(tmp_path / "l.json")])
    assert code == EXIT_CONFIG


def test_sample_writes_report_and_trajectory_csv(tmp_path, triangle_file, capsys):
    report = tmp_path / "report.json"
    csv = tmp_path / "traj.csv"
    code = main(["sample", "--problem", triangle_file, "--trajectories", "10", "--roundtrips", "20",
                 "--seed", "5", "--out", str(report), "--emit-trajectory", str(csv)])
    assert code == EXIT_OK

    data = json.loads(report.read_text())
    assert data["ensemble"]["n_traj"] == 10
    assert data["ensemble"]["t_sim"] == 20
    assert data["params"]["config"]["sampling"]["seed"] == 5
    assert len(data["configs"]) == 4

    frame = pd.read_csv(csv)
    assert list(frame.columns) == TRAJECTORY_COLUMNS
    assert len(frame) == 10 * 20 * 3
    assert frame["roundtrip"].min() == 1

    assert "trajectories" in capsys.readouterr().out
    assert main(["explain", "--report", str(report)]) == EXIT_OK
    summary = capsys.readouterr().out
    assert "T_all" in summary
    assert "Recommendations:" in summary

    assert main(["explain", "--trajectory", str(csv)]) == EXIT_OK
    assert "10 trajectories x 20 roundtrips, 3 pulses" in capsys.readouterr().out


def test_sample_report_is_independent_of_workers(tmp_path, triangle_file):
    report = tmp_path / "report.json"
    args = ["sample", "--problem", triangle_file, "--trajectories", "60", "--roundtrips", "12",
            "--seed", "2", "--out", str(report)]
    assert main(args + ["--workers", "1"]) == EXIT_OK
    serial = report.read_bytes()
    assert main(args + ["--workers", "2"]) == EXIT_OK
    assert report.read_bytes() == serial


def test_invalid_mode_names_the_field(tmp_path, triangle_file, capsys):
    code = main(["sample", "--problem", triangle_file, "--mode", "quantum", "--out", str(tmp_path / "r.json")])
    assert code == EXIT_CONFIG
    assert "machine.mode" in capsys.readouterr().err


def test_unknown_config_key(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"machine": {"t_decay": 4, "finesse": 9}}))
    assert main(["sample", "--config", str(config)]) == EXIT_CONFIG


def test_sample_without_problem(tmp_path):
    assert main(["sample", "--out", str(tmp_path / "r.json")]) == EXIT_CONFIG


def test_seed_environment_override(monkeypatch):
    monkeypatch.setenv("CIM_SEED", "42")
    args = build_parser().parse_args(["sample", "--seed", "1"])
    assert resolve_config(args).sampling.seed == 42

    monkeypatch.setenv("CIM_SEED", "forty-two")
    assert main(["sample", "--seed", "1"]) == EXIT_CONFIG


def test_preset_fills_machine_fields(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"preset": "no-pump", "machine": {"alpha_fb": 25.0}}))
    args = build_parser().parse_args(["sample", "--config", str(config)])
    resolved = resolve_config(args)
    assert resolved.machine.alpha_fb == 25.0
    assert resolved.machine.eta_esc == 0.5
    assert resolved.machine.pump_r == 0.0


def test_simulate_writes_moments(tmp_path, triangle_file):
    out = tmp_path / "sim.csv"
    assert main(["simulate", "--problem", triangle_file, "--roundtrips", "15", "--index", "3",
                 "--out", str(out)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert list(frame.columns) == SIMULATION_COLUMNS
    assert len(frame) == 15 * 3
    assert (frame["trajectory"] == 3).all()
    assert (frame["var_q"] > 0).all()


def test_converge_writes_report(tmp_path, triangle_file):
    config = tmp_path / "config.json"
    report = tmp_path / "conv.json"
    config.write_text(json.dumps({
        "machine": {"eta_esc": 0.5, "pump_r": 0.9, "alpha_fb": 5.0},
        "problem": {"path": triangle_file},
        "convergence": {"t_decays": [4, 16], "horizon": 1.0, "noise_seeds": [0]},
        "output": {"report": str(report)},
    }))
    assert main(["converge", "--config", str(config)]) == EXIT_OK
    data = json.loads(report.read_text())
    assert data["t_decays"] == [4, 16]
    assert len(data["rms"][0]) == 2


def test_converge_without_section(tmp_path, triangle_file):
    assert main(["converge", "--problem", triangle_file, "--out", str(tmp_path / "c.json")]) == EXIT_CONFIG


def test_explain_rejects_malformed_trajectory_csv(tmp_path):
    csv = tmp_path / "bad.csv"
    pd.DataFrame({"trajectory": [0], "roundtrip": [1], "value": [0.3]}).to_csv(csv, index=False)
    assert main(["explain", "--trajectory", str(csv)]) == EXIT_CONFIG


def test_finesse_writes_report(tmp_path, triangle_file, capsys):
    config = tmp_path / "config.json"
    report = tmp_path / "finesse.json"
    config.write_text(json.dumps({
        "problem": {"path": triangle_file},
        "sampling": {"n_traj": 4, "seed": 1},
        "finesse": {"t_decays": [2, 4], "t_sim_factor": 5},
        "output": {"report": str(report)},
    }))
    assert main(["finesse", "--config", str(config)]) == EXIT_OK
    data = json.loads(report.read_text())
    assert data["t_decays"] == [2.0, 4.0]
    assert len(data["t_samp"]) == 1 and len(data["t_samp"][0]) == 2
    assert "T_samp of the first ground configuration" in capsys.readouterr().out

    assert main(["explain", "--report", str(report)]) == EXIT_OK
    assert "T=4" in capsys.readouterr().out


def test_finesse_over_generated_instances(tmp_path, triangle_file):
    config = tmp_path / "config.json"
    report = tmp_path / "finesse.json"
    config.write_text(json.dumps({
        "problem": {"path": triangle_file},
        "sampling": {"n_traj": 4},
        "finesse": {"t_decays": [2], "instances": 2, "t_sim_factor": 5},
        "output": {"report": str(report)},
    }))
    assert main(["finesse", "--config", str(config)]) == EXIT_OK
    assert len(json.loads(report.read_text())["t_samp"]) == 2


def test_compare_writes_report(tmp_path, triangle_file, capsys):
    config = tmp_path / "config.json"
    report = tmp_path / "compare.json"
    config.write_text(json.dumps({
        "problem": {"path": triangle_file},
        "sampling": {"n_traj": 6, "t_sim": 15},
        "comparison": {"variants": [
            {"name": "gaussian", "alpha_values": [2.0, 5.0]},
            {"name": "coherent-state", "machine": {"mode": "coherent", "pump_r": 0.0}, "alpha_values": [5.0]},
        ]},
        "output": {"report": str(report)},
    }))
    assert main(["compare", "--config", str(config)]) == EXIT_OK
    data = json.loads(report.read_text())
    assert [v["name"] for v in data["variants"]] == ["gaussian", "coherent-state"]
    assert data["variants"][1]["machine"]["mode"] == "coherent"
    assert "Best max T_samp" in capsys.readouterr().out

    assert main(["explain", "--report", str(report)]) == EXIT_OK
    assert "coherent-state" in capsys.readouterr().out


def test_compare_rejects_duplicate_variant_names(tmp_path, triangle_file):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "problem": {"path": triangle_file},
        "comparison": {"variants": [
            {"name": "a", "alpha_values": [1.0]},
            {"name": "a", "alpha_values": [2.0]},
        ]},
    }))
    assert main(["compare", "--config", str(config)]) == EXIT_CONFIG


def test_compare_without_section(tmp_path, triangle_file):
    assert main(["compare", "--problem", triangle_file, "--out", str(tmp_path / "c.json")]) == EXIT_CONFIG
