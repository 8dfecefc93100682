import numpy as np
import pytest

from viscolab import cli
from viscolab.iterate import SchemeConfig, Trajectory, run, z_proportional
from viscolab.report import DiagnosticReport, save_convergence_figure, write_lines
from viscolab.schedules import Schedule


def test_validate_conforming_preset(capsys):
    assert cli.main(["validate", "thm42_default"]) == 0
    out = capsys.readouterr().out
    assert "assumptions_4_1 pass" in out
    assert "assumption_4_1_9 pass" in out


def test_validate_nonconforming_preset(capsys):
    assert cli.main(["validate", "thm42_nonconforming"]) == 2
    assert "fail" in capsys.readouterr().out


def test_unknown_config_is_usage_error(capsys):
    assert cli.main(["validate", "no_such_preset"]) == 1
    assert "config error" in capsys.readouterr().err


def test_run_writes_outputs(tmp_path):
    out = tmp_path / "exp"
    code = cli.main(["run", "thm42_default", "--out", str(out),
                     "--horizon", "300"])
    assert code == 0
    assert (out / "thm42_default_trajectory.csv").is_file()
    assert (out / "thm42_default_convergence.png").is_file()
    summary = (out / "thm42_default_summary.txt").read_text()
    assert "steps=300" in summary


def test_run_coupled_writes_both_trajectories(tmp_path):
    out = tmp_path / "co"
    assert cli.main(["run", "coupled_equal", "--out", str(out)]) == 0
    assert (out / "coupled_equal_trajectory.csv").is_file()
    assert (out / "coupled_equal_aux_trajectory.csv").is_file()


def test_run_gates_nonconforming_without_force(tmp_path):
    out = tmp_path / "gated"
    assert cli.main(["run", "divergent_control", "--out", str(out)]) == 2
    assert not out.exists()


def test_run_divergence_exit_code(tmp_path):
    out = tmp_path / "dv"
    code = cli.main(["run", "divergent_control", "--out", str(out), "--force"])
    assert code == 3
    # the partial trajectory is still exported
    assert (out / "divergent_control_trajectory.csv").is_file()


def test_check_suite_pass(capsys):
    assert cli.main(["check", "thm42_default", "--suite", "thm42"]) == 0
    out = capsys.readouterr().out
    assert "thm42_i_permanence pass" in out
    assert "thm42_ii_residual pass" in out


def test_check_suite_fail_exit_code(capsys):
    code = cli.main(["check", "thm42_nonconforming", "--suite", "thm42",
                     "--force"])
    assert code == 4
    assert " fail " in capsys.readouterr().out


def test_check_unknown_suite(capsys):
    assert cli.main(["check", "thm21_scalar", "--suite", "bogus"]) == 1
    assert "unknown suite" in capsys.readouterr().err


def test_check_suite_kind_mismatch(capsys):
    assert cli.main(["check", "thm21_scalar", "--suite", "thm42"]) == 1
    assert "suite error" in capsys.readouterr().err


def test_halpern_preset_runs_to_fixed_point(tmp_path):
    out = tmp_path / "h"
    assert cli.main(["run", "halpern_basic", "--out", str(out)]) == 0
    data = np.genfromtxt(out / "halpern_basic_trajectory.csv", delimiter=",",
                         names=True)
    assert abs(data["x0"][-1] - 2.0) < 1e-6


def test_report_line_format():
    rep = DiagnosticReport("demo", "pass", {"gap": 0.5, "n": 3}, horizon=10,
                           tolerances={"tol": 1e-6}, notes=["two words"])
    line = rep.line()
    assert line.startswith("demo pass horizon=10 ")
    assert "gap=0.5" in line and "n=3" in line
    assert "tol:tol=1e-06" in line
    assert "notes=two_words" in line
    assert rep.ok
    assert not DiagnosticReport("demo", "fail").ok
    assert DiagnosticReport("demo", "pass-vacuous").ok


def test_write_lines_and_figure(tmp_path):
    reports = [DiagnosticReport("a", "pass"), DiagnosticReport("b", "fail")]
    path = tmp_path / "report.txt"
    write_lines(reports, path)
    assert path.read_text().splitlines() == [r.line() for r in reports]

    traj = run(SchemeConfig(kind="basic", horizon=50, x0=[1.0],
                            beta=Schedule("constant", c=0.5),
                            z_provider=z_proportional(0.5)))
    fig_path = tmp_path / "conv.png"
    save_convergence_figure(traj, fig_path)
    assert fig_path.stat().st_size > 0
