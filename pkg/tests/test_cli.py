import csv
import json
import shutil
import subprocess

import pytest

from dpdgauss.cli import run_cli


@pytest.fixture
def one_obs(tmp_path):
    p = tmp_path / "one_obs_2.csv"
    p.write_text("2\n")
    return str(p)


def _run(argv, capsys):
    code = run_cli(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_test_subcommand(one_obs, capsys):
    code, out, _ = _run(["test", "--model", "exponential", "--null", "2", "--tau", "0", "--alpha", "0.05",
                         "--data", one_obs, "--json"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["statistic"] == pytest.approx(1 / 3, rel=1e-12)
    assert rep["reject"] is False
    assert rep["critical_value"] == pytest.approx(3.84146, abs=5e-6)
    code, out, _ = _run(["test", "--model", "exponential", "--null", "2", "--data", one_obs], capsys)
    assert "statistic:      0.333333" in out and "reject:         false" in out


def test_mdpde_beta_flag(tmp_path, capsys):
    p = tmp_path / "d.csv"
    p.write_text("y\n3\n3\n2\n4\n")
    code, out, _ = _run(["test", "--model", "exponential", "--null", "2", "--mdpde-beta", "0", "--data", str(p),
                         "--json"], capsys)
    assert code == 0 and json.loads(out)["statistic"] == pytest.approx(1.0, rel=1e-12)


def test_estimate_subcommand(one_obs, capsys):
    code, out, _ = _run(["estimate", "--model", "exponential", "--tau", "0", "--data", one_obs, "--json"], capsys)
    assert code == 0
    assert json.loads(out)["theta_hat"][0] == pytest.approx(1.2360680, abs=1e-7)


def test_estimate_with_constraint(tmp_path, capsys):
    p = tmp_path / "d.csv"
    p.write_text("0\n2\n")
    code, out, _ = _run(["estimate", "--model", "normal1d", "--tau", "0", "--data", str(p),
                         "--constraint", "fix:2=1", "--json"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["theta_hat"] == pytest.approx([1.0, 1.0], abs=1e-10)
    assert rep["method"] == "rmdpdge" and len(rep["lambda"]) == 1


def test_influence_subcommand(tmp_path, capsys):
    out_path = tmp_path / "if.csv"
    code, _, _ = _run(["influence", "--model", "exponential", "--theta", "4", "--tau", "0,0.2,0.8",
                       "--grid", "0:15:100", "--out", str(out_path)], capsys)
    assert code == 0
    rows = list(csv.reader(open(out_path)))
    assert rows[0] == ["y", "tau", "if_1"] and len(rows) == 301


def test_simulate_round_trip(tmp_path, capsys):
    cfg = tmp_path / "sim.toml"
    cfg.write_text('test = "rao_tau"\nparam_grid = [0.0, 0.3]\nn_list = [20]\neps_list = [0.0, 0.1]\n')
    for d in ("a", "b"):
        code, _, _ = _run(["simulate", "--config", str(cfg), "--out", str(tmp_path / d), "--reps", "500",
                           "--seed", "4"], capsys)
        assert code == 0
    a = (tmp_path / "a" / "simulation.csv").read_bytes()
    assert a == (tmp_path / "b" / "simulation.csv").read_bytes()
    assert a.decode().splitlines()[0] == "test,param,n,eps,theta_true,rate,mc_se,reps,failures"


def test_reproduce_subcommand(tmp_path, capsys):
    code, out, _ = _run(["reproduce-tables", "--out", str(tmp_path), "--reps", "100"], capsys)
    assert code == 0 and "diff_report.md" in out


def test_header_and_malformed_rows(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("x\n1\n2\nabc\n")
    code, _, err = _run(["test", "--model", "exponential", "--null", "2", "--data", str(p)], capsys)
    assert code == 1 and ":4:" in err
    p.write_text("1,2\n3\n")
    code, _, err = _run(["test", "--model", "mvnormal", "--null", "0,0,1,0,1", "--data", str(p)], capsys)
    assert code == 1 and ":2:" in err


def test_exit_codes(tmp_path, one_obs, capsys):
    with pytest.raises(SystemExit) as info:
        run_cli(["test", "--model", "exponential", "--bogus", "1"])
    assert info.value.code == 1
    assert "usage" in capsys.readouterr().err
    code, _, _ = _run(["test", "--model", "exponential", "--null", "2", "--data", str(tmp_path / "nope.csv")], capsys)
    assert code == 3
    code, _, err = _run(["test", "--model", "exponential", "--null", "-2", "--data", one_obs], capsys)
    assert code == 2 and "DomainError" in err
    code, _, _ = _run(["test", "--model", "exponential", "--null", "2", "--alpha", "2", "--data", one_obs], capsys)
    assert code == 1
    code, _, _ = _run(["estimate", "--model", "normal1d", "--tau", "0", "--data", one_obs, "--constraint", "fix:3=1"],
                      capsys)
    assert code == 1
    code, _, _ = _run(["simulate", "--config", str(tmp_path / "none.toml"), "--out", str(tmp_path)], capsys)
    assert code == 3


def test_nonconvergence_exit_code(tmp_path, capsys):
    p = tmp_path / "d.csv"
    p.write_text("1,1\n1,1\n1,1\n")
    code, _, err = _run(["estimate", "--model", "mvnormal", "--tau", "0.3", "--data", str(p)], capsys)
    assert code == 2 and "NotSPD" in err


@pytest.mark.skipif(shutil.which("dpdg") is None, reason="console script not installed")
def test_console_script(one_obs):
    out = subprocess.run(["dpdg", "test", "--model", "exponential", "--null", "2", "--data", one_obs, "--json"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["reject"] is False
