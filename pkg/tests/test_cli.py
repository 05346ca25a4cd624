import hashlib
import json

import pytest

from hfes import __version__, cli
from hfes.data_io import write_dataset
from hfes.fixtures import PANEL_B, TWO_YEAR, headline_fixture

SPEC = """lambda_z = 1.0
lambda_u = 0.5
kappa_z = 0.8
kappa_u = 0.6

[phi_yd]
form = "quadratic"
b = 1.0
c = 0.25
"""

SIM = """kind = "potential"
n_policy = 40
n_control = 200

[policy]
lambda_u = 0.1
kappa_u = 0.1
sigma_e2 = 4.0
[policy.phi_yd]
form = "linear"
b = 0.99

[control]
sigma_e2 = 0.25
"""


@pytest.fixture
def fixture_csv(tmp_path):
    path = tmp_path / "fixture.csv"
    write_dataset(headline_fixture(**TWO_YEAR, bucket_variances=PANEL_B), path)
    return path


@pytest.fixture
def spec_toml(tmp_path):
    path = tmp_path / "quadratic-endog.toml"
    path.write_text(SPEC)
    return path


def run(argv, capsys):
    code = cli.run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_estimate_json(fixture_csv, capsys):
    code, out, _ = run(["estimate", "--input", fixture_csv, "--seed", 5], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["header"]["version"] == __version__
    assert payload["header"]["seed"] == 5
    assert len(payload["header"]["input_digest"]) == 16
    assert payload["n_policy"] == 74
    lo, hi = payload["ci95"]
    assert lo <= payload["slope"] <= hi


def test_estimate_hac(fixture_csv, capsys):
    code, out, _ = run(["estimate", "--input", fixture_csv, "--hac", 3], capsys)
    assert code == 0 and json.loads(out)["hac_bandwidth"] == 3


def test_seed_from_environment(fixture_csv, capsys, monkeypatch):
    monkeypatch.setenv("HFES_SEED", "4242")
    _, out, _ = run(["estimate", "--input", fixture_csv], capsys)
    assert json.loads(out)["header"]["seed"] == 4242


def test_sensitivity_outputs(fixture_csv, tmp_path, capsys):
    out_dir = tmp_path / "sens"
    argv = ["sensitivity", "--input", fixture_csv, "--rho-grid", "0,0.25,0.5", "--delta-grid", "0,1,8",
            "--reps", 500, "--seed", 7, "--out-dir", out_dir]
    assert run(argv, capsys)[0] == 0
    report = json.loads((out_dir / "report.json").read_text())
    assert len(report["cells"]) == 9 and report["header"]["seed"] == 7
    cells = (out_dir / "cells.csv").read_text().splitlines()
    assert cells[0].startswith("# tool=hfes") and "seed=7" in cells[0]
    assert cells[1] == "estimator,rho,delta,bias,mae,mse"
    stars = (out_dir / "delta_star.csv").read_text().splitlines()
    assert stars[1] == "rho,delta_star,sigma_d_star" and len(stars) == 5


def test_sensitivity_config_file(fixture_csv, tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("replications = 200\nrho_grid = 0, 1\ndelta_grid = 0\ncriterion = MAE\nrho_star = false\n")
    code, out, _ = run(["sensitivity", "--input", fixture_csv, "--config", cfg, "--seed", 1], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["config"]["criterion"] == "MAE" and payload["rho_star"] is None


def test_diagnose_outputs(fixture_csv, tmp_path, capsys):
    series = tmp_path / "series.csv"
    series.write_text("D,BC\n1,2\n2,4\n3,7\n")
    out_dir = tmp_path / "diag"
    code, _, _ = run(["diagnose", "--input", fixture_csv, "--series", f"D={series}:D",
                      "--series", f"BC={series}:BC", "--out-dir", out_dir], capsys)
    assert code == 0
    names = sorted(p.name for p in out_dir.iterdir())
    assert names == ["panel_a.csv", "panel_b.csv", "panel_c.csv", "variances.csv"]
    panel_b = (out_dir / "panel_b.csv").read_text().splitlines()
    assert panel_b[-3:] == ["1,2.5e-05", "2,5.2e-05", "3,4e-05"]
    for p in out_dir.iterdir():
        assert p.read_text().startswith("# tool=hfes")


def test_oracle_check_sweep(spec_toml, capsys):
    code, out, _ = run(["oracle-check", "--spec", spec_toml, "--sweep", "1,10,100,1000",
                        "--draws", 200000, "--seed", 3], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# tool=hfes")
    header = lines[1].split(",")
    deltas = [abs(float(line.split(",")[header.index("delta")])) for line in lines[2:]]
    assert len(deltas) == 4
    assert all(a > b for a, b in zip(deltas, deltas[1:]))


def test_simulate_round_trip(tmp_path, capsys):
    spec = tmp_path / "sim.toml"
    spec.write_text(SIM)
    out = tmp_path / "sim.csv"
    assert run(["simulate", "--spec", spec, "--out", out, "--seed", 1], capsys)[0] == 0
    assert out.read_text().startswith("# tool=hfes")
    code, text, _ = run(["estimate", "--input", out], capsys)
    assert code == 0 and json.loads(text)["n_policy"] == 40


def test_simulate_leakage(tmp_path, capsys):
    spec = tmp_path / "leak.toml"
    spec.write_text('kind = "leakage"\nn_paths = 2\nsigma_sched = [1, 1, 50]\nleak_mode = "Inverse"\ntheta = [0.5]\n')
    out = tmp_path / "leak.csv"
    assert run(["simulate", "--spec", spec, "--out", out], capsys)[0] == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "path,window,e" and len(lines) == 2 + 2 * 3


def test_report_markdown(fixture_csv, tmp_path, capsys):
    out = tmp_path / "report.md"
    assert run(["report", "--inputs", fixture_csv, "--reps", 200, "--out", out], capsys)[0] == 0
    text = out.read_text()
    assert text.startswith("<!-- tool=hfes")
    assert "| slope |" in text and "rho*" in text


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nonsense"],
        ["estimate"],
        ["sensitivity", "--input", "x.csv", "--criterion", "RMSE"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert "usage" in err


def test_validation_errors_exit_2(tmp_path, fixture_csv, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("date,y,d,label\n2020-01-01,1,NaN,Policy\n")
    assert run(["estimate", "--input", bad], capsys)[0] == 2
    assert run(["estimate", "--input", tmp_path / "missing.csv"], capsys)[0] == 2
    assert run(["sensitivity", "--input", fixture_csv, "--reps", 10], capsys)[0] == 2
    assert run(["sensitivity", "--input", fixture_csv, "--rho-grid", "0,abc"], capsys)[0] == 2
    spec = tmp_path / "bad.toml"
    spec.write_text("lambda_z = [")
    assert run(["oracle-check", "--spec", spec], capsys)[0] == 2


def test_runtime_errors_exit_1(fixture_csv, capsys, monkeypatch):
    def boom(args):
        raise RuntimeError("numerical trouble")

    monkeypatch.setattr(cli, "cmd_estimate", boom)
    code, _, err = run(["estimate", "--input", fixture_csv], capsys)
    assert code == 1 and "numerical trouble" in err


def test_inputs_not_mutated(fixture_csv, spec_toml, tmp_path, capsys):
    before = {p: hashlib.sha256(p.read_bytes()).hexdigest() for p in (fixture_csv, spec_toml)}
    run(["estimate", "--input", fixture_csv], capsys)
    run(["diagnose", "--input", fixture_csv, "--out-dir", tmp_path / "d"], capsys)
    run(["oracle-check", "--spec", spec_toml, "--draws", 1000], capsys)
    after = {p: hashlib.sha256(p.read_bytes()).hexdigest() for p in before}
    assert before == after


def test_main_exits_with_code(monkeypatch, fixture_csv):
    monkeypatch.setattr("sys.argv", ["hfes", "estimate", "--input", str(fixture_csv), "--out", "/dev/null"])
    with pytest.raises(SystemExit) as info:
        cli.main()
    assert info.value.code == 0
