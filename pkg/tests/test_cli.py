import json

import numpy as np
import pytest

from loghls.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_eval_optimizer(capsys):
    code, out, _ = run_cli(capsys, "eval", "optimizer:s=1")
    assert code == 0
    data = json.loads(out)
    assert abs(data["free_energy"]) <= 1e-6
    assert abs(data["mass"] - 1.0) <= 1e-6


def test_eval_gaussian(capsys):
    code, out, _ = run_cli(capsys, "eval", "gaussian:sigma=1")
    assert code == 0
    data = json.loads(out)
    assert data["free_energy"] == pytest.approx(0.115932, abs=1e-4)
    assert data["entropy_term"] == pytest.approx(-np.log(2 * np.pi) - 1.0, abs=1e-6)


def test_eval_bad_spec_exit_2(capsys):
    code, out, err = run_cli(capsys, "eval", "bad:spec")
    assert code == 2
    assert "invalid input" in err


def test_eval_deterministic_output(capsys):
    _, out1, _ = run_cli(capsys, "eval", "band-limited-random:seed=4,L=4,amplitude=0.2",
                         "--grid-n", "512")
    _, out2, _ = run_cli(capsys, "eval", "band-limited-random:seed=4,L=4,amplitude=0.2",
                         "--grid-n", "512")
    assert out1 == out2


def test_stability_planar(capsys):
    code, out, _ = run_cli(capsys, "stability", "gaussian:sigma=1")
    assert code == 0
    data = json.loads(out)
    cert = data["certificate"]
    assert cert["pass"] is True
    assert cert["constant"] == 0.125
    assert cert["gap"] > 0.09


def test_stability_circle(capsys):
    code, out, _ = run_cli(capsys, "stability", "circle-cos:eps=0.3")
    assert code == 0
    assert json.loads(out)["certificate"]["pass"] is True


def test_onofri_command(capsys):
    code, out, _ = run_cli(capsys, "onofri", "sphere-optimizer:t=1,n=(0,0,1)")
    assert code == 0
    data = json.loads(out)
    assert abs(data["onofri"]) <= 1e-6
    assert data["mean_u"] == pytest.approx(-0.626063, abs=1e-5)


def test_heatflow_command(tmp_path, capsys):
    csv = tmp_path / "heat.csv"
    code, out, _ = run_cli(capsys, "heatflow", "1+0.5*P1", "--T", "1",
                           "--csv", str(csv))
    assert code == 0
    data = json.loads(out)
    assert data["decay_pass"] is True
    assert data["dissipation"]["residual"] <= 1e-4
    header = csv.read_text().splitlines()[0]
    assert header == "t,free_energy,distance_L1,dissipation,mass_error"


def test_ks_command(tmp_path, capsys):
    csv = tmp_path / "ks.csv"
    code, out, _ = run_cli(capsys, "ks", "8pi*optimizer:s=1", "--T", "0.5",
                           "--samples", "6", "--csv", str(csv))
    assert code == 0
    data = json.loads(out)
    assert data["distance_bound_pass"] is True
    assert data["max_free_energy_increase_per_step"] <= 1e-8
    assert csv.exists()
    code, _, err = run_cli(capsys, "ks", "optimizer:s=1")
    assert code == 2


def test_duality_demo_command(capsys):
    code, out, _ = run_cli(capsys, "duality-demo")
    assert code == 0
    assert json.loads(out)["report"]["passed"] is True
    code, out, _ = run_cli(capsys, "duality-demo", "--dim", "2")
    assert code == 0


def test_suite_subset(capsys):
    code, out, _ = run_cli(capsys, "suite", "--ids", "A06,A07", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["all_pass"] is True
    assert [c["id"] for c in data["criteria"]] == ["A06", "A07"]


def test_suite_coarse_grid_fails(tmp_path, capsys):
    """A deliberately coarse grid makes the equality-case criterion fail
    with a nonzero exit (designed failure mode)."""
    cfg = tmp_path / "coarse.cfg"
    cfg.write_text("radial_n = 64\nradial_span = 3\ncart_n = 32\ncart_L = 4\n")
    code, out, err = run_cli(capsys, "suite", "--ids", "A01", "--json",
                             "--config", str(cfg))
    assert code == 1
    assert "failing criteria" in err


def test_out_file(tmp_path, capsys):
    path = tmp_path / "report.json"
    code, out, _ = run_cli(capsys, "eval", "optimizer:s=1", "--out", str(path))
    assert code == 0
    assert json.loads(path.read_text())["free_energy"] == pytest.approx(0.0, abs=1e-6)
