import json

import numpy as np
import pytest

from sparsedep.cli import main


def _run(tmp_path, *args):
    return main(list(args) + ["--out", str(tmp_path)])


def test_figure1_cli(tmp_path, capsys):
    assert _run(tmp_path, "reproduce-figure1", "--replications", "2", "--seed", "3") == 0
    assert (tmp_path / "figure1.csv").exists() and (tmp_path / "figure1.svg").exists()
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["command"] == "reproduce-figure1"
    assert man["config"]["seed"] == 3 and man["config"]["replications"] == 2
    assert "lambda(g=0.2) = 0.0722" in capsys.readouterr().out


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("replications = 4\nvarthetas = 0.0\n")
    assert _run(tmp_path, "reproduce-figure1", "--config", str(cfg), "--replications", "2") == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["config"]["replications"] == 2 and man["config"]["varthetas"] == [0.0]


def test_calibrate_cli(tmp_path, capsys):
    assert _run(tmp_path, "calibrate") == 0
    out = capsys.readouterr().out
    assert "2.57467" in out
    lines = (tmp_path / "calibration.csv").read_text().splitlines()
    assert lines[0] == "quantity,value"


def test_rep_check_cli(tmp_path, capsys):
    gram = tmp_path / "m.csv"
    np.savetxt(gram, [[1, 0.5], [0.5, 1]], delimiter=",")
    assert _run(tmp_path, "rep-check", str(gram), "--s", "2") == 0
    est = json.loads((tmp_path / "rep_check.json").read_text())
    assert est["kappa"] == pytest.approx(0.75)
    assert "kappa = 0.75" in capsys.readouterr().out


def test_deviation_cli(tmp_path):
    assert _run(tmp_path, "deviation-check", "--n", "50", "--t", "1", "2") == 0
    assert (tmp_path / "deviation_check.csv").read_text().startswith("j,t,")


def test_oracle_cli(tmp_path):
    assert _run(tmp_path, "oracle-check", "--replications", "3") == 0
    assert (tmp_path / "oracle_check.csv").exists()


def test_density_cli(tmp_path):
    assert _run(tmp_path, "simulate-density", "--replications", "3") == 0
    for name in ("density_runs.csv", "density_truth.csv", "density_estimate.csv"):
        assert (tmp_path / name).exists()
    assert (tmp_path / "density_truth.csv").read_text().splitlines()[0] == "x,f"


def test_errors_exit_nonzero(tmp_path, capsys):
    assert _run(tmp_path, "rep-check", str(tmp_path / "missing.csv"), "--s", "2") == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense = 1\n")
    assert _run(tmp_path, "reproduce-figure1", "--config", str(bad)) == 2
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["reproduce-figure1", "--seed", "-1"])
