import json

from libs.vare.io import read_pattern
from tools.vare_cli import estimate, experiment, simulate


def test_simulate_then_estimate(tmp_path, capsys):
    out = tmp_path / "x.txt"
    assert simulate.main(["--process", "poisson", "--model", "2", "--mu", "200", "--seed", "4", "--out", str(out)]) == 0
    assert read_pattern(out).meta["seed"] == 4
    capsys.readouterr()

    assert estimate.main(["--pattern", str(out), "--model", "2"]) == 0
    fields = capsys.readouterr().out.strip().split(",")
    assert len(fields) == 3

    assert estimate.main(["--pattern", str(out), "--model", "2", "--method", "mcle", "--grid", "30"]) == 0
    assert len(capsys.readouterr().out.strip().split(",")) == 4


def test_simulate_bad_window(tmp_path, capsys):
    code = simulate.main(["--window", "-1,-1..1", "--out", str(tmp_path / "x.txt")])
    assert code == 2
    assert "window" in capsys.readouterr().err


def test_estimate_missing_file(tmp_path):
    assert estimate.main(["--pattern", str(tmp_path / "none.txt"), "--model", "2"]) == 2


def test_estimate_negative_eps(tmp_path):
    assert estimate.main(["--pattern", str(tmp_path / "x.txt"), "--model", "2", "--eps", "-0.1"]) == 2


def test_estimate_singular_system(tmp_path, capsys):
    path = tmp_path / "one.txt"
    path.write_text("# d=2 window=-1,-1..1,1\n0.1 0.2\n")
    assert estimate.main(["--pattern", str(path), "--model", "2"]) == 1
    assert "error" in capsys.readouterr().err


def test_experiment_writes_table(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "study": "table",
                "replications": 3,
                "estimators": [{"method": "vare"}, {"method": "mcle", "grid": 20}],
            }
        )
    )
    out = tmp_path / "res" / "table.csv"
    est = tmp_path / "res" / "estimates.csv"
    assert experiment.main(["--config", str(cfg), "--out", str(out), "--estimates", str(est), "--seed", "2"]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("model,process,window,estimator,eps,R,succeeded,mse_1,mse_2")
    assert len(lines) == 3
    assert est.exists()


def test_experiment_requires_output(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"replications": 2}')
    assert experiment.main(["--config", str(cfg)]) == 2


def test_experiment_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{\n  "replications": 2,\n  "windos": []\n}')
    assert experiment.main(["--config", str(cfg), "--out", str(tmp_path / "t.csv")]) == 2
    assert "windos" in capsys.readouterr().err


def test_experiment_rejects_bad_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"replications": 2}')
    assert experiment.main(["--config", str(cfg), "--replications", "0", "--out", str(tmp_path / "t.csv")]) == 2
