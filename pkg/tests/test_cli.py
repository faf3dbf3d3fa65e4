import json

import pytest

from dfrgrad import dataset as D
from dfrgrad.cli import EXIT_DATA, EXIT_DIVERGED, EXIT_USAGE, main
from dfrgrad.trainer import TrainedModel


@pytest.fixture
def data_file(tmp_path):
    path = tmp_path / "d.json"
    assert main(["synth", "--per-class", "4", "--T", "12", "--noise", "0.05", "--seed", "2", "--out", str(path)]) == 0
    return path


def test_synth_writes_loadable_dataset(data_file):
    ds = D.load_dataset(data_file)
    assert len(ds.train) == 8 and ds.max_length == 12


def test_train_then_eval(data_file, tmp_path, capsys):
    model_path = tmp_path / "m.json"
    rc = main(["train", "--data", str(data_file), "--nx", "4", "--epochs", "2", "--betas", "1e-2,1", "--out", str(model_path)])
    assert rc == 0
    model = TrainedModel.load(model_path)
    assert model.norm is not None and model.beta in (1e-2, 1.0)
    out_json = tmp_path / "e.json"
    assert main(["eval", "--model", str(model_path), "--data", str(data_file), "--json", str(out_json)]) == 0
    assert "test accuracy" in capsys.readouterr().out
    assert 0.0 <= json.loads(out_json.read_text())["accuracy"] <= 1.0


def test_gridsearch_outputs(data_file, tmp_path, capsys):
    csv_path, json_path = tmp_path / "g.csv", tmp_path / "g.json"
    rc = main(["gridsearch", "--data", str(data_file), "--nx", "4", "--divisions", "2", "--csv", str(csv_path), "--json", str(json_path)])
    assert rc == 0
    assert len(csv_path.read_text().splitlines()) == 5
    assert json.loads(json_path.read_text())["divisions"] == 2
    assert "best A=" in capsys.readouterr().out


def test_gridsearch_escalation(data_file, capsys):
    assert main(["gridsearch", "--data", str(data_file), "--nx", "4", "--escalate", "--target", "0", "--max-div", "2"]) == 0
    assert "reached at D=1" in capsys.readouterr().out


def test_gradcheck_command(capsys, tmp_path):
    out = tmp_path / "gc.json"
    assert main(["gradcheck", "--trials", "10", "--json", str(out)]) == 0
    assert "max relative error" in capsys.readouterr().out
    assert json.loads(out.read_text())["failures"] == []


def test_memreport(capsys):
    assert main(["memreport", "--T", "152", "--nx", "30", "--ny", "2"]) == 0
    assert "naive 7352, simplified 2852" in capsys.readouterr().out
    assert main(["memreport", "--table"]) == 0
    assert "WALK" in capsys.readouterr().out


def test_experiment_command(data_file, tmp_path):
    out = tmp_path / "x.json"
    rc = main(["experiment", "--data", str(data_file), "--nx", "4", "--epochs", "1", "--max-div", "2", "--json", str(out)])
    assert rc == 0
    assert "bp_accuracy" in json.loads(out.read_text())


def run_exit(argv):
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["memreport", "--T", "x"],
        ["memreport", "--T", "10"],
        ["train", "--data", "d.json", "--betas", "a,b"],
        ["gridsearch", "--data", "d.json"],
        ["gridsearch", "--data", "d.json", "--escalate"],
    ],
)
def test_usage_exit_code(argv, data_file, monkeypatch):
    monkeypatch.chdir(data_file.parent)
    assert run_exit(argv) == EXIT_USAGE


def test_data_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"name": "x"}')
    assert run_exit(["train", "--data", str(bad)]) == EXIT_DATA
    assert run_exit(["train", "--data", str(tmp_path / "missing.json")]) == EXIT_DATA


def test_divergence_exit_code(tmp_path):
    series = [[1e200]] * 6
    doc = {
        "name": "huge",
        "n_features": 1,
        "n_classes": 2,
        "splits": {
            "train": [{"label": i % 2, "series": series} for i in range(4)],
            "test": [{"label": 0, "series": series}],
        },
    }
    path = tmp_path / "huge.json"
    path.write_text(json.dumps(doc))
    assert run_exit(["train", "--data", str(path), "--no-normalize", "--nx", "3", "--epochs", "1"]) == EXIT_DIVERGED
