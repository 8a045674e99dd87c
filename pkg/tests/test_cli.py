import json

import pytest

from exstab.cli import main


@pytest.fixture(scope="module")
def cli_config(toy_dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli")
    config = {
        "dataset": str(toy_dataset),
        "out_dir": str(out / "results"),
        "train_docs": 150,
        "eval_docs": 2,
        "model_epochs": 40,
        "model_dim": 16,
        "m": 24,
        "permutations": 12,
        "levels": [0, 1],
        "seeds": [0],
    }
    path = out / "config.json"
    path.write_text(json.dumps(config))
    return path, out


def test_version(capsys):
    assert main(["version"]) == 0
    assert "exstab" in capsys.readouterr().out


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as excinfo:
        main(["compare", "--bogus"])
    assert excinfo.value.code == 2


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as excinfo:
        main(["frobnicate"])
    assert excinfo.value.code == 2


def test_train_then_explain(cli_config, capsys):
    config_path, out = cli_config
    model_dir = out / "model"
    assert main(["train", "--config", str(config_path), "--out", str(model_dir)]) == 0
    assert (model_dir / "model.npz").exists()
    assert (model_dir / "vocab.tsv").exists()
    capsys.readouterr()

    rc = main(
        [
            "explain",
            "--model",
            str(model_dir / "model.npz"),
            "--vocab",
            str(model_dir / "vocab.tsv"),
            "--method",
            "lime",
            "--text",
            "pos15a pos14b neg00a neg01c pos13d neg02b",
            "--m",
            "32",
        ]
    )
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("method=lime")
    scores = [float(line.split("\t")[0]) for line in lines[1:]]
    assert len(scores) == 6
    assert scores == sorted(scores, reverse=True)


def test_compare_writes_outputs(cli_config, capsys):
    config_path, out = cli_config
    assert main(["compare", "--config", str(config_path)]) == 0
    results = out / "results"
    assert (results / "records.csv").exists()
    assert (results / "summary.csv").exists()
    assert (results / "config.json").exists()
    assert "records" in capsys.readouterr().out


def test_conditioning_writes_kappa_csvs(tmp_path, capsys):
    rc = main(
        [
            "conditioning",
            "--lengths",
            "6,8",
            "--iters",
            "5",
            "--m",
            "24",
            "--out",
            str(tmp_path),
        ]
    )
    assert rc == 0
    assert (tmp_path / "kappa.csv").exists()
    assert (tmp_path / "kappa_bins.csv").exists()
    out = capsys.readouterr().out
    assert "l=6" in out and "l=8" in out


def test_missing_dataset_errors(tmp_path, capsys):
    config = tmp_path / "c.json"
    config.write_text(json.dumps({"dataset": str(tmp_path / "nope.tsv")}))
    assert main(["compare", "--config", str(config)]) == 1
    assert "error:" in capsys.readouterr().err
