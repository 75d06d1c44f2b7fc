import csv
import json
import subprocess
import sys

import pytest

from neucgc import cli
from neucgc.trainer import TrainingError

TINY = ["--sbm-nodes", "45", "--dim", "8", "--epochs", "3", "--kmeans-restarts", "2"]


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_stats_golden(data_dir, capsys):
    for name in ("triangle", "path4"):
        assert run("stats", data_dir / name) == 0
        assert capsys.readouterr().out == (data_dir / name / "stats.golden").read_text()


def test_stats_missing_dir(tmp_path, capsys):
    assert run("stats", tmp_path / "nope") == cli.EXIT_INPUT
    assert "no recognizable dataset files" in capsys.readouterr().err


def test_module_entry_point(data_dir):
    out = subprocess.run(
        [sys.executable, "-m", "neucgc.cli", "stats", str(data_dir / "triangle")],
        capture_output=True, text=True, check=True,
    )
    assert out.stdout == (data_dir / "triangle" / "stats.golden").read_text()


def test_sbm_writes_loadable_dataset(tmp_path, capsys):
    assert run("sbm", tmp_path / "g", "--nodes", 30, "--p-out", 0) == 0
    assert capsys.readouterr().out.startswith("30\t")
    assert run("stats", tmp_path / "g") == 0
    row = capsys.readouterr().out.split("\t")
    assert row[0] == "30" and row[4] == "1.00"


def test_sbm_bad_probability(tmp_path):
    assert run("sbm", tmp_path / "g", "--p-in", 2) == cli.EXIT_INPUT


def test_train_separable_sbm(tmp_path, capsys):
    out = tmp_path / "run"
    code = run("train", *TINY, "--p-out", 0, "--feature-noise", 0.1, "--out", out, "--checkpoint")
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["seeds"]["0"]["metrics"]["acc"] == 1.0
    assert (out / "table.txt").read_text().splitlines()[1].startswith("100.0±0.0")
    spec = json.loads((out / "spec.json").read_text())
    assert spec["version"] and spec["seeds"] == [0]
    assert spec["config"]["latent_dim"] == 8
    assert (out / "seed_0" / "encoders.npz").is_file()
    with open(out / "curves.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["epoch"] for r in rows] == ["1", "2", "3"]
    with open(out / "homophily.csv") as fh:
        assert set(next(csv.DictReader(fh))) == {"seed", "epoch", "r_h_A", "r_h_H", "delta_A", "delta_H"}


def test_train_repeat_and_ablation(tmp_path):
    out = tmp_path / "run"
    assert run("train", *TINY, "--repeat", 2, "--lambda1", 0, "--lambda2", 0, "--out", out) == 0
    report = json.loads((out / "report.json").read_text())
    assert set(report["seeds"]) == {"0", "1"}
    assert set(report["mean"]) == {"acc", "nmi", "ari", "f1"}


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("# tiny run\nsbm-nodes = 45\ndim = 8\nepochs = 2\nlambda1 = 5\nkmeans_restarts = 1\n")
    out = tmp_path / "run"
    assert run("train", "--config", cfg, "--epochs", 1, "--out", out) == 0
    spec = json.loads((out / "spec.json").read_text())
    assert spec["config"]["epochs"] == 1
    assert spec["config"]["lambda1"] == 5.0
    assert spec["config"]["latent_dim"] == 8


@pytest.mark.parametrize("text", ["dim = eight\n", "unknown_key = 1\n", "no equals sign\n"])
def test_bad_config(tmp_path, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    assert run("train", "--config", cfg, "--out", tmp_path / "o") == cli.EXIT_INPUT


def test_invalid_train_config(tmp_path):
    assert run("train", *TINY, "--k", 0, "--out", tmp_path / "o") == cli.EXIT_INPUT


def test_missing_out(tmp_path):
    assert run("train", *TINY) == cli.EXIT_INPUT


def test_spec_replay_is_bit_identical(tmp_path):
    first = tmp_path / "a"
    assert run("train", *TINY, "--seed", 3, "--out", first) == 0
    second = tmp_path / "b"
    assert run("train", "--config", first / "spec.json", "--out", second) == 0
    assert (first / "seed_3" / "log.jsonl").read_bytes() == (second / "seed_3" / "log.jsonl").read_bytes()


def test_training_failure_exit_code(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise TrainingError("non-finite loss at epoch 1", {"epoch": 1})

    monkeypatch.setattr(cli, "train", boom)
    out = tmp_path / "run"
    assert run("train", *TINY, "--out", out) == cli.EXIT_TRAIN
    report = json.loads((out / "report.json").read_text())
    assert report["failed"] == [0]
    assert report["seeds"]["0"]["snapshot"] == {"epoch": 1}


def test_sweep_counts_and_partial_failure(tmp_path):
    out = tmp_path / "sweep"
    code = run("sweep", *TINY, "--epochs", 1, "--lambda1-grid", "0.1,1", "--k-grid", "0.5,1.5", "--out", out)
    assert code == cli.EXIT_PARTIAL
    with open(out / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    assert sorted(r["status"] for r in rows) == ["failed", "failed", "ok", "ok"]
    assert all(r["status"] == "failed" for r in rows if r["k"] == "1.5")


def test_sweep_single_cell_matches_train(tmp_path):
    assert run("train", *TINY, "--out", tmp_path / "t") == 0
    assert run("sweep", *TINY, "--out", tmp_path / "s") == 0
    train_log = (tmp_path / "t" / "seed_0" / "log.jsonl").read_bytes()
    assert (tmp_path / "s" / "cell_0000" / "seed_0" / "log.jsonl").read_bytes() == train_log
