import json
import subprocess
import sys

import numpy as np
import pytest

from ftgcl.cli import run
from ftgcl.graph import Graph, Dataset, planted_partition, save_dataset


@pytest.fixture
def data_dir(tmp_path):
    ds = planted_partition(2, 12, 0.5, 0.05, 4, 0.4, seed=0)
    save_dataset(ds, tmp_path / "data")
    return tmp_path / "data"


def test_demo_barbell(tmp_path):
    out = tmp_path / "emb.csv"
    assert run(["demo-barbell", "--m1", "6", "--m2", "2", "--out", str(out)]) == 0
    R = np.loadtxt(out, delimiter=",")
    assert R.shape[0] == 14
    for group in ([0, 1, 2, 3, 4, 9, 10, 11, 12, 13], [5, 8], [6, 7]):
        assert all(np.array_equal(R[group[0]], R[v]) for v in group)


def test_demo_barbell_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["demo-barbell", "--out", str(a)]) == 0
    assert run(["demo-barbell", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_usage_errors_exit_2(capsys):
    assert run(["--bogus"]) == 2
    assert run(["train", "--data", "x"]) == 2
    assert run([]) == 2


def test_runtime_errors_exit_1(tmp_path, capsys):
    assert run(["eval", "--data", str(tmp_path / "missing"), "--task", "homophily",
                "--out", str(tmp_path / "m.json")]) == 1
    assert "error" in capsys.readouterr().err


def test_homophily_all_intra(tmp_path):
    g = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5)])
    save_dataset(Dataset(g, np.eye(6), np.array([0, 0, 0, 1, 1, 1])), tmp_path / "d")
    out = tmp_path / "m.json"
    assert run(["eval", "--data", str(tmp_path / "d"), "--task", "homophily", "--out", str(out)]) == 0
    metrics = json.loads(out.read_text())
    assert metrics["homophily"] == 1.0
    assert {"task", "accuracy", "macro_f1", "auc", "ap", "homophily", "seed", "split"} <= set(metrics)


def test_full_pipeline(data_dir, tmp_path):
    views = tmp_path / "views"
    assert run(["gen-views", "--data", str(data_dir), "--kmax", "3", "--gamma", "5",
                "--walk-len", "4", "--basis", "10", "--out", str(views)]) == 0
    for name in ("fpg.tsv", "tpg.tsv", "topo_embedding.csv", "views.json"):
        assert (views / name).is_file()
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"d": 8, "d_prime": 8, "iterations": 5, "k_max": 3}))
    ckpt = tmp_path / "run" / "ckpt.json"
    assert run(["train", "--data", str(data_dir), "--views", str(views), "--variant", "ft",
                "--config", str(cfg), "--out", str(ckpt)]) == 0
    log = [json.loads(line) for line in (tmp_path / "run" / "train_log.jsonl").read_text().splitlines()]
    assert [r["step"] for r in log] == [1, 2, 3, 4, 5]
    assert [r["space"] for r in log] == ["feature", "topology", "feature", "topology", "feature"]
    splits = tmp_path / "splits.json"
    splits.write_text(json.dumps({"train": list(range(0, 24, 3)), "test": list(range(1, 24, 3))}))
    out = tmp_path / "cls.json"
    assert run(["eval", "--data", str(data_dir), "--ckpt", str(ckpt), "--task", "classify",
                "--splits", str(splits), "--out", str(out)]) == 0
    m = json.loads(out.read_text())
    assert 0.0 <= m["accuracy"] <= 1.0 and 0.0 <= m["macro_f1"] <= 1.0
    out = tmp_path / "lp.json"
    assert run(["eval", "--data", str(data_dir), "--ckpt", str(ckpt), "--task", "linkpred",
                "--out", str(out)]) == 0
    m = json.loads(out.read_text())
    assert 0.0 <= m["auc"] <= 1.0 and 0.0 <= m["ap"] <= 1.0
    out = tmp_path / "h.json"
    assert run(["eval", "--data", str(data_dir), "--task", "homophily", "--views", str(views),
                "--k", "2", "--out", str(out)]) == 0
    m = json.loads(out.read_text())
    assert 0.0 <= m["homophily_feature"] <= 1.0 and m["view_k"] == 2


def test_config_flags_override_file(data_dir, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"d": 8, "d_prime": 8, "iterations": 5, "k_max": 3, "basis": 10,
                               "gamma": 4, "walk_len": 3}))
    ckpt = tmp_path / "ckpt.json"
    assert run(["train", "--data", str(data_dir), "--config", str(cfg), "--iterations", "2",
                "--variant", "f", "--out", str(ckpt)]) == 0
    assert len((tmp_path / "train_log.jsonl").read_text().splitlines()) == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ftgcl.cli", "demo-barbell", "--out", str(tmp_path / "e.csv")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
