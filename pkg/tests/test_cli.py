import json

import numpy as np
import pytest

from ripscover.cli import ExperimentConfig, main
from ripscover.homology import Barcode


def run(args, capsys=None):
    return main([str(a) for a in args])


def test_generate_outputs(tmp_path):
    out = tmp_path / "t.csv"
    assert run(["generate", "torus", "--n", 500, "--winding", 25, "--out", out]) == 0
    assert np.loadtxt(out, delimiter=",").shape == (500, 4)
    meta = json.loads((tmp_path / "t.csv.meta.json").read_text())
    assert meta["generator"] == {"kind": "torus", "n": 500, "winding": 25}
    out = tmp_path / "k.csv"
    assert run(["generate", "klein", "--d", 2, "--out", out]) == 0
    assert np.loadtxt(out, delimiter=",").shape == (1000, 9)
    assert "seed" in json.loads((tmp_path / "k.csv.meta.json").read_text())["config"]


def test_config_roundtrip():
    cfg = ExperimentConfig(generator={"kind": "torus", "n": 10}, cover={"type": "knn", "k": 3}, r_max=float("inf"),
                           max_hom_dim=2, p=3, gamma=0.4)
    assert ExperimentConfig.loads(cfg.dumps()) == cfg
    assert ExperimentConfig.loads(cfg.dumps()).dumps() == cfg.dumps()


def test_persist_trivial_equals_full(tmp_path):
    pts = tmp_path / "p.csv"
    np.savetxt(pts, np.random.default_rng(0).random((10, 2)), delimiter=",")
    assert run(["persist", "--input", pts, "--out-dir", tmp_path / "a"]) == 0
    assert run(["persist", "--input", pts, "--full", "--out-dir", tmp_path / "b"]) == 0
    assert (tmp_path / "a" / "barcode.json").read_bytes() == (tmp_path / "b" / "barcode.json").read_bytes()
    assert (tmp_path / "a" / "diagram.svg").exists() and (tmp_path / "a" / "barcode.csv").exists()


def test_persist_deterministic_with_config(tmp_path):
    pts = tmp_path / "p.csv"
    np.savetxt(pts, np.random.default_rng(1).random((30, 3)), delimiter=",")
    cfg = tmp_path / "cfg.json"
    assert run(["persist", "--input", pts, "--cover", "landmark", "--c", 1.0, "--out-dir", tmp_path / "a",
                "--save-config", cfg]) == 0
    assert run(["persist", "--config", cfg, "--out-dir", tmp_path / "b"]) == 0
    assert (tmp_path / "a" / "barcode.json").read_bytes() == (tmp_path / "b" / "barcode.json").read_bytes()
    assert "c > 1" in json.loads((tmp_path / "a" / "report.json").read_text())["certificate"]


def test_persist_torus_landmark(tmp_path, capsys):
    pts = tmp_path / "t.csv"
    run(["generate", "torus", "--out", pts])
    assert run(["persist", "--input", pts, "--cover", "landmark", "--c", 1, "--max-hom-dim", 2,
                "--out-dir", tmp_path / "o"]) == 0
    assert json.loads(capsys.readouterr().out.strip().splitlines()[-1])["prominent"] == [1, 2, 1]


def test_thresholds_compare_certify(tmp_path, capsys):
    pts = tmp_path / "p.csv"
    np.savetxt(pts, np.random.default_rng(2).random((25, 2)), delimiter=",")
    th = tmp_path / "th.json"
    assert run(["thresholds", "--input", pts, "--cover", "knn", "--k", 5, "--out", th]) == 0
    doc = json.loads(th.read_text())
    assert {"R1", "R2", "R3", "witness_R1"} <= set(doc)
    common = ["--input", pts, "--cover", "knn", "--k", 5, "--r-max", "inf"]
    run(["persist", *common, "--out-dir", tmp_path / "c"])
    run(["persist", "--input", pts, "--full", "--r-max", "inf", "--out-dir", tmp_path / "f"])
    out = tmp_path / "cmp.json"
    assert run(["compare", "--full", tmp_path / "f" / "barcode.json", "--covered", tmp_path / "c" / "barcode.json",
                "--thresholds", th, "--out", out]) == 0
    rep = json.loads(out.read_text())
    assert rep["interleaving"]["passed"] and set(rep["bottleneck"]) == {"0", "1"}
    assert run(["certify", "--input", pts, "--alpha", 3, "--out", tmp_path / "cert.json"]) == 0
    assert json.loads((tmp_path / "cert.json").read_text())["c"] == 3.0


def test_exit_codes(tmp_path, capsys):
    pts = tmp_path / "p.csv"
    np.savetxt(pts, np.random.default_rng(3).random((130, 2)), delimiter=",")
    assert run(["thresholds", "--input", pts, "--cover", "knn", "--k", 3]) == 4
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ResourceCapError" and err["counts"]["points"] == 130
    assert run(["certify", "--input", pts, "--c", 1]) == 2
    assert run(["persist", "--input", tmp_path / "missing.csv"]) == 3
    assert run(["persist", "--input", pts, "--cover", "pullback", "--coord", 5, "--out-dir", tmp_path / "pb"]) == 2
    assert run(["bogus"]) == 2
    assert run(["persist", "--input", pts, "--r-max", 10, "--max-cells", 50,
                "--out-dir", tmp_path / "cap"]) == 4


def test_compare_field_mismatch(tmp_path, capsys):
    a = Barcode.from_intervals([(0, 0, 1)], p=2, max_hom_dim=1)
    b = Barcode.from_intervals([(0, 0, 1)], p=3, max_hom_dim=1)
    a.write_json(tmp_path / "a.json")
    b.write_json(tmp_path / "b.json")
    assert run(["compare", "--full", tmp_path / "a.json", "--covered", tmp_path / "b.json"]) == 2
