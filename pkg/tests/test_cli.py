import hashlib
import json
import subprocess
import sys

import pytest

from percolab.cli import EXIT, main


def _sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_gen_tree_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["gen", "tree", "3", "12", "--out", str(a)]) == 0
    assert main(["gen", "tree", "3", "12", "--out", str(b)]) == 0
    for name in ("graph.txt", "gen.json"):
        assert _sha(a / name) == _sha(b / name)


def test_gen_map_euler(tmp_path):
    assert main(["gen", "tiling", "3", "7", "3", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "gen.json").read_text())
    assert doc["result"]["euler_characteristic"] == 2
    assert doc["provenance"]["version"]


def test_oracle_corpus_passes(tmp_path):
    assert main(["oracle", "--out", str(tmp_path)]) == EXIT["ok"]
    doc = json.loads((tmp_path / "oracle.json").read_text())
    assert doc["ok"] and doc["result"]["graphs"] >= 10
    assert (tmp_path / "oracle_golden.json").exists()


def test_oracle_cap_exit_code(tmp_path):
    assert main(["oracle", "--graph", "grid:5", "--out", str(tmp_path)]) == EXIT["oracle_cap"]


def test_exponent_two_point_window_refused(tmp_path):
    code = main(["exponent", "--graph", "tree:3:12", "--p", "0.5", "--samples", "2000",
                 "--set", "window=3,4", "--out", str(tmp_path)])
    assert code == EXIT["underpowered"] == 4


def test_usage_errors(tmp_path):
    assert main(["matrix", "--graph", "nope:1", "--out", str(tmp_path)]) == EXIT["usage"]
    assert main(["sample", "--graph", "tree:3:3", "--p", "1.5", "--out", str(tmp_path)]) == EXIT["usage"]
    assert main(["bogus"]) == EXIT["usage"]
    bad = tmp_path / "bad.txt"
    bad.write_text("graph t 2 1\n0 1\nend\n")
    assert main(["sample", "--graph", f"file:{bad}", "--out", str(tmp_path)]) == EXIT["graph"]


def test_exit_codes_distinct():
    assert len(set(EXIT.values())) == len(EXIT)


def test_config_overrides_flags_and_env_out(tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep settings\nsamples = 500\np = 0.3, 0.6\nn = 3\n")
    out = tmp_path / "envout"
    monkeypatch.setenv("PERCOLAB_OUT", str(out))
    assert main(["sweep", "--graph", "tree:3:6", "--p", "0.9", "--samples", "7", "--config", str(cfg)]) == 0
    doc = json.loads((out / "sweep.json").read_text())
    assert doc["provenance"]["spec"]["samples"] == 500
    assert [r[0] for r in doc["result"]["rows"]] == [0.3, 0.6]
    assert (out / "sweep.csv").exists() and (out / "sweep.gp").exists()


def test_matrix_and_sample_outputs(tmp_path):
    assert main(["matrix", "--graph", "grid:4", "--p", "0.5", "--q", "1,2,inf", "--set", "kind=C",
                 "--set", "source=mc", "--samples", "2000", "--format", "csv", "--out", str(tmp_path)]) == 0
    for name in ("matrix.bin", "matrix.bin.json", "matrix.csv", "matrix.json"):
        assert (tmp_path / name).exists()
    assert main(["sample", "--graph", "tree:3:5", "--p", "0.4", "--samples", "300", "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "samples.jsonl").read_text().splitlines()
    assert len(rows) == 300
    assert {"volume", "rad_int", "rad_ext", "touches_boundary", "graph", "seed"} <= set(json.loads(rows[0]))


def test_result_documents_worker_invariant(tmp_path):
    args = ["exponent", "--graph", "tree:3:10", "--p", "0.5", "--samples", "40000", "--seed", "3"]
    assert main(args + ["--workers", "1", "--out", str(tmp_path / "w1")]) == 0
    assert main(args + ["--workers", "2", "--out", str(tmp_path / "w2")]) == 0
    assert _sha(tmp_path / "w1" / "exponent.json") == _sha(tmp_path / "w2" / "exponent.json")


def test_exponent_on_infinite_tree(tmp_path):
    assert main(["exponent", "--graph", "infinite-tree:3", "--p", "0.5", "--samples", "20000",
                 "--set", "window=4,32", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "exponent.json").read_text())
    assert max(doc["result"]["grid"]) == 32


def test_duality_command(tmp_path):
    code = main(["duality", "--graph", "tiling:4:4:8", "--p", "0.4,0.45,0.5,0.55,0.6", "--samples", "10000",
                 "--set", "scan_samples=16", "--out", str(tmp_path)])
    assert code == 0
    doc = json.loads((tmp_path / "duality.json").read_text())
    assert "pu_transported" in doc["result"]["duality"]


@pytest.mark.parametrize("argv", [["--help"], ["gen", "--help"]])
def test_module_entry_point(argv):
    r = subprocess.run([sys.executable, "-m", "percolab", *argv], capture_output=True, text=True)
    assert r.returncode == 0 and "percolab" in r.stdout
