import json
import math
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from mrfselect import ProblemDims, Sample
from mrfselect.cli import main
from mrfselect.io import export_csv, load_schema

CHAIN_MODEL = "3 2\n1 0.2 0\n2 -0.1 0\n3 0.3 0\n1 2 1 0 0 1\n2 3 1 0 0 1\n"


def _validate(path, schema):
    doc = json.loads(path.read_text())
    jsonschema.validate(doc, load_schema(schema))
    return doc


@pytest.fixture
def chain_file(tmp_path):
    p = tmp_path / "chain.txt"
    p.write_text(CHAIN_MODEL)
    return p


def test_estimate_copy_columns(tmp_path):
    rng = np.random.default_rng(0)
    col = rng.integers(0, 2, 500)
    export_csv(Sample(ProblemDims(2, 2), np.stack([col, col], 1)), tmp_path / "s.csv")
    out = tmp_path / "out"
    assert main(["estimate", "--input", str(tmp_path / "s.csv"), "--out-dir", str(out)]) == 0
    dot = (out / "graph.dot").read_text()
    assert [ln.strip() for ln in dot.splitlines() if "--" in ln] == ["1 -- 2;"]
    rep = _validate(out / "report.json", "estimate_report")
    assert rep["edges"] == [[1, 2]]
    assert rep["neighborhoods"] == {"1": [2], "2": [1]}
    assert abs(rep["loglik"] - rep["lambda"] * rep["penalty_units"] - rep["score"]) <= 1e-9
    assert rep["config"]["c"] == 1.0 and rep["search"]["mode"] == "exhaustive"


def test_estimate_identical_rows(tmp_path):
    (tmp_path / "s.csv").write_text("1,0,1\n" * 30)
    assert main(["estimate", "--input", str(tmp_path / "s.csv"), "--out-dir", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "report.json").read_text())["edges"] == []


def test_greedy_and_exhaustive_agree_d3(tmp_path, chain_file):
    assert main(["simulate", "--model", str(chain_file), "--n", "4096", "--seed", "3", "--out-dir", str(tmp_path)]) == 0
    edges = {}
    for mode in ("exhaustive", "greedy", "anneal"):
        out = tmp_path / mode
        assert main(["estimate", "--input", str(tmp_path / "sample.csv"), "--mode", mode, "--out-dir", str(out)]) == 0
        edges[mode] = _validate(out / "report.json", "estimate_report")["edges"]
    assert edges["exhaustive"] == edges["greedy"] == edges["anneal"] == [[1, 2], [2, 3]]


def test_simulate_header_and_reproducible(tmp_path, chain_file):
    args = ["simulate", "--model", str(chain_file), "--n", "300", "--kind", "lazy_refresh", "--rho", "0.4"]
    assert main(args + ["--out-dir", str(tmp_path / "a"), "--has-header"]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "b"), "--has-header"]) == 0
    a = (tmp_path / "a" / "sample.csv").read_bytes()
    assert a == (tmp_path / "b" / "sample.csv").read_bytes()
    assert a.startswith(b"x1,x2,x3\n")


def test_sweep_fractions_partition(tmp_path, chain_file):
    argv = ["consistency-sweep", "--model", str(chain_file), "--n-grid", "64,256", "--replications", "6",
            "--out-dir", str(tmp_path)]
    assert main(argv) == 0
    rep = _validate(tmp_path / "sweep.json", "sweep_report")
    assert rep["true_edges"] == [[1, 2], [2, 3]]
    assert len(rep["rows"]) == 4
    for row in rep["rows"]:
        assert math.isclose(row["recovery"] + row["overfit"] + row["underfit"], 1.0)
    csv_lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert csv_lines[0] == "kind,n,replications,recovery,overfit,underfit" and len(csv_lines) == 5


def test_independent_model_sweep_recovers_empty(tmp_path):
    (tmp_path / "ind.txt").write_text("3 2\n1 0.3 0\n")
    argv = ["consistency-sweep", "--model", str(tmp_path / "ind.txt"), "--n-grid", "256,16384",
            "--replications", "20", "--out-dir", str(tmp_path)]
    assert main(argv) == 0
    rows = json.loads((tmp_path / "sweep.json").read_text())["rows"]
    assert all(r["recovery"] >= 0.9 for r in rows if r["n"] == 16384)


def test_envelope_and_diagnose(tmp_path, chain_file):
    assert main(["envelope", "--model", str(chain_file), "--n-grid", "256,1024", "--replications", "5",
                 "--out-dir", str(tmp_path)]) == 0
    env = _validate(tmp_path / "envelope.json", "envelope_report")
    assert env["n_grid"] == [256, 1024] and len(env["seeds"]) == 5
    assert main(["simulate", "--model", str(chain_file), "--n", "2000", "--out-dir", str(tmp_path)]) == 0
    assert main(["diagnose", "--input", str(tmp_path / "sample.csv"), "--max-lag", "5",
                 "--out-dir", str(tmp_path)]) == 0
    diag = _validate(tmp_path / "diagnose.json", "diagnose_report")
    assert diag["lags"] == [1, 2, 3, 4, 5]


@pytest.mark.parametrize(
    "extra",
    [["--c", "0"], ["--c", "-1"], ["--mode", "beam"], ["--alphabet-size", "1"]],
)
def test_usage_errors_exit_2(tmp_path, extra):
    (tmp_path / "s.csv").write_text("0,1\n")
    with pytest.raises(SystemExit) as e:
        main(["estimate", "--input", str(tmp_path / "s.csv"), "--out-dir", str(tmp_path)] + extra)
    assert e.value.code == 2


def test_usage_errors_grid_and_rho(chain_file, tmp_path):
    for extra in (["--n-grid", "1,8"], ["--rho", "1.0"], ["--replications", "0"]):
        with pytest.raises(SystemExit) as e:
            main(["consistency-sweep", "--model", str(chain_file), "--out-dir", str(tmp_path)] + extra)
        assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["diagnose", "--input", "x.csv", "--max-lag", "0"])
    assert e.value.code == 2


def test_usage_error_max_lag_too_large(tmp_path, capsys):
    (tmp_path / "s.csv").write_text("0,1\n1,0\n" * 10)
    assert main(["diagnose", "--input", str(tmp_path / "s.csv"), "--max-lag", "5", "--out-dir", str(tmp_path)]) == 2
    err = json.loads(capsys.readouterr().err)
    jsonschema.validate(err, load_schema("error"))


def test_data_errors_exit_3(tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("0,1\n1\n")
    assert main(["estimate", "--input", str(tmp_path / "bad.csv"), "--out-dir", str(tmp_path)]) == 3
    err = _validate(tmp_path / "error.json", "error")
    assert err["error"] == "FormatError" and err["exit_code"] == 3
    assert json.loads(capsys.readouterr().err) == err
    assert main(["estimate", "--input", str(tmp_path / "none.csv"), "--out-dir", str(tmp_path)]) == 3
    (tmp_path / "big.csv").write_text("0,3\n")
    assert main(["estimate", "--input", str(tmp_path / "big.csv"), "--alphabet-size", "2",
                 "--out-dir", str(tmp_path)]) == 3
    (tmp_path / "m.txt").write_text("2 2\n1 0\n")
    assert main(["simulate", "--model", str(tmp_path / "m.txt"), "--n", "5", "--out-dir", str(tmp_path)]) == 3


def test_computation_error_exit_4(tmp_path):
    # 9 vertices -> 36 edge slots, beyond the exhaustive enumeration cap
    (tmp_path / "wide.csv").write_text("0,1,0,1,0,1,0,1,0\n1,0,1,0,1,0,1,0,1\n")
    assert main(["estimate", "--input", str(tmp_path / "wide.csv"), "--out-dir", str(tmp_path)]) == 4
    assert _validate(tmp_path / "error.json", "error")["error"] == "EnumerationTooLarge"
    # greedy handles the same input
    assert main(["estimate", "--input", str(tmp_path / "wide.csv"), "--mode", "greedy",
                 "--out-dir", str(tmp_path)]) == 0


def test_module_entry_point(tmp_path):
    (tmp_path / "s.csv").write_text("0,1\n1,0\n0,1\n")
    proc = subprocess.run(
        [sys.executable, "-m", "mrfselect", "estimate", "--input", str(tmp_path / "s.csv"), "--out-dir", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "report.json").exists()
