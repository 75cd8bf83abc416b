import csv
import io as _io
import math
import subprocess
import sys

import pytest

from gne import codec, io
from gne.cli import main
from gne.entropy import bernoulli_entropy
from gne.errors import ValidationError
from gne.models import ErBinary, generate
from gne.sweep import COLUMNS, SweepSpec, run_sweep, split_seeds, worker_count, write_csv


# --- sweeps ------------------------------------------------------------------------------

def test_er_binary_sweep_closed_form():
    rows = run_sweep(SweepSpec("er-binary", {"alpha": 2.0}, [10**3, 10**4, 10**5]))
    for r in rows:
        N = r["N"]
        # the row is the exact entropy, computed here independently
        assert r["nats"] == pytest.approx(N * (N - 1) / 2 * bernoulli_entropy(2 / N), rel=1e-12)
        assert r["normalized_rate"] == pytest.approx(r["nats"] / (N * math.log(N)), abs=1e-12)
        assert r["target_rate"] == 1.0


def test_er_binary_sweep_literal_identity():
    # literal tolerance; the exact value sits about 1/N below the closed form
    rows = run_sweep(SweepSpec("er-binary", {"alpha": 2.0}, [10**3, 10**4, 10**5]))
    for r in rows:
        assert abs(r["normalized_rate"] - (1 + (1 - math.log(2)) / math.log(r["N"]))) < 1e-9


@pytest.mark.parametrize("N", [3, 10, 1000, 123457])
def test_tree_uniform_sweep_exact(N):
    r = run_sweep(SweepSpec("tree-uniform", {}, [N]))[0]
    assert r["normalized_rate"] == pytest.approx((N - 2) / N, rel=1e-14)


def test_smallworld_gamma3_decreasing():
    rows = run_sweep(SweepSpec("smallworld", {"alpha": 1.0, "gamma": 3.0}, [101, 301, 501]))
    vals = [r["normalized_rate"] for r in rows]
    assert vals[0] > vals[1] > vals[2] > 0
    assert [r["N"] for r in rows] == [101**2, 301**2, 501**2]


def test_hybrid_sweep_rows_and_determinism(monkeypatch):
    monkeypatch.setenv("GNE_THREADS", "2")
    spec = SweepSpec("hybrid", {"alpha": 1.0, "beta": 2.0, "A": 2}, [200, 400], seeds=3,
                     root_seed=7, link_samples=4)
    a, b = run_sweep(spec), run_sweep(spec)
    assert a == b
    assert [r["N"] for r in a] == [200, 400]
    for r in a:
        assert r["model"] == "hybrid-ordered" and r["method"] == "monte_carlo"
        assert r["stderr"] > 0 and r["e_series"] > 0
        assert abs(r["nats"] - r["e_series"]) < 5 * r["stderr"] + 0.05 * r["e_series"]
        assert r["seeds"] == ";".join(map(str, split_seeds(7, r["N"], 3)))
    monkeypatch.setenv("GNE_THREADS", "1")
    assert run_sweep(spec) == a


def test_split_seeds_distinct_and_stable():
    s = split_seeds(1, 100, 5)
    assert len(set(s)) == 5 and s == split_seeds(1, 100, 5)
    assert set(s).isdisjoint(split_seeds(1, 101, 5))


def test_worker_count(monkeypatch):
    monkeypatch.setenv("GNE_THREADS", "1")
    assert worker_count(10) == 1
    monkeypatch.setenv("GNE_THREADS", "many")
    with pytest.raises(ValidationError):
        worker_count(10)
    monkeypatch.delenv("GNE_THREADS")
    assert worker_count(1) == 1


@pytest.mark.parametrize("spec", [
    SweepSpec("er-binary", {"alpha": 2.0}, [100, 100]),
    SweepSpec("er-binary", {"alpha": 2.0}, []),
    SweepSpec("er-binary", {}, [100]),
    SweepSpec("er-binary", {"alpha": 2.0}, [100], seeds=0),
    SweepSpec("nope", {}, [100]),
    SweepSpec("hybrid", {"alpha": 1.0, "beta": 2.0, "A": 2}, [100], ordered=False),
])
def test_sweep_validation(spec):
    with pytest.raises(ValidationError):
        run_sweep(spec)


def test_csv_written(tmp_path):
    path = tmp_path / "out.csv"
    rows = run_sweep(SweepSpec("tree-seq", {}, [10, 100], csv_path=str(path)))
    with open(path, newline="") as fh:
        back = list(csv.DictReader(fh))
    assert list(back[0]) == COLUMNS and len(back) == 2
    for r, b in zip(rows, back):
        assert float(b["normalized_rate"]) == r["normalized_rate"]
        assert b["stderr"] == "" and b["method"] == "exact"
    buf = _io.StringIO()
    write_csv(buf, rows)
    assert buf.getvalue() == path.read_text()


# --- CLI ---------------------------------------------------------------------------------

def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_gen_encode_decode(tmp_path, capsys):
    g, c, d = tmp_path / "g.gnv", tmp_path / "g.gnc", tmp_path / "d.gnv"
    base = ["--model", "er-named", "--N", "30", "--alpha", "1", "--beta", "2", "--A", "2", "--seed", "3"]
    assert run(["gen", *base, "--out", str(g)], capsys)[0] == 0
    code, out, _ = run(["encode", *base, "--in", str(g), "--out", str(c)], capsys)
    assert code == 0 and "payload_bits=" in out
    assert run(["decode", *base, "--in", str(c), "--out", str(d)], capsys)[0] == 0
    # equal as named graphs; the decoder numbers vertices in name order
    assert io.read_graph(d).same_as(io.read_graph(g))


def test_cli_hybrid_gen_and_decode_to_stdout(tmp_path, capsys):
    g, c = tmp_path / "h.gnv", tmp_path / "h.gnc"
    base = ["--model", "hybrid", "--N", "25", "--alpha", "1", "--beta", "2", "--A", "3"]
    assert run(["gen", *base, "--out", str(g)], capsys)[0] == 0
    assert run(["encode", *base, "--in", str(g), "--out", str(c)], capsys)[0] == 0
    code, out, _ = run(["decode", *base, "--in", str(c)], capsys)
    assert code == 0 and io.parse_graph(out).same_as(io.read_graph(g))


def test_cli_entropy_rate_const(capsys):
    code, out, _ = run(["entropy", "--model", "er-binary", "--N", "4", "--alpha", "2"], capsys)
    assert code == 0 and f"nats={6 * math.log(2)!r}" in out
    code, out, _ = run(["rate", "--model", "smallworld", "--alpha", "1", "--gamma", "2"], capsys)
    assert code == 0 and float(out) == 0.25
    code, out, _ = run(["rate", "--model", "hybrid", "--alpha", "1", "--beta", "2", "--A", "2",
                        "--unordered"], capsys)
    code2, out2, _ = run(["rate", "--model", "hybrid", "--alpha", "1", "--beta", "2", "--A", "2"], capsys)
    assert float(out) == pytest.approx(float(out2) - 1, abs=1e-15)
    code, out, _ = run(["const", "J", "1.0", "0"], capsys)
    name, a, k, val = out.strip().split(",")
    assert (name, a, k) == ("J", "1.0", "0") and float(val) == pytest.approx(1 - math.exp(-1))
    code, out, _ = run(["const", "kappa", "1"], capsys)
    assert float(out.split(",")[-1]) == pytest.approx(1 / (4 * math.log(1 + math.sqrt(2))), abs=1e-12)


def test_cli_sweep_csv(tmp_path, capsys):
    code, out, _ = run(["sweep", "--model", "er-binary", "--alpha", "2", "--N-list", "1e3,1e4"], capsys)
    assert code == 0
    rows = list(csv.DictReader(_io.StringIO(out)))
    assert [int(r["N"]) for r in rows] == [1000, 10000]


def test_cli_estimate_and_diag(capsys):
    code, out, _ = run(["estimate", "--model", "hybrid", "--N", "300", "--alpha", "1", "--beta", "2",
                        "--A", "2", "--link-samples", "4"], capsys)
    assert code == 0 and "e_series=" in out
    code, out, _ = run(["diag", "--model", "smallworld", "--n", "31", "--alpha", "1", "--gamma", "3",
                        "--edge-lengths"], capsys)
    assert code == 0 and "fraction_longer=" in out
    code, out, _ = run(["diag", "--model", "hybrid", "--N", "500", "--alpha", "1", "--beta", "2",
                        "--A", "2", "--collisions", "--pairs", "1000"], capsys)
    assert code == 0 and "duplicate_names=" in out
    code, out, _ = run(["diag", "--model", "er-named", "--N", "200", "--alpha", "1", "--beta", "2",
                        "--A", "2", "--name-similarity"], capsys)
    assert code == 0 and "per_edge_mean=" in out


def test_cli_extensions(tmp_path, capsys):
    p = tmp_path / "d.txt"
    p.write_text("N=3\n2 0\n2 1\n")
    code, out, _ = run(["extensions", "--in", str(p)], capsys)
    assert code == 0 and "count=2" in out
    code, out, _ = run(["extensions", "--in", str(p), "--bound", "1", "--alpha", "0"], capsys)
    assert code == 0 and "lower_bound_log=" in out


@pytest.mark.parametrize("argv,expected", [
    (["entropy", "--model", "er-binary", "--N", "10"], 2),
    (["entropy", "--model", "er-binary", "--N", "10", "--alpha", "20"], 2),
    (["entropy", "--model", "hybrid", "--N", "10", "--alpha", "1", "--beta", "2", "--A", "2"], 2),
    (["sweep", "--model", "er-binary", "--alpha", "2", "--N-list", "100,50"], 2),
    (["const", "J", "x", "1"], 2),
    (["decode", "--model", "er-binary", "--N", "5", "--alpha", "1", "--in", "/nonexistent/x"], 3),
    (["gen", "--model", "hamming", "--N", "40000", "--alpha", "1", "--beta", "2", "--A", "2", "--d", "0.25"], 4),
])
def test_cli_exit_codes(argv, expected, capsys):
    code, _, err = run(argv, capsys)
    assert code == expected
    assert err.count("\n") == 1 and err.startswith("gne ")


def test_cli_bad_files(tmp_path, capsys):
    g = tmp_path / "g.gnv"
    g.write_text("GNV1\nN=2 A=2 L=1\n0\n0\nE=0\n")
    code, _, err = run(["encode", "--model", "er-binary", "--N", "2", "--alpha", "1", "--in", str(g),
                        "--out", str(tmp_path / "x")], capsys)
    assert code == 3 and "line 4" in err
    c = tmp_path / "c.gnc"
    m = ErBinary(10, 1.0, seed=1)
    c.write_bytes(codec.encode(m, generate(m)).data)
    code, _, err = run(["decode", "--model", "er-named", "--N", "10", "--alpha", "1", "--beta", "2", "--A", "2",
                        "--in", str(c)], capsys)
    assert code == 3 and "does not match" in err
    d = tmp_path / "big.txt"
    d.write_text("N=30\n1 0\n")
    assert run(["extensions", "--in", str(d)], capsys)[0] == 4


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "gne", "rate", "--model", "er-binary", "--alpha", "2"],
                         capture_output=True, text=True, check=True)
    assert float(out.stdout) == 1.0
