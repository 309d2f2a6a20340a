import io
import subprocess
import sys

import numpy as np
import pytest

from tridecomp import example_tensor, random_triple
from tridecomp.cli import EXIT_NUMERIC, EXIT_USAGE, main
from tridecomp.io import load_factors, load_tns3, save_tns3


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def example_file(tmp_path):
    path = tmp_path / "example.tns3"
    save_tns3(path, example_tensor())
    return path


def test_tucker_rank_prints_444(example_file):
    code, out, _ = run("tucker-rank", "--input", example_file)
    assert code == 0
    assert out == "4 4 4\n"


def test_decompose_writes_factors_and_trace(tmp_path, example_file):
    code, out, _ = run(
        "decompose", "--input", example_file, "--rank", 2,
        "--out-factors", tmp_path / "f", "--out-trace", tmp_path / "t.csv",
    )
    assert code == 0
    err = float(out.split()[1])
    assert out.startswith("relative_error ") and err <= 1e-6
    factors = load_factors(tmp_path / "f")
    assert np.linalg.norm(factors.full() - example_tensor()) / np.linalg.norm(example_tensor()) == pytest.approx(err)
    meta = (tmp_path / "f" / "meta.txt").read_text()
    for key in ("method = triple", "rank = 2", "gamma = 1.5", "lambda = ", "relative_error = "):
        assert key in meta
    objective = [float(line.split(",")[1]) for line in (tmp_path / "t.csv").read_text().splitlines()[1:]]
    assert all(b <= a + 1e-10 * (1 + a) for a, b in zip(objective, objective[1:]))


@pytest.mark.parametrize("method", ["cp", "tucker"])
def test_decompose_baselines(tmp_path, method):
    X = np.einsum("i,j,t->ijt", [1.0, 2.0, 0.5], [1.0, -1.0, 2.0], [3.0, 1.0])
    save_tns3(tmp_path / "x.tns3", X)
    code, out, _ = run("decompose", "--input", tmp_path / "x.tns3", "--rank", 1, "--method", method,
                       "--out-factors", tmp_path / "f")
    assert code == 0 and float(out.split()[1]) <= 1e-6
    assert f"method = {method}" in (tmp_path / "f" / "meta.txt").read_text()


def test_explicit_lambda_is_used(tmp_path, example_file):
    code, _, _ = run("decompose", "--input", example_file, "--rank", 1, "--lambda", "0.25",
                     "--restarts", 1, "--out-factors", tmp_path / "f")
    assert code == 0
    assert "lambda = 0.25" in (tmp_path / "f" / "meta.txt").read_text()


def test_sample_then_recover_pipeline(tmp_path):
    X = random_triple((20, 20, 20), 3, seed=5).full()
    save_tns3(tmp_path / "truth.tns3", X)
    code, out, _ = run("sample", "--input", tmp_path / "truth.tns3", "--fraction", 0.5, "--seed", 5,
                       "--out", tmp_path / "obs.csv")
    assert code == 0 and out == "observed 4000 of 8000\n"
    code, out, _ = run(
        "recover", "--observed", tmp_path / "obs.csv", "--dims", 20, 20, 20, "--rank", 3,
        "--out-tensor", tmp_path / "rec.tns3", "--out-trace", tmp_path / "tr.csv",
        "--truth", tmp_path / "truth.tns3",
    )
    assert code == 0
    lines = dict(line.split(" ", 1) for line in out.splitlines())
    assert float(lines["relative_error"]) <= 1e-3
    rec = load_tns3(tmp_path / "rec.tns3")
    assert np.linalg.norm(rec - X) / np.linalg.norm(X) == pytest.approx(float(lines["relative_error"]))


def test_recover_without_truth_prints_no_relative_error(tmp_path):
    (tmp_path / "obs.csv").write_text("i,j,t,value\n1,1,1,1.0\n2,2,2,2.0\n")
    code, out, _ = run("recover", "--observed", tmp_path / "obs.csv", "--dims", 2, 2, 2, "--rank", 1,
                       "--restarts", 1, "--max-iter", 20, "--out-tensor", tmp_path / "r.csv")
    assert code == 0
    assert "relative_error" not in out.split()
    assert (tmp_path / "r.csv").read_text().startswith("i,j,t,value\n")


def test_rank_sweep_rank_one(tmp_path):
    X = np.einsum("i,j,t->ijt", [1.0, 2.0, 3.0], [2.0, -1.0, 1.0], [1.0, 1.0, 0.5])
    save_tns3(tmp_path / "x.tns3", X)
    code, out, _ = run("rank-sweep", "--input", tmp_path / "x.tns3", "--ranks", "1:3",
                       "--out-curve", tmp_path / "c.csv")
    assert code == 0
    rows = (tmp_path / "c.csv").read_text().splitlines()
    assert rows[0] == "r,relative_error,iterations,seconds"
    assert [float(r.split(",")[1]) <= 1e-10 for r in rows[1:]] == [True] * 3


def test_generate_example(tmp_path):
    code, _, _ = run("generate", "--kind", "example", "--out", tmp_path / "e.tns3")
    assert code == 0
    assert np.array_equal(load_tns3(tmp_path / "e.tns3"), example_tensor())
    code, _, err = run("generate", "--kind", "cp", "--out", tmp_path / "x.tns3")
    assert code == EXIT_USAGE and err.startswith("error: input: ")


@pytest.mark.parametrize(
    "argv",
    [
        ["decompose", "--bogus"],
        ["frobnicate"],
        [],
        ["decompose", "--input", "x.tns3", "--rank", "two", "--out-factors", "f"],
        ["rank-sweep", "--input", "x.tns3", "--ranks", "3:1"],
        ["rank-sweep", "--input", "x.tns3", "--ranks", "1:2", "--method", "cp"],
        ["decompose", "--input", "x.tns3", "--rank", "1", "--lambda", "-1", "--out-factors", "f"],
    ],
)
def test_usage_errors(argv):
    code, out, err = run(*argv)
    assert code == EXIT_USAGE
    assert err.startswith("error: usage: ")
    assert len(err.strip().splitlines()) == 1


def test_missing_file_is_input_error(tmp_path):
    code, _, err = run("tucker-rank", "--input", tmp_path / "nope.tns3")
    assert code == EXIT_USAGE
    assert err.startswith("error: input: ") and "nope.tns3" in err


def test_inconsistent_dims_is_input_error(tmp_path):
    (tmp_path / "obs.csv").write_text("i,j,t,value\n3,1,1,1.0\n")
    code, _, err = run("recover", "--observed", tmp_path / "obs.csv", "--dims", 2, 2, 2, "--rank", 1,
                       "--out-tensor", tmp_path / "r.tns3")
    assert code == EXIT_USAGE and "out of range" in err


def test_malformed_file_reports_line(tmp_path):
    (tmp_path / "x.tns3").write_text("tns3 2 1 1\n1.0\noops\n")
    code, _, err = run("tucker-rank", "--input", tmp_path / "x.tns3")
    assert code == EXIT_USAGE and "x.tns3:3:" in err


def test_invalid_hyperparameter_is_input_error(tmp_path, example_file):
    code, _, err = run("decompose", "--input", example_file, "--rank", 1, "--gamma", 2.5,
                       "--out-factors", tmp_path / "f")
    assert code == EXIT_USAGE and "gamma" in err


def test_singular_dense_system_is_numeric_error(monkeypatch, tmp_path, example_file):
    def boom(*args, **kwargs):
        raise np.linalg.LinAlgError("matrix is singular")

    monkeypatch.setattr("tridecomp.cli._DECOMPOSE", {"triple": boom})
    code, _, err = run("decompose", "--input", example_file, "--rank", 1, "--out-factors", tmp_path / "f")
    assert code == EXIT_NUMERIC and err.startswith("error: numeric: ")


def test_same_seed_gives_identical_csv(tmp_path, example_file):
    for k in (1, 2):
        code, _, _ = run("decompose", "--input", example_file, "--rank", 2, "--seed", 3,
                         "--out-factors", tmp_path / f"f{k}", "--out-trace", tmp_path / f"t{k}.csv")
        assert code == 0
    assert (tmp_path / "t1.csv").read_bytes() == (tmp_path / "t2.csv").read_bytes()
    assert (tmp_path / "f1" / "A.tns3").read_bytes() == (tmp_path / "f2" / "A.tns3").read_bytes()


def test_rank_above_mid_warns_on_stderr(tmp_path):
    save_tns3(tmp_path / "x.tns3", np.ones((2, 2, 3)))
    code, _, err = run("decompose", "--input", tmp_path / "x.tns3", "--rank", 3, "--restarts", 1,
                       "--max-iter", 5, "--out-factors", tmp_path / "f")
    assert code == 0 and err.startswith("warning: ")


def test_module_entry_point(example_file):
    proc = subprocess.run(
        [sys.executable, "-m", "tridecomp", "tucker-rank", "--input", str(example_file)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout == "4 4 4\n"
    proc = subprocess.run([sys.executable, "-m", "tridecomp", "--nope"], capture_output=True, text=True)
    assert proc.returncode == EXIT_USAGE and proc.stderr.startswith("error: usage: ")
