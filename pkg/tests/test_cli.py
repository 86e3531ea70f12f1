import numpy as np
import pytest

from conftest import make_raw
from sdwd.cli import main
from sdwd.data import write_csv
from sdwd.model import load_model, predict_score


@pytest.fixture
def train_csv(tmp_path):
    path = tmp_path / "train.csv"
    write_csv(make_raw(40, 60, seed=7), path)
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_fit_and_predict(tmp_path, train_csv, capsys):
    code, out, err = run(["fit", "--data", train_csv, "--penalty", "enet", "--lambda1", 0.02,
                          "--lambda2", 0.1, "--out", tmp_path / "m.json",
                          "--coef-out", tmp_path / "c.tsv"], capsys)
    assert code == 0
    fields = dict(line.split("\t") for line in out.splitlines())
    assert {"lambda_max", "nnz", "objective", "kkt_max"} <= fields.keys()
    assert float(fields["kkt_max"]) <= 1e-5
    assert "config" in err            # resolved config goes to the log
    code, out, _ = run(["predict", "--model", tmp_path / "m.json", "--data", train_csv,
                        "--labeled"], capsys)
    assert code == 0
    rows = [l.split("\t") for l in out.splitlines()[1:]]
    assert len(rows) == 40
    m = load_model(tmp_path / "m.json")
    raw = make_raw(40, 60, seed=7)
    np.testing.assert_allclose([float(r[0]) for r in rows], predict_score(m, raw.x), rtol=1e-15)
    assert {r[2] for r in rows} <= {"neg", "pos"}


def test_fit_above_lambda_max_is_null(tmp_path, train_csv, capsys):
    code, out, _ = run(["fit", "--data", train_csv, "--lambda1", 1, "--out", tmp_path / "a.json"],
                       capsys)
    lmax = float(dict(l.split("\t") for l in out.splitlines())["lambda_max"])
    code, out, _ = run(["fit", "--data", train_csv, "--lambda1", lmax,
                        "--out", tmp_path / "b.json"], capsys)
    assert code == 0 and dict(l.split("\t") for l in out.splitlines())["nnz"] == "0"


@pytest.mark.parametrize("argv", [
    ["fit", "--penalty", "lasso", "--lambda1", "0.1", "--lambda2", "0.5"],
    ["fit", "--penalty", "enet", "--lambda1", "0.1"],
    ["fit", "--lambda1", "0.1", "--bogus-flag"],
    ["path", "--nlambda", "1"],
])
def test_usage_errors(tmp_path, train_csv, capsys, argv):
    full = argv + ["--data", str(train_csv), "--out", str(tmp_path / "m.json")] \
        if argv[0] == "fit" else argv + ["--data", str(train_csv), "--out-prefix", str(tmp_path / "p")]
    assert main(full) == 1


def test_simulate(tmp_path, capsys):
    code, out, _ = run(["simulate", "--example", 1, "--p", 20, "--n-test", 100,
                        "--out-dir", tmp_path / "a"], capsys)
    assert code == 0 and "1.39%" in out
    run(["simulate", "--example", 1, "--p", 20, "--n-test", 100, "--out-dir", tmp_path / "b"],
        capsys)
    for name in ("train", "valid", "test"):
        assert (tmp_path / "a" / f"example1_{name}.csv").read_bytes() == \
            (tmp_path / "b" / f"example1_{name}.csv").read_bytes()
    assert main(["simulate", "--example", "6", "--out-dir", str(tmp_path)]) == 1


def test_path_outputs(tmp_path, train_csv, capsys):
    pre = tmp_path / "p"
    assert run(["path", "--data", train_csv, "--out-prefix", pre], capsys)[0] == 0
    lines = (tmp_path / "p.path.tsv").read_text().splitlines()
    assert "# nlambda=100" in lines and "# lambda_min_ratio=0.0001" in lines
    first = (tmp_path / "p.path.tsv").read_bytes(), (tmp_path / "p.coef.tsv").read_bytes()
    run(["path", "--data", train_csv, "--out-prefix", pre], capsys)
    assert first == ((tmp_path / "p.path.tsv").read_bytes(), (tmp_path / "p.coef.tsv").read_bytes())
    run(["path", "--data", train_csv, "--nlambda", 2, "--out-prefix", tmp_path / "two"], capsys)
    body = [l for l in (tmp_path / "two.path.tsv").read_text().splitlines()
            if not l.startswith("#")]
    assert len(body) == 3        # column header + two grid points


def _read_coefs(path):
    out = {}
    for line in path.read_text().splitlines()[1:]:
        k, j, v = line.split("\t")
        out[int(k), int(j)] = float(v)
    return out


def test_path_strong_rule_flag(tmp_path, train_csv, capsys):
    run(["path", "--data", train_csv, "--nlambda", 30, "--out-prefix", tmp_path / "a"], capsys)
    run(["path", "--data", train_csv, "--nlambda", 30, "--no-strong-rule",
         "--out-prefix", tmp_path / "b"], capsys)
    a, b = _read_coefs(tmp_path / "a.coef.tsv"), _read_coefs(tmp_path / "b.coef.tsv")
    for key in a.keys() | b.keys():
        assert abs(a.get(key, 0.0) - b.get(key, 0.0)) <= 1e-6


def test_cv(tmp_path, train_csv, capsys):
    argv = ["cv", "--data", train_csv, "--penalty", "enet", "--lambda2-grid", "0.1,1",
            "--nlambda", 10, "--folds", 4, "--seed", 3, "--report", tmp_path / "r.tsv",
            "--model", tmp_path / "m.json"]
    code, out, _ = run(argv, capsys)
    assert code == 0 and "best_lambda1" in out
    report = (tmp_path / "r.tsv").read_bytes()
    assert len(report.splitlines()) == 1 + 2 * 10
    run(argv + ["--threads", 2], capsys)
    assert (tmp_path / "r.tsv").read_bytes() == report


def test_cv_loo_and_valid(tmp_path, capsys):
    small = tmp_path / "s.csv"
    write_csv(make_raw(12, 5, seed=1), small)
    code, _, _ = run(["cv", "--data", small, "--penalty", "lasso", "--folds", "n",
                      "--nlambda", 5, "--report", tmp_path / "r.tsv",
                      "--model", tmp_path / "m.json"], capsys)
    assert code == 0
    code, _, _ = run(["cv", "--data", small, "--valid", small, "--penalty", "lasso",
                      "--nlambda", 5, "--report", tmp_path / "r2.tsv",
                      "--model", tmp_path / "m2.json"], capsys)
    assert code == 0


def test_threads_env(tmp_path, train_csv, capsys, monkeypatch):
    monkeypatch.setenv("SDWD_THREADS", "nope")
    code = main(["cv", "--data", str(train_csv), "--report", str(tmp_path / "r"),
                 "--model", str(tmp_path / "m")])
    assert code == 1


def test_data_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,label\n1,x\n2,x\n")
    assert main(["fit", "--data", str(bad), "--lambda1", "0.1", "--out", str(tmp_path / "m")]) == 2
    assert main(["predict", "--model", str(bad), "--data", str(bad)]) == 2


def test_nonconvergence_exit(tmp_path, train_csv, capsys, monkeypatch):
    from sdwd import cli
    from sdwd.solver import SolverConfig
    monkeypatch.setattr(cli, "_solver_cfg", lambda args: SolverConfig(max_cycles=1))
    assert main(["fit", "--data", str(train_csv), "--lambda1", "0.001",
                 "--out", str(tmp_path / "m")]) == 3


def test_oracle_check(capsys):
    code, out, _ = run(["oracle-check", "--instances", 6], capsys)
    assert code == 0 and "6/6 instances passed" in out
    assert len(out.splitlines()) == 8


def test_oracle_check_sabotage(capsys):
    code, out, _ = run(["oracle-check", "--instances", 6, "--update-constant", 3], capsys)
    assert code == 3 and "0/6 instances passed" in out


def test_oracle_check_caps(capsys):
    assert main(["oracle-check", "--max-n", "5000"]) == 1
