import csv
import io
import json
from fractions import Fraction

import pytest

from fplab import cli, experiments
from fplab.experiments import EXPERIMENTS


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def as_csv(text):
    return list(csv.reader(io.StringIO(text)))


def test_enumerate_toy(capsys):
    code, out, _ = run_cli(capsys, "format", "enumerate", "--preset", "toy", "--positive", "--format", "csv")
    rows = as_csv(out)
    assert code == 0
    assert rows[0][:2] == ["index", "exact"]
    values = [Fraction(r[1]) for r in rows[1:]]
    assert len(values) == 16
    assert values[0] == Fraction(1, 4) and values[-1] == Fraction(7, 2)


def test_format_info_json(capsys):
    code, out, _ = run_cli(capsys, "format", "info", "--preset", "toy", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert {"name", "params", "columns", "rows", "verdict"} <= set(doc)
    rows = {r[0]: r[1] for r in doc["rows"]}
    assert rows["machine_epsilon"] == "1/4"
    assert rows["normal_count"] == 32


def test_encode_decode(capsys):
    code, out, _ = run_cli(capsys, "encode", "89.75", "--width", "32")
    assert code == 0 and "0|10000101|01100111000000000000000" in out
    code, out, _ = run_cli(capsys, "decode", "0x42b38000", "--width", "32", "--format", "csv")
    row = dict(zip(*as_csv(out)[:2]))
    assert code == 0 and Fraction(row["exact"]) == Fraction("89.75")


def test_round_and_ulp(capsys):
    code, out, _ = run_cli(capsys, "round", "0.1", "--preset", "binary32", "--format", "csv")
    row = dict(zip(*as_csv(out)[:2]))
    assert code == 0
    assert Fraction(row["exact"]) == Fraction(13421773, 2**27)
    code, out, _ = run_cli(capsys, "ulp", "2.5", "--preset", "toy")
    assert code == 0 and "1/2" in out


def test_bound_gamma(capsys):
    code, out, _ = run_cli(capsys, "bound", "gamma", "--n", "10", "--format", "csv")
    assert code == 0
    assert float(as_csv(out)[1][0]) == pytest.approx(1.1102230246251577e-15, rel=1e-15)


def test_pi_csv(capsys):
    code, out, _ = run_cli(capsys, "experiment", "pi", "--format", "csv")
    rows = as_csv(out)
    assert code == 0
    assert rows[0] == ["k", "p_k", "abs_error"]
    assert len(rows) == 31


def test_pi_json_verdict(capsys):
    _, out, _ = run_cli(capsys, "experiment", "pi", "--format", "json")
    assert json.loads(out)["verdict"] == "informational"
    _, out, _ = run_cli(capsys, "experiment", "pi", "--check", "--format", "json")
    assert json.loads(out)["verdict"] == "pass"


@pytest.mark.parametrize("name", sorted(EXPERIMENTS))
def test_every_experiment_is_reachable(capsys, name):
    code, out, _ = run_cli(capsys, "experiment", name, "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["name"]
    assert doc["verdict"] in ("pass", "informational")


def test_failing_verdict_exits_one(capsys, monkeypatch):
    real = experiments.run

    def failing(name, **kw):
        report = real(name, **kw)
        report.verdict = "fail"
        return report

    monkeypatch.setattr(experiments, "run", failing)
    code, _, _ = run_cli(capsys, "experiment", "cancellation")
    assert code == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["round"],
        ["solve", "--matrix", "/nonexistent/a.txt", "--rhs", "/nonexistent/b.txt"],
        ["bound", "gamma", "--n", "10", "--u", "1/2"],
        ["experiment", "nope"],
    ],
)
def test_usage_errors_exit_two(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == 2
    assert err.startswith("fplab:")


def test_solve_files(tmp_path, capsys):
    A = tmp_path / "A.txt"
    b = tmp_path / "b.txt"
    A.write_text("2 2\n2 1\n1 1\n")
    b.write_text("1 2\n3 2\n")
    code, out, _ = run_cli(capsys, "solve", "--matrix", str(A), "--rhs", str(b), "--backend", "rational", "--format", "csv")
    rows = as_csv(out)
    assert code == 0
    assert [Fraction(r[1]) for r in rows[1:]] == [1, 1]


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.csv"
    code, out, _ = run_cli(capsys, "complexity", "--n", "3", "--format", "csv", "--output", str(path))
    assert code == 0 and out == ""
    rows = {r[0]: int(r[2]) for r in as_csv(path.read_text())[1:]}
    assert rows["inner"] == 5 and rows["gauss_time"] == 18


def test_hilbert_cond_exact(capsys):
    code, out, _ = run_cli(capsys, "cond", "hilbert", "--n", "3", "--format", "csv")
    assert code == 0
    assert float(as_csv(out)[1][1]) == 748
