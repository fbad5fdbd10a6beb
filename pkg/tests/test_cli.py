import csv
import io
import subprocess
import sys

import pytest

from ccdfex.cli import run
from ccdfex.modelspec import ModelSpecError, parse_model


def out_of(capsys, argv):
    code = run(argv)
    return code, capsys.readouterr()


def test_compute_uniform(capsys):
    code, cap = out_of(capsys, ["compute", "--model", "uniform:c1=1,c2=1", "--measure", "ccdfex", "--i", "1", "--t", "0.3,0.7"])
    assert code == 0 and cap.out == "-0.05\n"


@pytest.mark.parametrize(
    "measure,expected",
    [("df", 0.21), ("brhr", 1 / 0.3), ("eit", 0.15), ("cond-ccdfex", -0.05), ("cond-eit", 0.15), ("closed", -0.05)],
)
def test_compute_measures(capsys, measure, expected):
    code, cap = out_of(capsys, ["compute", "--model", "uniform", "--measure", measure, "--t", "0.3,0.7"])
    assert code == 0 and float(cap.out) == pytest.approx(expected, rel=1e-7)


def test_compute_kappa_and_quadrature(capsys):
    _, cap = out_of(capsys, ["compute", "--model", "uniform", "--measure", "cond-ccdfex", "--kappa", "1", "--t", "0.3,0.7"])
    assert float(cap.out) == pytest.approx(-0.1)
    _, cap = out_of(capsys, ["compute", "--model", "sumuniform", "--quadrature", "--t", "0.5,0.5"])
    assert float(cap.out) == pytest.approx(-0.0645833, abs=1e-6)


def test_exit_codes(capsys):
    assert run(["compute", "--model", "nosuch", "--t", "0.3,0.3"]) == 2
    assert run(["compute", "--model", "uniform", "--t", "0.3"]) == 2
    assert run(["compute", "--model", "uniform"]) == 2
    assert run(["bogus"]) == 2
    capsys.readouterr()
    code, cap = out_of(capsys, ["compute", "--model", "uniform", "--t", "0,0.5"])
    assert code == 1 and cap.err.count("\n") == 1
    assert run(["compute", "--model", "power:m=0.2,n=2,theta=-1", "--t", "0.3,0.3"]) == 1


def test_verify(capsys):
    code, cap = out_of(capsys, ["verify", "--check", "eit-bound", "--model", "power:m=2,n=2,theta=-1.5", "--grid", "default"])
    assert code == 0 and "holds" in cap.out
    code, _ = out_of(capsys, ["order-check", "--check", "compare", "--model", "uniform", "--model-b", "sumuniform"])
    assert code == 1
    code, _ = out_of(capsys, ["verify", "--check", "compare", "--model", "uniform"])
    assert code == 2
    code, cap = out_of(capsys, ["verify", "--check", "monotonicity", "--model", "uniform", "--grid", "grid:3"])
    assert code == 0 and "decreasing" in cap.out


def test_verify_writes_report(tmp_path, capsys):
    out = tmp_path / "v.json"
    code = run(["verify", "--check", "cprhr", "--model", "uniform", "--theta", "2", "--grid", "0.2,0.3;0.5,0.5", "--out", str(out)])
    assert code == 0
    assert '"counterexamples": []' in out.read_text()


def test_estimate_from_csv(tmp_path, capsys):
    p = tmp_path / "d.csv"
    p.write_text("1,1\n2,2\n")
    code, cap = out_of(capsys, ["estimate", "--data", str(p), "--estimator", "empirical", "--t", "2,2"])
    assert code == 0
    rows = list(csv.reader(io.StringIO(cap.out)))
    assert rows == [["t1", "t2", "empirical"], ["2.0", "2.0", "-0.125"]]


def test_estimate_simulated(capsys):
    code, cap = out_of(capsys, ["estimate", "--model", "downton", "--n", "80", "--seed", "3", "--t", "0.6,0.6;0.9,0.9", "--format", "json"])
    assert code == 0 and '"kernel"' in cap.out


def test_simulate_row_count(tmp_path):
    out = tmp_path / "study.csv"
    assert run(["simulate", "--config", "default", "--replications", "4", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "estimator,t1,t2,n,bias,mse,truth,excluded"
    assert len(lines) - 1 == 4 * 7 * 2


def test_gof(tmp_path, capsys):
    p = tmp_path / "d.csv"
    p.write_text("a,b\n0.5,1.2\n1.5,0.3\n0.9,2.2\n2.4,0.8\n")
    code, cap = out_of(capsys, ["gof", "--data", str(p), "--col1", "a", "--col2", "b"])
    assert code == 0
    lines = cap.out.splitlines()
    assert lines[0] == "column,lambda_hat,loglik,aic,bic,ad_stat,p_value"
    assert len(lines) == 3


def test_catalog_and_help(capsys):
    code, cap = out_of(capsys, ["catalog"])
    assert code == 0 and "downton" in cap.out and "powertransform" in cap.out
    for sub in ("compute", "estimate", "simulate", "verify", "gof", "catalog", "figure"):
        assert run([sub, "--help"]) == 0
        assert "generalpower" in capsys.readouterr().out


def test_figures(capsys):
    _, cap = out_of(capsys, ["figure", "--kind", "fig3"])
    rows = list(csv.reader(io.StringIO(cap.out)))[1:]
    assert len(rows) == 9 and all(float(v) >= 0 for r in rows for v in r[1:])
    _, cap = out_of(capsys, ["figure", "--kind", "fig1"])
    assert all(float(v) >= 0 for r in list(csv.reader(io.StringIO(cap.out)))[1:] for v in r[1:])
    _, cap = out_of(capsys, ["figure", "--kind", "fig2"])
    assert all(float(v) >= -1e-9 for r in list(csv.reader(io.StringIO(cap.out)))[1:] for v in r[1:])
    _, cap = out_of(capsys, ["figure", "--kind", "fig4", "--model", "uniform", "--n", "100", "--seed", "5"])
    rows = list(csv.reader(io.StringIO(cap.out)))
    assert rows[0] == ["t1", "t2", "truth", "kernel", "empirical"]
    for r in rows[1:]:
        assert float(r[2]) == -float(r[0]) / 6
    assert run(["figure", "--kind", "fig9"]) == 2


def test_model_spec_grammar():
    assert parse_model("uniform").name.startswith("uniform")
    assert parse_model("linear:mu1=2,mu2=2@uniform").df(1.0, 1.0) == pytest.approx(0.25)
    assert parse_model("powertransform:theta=2@uniform").df(0.5, 0.5) == pytest.approx(0.0625)
    assert parse_model("product:margin1=uniform,c1=2,margin2=exponential,rate2=3").df(1.0, 0.5) == pytest.approx(0.5 * (1 - 2.718281828459045**-1.5))
    for bad in ("", "uniform:c3=1", "uniform:c1", "uniform:c1=x", "power:m=2", "linear:mu1=2", "sumuniform:a=1@uniform", "product:margin1=weibull"):
        with pytest.raises(ModelSpecError):
            parse_model(bad)


def test_cli_is_byte_deterministic(tmp_path):
    argv = [sys.executable, "-m", "ccdfex", "simulate", "--sizes", "20,40", "--replications", "5", "--seed", "11"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a.count(b"\n") == 1 + 2 * 7 * 2
