import json
import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from slemart import experiments as ex
from slemart.cli import main
from slemart.sim import MonteCarloResult, SimParams


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# -- parsing ----------------------------------------------------------------

@pytest.mark.parametrize("text,want", [("2", (2,)), ("2,3", (2, 3)), ("-2,-3", (2, 3)), (" 1, 1 ", (1, 1))])
def test_parse_word(text, want):
    assert ex.parse_word(text) == want


@pytest.mark.parametrize("text", ["", "2,-3", "0", "a,b", "2,,x"])
def test_parse_word_rejects(text):
    with pytest.raises(ValueError):
        ex.parse_word(text)


@pytest.mark.parametrize("text,want", [("m2=1", {2: 1}), ("m2=2,m3=1", {2: 2, 3: 1}), ("2,1", {2: 2, 3: 1}),
                                       ("0,1", {3: 1}), ("f3=2", {3: 2})])
def test_parse_monomial(text, want):
    assert ex.parse_monomial(text) == want


@pytest.mark.parametrize("text", ["", "m1=1", "m2=-1", "0,0", "m2=1,m2=2", "m2"])
def test_parse_monomial_rejects(text):
    with pytest.raises(ValueError):
        ex.parse_monomial(text)


def test_degree_and_window():
    assert ex.monomial_degree({2: 2, 3: 1}) == 7
    assert ex.integrability_bound(2) == Fraction(8, 3)
    report = ex.ExperimentReport("x", {})
    with pytest.warns(ex.IntegrabilityWarning):
        ex._window(Fraction(3), 2, report)
    assert report.warnings
    report = ex.ExperimentReport("x", {})
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ex._window(Fraction(2), 2, report)
    assert not report.warnings


# -- comparisons ------------------------------------------------------------

def _mc(mean, se, valid=True):
    return MonteCarloResult(mean, se, 100, valid, {}, np.zeros(0))


def test_comparison_logic():
    c = ex.compare("a", _mc(1.0, 0.1), 1.25, "closed form")
    assert c.z == pytest.approx(2.5) and c.ok
    assert not ex.compare("a", _mc(1.0, 0.1), 1.35, "closed form").ok
    assert not ex.compare("a", _mc(1.0, 0.1, valid=False), 1.0, "closed form").ok
    c = ex.compare("b", _mc(1.0, 0.3), _mc(2.0, 0.4), "cross")
    assert c.combined_error == pytest.approx(0.5) and c.z == pytest.approx(2.0)
    assert ex.compare("c", _mc(1.0, 0.0), 1.0, "x").z == 0.0
    assert math.isinf(ex.compare("c", _mc(1.0, 0.0), 2.0, "x").z)
    assert not ex._halving("h", _mc(1.0, 0.1), _mc(1.2, 0.1)).ok


def test_report_verdict_and_csv():
    r = ex.ExperimentReport("demo", {})
    r.checks.append(ex.Check("exact", True, {}))
    r.comparisons.append(ex.compare("mc", _mc(1.0, 0.1), 1.0, "closed form"))
    assert r.verdict == "pass"
    lines = r.to_csv().splitlines()
    assert lines[0].startswith("experiment,kind,name,ok")
    assert len(lines) == 3
    r.checks.append(ex.Check("bad", False, {}))
    assert r.to_json()["verdict"] == "fail"


# -- algebra entry points ---------------------------------------------------

def test_gen_martingale_report():
    r = ex.gen_martingale("reversibility", (2,))
    assert r.ok
    assert r.data["element"] == "L_{-2}.1"
    assert "f2" in r.data["P"] and r.data["gap"] == "(y - x)"


def test_dims_table():
    rows = ex.dims_table(5)
    assert [r["rank"] for r in rows] == [1, 1, 2, 2]
    assert all(r["spanning"] for r in rows)


def test_default_checkpoints():
    assert ex.default_checkpoints({"x": 0.0, "y": 2.0}) == pytest.approx((0.1, 0.2, 0.4, 0.8))


# -- CLI --------------------------------------------------------------------

def test_cli_dims_csv(capsys):
    code, out, _ = _run(capsys, "dims", "--max", "4", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "n,rank,expected,p(n),p(n-1),monomials,spanning"
    assert out.splitlines()[3].startswith("4,2,2,")


def test_cli_gen_martingale(capsys):
    code, out, _ = _run(capsys, "gen-martingale", "--word", "-2")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "pass"
    assert doc["data"]["element"] == "L_{-2}.1"


@pytest.mark.parametrize("argv", [
    ("gen-martingale", "--word", "2,-3"),
    ("gen-martingale", "--word", "2", "--setup", "nope"),
    ("gen-martingale", "--word", "2", "--config", "/nonexistent/cfg.json"),
    ("verify-duality", "--kappa", "5", "--paths", "10"),
    ("verify-reversibility", "--kappa", "-1"),
    ("verify-reversibility", "--kappa", "2", "--monomial", "m1=3"),
    ("capacity-benchmark", "--paths", "1"),
    ("capacity-benchmark", "--epsilon", "0.5", "--paths", "4"),
    ("no-such-command",),
])
def test_cli_usage_errors(capsys, argv):
    assert _run(capsys, *argv)[0] == 2


def test_cli_timeout_fails(capsys):
    code, out, _ = _run(capsys, "capacity-benchmark", "--paths", "8", "--max-steps", "3")
    doc = json.loads(out)
    assert code == 1 and doc["verdict"] == "fail"
    assert not doc["runs"]["forward"]["valid"]


def test_cli_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("SLEMART_SEED", "41")
    _, out, _ = _run(capsys, "capacity-benchmark", "--paths", "8")
    assert json.loads(out)["config"]["params"]["seed"] == 41
    _, out, _ = _run(capsys, "capacity-benchmark", "--paths", "8", "--seed", "7")
    assert json.loads(out)["config"]["params"]["seed"] == 7
    monkeypatch.setenv("SLEMART_SEED", "abc")
    assert _run(capsys, "capacity-benchmark", "--paths", "8")[0] == 2


def test_cli_reproducible(capsys):
    argv = ("verify-reversibility", "--kappa", "6/5", "--paths", "16", "--seed", "3")
    a = _run(capsys, *argv)[1]
    b = _run(capsys, *argv)[1]
    assert a == b
    c = _run(capsys, *argv[:-1], "4")[1]
    assert a != c


def test_cli_outputs_and_dump(capsys, tmp_path):
    code, out, _ = _run(capsys, "capacity-benchmark", "--paths", "12", "--format", "csv",
                        "--json", str(tmp_path / "r.json"), "--csv", str(tmp_path / "r.csv"),
                        "--dump", str(tmp_path / "dump"))
    assert out.startswith("experiment,kind,name")
    assert json.loads((tmp_path / "r.json").read_text())["experiment"] == "capacity-benchmark"
    assert (tmp_path / "r.csv").read_text() == out
    dumped = (tmp_path / "dump" / "capacity-benchmark_forward.csv").read_text().splitlines()
    assert dumped[0] == "path,value" and len(dumped) == 13


def test_cli_integrability_warning(capsys):
    code, out, err = _run(capsys, "verify-reversibility", "--kappa", "3", "--paths", "4")
    assert "expectation may not exist" in err
    assert json.loads(out)["warnings"]


def test_cli_config_file(capsys, tmp_path):
    from slemart.config import get_config
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(get_config("reversibility").to_json()))
    code, out, _ = _run(capsys, "gen-martingale", "--word", "3", "--config", str(path))
    assert code == 0 and json.loads(out)["verdict"] == "pass"


def test_martingale_constancy_short():
    r = ex.martingale_constancy("reversibility", (2,), Fraction(3, 2), {"x": 0.0, "y": 1.0}, 40,
                                SimParams(seed=1))
    series = r.data["L_{-2}.1"]
    assert series["times"][-1] == "tau" and len(series["means"]) == 6
    assert len(r.comparisons) == 5
