"""Acceptance criteria 1-11 at full size.

Each test records one ``criterion N: PASS|FAIL ...`` line, printed in the
pytest terminal summary.  Run this file directly to get the lines on stdout
without pytest.  The statistical criteria use N = 10^4 paths and seed 0.
"""

from fractions import Fraction

import pytest

from slemart import experiments as ex
from slemart.config import builtin_configs
from slemart.sim import SimParams

N = 10_000
SEED = 0
PARAMS = SimParams(seed=SEED)

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # pragma: no cover - script mode outside tests/
    ACCEPTANCE_LINES = []


def _record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def _failed(items) -> str:
    bad = [c.name for c in items if not c.ok]
    return f" failed: {bad}" if bad else ""


def _cmp_text(report: ex.ExperimentReport) -> str:
    return "; ".join(f"{c.name}: {c.estimate:.5g}+-{c.std_error:.2g} vs {c.target:.5g} (z={c.z:.2f})"
                     for c in report.comparisons)


def test_criterion_1_null_fields():
    checks = ex.check_null_fields()
    ok = all(c.ok for c in checks)
    _record(1, ok, f"{len(checks)} null-field identities{_failed(checks)}")
    assert ok


def test_criterion_2_closed_form():
    c = ex.check_closed_form()
    _record(2, c.ok, f"L_{{-2}}.1 = {c.detail['value']}")
    assert c.ok


def test_criterion_3_commutators():
    checks = [ex.check_commutators(s, max_level=4, bound=3) for s in ("reversibility", "duality")]
    ok = all(c.ok for c in checks)
    n = sum(c.detail["checked"] for c in checks)
    _record(3, ok, f"{n} commutator identities, c = {checks[0].detail['central_charge']}{_failed(checks)}")
    assert ok


def test_criterion_4_annihilation():
    checks = [ex.check_annihilation(s, 5) for s in builtin_configs()]
    ok = all(c.ok for c in checks)
    n = sum(c.detail["elements"] for c in checks)
    _record(4, ok, f"{n} elements to level 5 over {len(checks)} setups{_failed(checks)}")
    assert ok


def test_criterion_5_structure():
    c = ex.check_structure(5)
    _record(5, c.ok, f"{c.detail['words']} words, mismatches {c.detail['mismatched_words']}, "
                     f"errors {len(c.detail['errors'])}")
    assert c.ok


def test_criterion_6_gluing():
    c = ex.check_gluing(4)
    _record(6, c.ok, f"words to level 4, mismatches {c.detail['mismatched_words']}")
    assert c.ok


def test_criterion_7_dimensions():
    rows = ex.dims_table(6)
    ranks = [r["rank"] for r in rows]
    ok = ranks == [1, 1, 2, 2, 4] and all(r["spanning"] and r["rank"] == r["expected"] for r in rows)
    _record(7, ok, f"ranks n=2..6: {ranks}")
    assert ok


@pytest.mark.slow
def test_criterion_8_capacity():
    r = ex.capacity_benchmark(2, 0.0, 1.0, N, PARAMS, eps_halving=True)
    _record(8, r.ok, _cmp_text(r))
    assert r.ok


@pytest.mark.slow
@pytest.mark.parametrize("kappa", [Fraction(6, 5), Fraction(3, 2)])
@pytest.mark.parametrize("monomial", [{2: 1}, {2: 2}], ids=["g2", "g2sq"])
def test_criterion_9_reversibility(kappa, monomial):
    r = ex.verify_reversibility(kappa, 0.0, 1.0, monomial, N, PARAMS)
    label = f"kappa={kappa} {ex.monomial_label(monomial)}"
    _record(9, r.ok, f"[{label}] {_cmp_text(r)}")
    assert r.ok


@pytest.mark.slow
def test_criterion_10_duality():
    r = ex.verify_duality(2, [0.0, 1.0, 2.0, 3.0], {2: 1}, N, PARAMS, offset_halving=True)
    _record(10, r.ok, _cmp_text(r))
    assert r.ok


@pytest.mark.slow
def test_criterion_11_constancy():
    r = ex.martingale_constancy("reversibility", None, Fraction(3, 2), {"x": 0.0, "y": 1.0}, N, PARAMS)
    worst = max(r.comparisons, key=lambda c: c.z)
    _record(11, r.ok, f"{len(r.comparisons)} checkpoint comparisons over {len(r.runs)} elements, "
                      f"worst {worst.name} z={worst.z:.2f}{_failed(r.comparisons)}")
    assert r.ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
