import pytest
import sympy as sp
from hypothesis import given, strategies as st

from slemart.poly import GradedPoly, TruncationError, VariableTable
from slemart.series import (
    BiSeries,
    SeriesAtInfinity,
    canonical_f,
    reciprocal,
    reciprocal_difference,
    reciprocal_shifted,
    schwarzian,
)

T = VariableTable(("x",), 4)
Z, W, R = sp.symbols("z w r")
SYM = {n: sp.Symbol(n) for n in T.names}


def to_sympy(p: GradedPoly):
    out = 0
    for exps, coef in p.monomials():
        term = sp.Rational(coef.to_fraction().numerator, coef.to_fraction().denominator)
        for n, e in zip(T.names, exps):
            term *= SYM[n] ** e
        out += term
    return sp.expand(out)


def sym_f():
    return Z + sum(SYM[f"f{m}"] * Z ** (1 - m) for m in range(2, T.depth + 1))


def laurent_at_infinity(expr, low):
    """Coefficients {e: c} of expr in z at infinity down to z^low (via w = 1/z)."""
    s = sp.series(sp.simplify(expr.subs(Z, 1 / W)), W, 0, -low + 1).removeO()
    s = sp.expand(s)
    return {-e: sp.expand(s.coeff(W, e)) for e in range(-3, -low + 1)}


def test_canonical_f_examples():
    f = canonical_f(VariableTable(("x",), 2))
    assert str(f.coeff(-1)) == "[1] f2"
    assert f.coeff(1) == GradedPoly.const(f.table, 1)
    assert not f.coeff(0)


def test_reciprocal_shifted_hand_values():
    r = reciprocal_shifted(canonical_f(T), "x", -6)
    x, f2 = GradedPoly.var(T, "x"), GradedPoly.cap(T, 2)
    assert r.coeff(-1) == GradedPoly.const(T, 1)
    assert r.coeff(-2) == x
    assert r.coeff(-3) == x * x - f2
    assert r.top == -1


def test_reciprocal_shifted_matches_sympy():
    low = -7
    r = reciprocal_shifted(canonical_f(T), "x", low)
    want = laurent_at_infinity(1 / (sym_f() - SYM["x"]), low)
    for e in range(low, 2):
        assert to_sympy(r.coeff(e)) == want.get(e, 0), e


def test_reciprocal_shifted_is_inverse():
    low = -8
    f = canonical_f(T)
    r = reciprocal_shifted(f, "x", low)
    prod = (f - GradedPoly.var(T, "x")).mul(r)
    assert prod.coeff(0) == GradedPoly.const(T, 1)
    for e in range(prod.low, 0):
        assert not prod.coeff(e)


def test_truncation_is_loud():
    r = reciprocal_shifted(canonical_f(T), "x", -4)
    with pytest.raises(TruncationError):
        r.coeff(-5)


def test_schwarzian_flat_and_identity():
    flat = VariableTable(("x",), 2)
    ident = SeriesAtInfinity(flat, {1: 1})
    assert not schwarzian(ident, -8).terms
    s = schwarzian(canonical_f(T), -8).terms
    assert all(not c.substitute({m: 0 for m in T.cap_vars()}) for c in s.values())


def test_schwarzian_leading_coefficient():
    s = schwarzian(canonical_f(T), -6)
    assert s.top == -4
    assert s.coeff(-4) == GradedPoly.cap(T, 2).scale(-6)


def test_schwarzian_matches_sympy():
    low = -8
    f = sym_f()
    d1, d2, d3 = (sp.diff(f, Z, i) for i in (1, 2, 3))
    want = laurent_at_infinity(d3 / d1 - sp.Rational(3, 2) * (d2 / d1) ** 2, low)
    s = schwarzian(canonical_f(T), low)
    for e in range(low, 1):
        assert to_sympy(s.coeff(e)) == want.get(e, 0), e


def test_residue_examples():
    flat = VariableTable(("x",), 2)
    f = canonical_f(flat)
    assert f.residue() == GradedPoly.cap(flat, 2)
    assert not SeriesAtInfinity(flat, {2: 1}).residue()
    two = reciprocal_shifted(f, "x", -3).scale(2)
    assert two.residue() == GradedPoly.const(flat, 2)


def test_reciprocal_difference_flat():
    flat = VariableTable(("x",), 2)
    b = reciprocal_difference(SeriesAtInfinity(flat, {1: 1}), -6, -6)
    for j in range(5):
        assert b.coeff_z(-1 - j).coeff(j) == GradedPoly.const(flat, 1)
    res = b.mul(BiSeries(flat, {(1, 0): GradedPoly.const(flat, 1)}, -6, -6)).residue_z()
    assert res.coeff(1) == GradedPoly.const(flat, 1)


def test_reciprocal_difference_closed_form():
    # with only f2: 1/(f(z) - f(r)) = sum_k f2^k z^-k r^-k sum_j r^j z^(-1-j)
    D = VariableTable(("x",), 2)
    b = reciprocal_difference(canonical_f(D), -7, -9)
    f2 = GradedPoly.cap(D, 2)
    for a in range(-6, 0):
        col = b.coeff_z(a)
        for e in range(col.low, 3):
            want = GradedPoly.zero(D)
            for kk in range(0, -a):
                j = -a - 1 - kk
                if j - kk == e:
                    want = want + f2 ** kk
            assert col.coeff(e) == want, (a, e)


@st.composite
def finite_series(draw):
    terms = {}
    for e in draw(st.lists(st.integers(-5, 2), max_size=4, unique=True)):
        terms[e] = GradedPoly.var(T, "x").scale(draw(st.integers(-3, 3))) + draw(st.integers(-3, 3))
    return SeriesAtInfinity(T, terms)


@given(finite_series(), finite_series())
def test_derivative_leibniz(s, t):
    assert (s.mul(t)).derivative() == s.derivative().mul(t) + s.mul(t.derivative())


@given(finite_series())
def test_residue_of_derivative_vanishes(s):
    assert not s.derivative().residue()


def test_reciprocal_of_unit_series():
    s = SeriesAtInfinity(T, {0: 1, -2: GradedPoly.cap(T, 2)})
    inv = reciprocal(s, -6)
    prod = s.mul(inv)
    assert prod.coeff(0) == GradedPoly.const(T, 1)
    assert all(not prod.coeff(e) for e in range(prod.low, 0))
