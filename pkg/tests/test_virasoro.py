from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from slemart.config import builtin_configs, get_config
from slemart.kappa import KAPPA, ONE, KappaRational, central_charge, conformal_weight_h
from slemart.poly import GradedPoly, TruncationError
from slemart.virasoro import (
    ModuleElement,
    StructureError,
    VirasoroRep,
    capacity_monomials,
    commutator_check,
    coefficient_drift,
    decompose,
    dimension_check,
    generate_module,
    generator_annihilation_check,
    gluing_continuity_check,
    martingale_for_monomial,
    partition_count,
    partitions,
    words_up_to,
)

k = KAPPA
c = central_charge()
h = conformal_weight_h()
CFGS = builtin_configs()


@pytest.fixture(scope="module")
def rev():
    return VirasoroRep(CFGS["reversibility"], 6)


@pytest.fixture(scope="module")
def dual():
    return VirasoroRep(CFGS["duality"], 5)


def test_partition_numbers():
    assert [partition_count(n) for n in range(7)] == [1, 1, 2, 3, 5, 7, 11]
    assert list(partitions(3)) == [(3,), (2, 1), (1, 1, 1)]
    assert sum(1 for w in words_up_to(4) if sum(w) == 4) == 5


def test_generate_module_order_and_levels(rev):
    els = generate_module(rev, 4)
    assert els[0].word == () and els[0].poly == rev.one()
    assert [e.level for e in els] == sorted(e.level for e in els)
    for e in els:
        assert e.poly.is_homogeneous(e.level)
    assert [e.word for e in els if e.level == 2] == [(1, 1), (2,)]


def test_closed_form_l_minus_two(rev):
    t = rev.table
    x, y = GradedPoly.var(t, "x"), GradedPoly.var(t, "y")
    want = GradedPoly.cap(t, 2).scale(-c / 2) + ((y - x) ** 2).scale(h)
    assert rev.apply(-2, rev.one()) == want


def test_duality_l_minus_two_display(dual):
    cfg = dual.cfg
    t = dual.table
    w = cfg.weights()
    names = cfg.names
    want = GradedPoly.cap(t, 2).scale(-c / 2)
    for a in names:
        want = want + GradedPoly.var(t, a, 2).scale(w.delta[a])
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            want = want + (GradedPoly.var(t, a) * GradedPoly.var(t, b)).scale(w.Delta(a, b))
    assert dual.apply(-2, dual.one()) == want


def test_duality_table_sums_to_zero(dual):
    w = dual.cfg.weights()
    total = sum(w.delta.values(), KappaRational(0)) + sum(w.pair.values(), KappaRational(0))
    assert total == 0
    assert decompose(generate_module(dual, 2)[-1], dual.cfg).P == GradedPoly.cap(dual.table, 2).scale(-c / 2)


@pytest.mark.parametrize("name", sorted(CFGS))
def test_highest_weight(name):
    rep = VirasoroRep(CFGS[name], 4)
    for n in range(0, 5):
        assert not rep.apply(n, rep.one()), n
    assert not rep.apply(-1, rep.one())


def test_commutator_examples(rev):
    one = rev.one()
    assert commutator_check(rev, 1, -1, one)
    lhs = rev.apply(2, rev.apply(-2, one)) - rev.apply(-2, rev.apply(2, one))
    assert lhs == GradedPoly.const(rev.table, c / 2)
    p = rev.apply(-2, one)
    lhs = rev.apply(2, rev.apply(3, p)) - rev.apply(3, rev.apply(2, p))
    assert lhs == -rev.apply(5, p)


def test_central_term_is_not_shifted(rev):
    one = rev.one()
    lhs = rev.apply(2, rev.apply(-2, one)) - rev.apply(-2, rev.apply(2, one))
    assert lhs != GradedPoly.const(rev.table, (c + 1) / 2)
    assert lhs != GradedPoly.const(rev.table, -c / 2)


@settings(max_examples=25)
@given(st.integers(-3, 3), st.integers(-3, 3), st.sampled_from([(2,), (3,), (2, 1), (1, 1)]))
def test_commutators_random(m, n, word):
    rep = _rep_cache()
    assert commutator_check(rep, m, n, rep.apply_word(word))


_REP = {}


def _rep_cache():
    if "r" not in _REP:
        _REP["r"] = VirasoroRep(CFGS["duality"], 8)
    return _REP["r"]


def test_truncation_guard():
    rep = VirasoroRep(CFGS["reversibility"], 3)
    p = rep.apply(-3, rep.one())
    with pytest.raises(TruncationError):
        rep.apply(-2, p)


def test_decompose_examples(rev):
    els = {e.word: e for e in generate_module(rev, 3)}
    d = decompose(els[(2,)], rev.cfg)
    t = rev.table
    assert d.P == GradedPoly.cap(t, 2).scale(-c / 2)
    assert d.remainder == ((GradedPoly.var(t, "y") - GradedPoly.var(t, "x")) ** 2).scale(h)
    d0 = decompose(els[()], rev.cfg)
    assert d0.P == rev.one() and not d0.remainder


def test_decompose_rejects_position_dependence(rev):
    with pytest.raises(StructureError):
        decompose(GradedPoly.var(rev.table, "x"), rev.cfg)


def test_gluing_examples():
    ok, bad = gluing_continuity_check(2)
    assert ok and not bad


@pytest.mark.parametrize("name", ["reversibility", "duality", "star1", "star2"])
def test_annihilation_examples(name):
    cfg = CFGS[name]
    rep = VirasoroRep(cfg, 3)
    assert generator_annihilation_check(rep.one(), cfg)[0]
    assert generator_annihilation_check(rep.apply(-2, rep.one()), cfg)[0]
    assert generator_annihilation_check(rep.apply(-3, rep.one()), cfg)[0]


def test_annihilation_rejects_non_martingale(rev):
    ok, res = generator_annihilation_check(GradedPoly.cap(rev.table, 2), rev.cfg)
    assert not ok and not res.is_zero()


def test_coefficient_drift_examples(rev):
    t = rev.table
    assert coefficient_drift(t, "x", 2) == GradedPoly.const(t, 2)
    assert coefficient_drift(t, "x", 3) == GradedPoly.var(t, "x").scale(2)


@pytest.mark.parametrize("n,expected", [(2, 1), (3, 1), (4, 2), (5, 2), (6, 4)])
def test_dimension_examples(rev, n, expected):
    r = dimension_check(rev, n)
    assert (r.rank, r.expected, r.spanning) == (expected, expected, True)
    assert r.monomials == len(capacity_monomials(rev.table, n))


def test_null_vector_level_one(rev):
    assert all(not e.poly for e in generate_module(rev, 1) if e.level == 1)


def test_spot_values_have_no_poles(rev):
    for e in generate_module(rev, 4):
        for kv in (Fraction(10, 7), Fraction(2)):
            e.poly.specialize(kv)


def _gamma_moment(e: int) -> KappaRational:
    # g2(tau) = 2 tau with tau = (y0-x0)^2/(2 kappa G), G ~ Gamma(nu), nu = (8/kappa - 1)/2
    nu = (8 / k - 1) / 2
    out = ONE
    for j in range(1, e + 1):
        out = out / (k * (nu - j))
    return out


@pytest.mark.parametrize("e", [1, 2, 3])
def test_martingale_initial_value_matches_bessel_moments(e):
    phi = martingale_for_monomial("reversibility", {2: e})
    t = phi.table
    at0 = phi.substitute({"x": 0, "y": 1, **{m: 0 for m in t.cap_vars()}})
    assert at0 == GradedPoly.const(t, _gamma_moment(e))
    assert decompose(phi, CFGS["reversibility"]).P == GradedPoly.cap(t, 2) ** e


def test_martingale_for_mixed_monomial():
    phi = martingale_for_monomial("duality", {2: 1, 3: 1})
    assert decompose(phi, CFGS["duality"]).P == GradedPoly.cap(phi.table, 2) * GradedPoly.cap(phi.table, 3)
    assert generator_annihilation_check(phi, CFGS["duality"])[0]


def test_module_element_label():
    el = ModuleElement((3, 2), GradedPoly.zero(CFGS["reversibility"].table(5)))
    assert el.level == 5 and el.label() == "L_{-3}L_{-2}.1"
