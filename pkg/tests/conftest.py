from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from slemart.kappa import KappaRational

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

small_ints = st.integers(min_value=-6, max_value=6)


@st.composite
def kappa_rationals(draw, nonzero=False):
    from flint import fmpz_poly

    num = draw(st.lists(small_ints, min_size=1, max_size=4))
    den = draw(st.lists(small_ints, min_size=1, max_size=3).filter(lambda c: any(c)))
    if nonzero and not any(num):
        num = [1]
    return KappaRational(fmpz_poly(num), fmpz_poly(den))


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def horner(coeffs, x: Fraction) -> Fraction:
    out = Fraction(0)
    for c in reversed(coeffs):
        out = out * x + int(c)
    return out


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
