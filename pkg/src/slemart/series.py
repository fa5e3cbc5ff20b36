"""Formal Laurent series at infinity with GradedPoly coefficients.

A :class:`SeriesAtInfinity` stores ``sum coeff[e] * z**e`` with finitely many
positive exponents.  ``low`` is the smallest exponent whose coefficient is
known exactly; ``None`` means the series is finite and exact.  Reading a
coefficient below ``low`` raises :class:`TruncationError` instead of quietly
returning an incomplete value.
"""

from __future__ import annotations

from .kappa import ONE, KappaRational
from .poly import GradedPoly, TruncationError, VariableTable

__all__ = [
    "SeriesAtInfinity",
    "BiSeries",
    "canonical_f",
    "reciprocal_shifted",
    "reciprocal",
    "schwarzian",
    "reciprocal_difference",
    "TruncationError",
]

_THREE_HALVES = KappaRational(3) / 2


def _max_low(*lows):
    vals = [x for x in lows if x is not None]
    return max(vals) if vals else None


class SeriesAtInfinity:
    __slots__ = ("table", "terms", "low")

    def __init__(self, table: VariableTable, terms: dict[int, GradedPoly] | None = None,
                 low: int | None = None):
        self.table = table
        self.low = low
        self.terms = {}
        for e, c in (terms or {}).items():
            if low is not None and e < low:
                continue
            if not isinstance(c, GradedPoly):
                c = GradedPoly.const(table, c)
            if c:
                self.terms[e] = c

    @classmethod
    def monomial(cls, table, exponent: int, coeff=1):
        return cls(table, {exponent: coeff})

    @property
    def top(self) -> int | None:
        return max(self.terms) if self.terms else None

    def coeff(self, e: int) -> GradedPoly:
        if self.low is not None and e < self.low:
            raise TruncationError(f"coefficient of z^{e} requested but series is known only down to z^{self.low}")
        return self.terms.get(e, GradedPoly.zero(self.table))

    def residue(self) -> GradedPoly:
        """Coefficient of z^-1."""
        return self.coeff(-1)

    def truncate(self, low: int) -> "SeriesAtInfinity":
        if self.low is not None and low < self.low:
            raise TruncationError(f"cannot extend truncation from {self.low} to {low}")
        return SeriesAtInfinity(self.table, {e: c for e, c in self.terms.items() if e >= low}, low)

    def __add__(self, other):
        if not isinstance(other, SeriesAtInfinity):
            other = SeriesAtInfinity(self.table, {0: other})
        low = _max_low(self.low, other.low)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms[e] + c if e in terms else c
        return SeriesAtInfinity(self.table, terms, low)

    __radd__ = __add__

    def __neg__(self):
        return SeriesAtInfinity(self.table, {e: -c for e, c in self.terms.items()}, self.low)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "SeriesAtInfinity":
        return SeriesAtInfinity(self.table, {e: v * c for e, v in self.terms.items()}, self.low)

    def shift(self, k: int) -> "SeriesAtInfinity":
        """Multiply by z**k."""
        return SeriesAtInfinity(self.table, {e + k: c for e, c in self.terms.items()},
                                None if self.low is None else self.low + k)

    def mul(self, other: "SeriesAtInfinity", low: int | None = None) -> "SeriesAtInfinity":
        """Product, known down to the largest exponent both factors determine."""
        if not self.terms or not other.terms:
            bound = _max_low(self.low, other.low, low)
            return SeriesAtInfinity(self.table, {}, bound)
        candidates = []
        if self.low is not None:
            candidates.append(self.low + other.top)
        if other.low is not None:
            candidates.append(other.low + self.top)
        bound = max(candidates) if candidates else None
        if low is not None:
            bound = low if bound is None else max(bound, low)
        out: dict[int, GradedPoly] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = e1 + e2
                if bound is not None and e < bound:
                    continue
                p = c1 * c2
                out[e] = out[e] + p if e in out else p
        return SeriesAtInfinity(self.table, out, bound)

    __mul__ = mul

    def derivative(self) -> "SeriesAtInfinity":
        out = {e - 1: c.scale(e) for e, c in self.terms.items() if e != 0}
        return SeriesAtInfinity(self.table, out, None if self.low is None else self.low - 1)

    def __eq__(self, other):
        if not isinstance(other, SeriesAtInfinity):
            return NotImplemented
        return self.low == other.low and self.terms == other.terms

    def __str__(self):
        if not self.terms:
            body = "0"
        else:
            body = " + ".join(f"({c}) z^{e}" for e, c in sorted(self.terms.items(), reverse=True))
        if self.low is not None:
            body += f" + O(z^{self.low - 1})"
        return body

    __repr__ = __str__


def canonical_f(table: VariableTable) -> SeriesAtInfinity:
    """z + f2 z^-1 + f3 z^-2 + ... + f{L} z^{1-L} (exact)."""
    terms = {1: GradedPoly.const(table, 1)}
    for m in range(2, table.depth + 1):
        terms[1 - m] = GradedPoly.cap(table, m)
    return SeriesAtInfinity(table, terms)


def _geometric(t: SeriesAtInfinity, low: int) -> SeriesAtInfinity:
    """sum_{k>=0} t^k down to z^low, for t with only negative exponents."""
    if low is None:
        raise ValueError("geometric expansion needs a finite truncation bound")
    if t.top is not None and t.top >= 0:
        raise ValueError("geometric expansion needs a series with negative exponents only")
    total = SeriesAtInfinity(t.table, {0: 1}, low)
    power = SeriesAtInfinity(t.table, {0: 1})
    while True:
        power = power.mul(t, low)
        if not power.terms:
            break
        total = total + power
    return total


def _check_unit_leading(s: SeriesAtInfinity, exponent: int):
    if s.top != exponent or s.terms[exponent] != GradedPoly.const(s.table, ONE):
        raise ValueError(f"series must have leading term z^{exponent} with coefficient 1")


def reciprocal_shifted(s: SeriesAtInfinity, w, low: int) -> SeriesAtInfinity:
    """1/(s(z) - w) at infinity, down to z^low, for s = z + O(1).

    ``w`` is a variable name or a GradedPoly.
    """
    _check_unit_leading(s, 1)
    table = s.table
    if isinstance(w, str):
        w = GradedPoly.var(table, w)
    # 1/(s - w) = z^-1 / (1 - T),  T = (w - (s - z)) / z
    rest = SeriesAtInfinity(table, {e: c for e, c in s.terms.items() if e != 1}, s.low)
    t = (SeriesAtInfinity(table, {0: w}) - rest).shift(-1)
    return _geometric(t, low + 1).shift(-1)


def reciprocal(s: SeriesAtInfinity, low: int) -> SeriesAtInfinity:
    """1/s down to z^low for s = 1 + (negative powers)."""
    _check_unit_leading(s, 0)
    rest = SeriesAtInfinity(s.table, {e: c for e, c in s.terms.items() if e != 0}, s.low)
    return _geometric(-rest, low)


def schwarzian(s: SeriesAtInfinity, low: int) -> SeriesAtInfinity:
    """f'''/f' - 3/2 (f''/f')^2 down to z^low, for s = z + O(1)."""
    _check_unit_leading(s, 1)
    d1 = s.derivative()
    d2 = d1.derivative()
    d3 = d2.derivative()
    inv = reciprocal(d1, low)
    a = d3.mul(inv, low)
    b = d2.mul(inv, low)
    return a - b.mul(b, low).scale(_THREE_HALVES)


class BiSeries:
    """Series in z at infinity with Laurent-polynomial-in-r coefficients.

    Represents expansions valid for |z| > |r|.  Only terms with z-exponent at
    least ``z_low`` and total exponent (z plus r) at least ``s_low`` are kept;
    both bounds are exact truncations because every stored operation only
    lowers exponents.
    """

    __slots__ = ("table", "terms", "z_low", "s_low")

    def __init__(self, table, terms: dict[tuple[int, int], GradedPoly], z_low: int, s_low: int):
        self.table = table
        self.z_low = z_low
        self.s_low = s_low
        self.terms = {k: v for k, v in terms.items()
                      if v and k[0] >= z_low and k[0] + k[1] >= s_low}

    def mul(self, other: "BiSeries") -> "BiSeries":
        z_low = max(self.z_low, other.z_low)
        s_low = max(self.s_low, other.s_low)
        out: dict[tuple[int, int], GradedPoly] = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                a, b = a1 + a2, b1 + b2
                if a < z_low or a + b < s_low:
                    continue
                p = c1 * c2
                out[(a, b)] = out[(a, b)] + p if (a, b) in out else p
        return BiSeries(self.table, out, z_low, s_low)

    def __add__(self, other: "BiSeries") -> "BiSeries":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return BiSeries(self.table, out, max(self.z_low, other.z_low), max(self.s_low, other.s_low))

    def coeff_z(self, e: int) -> SeriesAtInfinity:
        """Coefficient of z^e, a Laurent series in r known down to r^(s_low - e)."""
        if e < self.z_low:
            raise TruncationError(f"z^{e} below z-truncation {self.z_low}")
        terms = {b: c for (a, b), c in self.terms.items() if a == e}
        return SeriesAtInfinity(self.table, terms, self.s_low - e)

    def residue_z(self) -> SeriesAtInfinity:
        return self.coeff_z(-1)


def reciprocal_difference(s: SeriesAtInfinity, z_low: int, s_low: int) -> BiSeries:
    """1/(s(z) - s(r)) for |z| > |r|, s = z + sum_{e<=0} s_e z^e exact.

    Uses s(z) - s(r) = (z - r)(1 - E) with
    E = sum_{n>=1} s_{-n} sum_{a=0}^{n-1} z^{a-n} r^{-1-a}.
    """
    _check_unit_leading(s, 1)
    if s.low is not None:
        raise TruncationError("reciprocal_difference needs an exact (finite) series")
    table = s.table
    e_terms: dict[tuple[int, int], GradedPoly] = {}
    for e, c in s.terms.items():
        if e >= 0:
            continue
        n = -e
        for a in range(n):
            key = (a - n, -1 - a)
            e_terms[key] = e_terms[key] + c if key in e_terms else c
    big_e = BiSeries(table, e_terms, z_low, s_low)
    # 1/(z - r) = sum_j r^j z^{-1-j}
    kernel = BiSeries(table, {(-1 - j, j): GradedPoly.const(table, 1) for j in range(0, -z_low)},
                      z_low, s_low)
    total = kernel
    power = kernel
    while True:
        power = power.mul(big_e)
        if not power.terms:
            break
        total = total + power
    return total
