"""Graded polynomials over Q(kappa) in position and capacity variables.

Position variables (``x``, ``y``, ``u*`` ...) have degree 1 and the capacity
variable ``f{m}`` (standing for f_{-m}) has degree ``m``.  Exponent vectors
are packed into a single integer, 8 bits per variable, so that monomial
multiplication is integer addition.

Text format (used by ``--dump`` and golden tests)::

    [coef] mono + [coef] mono + ...

Monomials are sorted by descending degree, then by descending exponent
vector in table order; ``mono`` is ``name^e`` factors joined by ``*`` and is
omitted for the constant term.  ``coef`` is printed by
:class:`~slemart.kappa.KappaRational`.  The zero polynomial prints as ``0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .kappa import KappaRational, ONE, ZERO

__all__ = [
    "VariableTable",
    "GradedPoly",
    "RationalExpr",
    "NumericPoly",
    "NumericRational",
    "TableMismatchError",
    "TruncationError",
]

_BITS = 8
_MASK = (1 << _BITS) - 1
_MAX_EXP = _MASK


class TableMismatchError(ValueError):
    """Operands live over different variable tables."""


class TruncationError(ArithmeticError):
    """A computation would need terms beyond the configured truncation."""


@dataclass(frozen=True)
class VariableTable:
    """Ordered position variables plus capacity variables f2..f{depth}."""

    positions: tuple[str, ...]
    depth: int
    names: tuple[str, ...] = field(init=False, repr=False, compare=False)
    degrees: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        positions = tuple(self.positions)
        object.__setattr__(self, "positions", positions)
        if self.depth < 2:
            raise ValueError("capacity depth must be at least 2")
        caps = tuple(f"f{m}" for m in range(2, self.depth + 1))
        names = positions + caps
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "degrees", (1,) * len(positions) + tuple(range(2, self.depth + 1)))
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r} (table has {self.names})") from None

    def cap_name(self, m: int) -> str:
        if not 2 <= m <= self.depth:
            raise TruncationError(f"capacity variable f{m} outside depth {self.depth}")
        return f"f{m}"

    def cap_vars(self) -> tuple[str, ...]:
        return self.names[len(self.positions):]

    def with_depth(self, depth: int) -> "VariableTable":
        return VariableTable(self.positions, depth)

    def pack(self, exps: Iterable[int]) -> int:
        key = 0
        for i, e in enumerate(exps):
            if e < 0 or e > _MAX_EXP:
                raise OverflowError(f"exponent {e} out of range")
            key |= e << (_BITS * i)
        return key

    def unpack(self, key: int) -> tuple[int, ...]:
        return tuple((key >> (_BITS * i)) & _MASK for i in range(len(self.names)))

    def key_degree(self, key: int) -> int:
        d = 0
        i = 0
        while key:
            d += (key & _MASK) * self.degrees[i]
            key >>= _BITS
            i += 1
        return d


def _coef(value) -> KappaRational:
    return value if isinstance(value, KappaRational) else KappaRational(value)


class GradedPoly:
    """Sparse polynomial: packed exponent key -> nonzero KappaRational."""

    __slots__ = ("table", "terms")

    def __init__(self, table: VariableTable, terms: Mapping | None = None):
        self.table = table
        self.terms = {}
        if terms:
            for k, v in terms.items():
                if isinstance(k, tuple):
                    k = table.pack(k)
                v = _coef(v)
                if v:
                    self.terms[k] = v

    @classmethod
    def _make(cls, table, terms):
        obj = cls.__new__(cls)
        obj.table = table
        obj.terms = terms
        return obj

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, table):
        return cls._make(table, {})

    @classmethod
    def const(cls, table, c=1):
        c = _coef(c)
        return cls._make(table, {0: c} if c else {})

    @classmethod
    def var(cls, table, name: str, power: int = 1):
        return cls._make(table, {power << (_BITS * table.index(name)): ONE})

    @classmethod
    def cap(cls, table, m: int):
        return cls.var(table, table.cap_name(m))

    # -- basic queries -----------------------------------------------------
    def _check(self, other: "GradedPoly"):
        if other.table != self.table:
            raise TableMismatchError(f"{self.table} vs {other.table}")

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def monomials(self):
        """Yield ``(exponent tuple, coefficient)`` pairs in print order."""
        for k in self._sorted_keys():
            yield self.table.unpack(k), self.terms[k]

    def coefficient(self, exps) -> KappaRational:
        if isinstance(exps, Mapping):
            vec = [0] * len(self.table)
            for n, e in exps.items():
                vec[self.table.index(n)] = e
            exps = vec
        return self.terms.get(self.table.pack(exps), ZERO)

    def degrees(self) -> set[int]:
        return {self.table.key_degree(k) for k in self.terms}

    def degree(self) -> int:
        """Maximal degree of a monomial; -1 for the zero polynomial."""
        return max(self.degrees(), default=-1)

    def is_homogeneous(self, degree: int | None = None) -> bool:
        ds = self.degrees()
        if not ds:
            return True
        if len(ds) != 1:
            return False
        return degree is None or ds == {degree}

    def homogeneous_component(self, degree: int) -> "GradedPoly":
        kd = self.table.key_degree
        return GradedPoly._make(self.table, {k: v for k, v in self.terms.items() if kd(k) == degree})

    def variables(self) -> set[str]:
        used = 0
        for k in self.terms:
            used |= k
        out = set()
        for i, n in enumerate(self.table.names):
            if (used >> (_BITS * i)) & _MASK:
                out.add(n)
        return out

    def is_free_of(self, names: Iterable[str]) -> bool:
        """True iff no monomial uses any of ``names``."""
        idx = [self.table.index(n) for n in names]
        for k in self.terms:
            for i in idx:
                if (k >> (_BITS * i)) & _MASK:
                    return False
        return True

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, GradedPoly):
            other = GradedPoly.const(self.table, other)
        self._check(other)
        if len(other.terms) > len(self.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        out = dict(a)
        for k, v in b.items():
            cur = out.get(k)
            if cur is None:
                out[k] = v
            else:
                s = cur + v
                if s:
                    out[k] = s
                else:
                    del out[k]
        return GradedPoly._make(self.table, out)

    __radd__ = __add__

    def __neg__(self):
        return GradedPoly._make(self.table, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, GradedPoly):
            other = GradedPoly.const(self.table, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "GradedPoly":
        c = _coef(c)
        if not c:
            return GradedPoly.zero(self.table)
        if c == ONE:
            return self
        return GradedPoly._make(self.table, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, GradedPoly):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        self._check(other)
        a, b = self.terms, other.terms
        if not a or not b:
            return GradedPoly.zero(self.table)
        if len(a) < len(b):
            a, b = b, a
        # accumulate per key, reduce once
        acc: dict[int, list] = {}
        for k2, c2 in b.items():
            for k1, c1 in a.items():
                k = k1 + k2
                lst = acc.get(k)
                if lst is None:
                    acc[k] = [c1 * c2]
                else:
                    lst.append(c1 * c2)
        out = {}
        for k, lst in acc.items():
            s = lst[0] if len(lst) == 1 else _ksum(lst)
            if s:
                out[k] = s
        return GradedPoly._make(self.table, out)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power of a polynomial")
        result = GradedPoly.const(self.table, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def diff(self, name: str) -> "GradedPoly":
        """Partial derivative; lowers degree by the variable's degree."""
        i = self.table.index(name)
        shift = _BITS * i
        unit = 1 << shift
        out = {}
        for k, v in self.terms.items():
            e = (k >> shift) & _MASK
            if e:
                out[k - unit] = v * e
        return GradedPoly._make(self.table, out)

    def __eq__(self, other):
        if isinstance(other, GradedPoly):
            return self.table == other.table and self.terms == other.terms
        try:
            return self == GradedPoly.const(self.table, other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash((self.table, frozenset(self.terms.items())))

    # -- substitution ------------------------------------------------------
    def substitute(self, assignment: Mapping[str, object]) -> "GradedPoly":
        """Simultaneous substitution of variables by polynomials or constants."""
        if not assignment:
            return self
        table = self.table
        subs = []
        for name, value in assignment.items():
            i = table.index(name)
            if isinstance(value, str):
                value = GradedPoly.var(table, value)
            elif not isinstance(value, GradedPoly):
                value = GradedPoly.const(table, value)
            else:
                self._check(value)
            subs.append((i, value))
        mask = 0
        for i, _ in subs:
            mask |= _MASK << (_BITS * i)
        # group by the exponents of substituted variables
        groups: dict[int, dict[int, KappaRational]] = {}
        for k, v in self.terms.items():
            sk = k & mask
            groups.setdefault(sk, {})[k - sk] = v
        powers: dict[tuple[int, int], GradedPoly] = {}

        def power(i, value, e):
            key = (i, e)
            if key not in powers:
                powers[key] = value ** e
            return powers[key]

        result = GradedPoly.zero(table)
        for sk, rest in groups.items():
            factor = GradedPoly.const(table, 1)
            for i, value in subs:
                e = (sk >> (_BITS * i)) & _MASK
                if e:
                    factor = factor * power(i, value, e)
            result = result + factor * GradedPoly._make(table, dict(rest))
        return result

    def retable(self, table: VariableTable, rename: Mapping[str, str] | None = None) -> "GradedPoly":
        """Move to another table, optionally renaming variables."""
        rename = dict(rename or {})
        mapping = []
        for i, n in enumerate(self.table.names):
            target = rename.get(n, n)
            mapping.append((i, target))
        out = {}
        for k, v in self.terms.items():
            exps = [0] * len(table)
            for i, target in mapping:
                e = (k >> (_BITS * i)) & _MASK
                if e:
                    try:
                        exps[table.index(target)] += e
                    except KeyError:
                        raise TableMismatchError(f"variable {target!r} missing in target table") from None
            nk = table.pack(exps)
            s = out.get(nk, ZERO) + v
            if s:
                out[nk] = s
            else:
                out.pop(nk, None)
        return GradedPoly._make(table, out)

    # -- numerics ----------------------------------------------------------
    def specialize(self, kappa) -> dict[tuple[int, ...], Fraction]:
        """Exact coefficients at a rational kappa, keyed by exponent tuples."""
        return {self.table.unpack(k): v.eval_at(kappa) for k, v in self.terms.items()}

    def compile(self, kappa: float) -> "NumericPoly":
        return NumericPoly(self, kappa)

    def evaluate(self, kappa, values: Mapping[str, object]):
        """Evaluate at a numeric kappa; exact when everything is rational."""
        exact = isinstance(kappa, (int, Fraction)) and all(
            isinstance(v, (int, Fraction)) for v in values.values())
        total = Fraction(0) if exact else 0.0
        for exps, c in self.monomials():
            term = c.eval_at(kappa) if exact else c.evalf(float(kappa))
            for n, e in zip(self.table.names, exps):
                if e:
                    if n not in values:
                        raise KeyError(f"no value for variable {n!r}")
                    term = term * values[n] ** e
            total = total + term
        return total

    # -- text --------------------------------------------------------------
    def _sorted_keys(self):
        t = self.table
        return sorted(self.terms, key=lambda k: (t.key_degree(k), t.unpack(k)), reverse=True)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        names = self.table.names
        for k in self._sorted_keys():
            exps = self.table.unpack(k)
            mono = "*".join(n if e == 1 else f"{n}^{e}" for n, e in zip(names, exps) if e)
            coef = f"[{self.terms[k]}]"
            parts.append(f"{coef} {mono}" if mono else coef)
        return " + ".join(parts)

    def __repr__(self):
        return f"GradedPoly({self})"


def _ksum(values: list) -> KappaRational:
    """Sum many KappaRationals, grouping by denominator to save gcds."""
    by_den: dict = {}
    for v in values:
        key = tuple(int(c) for c in v.den.coeffs())
        entry = by_den.get(key)
        if entry is None:
            by_den[key] = [v.num, v.den]
        else:
            entry[0] = entry[0] + v.num
    total = ZERO
    for num, den in by_den.values():
        total = total + KappaRational._raw(num, den)
    return total


class NumericPoly:
    """A GradedPoly specialised at a float kappa, evaluated on numpy arrays."""

    def __init__(self, poly: GradedPoly, kappa: float):
        self.names = poly.table.names
        self.terms = []
        for exps, c in poly.monomials():
            factors = [(n, e) for n, e in zip(self.names, exps) if e]
            self.terms.append((c.evalf(kappa), factors))
        self.variables = sorted({n for _, fs in self.terms for n, _ in fs})

    def __call__(self, values: Mapping[str, np.ndarray]):
        out = 0.0
        for c, factors in self.terms:
            term = c
            for n, e in factors:
                v = values[n]
                term = term * (v if e == 1 else v ** e)
            out = out + term
        return out


class NumericRational:
    """A RationalExpr specialised at a float kappa; picklable."""

    def __init__(self, expr: "RationalExpr", kappa: float):
        self.num = expr.num.compile(kappa)
        names = expr.table.names
        self.factors = [(names[i], names[j], p) for (i, j), p in expr.den.items()]

    def __call__(self, values: Mapping[str, np.ndarray]):
        out = self.num(values)
        for a, b, p in self.factors:
            out = out / (values[a] - values[b]) ** p
        return out


class RationalExpr:
    """Polynomial over a product of position differences.

    ``den`` maps an ordered index pair ``(i, j)`` with ``i < j`` to the power
    of the factor ``(var_i - var_j)`` in the denominator.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: GradedPoly, den: Mapping[tuple[int, int], int] | None = None):
        self.num = num
        self.den = {k: p for k, p in (den or {}).items() if p}

    @property
    def table(self):
        return self.num.table

    @classmethod
    def from_poly(cls, p: GradedPoly) -> "RationalExpr":
        return cls(p, {})

    @classmethod
    def inverse_difference(cls, table: VariableTable, a: str, b: str, power: int = 1) -> "RationalExpr":
        """``1/(a - b)**power``."""
        i, j = table.index(a), table.index(b)
        if i == j:
            raise ValueError("difference of a variable with itself")
        sign = 1 if i < j or power % 2 == 0 else -1
        return cls(GradedPoly.const(table, sign), {(min(i, j), max(i, j)): power})

    def _factor_poly(self, pair) -> GradedPoly:
        i, j = pair
        names = self.table.names
        return GradedPoly.var(self.table, names[i]) - GradedPoly.var(self.table, names[j])

    def _lift(self, den: Mapping) -> GradedPoly:
        """Numerator rewritten over the (larger) denominator ``den``."""
        num = self.num
        for pair, p in den.items():
            extra = p - self.den.get(pair, 0)
            if extra:
                num = num * self._factor_poly(pair) ** extra
        return num

    def __add__(self, other):
        if isinstance(other, GradedPoly):
            other = RationalExpr.from_poly(other)
        elif not isinstance(other, RationalExpr):
            other = RationalExpr.from_poly(GradedPoly.const(self.table, other))
        self.num._check(other.num)
        den = dict(self.den)
        for pair, p in other.den.items():
            den[pair] = max(den.get(pair, 0), p)
        return RationalExpr(self._lift(den) + other._lift(den), den).cancel()

    __radd__ = __add__

    def __neg__(self):
        return RationalExpr(-self.num, self.den)

    def __sub__(self, other):
        if isinstance(other, GradedPoly):
            other = RationalExpr.from_poly(other)
        elif not isinstance(other, RationalExpr):
            other = RationalExpr.from_poly(GradedPoly.const(self.table, other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RationalExpr):
            den = dict(self.den)
            for pair, p in other.den.items():
                den[pair] = den.get(pair, 0) + p
            return RationalExpr(self.num * other.num, den).cancel()
        if isinstance(other, GradedPoly):
            return RationalExpr(self.num * other, self.den).cancel()
        return RationalExpr(self.num.scale(other), self.den)

    __rmul__ = __mul__

    def diff(self, name: str) -> "RationalExpr":
        """Quotient-rule derivative."""
        t = self.table
        v = t.index(name)
        result = RationalExpr(self.num.diff(name), self.den)
        for (i, j), p in self.den.items():
            if v not in (i, j):
                continue
            s = 1 if v == i else -1
            den = dict(self.den)
            den[(i, j)] = p + 1
            result = result + RationalExpr(self.num.scale(-p * s), den)
        return result.cancel()

    def cancel(self) -> "RationalExpr":
        """Divide out difference factors that divide the numerator."""
        num = self.num
        den = dict(self.den)
        if not num:
            return RationalExpr(num, {})
        for pair in list(den):
            while den.get(pair):
                q = _exact_divide_difference(num, pair)
                if q is None:
                    break
                num = q
                den[pair] -= 1
        return RationalExpr(num, den)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return not self.cancel().den

    def to_poly(self) -> GradedPoly:
        c = self.cancel()
        if c.den:
            raise ArithmeticError(f"denominator does not cancel: {c}")
        return c.num

    def compile(self, kappa: float) -> "NumericRational":
        """Numeric evaluator ``values -> num/den`` on numpy arrays."""
        return NumericRational(self, kappa)

    def __str__(self):
        if not self.den:
            return str(self.num)
        names = self.table.names
        d = "*".join(f"({names[i]} - {names[j]})" + (f"^{p}" if p > 1 else "")
                     for (i, j), p in sorted(self.den.items()))
        return f"({self.num}) / ({d})"

    __repr__ = __str__


def _exact_divide_difference(num: GradedPoly, pair) -> GradedPoly | None:
    """``num / (a - b)`` if exact, else None (synthetic division in ``a``)."""
    t = num.table
    i, j = pair
    a, b = t.names[i], t.names[j]
    shift = _BITS * i
    mask = _MASK << shift
    # coefficients of num as a polynomial in a
    by_power: dict[int, dict[int, KappaRational]] = {}
    for k, v in num.terms.items():
        e = (k & mask) >> shift
        by_power.setdefault(e, {})[k & ~mask] = v
    top = max(by_power)
    if top == 0:
        return None
    bvar = GradedPoly.var(t, b)
    q_coeffs = {}
    carry = GradedPoly.zero(t)
    for e in range(top, 0, -1):
        c = GradedPoly._make(t, dict(by_power.get(e, {}))) + carry
        q_coeffs[e - 1] = c
        carry = bvar * c
    remainder = GradedPoly._make(t, dict(by_power.get(0, {}))) + carry
    if remainder:
        return None
    out = {}
    for e, c in q_coeffs.items():
        for k, v in c.terms.items():
            out[k + (e << shift)] = v
    return GradedPoly._make(t, out)
