"""Exact arithmetic in the field Q(kappa) of rational functions of kappa.

Values are kept as ``num/den`` with ``num, den`` integer polynomials,
``gcd(num, den) = 1`` over Z[kappa] and ``den`` with positive leading
coefficient, so two values are equal iff their representations are equal.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from flint import fmpq, fmpz_poly

__all__ = [
    "KappaRational",
    "KAPPA",
    "ONE",
    "ZERO",
    "central_charge",
    "conformal_weight_h",
    "delta_of_rho",
    "dual_kappa",
    "PoleError",
]


class PoleError(ZeroDivisionError):
    """Raised when a rational function is evaluated at a root of its denominator."""


def _poly_str(p: fmpz_poly, var: str = "k") -> str:
    coeffs = [int(c) for c in p.coeffs()]
    if not coeffs:
        return "0"
    parts = []
    for deg in range(len(coeffs) - 1, -1, -1):
        c = coeffs[deg]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if deg == 0:
            body = str(a)
        else:
            mono = var if deg == 1 else f"{var}^{deg}"
            body = mono if a == 1 else f"{a}*{mono}"
        parts.append((sign, body))
    first_sign, first_body = parts[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def _as_poly(value) -> tuple[fmpz_poly, fmpz_poly]:
    if isinstance(value, KappaRational):
        return value.num, value.den
    if isinstance(value, fmpz_poly):
        return value, fmpz_poly([1])
    if isinstance(value, bool):
        raise TypeError("bool is not a kappa-rational")
    if isinstance(value, int):
        return fmpz_poly([value]), fmpz_poly([1])
    if isinstance(value, (Fraction, Rational)):
        return fmpz_poly([int(value.numerator)]), fmpz_poly([int(value.denominator)])
    if isinstance(value, fmpq):
        return fmpz_poly([int(value.p)]), fmpz_poly([int(value.q)])
    raise TypeError(f"cannot convert {type(value).__name__} to KappaRational")


class KappaRational:
    """An element of Q(kappa) in reduced canonical form.

    >>> h = conformal_weight_h()
    >>> str(h)
    '(-k + 6)/(2*k)'
    >>> h.eval_at(2)
    Fraction(1, 1)
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num=0, den=1):
        n1, d1 = _as_poly(num)
        n2, d2 = _as_poly(den)
        n = n1 * d2
        d = d1 * n2
        if d.is_zero():
            raise ZeroDivisionError("division by zero in κ-field")
        self._set(n, d)

    def _set(self, n: fmpz_poly, d: fmpz_poly) -> None:
        if n.is_zero():
            n = fmpz_poly([])
            d = fmpz_poly([1])
        else:
            g = n.gcd(d)
            if not (g.degree() == 0 and g.coeffs()[0] == 1):
                n = n // g
                d = d // g
            if d.coeffs()[-1] < 0:
                n = -n
                d = -d
        self.num = n
        self.den = d
        self._hash = None

    @classmethod
    def _raw(cls, n: fmpz_poly, d: fmpz_poly) -> "KappaRational":
        obj = cls.__new__(cls)
        obj._set(n, d)
        return obj

    # -- field operations -------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, KappaRational):
            try:
                other = KappaRational(other)
            except TypeError:
                return NotImplemented
        if self.den == other.den:
            return KappaRational._raw(self.num + other.num, self.den)
        return KappaRational._raw(self.num * other.den + other.num * self.den,
                                  self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        obj = KappaRational.__new__(KappaRational)
        obj.num = -self.num
        obj.den = self.den
        obj._hash = None
        return obj

    def __sub__(self, other):
        if not isinstance(other, KappaRational):
            try:
                other = KappaRational(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, KappaRational):
            try:
                other = KappaRational(other)
            except TypeError:
                return NotImplemented
        return KappaRational._raw(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inv(self) -> "KappaRational":
        if self.num.is_zero():
            raise ZeroDivisionError("division by zero in κ-field")
        return KappaRational._raw(self.den, self.num)

    def __truediv__(self, other):
        if not isinstance(other, KappaRational):
            try:
                other = KappaRational(other)
            except TypeError:
                return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other):
        return KappaRational(other) * self.inv()

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return self.inv() ** (-e)
        return KappaRational._raw(self.num ** e, self.den ** e)

    # -- comparison -------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, KappaRational):
            try:
                other = KappaRational(other)
            except TypeError:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((tuple(int(c) for c in self.num.coeffs()),
                               tuple(int(c) for c in self.den.coeffs())))
        return self._hash

    def __bool__(self):
        return not self.num.is_zero()

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.degree() <= 0 and self.den.degree() == 0

    def canonical(self) -> "KappaRational":
        return KappaRational._raw(self.num, self.den)

    # -- evaluation -------------------------------------------------------
    def eval_at(self, kappa) -> Fraction:
        """Exact value at a rational kappa."""
        q = fmpq(Fraction(kappa).numerator, Fraction(kappa).denominator)
        d = self.den(q)
        if d == 0:
            _, factors = self.den.factor()
            for f, _mult in factors:
                if f(q) == 0:
                    raise PoleError(
                        f"pole at κ={Fraction(kappa)}: denominator factor "
                        f"({_poly_str(f)}) vanishes")
            raise PoleError(f"pole at κ={Fraction(kappa)}")
        v = self.num(q) / d
        return Fraction(int(v.p), int(v.q))

    def evalf(self, kappa: float) -> float:
        n = 0.0
        for c in reversed(self.num.coeffs()):
            n = n * kappa + int(c)
        d = 0.0
        for c in reversed(self.den.coeffs()):
            d = d * kappa + int(c)
        if d == 0.0:
            raise PoleError(f"pole at κ={kappa}")
        return n / d

    def to_fraction(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} depends on κ")
        if self.num.is_zero():
            return Fraction(0)
        return Fraction(int(self.num.coeffs()[0]), int(self.den.coeffs()[0]))

    # -- text -------------------------------------------------------------
    def __str__(self):
        ns = _poly_str(self.num)
        if self.den.degree() == 0 and self.den.coeffs()[0] == 1:
            return ns
        if self.num.degree() > 0 and len([c for c in self.num.coeffs() if c != 0]) > 1:
            ns = f"({ns})"
        ds = _poly_str(self.den)
        nonzero = [c for c in self.den.coeffs() if c != 0]
        if len(nonzero) > 1 or (self.den.degree() > 0 and nonzero[-1] != 1):
            ds = f"({ds})"
        return f"{ns}/{ds}"

    def __repr__(self):
        return f"KappaRational('{self}')"

    @classmethod
    def parse(cls, text: str) -> "KappaRational":
        """Parse an expression in ``k`` (or ``kappa``), e.g. ``"(k-8)/2"``."""
        import ast

        tree = ast.parse(text.replace("^", "**").replace("κ", "k"), mode="eval")

        def ev(node):
            if isinstance(node, ast.Expression):
                return ev(node.body)
            if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
                if isinstance(node.value, float):
                    return KappaRational(Fraction(str(node.value)))
                return KappaRational(node.value)
            if isinstance(node, ast.Name) and node.id in ("k", "kappa"):
                return KAPPA
            if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
                v = ev(node.operand)
                return -v if isinstance(node.op, ast.USub) else v
            if isinstance(node, ast.BinOp):
                a, b = ev(node.left), ev(node.right)
                if isinstance(node.op, ast.Add):
                    return a + b
                if isinstance(node.op, ast.Sub):
                    return a - b
                if isinstance(node.op, ast.Mult):
                    return a * b
                if isinstance(node.op, ast.Div):
                    return a / b
                if isinstance(node.op, ast.Pow):
                    if not b.is_constant() or b.to_fraction().denominator != 1:
                        raise ValueError("only integer powers are supported")
                    return a ** int(b.to_fraction())
            raise ValueError(f"unsupported expression: {text!r}")

        return ev(tree)


KAPPA = KappaRational(fmpz_poly([0, 1]))
ONE = KappaRational(1)
ZERO = KappaRational(0)


def dual_kappa(kappa: KappaRational = KAPPA) -> KappaRational:
    """kappa* = 16/kappa."""
    return KappaRational(16) / kappa


def conformal_weight_h(kappa: KappaRational = KAPPA) -> KappaRational:
    """h(kappa) = (6 - kappa)/(2 kappa)."""
    return (6 - kappa) / (2 * kappa)


def central_charge(kappa: KappaRational = KAPPA) -> KappaRational:
    """c(kappa) = (3 kappa - 8)(6 - kappa)/(2 kappa)."""
    return (3 * kappa - 8) * (6 - kappa) / (2 * kappa)


def delta_of_rho(rho, kappa: KappaRational = KAPPA) -> KappaRational:
    """Boundary weight rho (rho + 4 - kappa) / (4 kappa) of a force point."""
    rho = KappaRational(rho)
    return rho * (rho + 4 - kappa) / (4 * kappa)
