"""Virasoro action on SLE local martingales.

For a configuration with weights ``delta_p`` and partition function ``Z``,

    L_n = Res_r r^(1-n) { c/12 Sf(r)
                          + sum_p [ delta_p f'(r)^2/(f(r)-p)^2
                                    + (d_p log Z) f'(r)^2/(f(r)-p)
                                    + f'(r)^2/(f(r)-p) d_p ]
                          - sum_m Res_z z^(m-2) f'(r)^2/(f(z)-f(r)) d_{f_m} }

with ``c = c(kappa_eff)``.  The operator is split into a multiplication
polynomial ``M_n``, first-order position coefficients ``A_n(p)`` and
capacity coefficients ``B_{n,m}``; each is computed once per ``n`` and
cached.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .config import SleConfig, builtin_configs, get_config
from .kappa import KappaRational, ONE, ZERO, central_charge
from .poly import GradedPoly, RationalExpr, TruncationError, VariableTable
from .series import canonical_f, reciprocal_difference, reciprocal_shifted, schwarzian

__all__ = [
    "VirasoroRep",
    "ModuleElement",
    "Decomposition",
    "DimensionResult",
    "partitions",
    "partition_count",
    "words_up_to",
    "generate_module",
    "commutator_check",
    "decompose",
    "gluing_continuity_check",
    "generator_annihilation_check",
    "generator_residual",
    "coefficient_drift",
    "dimension_check",
    "capacity_monomials",
    "martingale_for_monomial",
    "InternalConsistencyError",
    "StructureError",
]


class InternalConsistencyError(ArithmeticError):
    """A denominator failed to cancel; signals a bug, never bad input."""


class StructureError(AssertionError):
    """A decomposition did not have the expected position-free part."""


def partitions(n: int, largest: int | None = None):
    """Non-increasing tuples of positive integers summing to ``n``."""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def partition_count(n: int) -> int:
    if n < 0:
        return 0
    return sum(1 for _ in partitions(n))


def words_up_to(max_level: int) -> list[tuple[int, ...]]:
    """All words by level, lexicographic within a level."""
    out = []
    for level in range(max_level + 1):
        out.extend(sorted(partitions(level)))
    return out


class VirasoroRep:
    """The operators L_n for one configuration over a fixed variable table."""

    def __init__(self, cfg: SleConfig, depth: int):
        self.cfg = cfg
        self.table: VariableTable = cfg.table(depth)
        self.depth = depth
        self.c = central_charge(cfg.kappa)
        self.f = canonical_f(self.table)
        fp = self.f.derivative()
        self.fprime2 = fp.mul(fp)
        self._recip: dict[str, object] = {}
        self._schwarz = None
        self._bi = None
        self._mult: dict[int, GradedPoly] = {}
        self._pos: dict[tuple[int, str], GradedPoly] = {}
        self._cap: dict[tuple[int, int], GradedPoly] = {}
        self._dlog = {p: cfg.log_derivative(p, self.table) for p in cfg.names}

    # -- series caches -----------------------------------------------------
    def _recip_series(self, p: str, low: int):
        s = self._recip.get(p)
        if s is None or s.low > low:
            s = reciprocal_shifted(self.f, p, low)
            self._recip[p] = s
        return s

    def _schwarz_series(self, low: int):
        if self._schwarz is None or self._schwarz.low > low:
            self._schwarz = schwarzian(self.f, low)
        return self._schwarz

    def _bi_series(self):
        if self._bi is None:
            L = self.depth
            self._bi = reciprocal_difference(self.f, 1 - L, -1 - L)
        return self._bi

    # -- operator pieces ---------------------------------------------------
    def pos_coeff(self, n: int, p: str) -> GradedPoly:
        """A_n(p) = Res_r r^(1-n) f'(r)^2 / (f(r) - p)."""
        key = (n, p)
        if key not in self._pos:
            e = n - 2
            s = self.fprime2.mul(self._recip_series(p, e - 1), e)
            self._pos[key] = s.coeff(e)
        return self._pos[key]

    def mult_coeff(self, n: int) -> GradedPoly:
        """M_n = L_n . 1, the zeroth-order part of L_n."""
        if n in self._mult:
            return self._mult[n]
        e = n - 2
        total = self._schwarz_series(e).coeff(e).scale(self.c / 12)
        first_order = RationalExpr.from_poly(GradedPoly.zero(self.table))
        for p in self.cfg.names:
            r = self._recip_series(p, e - 1)
            d = self.fprime2.mul(r.mul(r, e), e).coeff(e)
            total = total + d.scale(self.cfg.delta(p))
            first_order = first_order + self._dlog[p] * self.pos_coeff(n, p)
        try:
            total = total + first_order.to_poly()
        except ArithmeticError as exc:
            raise InternalConsistencyError(f"L_{n}: {exc}") from exc
        self._mult[n] = total
        return total

    def cap_coeff(self, n: int, m: int) -> GradedPoly:
        """B_{n,m} = Res_r r^(1-n) f'(r)^2 Res_z z^(m-2) / (f(z) - f(r))."""
        key = (n, m)
        if key not in self._cap:
            if m - n > self.depth:
                raise TruncationError(f"B_({n},{m}) has degree {m - n} beyond depth {self.depth}")
            g = self._bi_series().coeff_z(1 - m)
            e = n - 2
            self._cap[key] = self.fprime2.mul(g, e).coeff(e)
        return self._cap[key]

    def apply(self, n: int, poly: GradedPoly) -> GradedPoly:
        """L_n applied to a polynomial."""
        if poly.table != self.table:
            raise ValueError("polynomial is over a different variable table")
        if poly.is_zero():
            return poly
        d = poly.degree()
        if d - n > self.depth:
            raise TruncationError(
                f"L_{n} on a degree-{d} polynomial needs capacity depth {d - n}, have {self.depth}")
        out = self.mult_coeff(n) * poly
        used = poly.variables()
        for p in self.cfg.names:
            if p in used:
                out = out + self.pos_coeff(n, p) * poly.diff(p)
        for m in range(2, self.depth + 1):
            name = f"f{m}"
            if name in used:
                out = out - self.cap_coeff(n, m) * poly.diff(name)
        return out

    def apply_word(self, word, poly: GradedPoly | None = None) -> GradedPoly:
        """L_{-n1} ... L_{-nk} applied to ``poly`` (default 1)."""
        p = GradedPoly.const(self.table, 1) if poly is None else poly
        for n in reversed(word):
            p = self.apply(-n, p)
        return p

    def one(self) -> GradedPoly:
        return GradedPoly.const(self.table, 1)


@dataclass(frozen=True)
class ModuleElement:
    word: tuple[int, ...]
    poly: GradedPoly

    @property
    def level(self) -> int:
        return sum(self.word)

    def label(self) -> str:
        if not self.word:
            return "1"
        return "".join(f"L_{{-{n}}}" for n in self.word) + ".1"


def generate_module(cfg_or_rep, max_level: int, depth: int | None = None) -> list[ModuleElement]:
    """Elements L_{-n1}...L_{-nk}.1 for every word of level <= max_level."""
    rep = _as_rep(cfg_or_rep, max(max_level, 2) if depth is None else depth)
    cache: dict[tuple[int, ...], GradedPoly] = {(): rep.one()}
    out = []
    for word in words_up_to(max_level):
        if word not in cache:
            cache[word] = rep.apply(-word[0], cache[word[1:]])
        out.append(ModuleElement(word, cache[word]))
    return out


def _as_rep(cfg_or_rep, depth: int) -> VirasoroRep:
    if isinstance(cfg_or_rep, VirasoroRep):
        return cfg_or_rep
    if isinstance(cfg_or_rep, str):
        cfg_or_rep = get_config(cfg_or_rep)
    return VirasoroRep(cfg_or_rep, depth)


def commutator_check(rep: VirasoroRep, m: int, n: int, poly: GradedPoly) -> bool:
    """[L_m, L_n] p == (m-n) L_{m+n} p + c/12 (m^3 - m) delta_{m+n,0} p."""
    lhs = rep.apply(m, rep.apply(n, poly)) - rep.apply(n, rep.apply(m, poly))
    rhs = rep.apply(m + n, poly).scale(m - n)
    if m + n == 0:
        rhs = rhs + poly.scale(rep.c * Fraction(m ** 3 - m, 12))
    return lhs == rhs


@dataclass(frozen=True)
class Decomposition:
    P: GradedPoly
    remainder: GradedPoly


def decompose(el: ModuleElement | GradedPoly, cfg: SleConfig) -> Decomposition:
    """Split into a position-free part P and a remainder vanishing at collision."""
    poly = el.poly if isinstance(el, ModuleElement) else el
    if not cfg.collision:
        raise ValueError(f"config {cfg.name!r} has no collision map")
    P = poly.substitute(cfg.collision)
    if not P.is_free_of(cfg.names):
        raise StructureError(f"collapsed polynomial still depends on positions: {P}")
    remainder = poly - P
    if remainder.substitute(cfg.collision):
        raise StructureError("remainder does not vanish at the collision point")
    return Decomposition(P, remainder)


def gluing_continuity_check(max_level: int, star1: SleConfig | None = None,
                            star2: SleConfig | None = None):
    """Compare Q* (star1, x*, v* -> y*) and Q~* (star2, ~w* -> ~y*) word by word.

    Returns ``(ok, mismatches)`` where mismatches lists ``(word, difference)``.
    """
    cfgs = builtin_configs()
    star1 = star1 or cfgs["star1"]
    star2 = star2 or cfgs["star2"]
    depth = max(max_level, 2)
    m1 = generate_module(star1, max_level, depth)
    m2 = generate_module(star2, max_level, depth)
    t2 = star2.table(depth)
    mismatches = []
    for e1, e2 in zip(m1, m2):
        q = e1.poly.substitute({"x*": "y*", "v*": "y*"})
        q = q.retable(t2, {"u*": "~u*", "y*": "~y*"}) if q.is_free_of(["x*", "v*"]) else None
        qt = e2.poly.substitute({"~w*": "~y*"})
        if q is None or q != qt:
            mismatches.append((e1.word, None if q is None else q - qt))
    return not mismatches, mismatches


def coefficient_drift(table: VariableTable, drive: str, m: int) -> GradedPoly:
    """Time derivative of g_{-m} under dg/dt = 2/(g - drive): Res_z z^(m-2) 2/(f(z) - drive)."""
    if not 2 <= m <= table.depth:
        raise TruncationError(f"capacity index {m} outside depth {table.depth}")
    s = reciprocal_shifted(canonical_f(table), drive, 1 - m)
    return s.coeff(1 - m).scale(2)


def generator_residual(poly: GradedPoly, cfg: SleConfig, kappa: KappaRational | None = None) -> RationalExpr:
    """The drift of phi(X_t, Y_t, g_t) under the SLE_kappa(rho) dynamics."""
    table = poly.table
    k = cfg.kappa if kappa is None else kappa
    x = cfg.driving
    px = poly.diff(x)
    out = RationalExpr.from_poly(px.diff(x).scale(k / 2))
    out = out + cfg.log_derivative(x, table) * px * k
    for y in cfg.passive:
        py = poly.diff(y)
        if py:
            out = out + RationalExpr.inverse_difference(table, y, x) * py * 2
    for m in range(2, table.depth + 1):
        pf = poly.diff(f"f{m}")
        if pf:
            out = out + coefficient_drift(table, x, m) * pf
    return out.cancel()


def generator_annihilation_check(el: ModuleElement | GradedPoly, cfg: SleConfig):
    """``(ok, residual)``: whether the generator kills the element exactly."""
    poly = el.poly if isinstance(el, ModuleElement) else el
    res = generator_residual(poly, cfg)
    return res.is_zero(), res


def capacity_monomials(table: VariableTable, n: int) -> list[GradedPoly]:
    """All monomials of degree n in f2, f3, ... (partitions of n into parts >= 2)."""
    out = []
    for part in sorted(partitions(n)):
        if part and min(part) < 2:
            continue
        if part and max(part) > table.depth:
            raise TruncationError(f"monomial needs f{max(part)} beyond depth {table.depth}")
        mono = GradedPoly.const(table, 1)
        for m in part:
            mono = mono * GradedPoly.cap(table, m)
        out.append(mono)
    return out


def _rank(rows: list[list[KappaRational]]) -> int:
    rows = [list(r) for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = rows[rank][col].inv()
        rows[rank] = [v * inv for v in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                factor = rows[i][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


@dataclass(frozen=True)
class DimensionResult:
    level: int
    rank: int
    expected: int
    monomials: int
    spanning: bool

    @property
    def ok(self) -> bool:
        return self.rank == self.expected and self.spanning


def dimension_check(cfg_or_rep, n: int, elements: list[ModuleElement] | None = None) -> DimensionResult:
    """Rank of the P-parts at level n against p(n) - p(n-1)."""
    rep = _as_rep(cfg_or_rep, max(n, 2))
    cfg = rep.cfg
    if elements is None:
        elements = generate_module(rep, n)
    ps = [decompose(e, cfg).P for e in elements if e.level == n]
    monos = capacity_monomials(rep.table, n)
    keys = [next(iter(m.terms)) for m in monos]
    rows = [[p.terms.get(k, ZERO) for k in keys] for p in ps]
    for p in ps:
        if set(p.terms) - set(keys):
            raise StructureError(f"P at level {n} has monomials outside degree {n}")
    rank = _rank(rows) if rows else 0
    expected = partition_count(n) - partition_count(n - 1)
    return DimensionResult(n, rank, expected, len(monos), rank == len(monos))


def martingale_for_monomial(cfg_or_rep, exponents: dict[int, int]) -> GradedPoly:
    """An element phi of the module whose P-part is prod f_m^{e_m}.

    Solves for a combination of level-n words over Q(kappa).
    """
    n = sum(m * e for m, e in exponents.items())
    rep = _as_rep(cfg_or_rep, max(n, 2))
    cfg = rep.cfg
    table = rep.table
    target = GradedPoly.const(table, 1)
    for m, e in exponents.items():
        target = target * GradedPoly.cap(table, m) ** e
    if n == 0:
        return target
    elements = [e for e in generate_module(rep, n) if e.level == n and e.poly]
    ps = [decompose(e, cfg).P for e in elements]
    keys = [next(iter(m.terms)) for m in capacity_monomials(table, n)]
    # Gauss-Jordan on [P_w | e_w] to express the target in terms of words
    nw = len(ps)
    rows = [[p.terms.get(k, ZERO) for k in keys] + [ONE if j == i else ZERO for j in range(nw)]
            for i, p in enumerate(ps)]
    goal = [target.terms.get(k, ZERO) for k in keys]
    coeffs = [ZERO] * nw
    pivots = []
    r = 0
    for col in range(len(keys)):
        piv = next((i for i in range(r, nw) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][col].inv()
        rows[r] = [v * inv for v in rows[r]]
        for i in range(nw):
            if i != r and rows[i][col]:
                fct = rows[i][col]
                rows[i] = [a - fct * b for a, b in zip(rows[i], rows[r])]
        pivots.append((col, r))
        r += 1
    for col, row in pivots:
        g = goal[col]
        if g:
            for j in range(nw):
                coeffs[j] = coeffs[j] + g * rows[row][len(keys) + j]
    for col in range(len(keys)):
        if goal[col] and col not in {c for c, _ in pivots}:
            raise StructureError(f"monomial {target} is not reachable at level {n}")
    phi = GradedPoly.zero(table)
    for c, el in zip(coeffs, elements):
        if c:
            phi = phi + el.poly.scale(c)
    if decompose(phi, cfg).P != target:
        raise InternalConsistencyError("solved combination does not reproduce the target monomial")
    return phi
