"""SLE_kappa(rho) configurations with product-form partition functions.

The partition function

    Z = prod_K (y_K - x)^(rho_K/kappa) * prod_{J<K} (y_J - y_K)^(rho_J rho_K / (2 kappa))

is never built; only ``d log Z`` and the null-field residual ``D Z / Z`` are,
both as :class:`~slemart.poly.RationalExpr`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path

from .kappa import KAPPA, KappaRational, conformal_weight_h, delta_of_rho, dual_kappa
from .poly import GradedPoly, RationalExpr, VariableTable

__all__ = [
    "Point",
    "SleConfig",
    "WeightsTable",
    "builtin_configs",
    "get_config",
    "load_config",
    "CONFIG_SCHEMA_VERSION",
    "SETUP_NAMES",
]

CONFIG_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Point:
    name: str
    role: str  # "driving" or "passive"
    rho: KappaRational | None = None

    def __post_init__(self):
        if self.role not in ("driving", "passive"):
            raise ValueError(f"point {self.name!r}: role must be 'driving' or 'passive'")
        if self.role == "passive" and self.rho is None:
            raise ValueError(f"passive point {self.name!r} needs a rho value")


@dataclass(frozen=True)
class WeightsTable:
    delta: dict[str, KappaRational]
    pair: dict[frozenset, KappaRational]

    def Delta(self, a: str, b: str) -> KappaRational:
        return self.pair[frozenset((a, b))]


@dataclass(frozen=True)
class SleConfig:
    """An SLE_kappa(rho_1, ..., rho_M) setup.

    ``kappa`` is the effective parameter as an element of Q(kappa) (``k`` or
    ``16/k``); ``value`` optionally pins the base kappa numerically.
    ``collision`` maps positions to the point they merge into at the
    stopping time.
    """

    name: str
    kappa: KappaRational
    points: tuple[Point, ...]
    setup: str = "custom"
    value: Fraction | None = None
    collision: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        drivers = [p for p in self.points if p.role == "driving"]
        if len(drivers) != 1:
            raise ValueError(f"config {self.name!r} needs exactly one driving point, got {len(drivers)}")
        names = [p.name for p in self.points]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate point names in {names}")

    # -- derived data ------------------------------------------------------
    @property
    def driving(self) -> str:
        return next(p.name for p in self.points if p.role == "driving")

    @property
    def passive(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.points if p.role == "passive")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.points)

    def rho(self, name: str) -> KappaRational:
        for p in self.points:
            if p.name == name:
                if p.rho is None:
                    raise KeyError(f"{name!r} is the driving point and carries no rho")
                return p.rho
        raise KeyError(f"unknown point {name!r}")

    def exponent(self, a: str, b: str) -> KappaRational:
        """Exponent of the factor (a - b) in Z."""
        d = self.driving
        if a == b:
            raise ValueError("no self-exponent")
        if d in (a, b):
            other = b if a == d else a
            return self.rho(other) / self.kappa
        return self.rho(a) * self.rho(b) / (2 * self.kappa)

    def delta(self, name: str) -> KappaRational:
        if name == self.driving:
            return conformal_weight_h(self.kappa)
        return delta_of_rho(self.rho(name), self.kappa)

    def weights(self) -> WeightsTable:
        delta = {n: self.delta(n) for n in self.names}
        pair = {frozenset((a, b)): self.exponent(a, b) for a, b in combinations(self.names, 2)}
        return WeightsTable(delta, pair)

    def table(self, depth: int) -> VariableTable:
        return VariableTable(self.names, depth)

    def kappa_value(self, base=None) -> Fraction:
        """Effective kappa at a rational base kappa (default: ``self.value``)."""
        base = self.value if base is None else base
        if base is None:
            raise ValueError(f"config {self.name!r} has no numeric kappa")
        return self.kappa.eval_at(Fraction(base))

    def with_value(self, base) -> "SleConfig":
        return SleConfig(self.name, self.kappa, self.points, self.setup,
                         Fraction(base), dict(self.collision))

    # -- calculus ----------------------------------------------------------
    def log_derivative(self, var: str, table: VariableTable, at=None) -> RationalExpr:
        """d/d(var) log Z.

        With ``at`` (a numeric base kappa), factors whose exponent vanishes
        there are left out, so no ``0/(a - b)`` terms survive specialisation.
        """
        if var not in self.names:
            raise KeyError(f"unknown variable {var!r}")
        total = RationalExpr.from_poly(GradedPoly.zero(table))
        for other in self.names:
            if other == var:
                continue
            e = self.exponent(var, other)
            if e and (at is None or e.eval_at(Fraction(at)) != 0):
                total = total + RationalExpr.inverse_difference(table, var, other) * e
        return total

    def null_field_residual(self, var: str | None = None, depth: int = 2) -> RationalExpr:
        """D^(var) Z / Z, with kappa/2 in front of the second derivative."""
        var = self.driving if var is None else var
        table = self.table(depth)
        dlog = self.log_derivative(var, table)
        out = (dlog * dlog + dlog.diff(var)) * (self.kappa / 2)
        for other in self.names:
            if other == var:
                continue
            inv = RationalExpr.inverse_difference(table, other, var)
            out = out + inv * self.log_derivative(other, table) * 2
            out = out - inv * inv * (2 * self.delta(other))
        return out.cancel()

    def null_field_check(self, var: str | None = None) -> tuple[bool, RationalExpr]:
        res = self.null_field_residual(var)
        return res.is_zero(), res

    # -- (de)serialisation -------------------------------------------------
    def to_json(self) -> dict:
        return {
            "version": CONFIG_SCHEMA_VERSION,
            "name": self.name,
            "setup": self.setup,
            "kappa": str(self.kappa),
            "value": None if self.value is None else str(self.value),
            "points": [
                {"name": p.name, "role": p.role, **({"rho": str(p.rho)} if p.rho is not None else {})}
                for p in self.points
            ],
            "collision": dict(self.collision),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SleConfig":
        version = data.get("version", CONFIG_SCHEMA_VERSION)
        if version != CONFIG_SCHEMA_VERSION:
            raise ValueError(f"unsupported config schema version {version}")
        for key in ("kappa", "points"):
            if key not in data:
                raise ValueError(f"config is missing {key!r}")
        kappa = KappaRational.parse(str(data["kappa"]))
        points = []
        for p in data["points"]:
            rho = p.get("rho")
            points.append(Point(p["name"], p.get("role", "passive"),
                                None if rho is None else KappaRational.parse(str(rho))))
        value = data.get("value")
        setup = data.get("setup", "custom")
        if setup not in ("reversibility", "duality", "custom"):
            raise ValueError(f"unknown setup {setup!r}")
        return cls(data.get("name", "custom"), kappa, tuple(points), setup,
                   None if value is None else Fraction(str(value)),
                   dict(data.get("collision", {})))


def _k(expr: str) -> KappaRational:
    return KappaRational.parse(expr)


def builtin_configs() -> dict[str, SleConfig]:
    k = KAPPA
    ks = dual_kappa(k)
    rev_rho = k - 6
    return {
        "reversibility": SleConfig(
            "reversibility", k,
            (Point("x", "driving"), Point("y", "passive", rev_rho)),
            "reversibility", collision={"y": "x"}),
        "reversibility-reversed": SleConfig(
            "reversibility-reversed", k,
            (Point("x", "passive", rev_rho), Point("y", "driving")),
            "reversibility", collision={"y": "x"}),
        "duality": SleConfig(
            "duality", k,
            (Point("u", "passive", (k - 8) / 2), Point("y", "passive", -k / 2),
             Point("v", "passive", k - 2), Point("x", "driving")),
            "duality", collision={"y": "u", "v": "u", "x": "u"}),
        "star1": SleConfig(
            "star1", ks,
            (Point("u*", "passive", ks - 2), Point("y*", "driving"),
             Point("v*", "passive", (ks - 8) / 2), Point("x*", "passive", -ks / 2)),
            "duality", collision={"y*": "u*", "v*": "u*", "x*": "u*"}),
        "star2": SleConfig(
            "star2", ks,
            (Point("~u*", "passive", KappaRational(-2)), Point("~y*", "driving"),
             Point("~w*", "passive", ks - 4)),
            "duality", collision={"~y*": "~u*"}),
    }


SETUP_NAMES = tuple(builtin_configs())


def get_config(name: str) -> SleConfig:
    cfgs = builtin_configs()
    try:
        return cfgs[name]
    except KeyError:
        raise KeyError(f"unknown setup {name!r}; choose from {', '.join(cfgs)}") from None


def load_config(path: str | Path) -> SleConfig:
    with open(path) as fh:
        return SleConfig.from_json(json.load(fh))
