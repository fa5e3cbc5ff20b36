"""Self-tests and Monte Carlo comparisons behind the command line.

Every function returns an :class:`ExperimentReport`.  Algebraic checks are
exact; statistical comparisons pass when the two sides agree within
``TOLERANCE`` combined standard errors.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction


from .config import SleConfig, builtin_configs, get_config
from .kappa import KAPPA, central_charge, conformal_weight_h, dual_kappa
from .poly import GradedPoly, RationalExpr
from .sim import (
    MonteCarloResult,
    SimParams,
    glued_experiment,
    monte_carlo,
    single_experiment,
)
from .virasoro import (
    ModuleElement,
    VirasoroRep,
    commutator_check,
    decompose,
    dimension_check,
    generate_module,
    generator_annihilation_check,
    gluing_continuity_check,
    martingale_for_monomial,
    partition_count,
)

__all__ = [
    "TOLERANCE",
    "Check",
    "Comparison",
    "ExperimentReport",
    "IntegrabilityWarning",
    "parse_word",
    "parse_monomial",
    "monomial_degree",
    "integrability_bound",
    "compare",
    "check_null_fields",
    "check_closed_form",
    "check_highest_weight",
    "check_commutators",
    "check_annihilation",
    "check_structure",
    "check_gluing",
    "check_dimensions",
    "selftest_algebra",
    "gen_martingale",
    "dims_table",
    "capacity_benchmark",
    "verify_reversibility",
    "verify_duality",
    "martingale_constancy",
]

TOLERANCE = 3.0


class IntegrabilityWarning(UserWarning):
    """kappa lies outside the window where the stopped moment is known to exist."""


# -- report types -----------------------------------------------------------

@dataclass
class Check:
    name: str
    ok: bool
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "ok": self.ok, **self.detail}


@dataclass
class Comparison:
    """``estimate`` against ``target``; ``provenance`` says where the target comes from."""

    name: str
    estimate: float
    std_error: float
    target: float
    target_std_error: float
    provenance: str
    n: int = 0
    valid: bool = True
    tolerance: float = TOLERANCE

    @property
    def combined_error(self) -> float:
        return math.hypot(self.std_error, self.target_std_error)

    @property
    def z(self) -> float:
        diff = abs(self.estimate - self.target)
        se = self.combined_error
        if se == 0:
            return 0.0 if diff == 0 else math.inf
        return diff / se

    @property
    def ok(self) -> bool:
        return self.valid and self.z < self.tolerance

    def to_json(self) -> dict:
        return {"name": self.name, "estimate": self.estimate, "std_error": self.std_error,
                "target": self.target, "target_std_error": self.target_std_error,
                "provenance": self.provenance, "n": self.n, "valid": self.valid,
                "z": self.z, "tolerance": self.tolerance, "ok": self.ok}


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    checks: list = field(default_factory=list)
    comparisons: list = field(default_factory=list)
    runs: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks) and all(c.ok for c in self.comparisons)

    @property
    def verdict(self) -> str:
        return "pass" if self.ok else "fail"

    def to_json(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "verdict": self.verdict,
            "checks": [c.to_json() for c in self.checks],
            "comparisons": [c.to_json() for c in self.comparisons],
            "runs": {k: r.to_json() for k, r in self.runs.items()},
            "warnings": list(self.warnings),
            "data": self.data,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["experiment", "kind", "name", "ok", "estimate", "std_error", "target",
                    "target_std_error", "z", "provenance", "n"])
        for c in self.checks:
            w.writerow([self.experiment, "check", c.name, c.ok, "", "", "", "", "", "exact", ""])
        for c in self.comparisons:
            w.writerow([self.experiment, "comparison", c.name, c.ok, repr(c.estimate), repr(c.std_error),
                        repr(c.target), repr(c.target_std_error), repr(c.z), c.provenance, c.n])
        return buf.getvalue()


def compare(name: str, a: MonteCarloResult, target, provenance: str, target_se: float = 0.0,
            tolerance: float = TOLERANCE) -> Comparison:
    """Compare a Monte Carlo estimate with a number or with another estimate."""
    valid = a.valid
    if isinstance(target, MonteCarloResult):
        valid = valid and target.valid
        target, target_se = target.mean, target.std_error
    return Comparison(name, a.mean, a.std_error, float(target), float(target_se), provenance,
                      a.n, valid, tolerance)


# -- parsing ----------------------------------------------------------------

def parse_word(text: str) -> tuple[int, ...]:
    """``"2,3"`` or ``"-2,-3"`` -> (2, 3), meaning L_{-2} L_{-3} . 1."""
    try:
        parts = [int(p) for p in text.replace(" ", "").split(",") if p]
    except ValueError:
        raise ValueError(f"malformed word {text!r}: expected integers like 2,3") from None
    if not parts:
        raise ValueError("empty word")
    if 0 in parts or len({p > 0 for p in parts}) > 1:
        raise ValueError(f"malformed word {text!r}: mixed signs or zero")
    return tuple(abs(p) for p in parts)


def parse_monomial(text: str) -> dict[int, int]:
    """``"m2=2,m3=1"`` or the positional ``"2,1"`` (exponents of f2, f3, ...)."""
    text = text.replace(" ", "")
    if not text:
        raise ValueError("empty monomial")
    out: dict[int, int] = {}
    try:
        if "=" in text:
            for item in text.split(","):
                key, val = item.split("=")
                m = int(key.lstrip("mf"))
                if m < 2 or m in out:
                    raise ValueError
                out[m] = int(val)
        else:
            for m, val in enumerate(text.split(","), start=2):
                out[m] = int(val)
    except ValueError:
        raise ValueError(f"malformed monomial {text!r}: expected m2=2,m3=1 or 2,1") from None
    if any(e < 0 for e in out.values()):
        raise ValueError(f"negative exponent in {text!r}")
    out = {m: e for m, e in out.items() if e}
    if not out:
        raise ValueError("monomial has degree zero")
    return out


def monomial_degree(exponents: dict[int, int]) -> int:
    return sum(m * e for m, e in exponents.items())


def monomial_label(exponents: dict[int, int]) -> str:
    return "*".join(f"g{m}" if e == 1 else f"g{m}^{e}" for m, e in sorted(exponents.items()))


def integrability_bound(degree: int) -> Fraction:
    """Largest kappa (exclusive) for which a degree-``degree`` moment is known to exist."""
    return Fraction(8, 1 + degree)


def _window(kappa, degree: int, report: ExperimentReport) -> None:
    bound = integrability_bound(degree)
    if not Fraction(kappa) < bound:
        msg = f"kappa={kappa} >= 8/(1+{degree}) = {float(bound):.4g}: expectation may not exist"
        report.warnings.append(msg)
        warnings.warn(msg, IntegrabilityWarning, stacklevel=3)


def _monomial_poly(table, exponents: dict[int, int]) -> GradedPoly:
    out = GradedPoly.const(table, 1)
    for m, e in exponents.items():
        out = out * GradedPoly.cap(table, m) ** e
    return out


def _exact_kappa(kappa) -> Fraction:
    k = Fraction(str(kappa)) if isinstance(kappa, (float, str)) else Fraction(kappa)
    if not k > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    return k


# -- algebra ----------------------------------------------------------------

def check_null_fields() -> list[Check]:
    cfgs = builtin_configs()
    out = []
    for name, cfg in (("null-field x (reversibility)", cfgs["reversibility"]),
                      ("null-field y (reversibility)", cfgs["reversibility-reversed"]),
                      ("null-field y* (duality)", cfgs["star1"])):
        ok, res = cfg.null_field_check()
        out.append(Check(name, ok, {} if ok else {"residual": str(res)}))
    return out


def check_closed_form() -> Check:
    """L_{-2}.1 = -(c/2) f2 + h (y - x)^2 in the reversibility setup."""
    cfg = get_config("reversibility")
    rep = VirasoroRep(cfg, 2)
    t = rep.table
    got = rep.apply(-2, rep.one())
    yx = GradedPoly.var(t, "y") - GradedPoly.var(t, "x")
    want = GradedPoly.cap(t, 2).scale(-central_charge() / 2) + (yx * yx).scale(conformal_weight_h())
    return Check("closed form L_{-2}.1", got == want, {"value": str(got)})


def check_highest_weight(setup: str = "reversibility", max_n: int = 4) -> Check:
    rep = VirasoroRep(get_config(setup), max(max_n, 2))
    bad = [n for n in range(0, max_n + 1) if rep.apply(n, rep.one())]
    return Check(f"highest weight L_n.1 = 0, 0 <= n <= {max_n} ({setup})", not bad, {"failing_n": bad})


def check_commutators(setup: str = "reversibility", max_level: int = 4, bound: int = 3,
                      depth: int = 10) -> Check:
    """[L_m, L_n] on every element of level <= max_level, |m|, |n| <= bound."""
    rep = VirasoroRep(get_config(setup), depth)
    bad = []
    count = 0
    for el in generate_module(rep, max_level):
        for m in range(-bound, bound + 1):
            for n in range(-bound, bound + 1):
                count += 1
                if not commutator_check(rep, m, n, el.poly):
                    bad.append([list(el.word), m, n])
    return Check(f"commutators level<={max_level} |m|,|n|<={bound} ({setup})", not bad,
                 {"checked": count, "failures": bad, "central_charge": str(central_charge(rep.cfg.kappa))})


def check_annihilation(setup: str, max_level: int = 5) -> Check:
    cfg = get_config(setup)
    bad = []
    els = generate_module(cfg, max_level)
    for el in els:
        ok, _ = generator_annihilation_check(el, cfg)
        if not ok:
            bad.append(list(el.word))
    return Check(f"generator annihilation level<={max_level} ({setup})", not bad,
                 {"elements": len(els), "failures": bad})


def _cap_part(P: GradedPoly) -> dict[tuple, object]:
    """Position-free polynomial as {((m, e), ...): coeff} independent of the table."""
    names = P.table.names
    out = {}
    for exps, c in P.monomials():
        key = tuple((int(n[1:]), e) for n, e in zip(names, exps) if e)
        out[key] = c
    return out


def check_structure(max_level: int = 5) -> Check:
    """decompose gives position-free P in both setups and the P's coincide word by word."""
    parts = {}
    errors = []
    for setup in ("reversibility", "duality"):
        cfg = get_config(setup)
        parts[setup] = {}
        for el in generate_module(cfg, max_level):
            try:
                parts[setup][el.word] = _cap_part(decompose(el, cfg).P)
            except Exception as exc:  # noqa: BLE001 - reported, not swallowed
                errors.append(f"{setup} {list(el.word)}: {exc}")
    mismatch = [list(w) for w in parts["reversibility"]
                if parts["reversibility"][w] != parts["duality"].get(w)]
    return Check(f"decomposition structure level<={max_level}", not errors and not mismatch,
                 {"words": len(parts["reversibility"]), "errors": errors, "mismatched_words": mismatch})


def check_gluing(max_level: int = 4) -> Check:
    ok, mismatches = gluing_continuity_check(max_level)
    return Check(f"gluing continuity level<={max_level}", ok,
                 {"mismatched_words": [list(w) for w, _ in mismatches]})


def dims_table(max_n: int = 6, setup: str = "reversibility") -> list[dict]:
    rep = VirasoroRep(get_config(setup), max(max_n, 2))
    els = generate_module(rep, max_n)
    rows = []
    for n in range(2, max_n + 1):
        r = dimension_check(rep, n, els)
        rows.append({"n": n, "rank": r.rank, "expected": r.expected, "p(n)": partition_count(n),
                     "p(n-1)": partition_count(n - 1), "monomials": r.monomials, "spanning": r.spanning})
    return rows


def check_dimensions(max_n: int = 6) -> Check:
    rows = dims_table(max_n)
    ok = all(r["rank"] == r["expected"] and r["spanning"] for r in rows)
    return Check(f"dimension formula n=2..{max_n}", ok, {"table": rows})


def _run_check(spec):
    fn, args = spec
    return fn(*args)


def selftest_algebra(level: int = 5, workers: int = 1) -> ExperimentReport:
    """All exact checks; ``level`` bounds annihilation and structure, the rest use fixed levels."""
    specs = [(check_null_fields, ()), (check_closed_form, ()), (check_highest_weight, ("reversibility",)),
             (check_highest_weight, ("duality",)), (check_commutators, ("reversibility",)), (check_commutators, ("duality",)),
             (check_structure, (level,)), (check_gluing, (min(level, 4),)), (check_dimensions, (6,))]
    specs += [(check_annihilation, (s, level)) for s in builtin_configs()]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_check, specs))
    else:
        results = [_run_check(s) for s in specs]
    report = ExperimentReport("selftest-algebra", {"level": level})
    for r in results:
        report.checks.extend(r if isinstance(r, list) else [r])
    return report


def gen_martingale(setup: str | SleConfig, word: tuple[int, ...]) -> ExperimentReport:
    cfg = get_config(setup) if isinstance(setup, str) else setup
    level = sum(word)
    rep = VirasoroRep(cfg, max(level, 2))
    poly = rep.apply_word(word)
    report = ExperimentReport("gen-martingale", {"setup": cfg.to_json(), "word": list(word)})
    report.data["element"] = "".join(f"L_{{-{n}}}" for n in word) + ".1"
    report.data["polynomial"] = str(poly)
    if cfg.collision:
        d = decompose(poly, cfg)
        report.data["P"] = str(d.P)
        report.data["remainder"] = str(d.remainder)
        if len(cfg.collision) == 1:
            (a, b), = cfg.collision.items()
            R = (RationalExpr.from_poly(d.remainder) * RationalExpr.inverse_difference(poly.table, a, b)).to_poly()
            report.data["R"] = str(R)
            report.data["gap"] = f"({a} - {b})"
    ok, res = generator_annihilation_check(poly, cfg)
    report.checks.append(Check("generator annihilation", ok, {} if ok else {"residual": str(res)}))
    return report


# -- statistics -------------------------------------------------------------

def _params(params: SimParams | None, seed: int | None) -> SimParams:
    params = params or SimParams()
    return params if seed is None else replace(params, seed=seed)


def capacity_benchmark(kappa=2, x0: float = 0.0, y0: float = 1.0, paths: int = 10_000,
                       params: SimParams | None = None, eps_halving: bool = False,
                       workers: int = 1, seed: int | None = None) -> ExperimentReport:
    """E[g_{-2}(tau)] against 2/(8 - 3 kappa) (y0 - x0)^2."""
    k = _exact_kappa(kappa)
    params = _params(params, seed)
    cfg = get_config("reversibility")
    report = ExperimentReport("capacity-benchmark",
                              {"kappa": str(k), "x0": x0, "y0": y0, "paths": paths, "params": _pjson(params)})
    _window(k, 2, report)
    target = 2 / (8 - 3 * float(k)) * (y0 - x0) ** 2
    phi = martingale_for_monomial(cfg, {2: 1})
    symbolic = float(phi.evaluate(k, {"x": Fraction(x0), "y": Fraction(y0), "f2": 0}))
    report.data["symbolic_target"] = symbolic
    report.checks.append(Check("closed form equals symbolic initial value",
                               math.isclose(target, symbolic, rel_tol=1e-12), {}))
    obs = GradedPoly.cap(cfg.table(2), 2)
    pts = {"x": x0, "y": y0}
    run = monte_carlo(single_experiment(cfg, k, pts, obs, params), paths, workers)
    report.runs["forward"] = run
    report.comparisons.append(compare("E[g2(tau)] vs closed form", run, target, "closed-form capacity moment"))
    if eps_halving:
        half = replace(params, stop_epsilon=params.stop_epsilon / 2)
        run2 = monte_carlo(single_experiment(cfg, k, pts, obs, half), paths, workers)
        report.runs["eps_half"] = run2
        report.comparisons.append(_halving("eps halving", run, run2))
    return report


def _halving(name: str, a: MonteCarloResult, b: MonteCarloResult) -> Comparison:
    """The shift under a halved numerical parameter must stay below one combined standard error."""
    return compare(name, a, b, "cross-run comparison (same seed)", tolerance=1.0)


def _pjson(params: SimParams) -> dict:
    return {k: getattr(params, k) for k in params.__dataclass_fields__}


def verify_reversibility(kappa, x0: float, y0: float, monomial: dict[int, int], paths: int = 10_000,
                         params: SimParams | None = None, workers: int = 1, eps_halving: bool = False,
                         seed: int | None = None) -> ExperimentReport:
    """Forward (x drives) and reversed (y drives) stopped moments against the symbolic target.

    The reversed run uses path indices after the forward ones, so the two
    estimates are independent.
    """
    k = _exact_kappa(kappa)
    params = _params(params, seed)
    deg = monomial_degree(monomial)
    label = monomial_label(monomial)
    cfgs = builtin_configs()
    fwd, rev = cfgs["reversibility"], cfgs["reversibility-reversed"]
    report = ExperimentReport("verify-reversibility",
                              {"kappa": str(k), "x0": x0, "y0": y0, "monomial": label,
                               "paths": paths, "params": _pjson(params)})
    _window(k, deg, report)
    init = {"x": Fraction(str(x0)), "y": Fraction(str(y0))}
    zeros = {f"f{m}": 0 for m in range(2, deg + 1)}
    targets = {}
    for cfg in (fwd, rev):
        phi = martingale_for_monomial(cfg, monomial)
        targets[cfg.name] = phi.evaluate(k, {**init, **zeros})
    target = float(targets[fwd.name])
    report.data["target"] = target
    report.data["target_exact"] = str(targets[fwd.name])
    report.checks.append(Check("forward and reversed symbolic targets coincide",
                               targets[fwd.name] == targets[rev.name],
                               {k_: str(v) for k_, v in targets.items()}))
    pts = {"x": x0, "y": y0}
    runs = {}
    for name, cfg, first in (("forward", fwd, 0), ("reversed", rev, paths)):
        obs = _monomial_poly(cfg.table(max(deg, 2)), monomial)
        runs[name] = monte_carlo(single_experiment(cfg, k, pts, obs, params), paths, workers, first_index=first)
        report.runs[name] = runs[name]
        report.comparisons.append(compare(f"{name} E[{label}] vs symbolic target", runs[name], target,
                                          "symbolic initial value"))
    report.comparisons.append(compare(f"forward vs reversed E[{label}]", runs["forward"], runs["reversed"],
                                      "cross-run comparison"))
    if eps_halving:
        half = replace(params, stop_epsilon=params.stop_epsilon / 2)
        obs = _monomial_poly(fwd.table(max(deg, 2)), monomial)
        run2 = monte_carlo(single_experiment(fwd, k, pts, obs, half), paths, workers)
        report.runs["forward_eps_half"] = run2
        report.comparisons.append(_halving("eps halving (forward)", runs["forward"], run2))
    return report


def verify_duality(kappa, points, monomial: dict[int, int], paths: int = 10_000,
                   params: SimParams | None = None, workers: int = 1, offset_halving: bool = False,
                   eps_halving: bool = False, seed: int | None = None) -> ExperimentReport:
    """SLE_kappa(rho_u, rho_y, rho_v) against the glued SLE_{16/kappa}, both against the symbolic value."""
    k = _exact_kappa(kappa)
    if not k < 4:
        raise ValueError(f"duality needs kappa < 4, got {k}")
    params = _params(params, seed)
    u, y, v, x = (float(p) for p in points)
    if not u < y < v < x:
        raise ValueError("duality points must satisfy u < y < v < x")
    deg = monomial_degree(monomial)
    label = monomial_label(monomial)
    cfg = get_config("duality")
    report = ExperimentReport("verify-duality",
                              {"kappa": str(k), "kappa_star": str(dual_kappa(KAPPA).eval_at(k)),
                               "points": [u, y, v, x], "monomial": label, "paths": paths,
                               "params": _pjson(params)})
    _window(k, deg, report)
    phi = martingale_for_monomial(cfg, monomial)
    init = {n: Fraction(str(p)) for n, p in zip("uyvx", (u, y, v, x))}
    exact = phi.evaluate(k, {**init, **{f"f{m}": 0 for m in range(2, deg + 1)}})
    target = float(exact)
    report.data["target"] = target
    report.data["target_exact"] = str(exact)
    pts = dict(zip("uyvx", (u, y, v, x)))
    obs = _monomial_poly(cfg.table(max(deg, 2)), monomial)
    star_obs = _monomial_poly(get_config("star1").table(max(deg, 2)), monomial)
    rho = monte_carlo(single_experiment(cfg, k, pts, obs, params), paths, workers)
    # disjoint path indices keep the two estimates independent
    glued = monte_carlo(glued_experiment(pts, k, star_obs, params), paths, workers, first_index=paths)
    report.runs.update(sle_rho=rho, glued=glued)
    report.comparisons += [
        compare(f"SLE(rho) E[{label}] vs symbolic target", rho, target, "symbolic initial value"),
        compare(f"glued E[{label}] vs symbolic target", glued, target, "symbolic initial value"),
        compare(f"SLE(rho) vs glued E[{label}]", rho, glued, "cross-run comparison"),
    ]
    if offset_halving:
        half = replace(params, w_offset=params.offset / 2)
        g2 = monte_carlo(glued_experiment(pts, k, star_obs, half), paths, workers, first_index=paths)
        report.runs["glued_offset_half"] = g2
        report.comparisons.append(_halving("w offset halving (glued)", glued, g2))
    if eps_halving:
        half = replace(params, stop_epsilon=params.stop_epsilon / 2)
        r2 = monte_carlo(single_experiment(cfg, k, pts, obs, half), paths, workers)
        report.runs["sle_rho_eps_half"] = r2
        report.comparisons.append(_halving("eps halving (SLE(rho))", rho, r2))
    return report


def default_checkpoints(positions: dict[str, float]) -> tuple[float, ...]:
    """Deterministic times on the scale of the squared spread of the points."""
    vals = list(positions.values())
    scale = (max(vals) - min(vals)) ** 2
    return tuple(scale * f for f in (0.025, 0.05, 0.1, 0.2))


def martingale_constancy(setup: str | SleConfig, word: tuple[int, ...] | None, kappa,
                         positions: dict[str, float], paths: int = 10_000,
                         params: SimParams | None = None, checkpoints=None, workers: int = 1,
                         seed: int | None = None) -> ExperimentReport:
    """Means of phi(t_k ^ tau) at deterministic times, and of phi(tau), against phi at time 0.

    With ``word=None`` every nonzero element of level 2..3 is tested.  The
    value at tau is only compared inside the integrability window.
    """
    cfg = get_config(setup) if isinstance(setup, str) else setup
    k = _exact_kappa(kappa)
    params = _params(params, seed)
    checkpoints = tuple(checkpoints) if checkpoints else default_checkpoints(positions)
    depth = max(sum(word) if word else 3, 2)
    rep = VirasoroRep(cfg, depth)
    if word is None:
        els = [e for e in generate_module(rep, 3) if e.level >= 2 and e.poly]
    else:
        els = [ModuleElement(word, rep.apply_word(word))]
    report = ExperimentReport("martingale-constancy",
                              {"setup": cfg.name, "kappa": str(k), "positions": positions,
                               "checkpoints": list(checkpoints), "paths": paths, "params": _pjson(params)})
    exact_init = {n: Fraction(str(p)) for n, p in positions.items()}
    for el in els:
        if not el.poly:
            report.warnings.append(f"{el.label()} is the zero element")
            continue
        label = el.label()
        phi0 = el.poly.evaluate(k, {**exact_init, **{f"f{m}": 0 for m in range(2, depth + 1)}})
        run = monte_carlo(single_experiment(cfg, k, positions, el.poly, params, checkpoints=checkpoints),
                          paths, workers)
        report.runs[label] = run
        for t, m, s in zip(checkpoints, run.checkpoint_means, run.checkpoint_std_errors):
            report.comparisons.append(Comparison(f"{label} mean at t={t:g}", m, s, float(phi0), 0.0,
                                                 "value at time 0", run.n, run.valid))
        if Fraction(k) < integrability_bound(el.level):
            report.comparisons.append(Comparison(f"{label} mean at tau", run.mean, run.std_error,
                                                 float(phi0), 0.0, "value at time 0", run.n, run.valid))
        else:
            report.warnings.append(f"{label}: kappa={k} outside 8/(1+{el.level}); value at tau not compared")
        report.data[label] = {"phi0": float(phi0), "times": [0.0, *checkpoints, "tau"],
                              "means": [float(phi0), *run.checkpoint_means, run.mean],
                              "std_errors": [0.0, *run.checkpoint_std_errors, run.std_error]}
    return report
