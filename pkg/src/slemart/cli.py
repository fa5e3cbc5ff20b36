"""Command line entry point: ``slemart <subcommand> ...``.

Exit codes: 0 every check passed, 1 some check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import warnings
from fractions import Fraction
from pathlib import Path

from . import experiments as ex
from .config import SETUP_NAMES, get_config, load_config
from .sim import SimParams

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_POSITIONS = {
    "reversibility": {"x": 0.0, "y": 1.0},
    "reversibility-reversed": {"x": 0.0, "y": 1.0},
    "duality": {"u": 0.0, "y": 1.0, "v": 2.0, "x": 3.0},
    "star1": {"u*": 0.0, "y*": 1.0, "v*": 2.0, "x*": 3.0},
    "star2": {"~u*": 0.0, "~y*": 1.0, "~w*": 2.0},
}


class UsageError(Exception):
    pass


def _kappa(text: str) -> Fraction:
    try:
        k = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid kappa {text!r}") from None
    if k <= 0:
        raise argparse.ArgumentTypeError("kappa must be positive")
    return k


def _floats(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positions(text: str) -> dict[str, float]:
    out = {}
    for item in text.split(","):
        name, _, val = item.partition("=")
        try:
            out[name.strip()] = float(val)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected name=value pairs, got {text!r}") from None
    return out


def _default_seed() -> int:
    raw = os.environ.get("SLEMART_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SLEMART_SEED must be an integer, got {raw!r}") from None


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json", help="stdout format")
    p.add_argument("--json", metavar="PATH", help="also write the JSON report here")
    p.add_argument("--csv", metavar="PATH", help="also write the CSV summary here")


def _add_sim(p: argparse.ArgumentParser, paths: int = 10_000) -> None:
    p.add_argument("--paths", type=int, default=paths)
    p.add_argument("--seed", type=int, default=None, help="master seed (default: $SLEMART_SEED or 0)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=SimParams.stop_epsilon, help="stop threshold")
    p.add_argument("--adaptivity", type=float, default=SimParams.adaptivity)
    p.add_argument("--dt-base", type=float, default=SimParams.dt_base)
    p.add_argument("--max-steps", type=int, default=SimParams.max_steps)
    p.add_argument("--eps-halving", action="store_true", help="rerun with epsilon/2 and compare")
    p.add_argument("--dump", metavar="DIR", help="write per-path stopped values as CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slemart", description="SLE martingales: algebra and simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("selftest-algebra", help="all exact algebraic checks")
    p.add_argument("--level", type=int, default=5)
    p.add_argument("--workers", type=int, default=1)
    _add_output(p)

    p = sub.add_parser("gen-martingale", help="print L_{-n1}...L_{-nk}.1 and its (P, R) split")
    p.add_argument("--setup", default="reversibility")
    p.add_argument("--config", metavar="PATH", help="JSON configuration instead of a built-in setup")
    p.add_argument("--word", required=True, help="e.g. 2,3 for L_{-2}L_{-3}.1")
    _add_output(p)

    p = sub.add_parser("dims", help="rank of P^(n) against p(n) - p(n-1)")
    p.add_argument("--max", type=int, default=6, dest="max_n")
    _add_output(p)

    p = sub.add_parser("verify-reversibility", help="forward vs reversed stopped moments")
    p.add_argument("--kappa", type=_kappa, required=True)
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--y0", type=float, default=1.0)
    p.add_argument("--monomial", default="m2=1", help="m2=2,m3=1 or exponents 2,1")
    _add_sim(p)
    _add_output(p)

    p = sub.add_parser("verify-duality", help="SLE(rho) vs glued SLE_{16/kappa} stopped moments")
    p.add_argument("--kappa", type=_kappa, required=True)
    p.add_argument("--points", type=_floats, default=[0.0, 1.0, 2.0, 3.0], help="u,y,v,x")
    p.add_argument("--monomial", default="m2=1")
    p.add_argument("--w-offset", type=float, default=None, help="phase-2 seed offset (default: epsilon)")
    p.add_argument("--offset-halving", action="store_true", help="rerun the glued process with offset/2")
    _add_sim(p)
    _add_output(p)

    p = sub.add_parser("capacity-benchmark", help="E[g_{-2}(tau)] against its closed form")
    p.add_argument("--kappa", type=_kappa, default=Fraction(2))
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--y0", type=float, default=1.0)
    _add_sim(p)
    _add_output(p)

    p = sub.add_parser("martingale-constancy", help="checkpoint means of phi(t ^ tau)")
    p.add_argument("--setup", default="reversibility")
    p.add_argument("--config", metavar="PATH", help="JSON configuration instead of a built-in setup")
    p.add_argument("--word", default=None, help="default: every element of level 2..3")
    p.add_argument("--kappa", type=_kappa, default=Fraction(2))
    p.add_argument("--positions", type=_positions, default=None, help="e.g. x=0,y=1")
    p.add_argument("--times", type=_floats, default=None, help="checkpoint times")
    _add_sim(p)
    _add_output(p)
    return parser


def _params(args) -> SimParams:
    seed = args.seed if args.seed is not None else _default_seed()
    kw = dict(dt_base=args.dt_base, adaptivity=args.adaptivity, stop_epsilon=args.epsilon,
              max_steps=args.max_steps, seed=seed)
    if getattr(args, "w_offset", None) is not None:
        kw["w_offset"] = args.w_offset
    return SimParams(**kw)


def _setup(args):
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise UsageError(f"config file {path} not found")
        return load_config(path)
    if args.setup not in SETUP_NAMES:
        raise UsageError(f"unknown setup {args.setup!r}; choose from {', '.join(SETUP_NAMES)}")
    return get_config(args.setup)


def _dims(args) -> ex.ExperimentReport:
    if args.max_n < 2:
        raise UsageError("--max must be at least 2")
    report = ex.ExperimentReport("dims", {"max": args.max_n})
    check = ex.check_dimensions(args.max_n)
    report.checks.append(check)
    report.data["table"] = check.detail["table"]
    return report


def run(args) -> ex.ExperimentReport:
    cmd = args.command
    if cmd == "selftest-algebra":
        return ex.selftest_algebra(args.level, args.workers)
    if cmd == "gen-martingale":
        return ex.gen_martingale(_setup(args), ex.parse_word(args.word))
    if cmd == "dims":
        return _dims(args)
    if args.paths < 2:
        raise UsageError("--paths must be at least 2")
    params = _params(args)
    if cmd == "verify-reversibility":
        return ex.verify_reversibility(args.kappa, args.x0, args.y0, ex.parse_monomial(args.monomial),
                                       args.paths, params, args.workers, args.eps_halving)
    if cmd == "verify-duality":
        if len(args.points) != 4:
            raise UsageError("--points needs four values u,y,v,x")
        if not args.kappa < 4:
            raise UsageError(f"duality needs kappa < 4, got {args.kappa}")
        return ex.verify_duality(args.kappa, args.points, ex.parse_monomial(args.monomial), args.paths,
                                 params, args.workers, args.offset_halving, args.eps_halving)
    if cmd == "capacity-benchmark":
        return ex.capacity_benchmark(args.kappa, args.x0, args.y0, args.paths, params,
                                     args.eps_halving, args.workers)
    if cmd == "martingale-constancy":
        cfg = _setup(args)
        positions = args.positions or DEFAULT_POSITIONS.get(cfg.name)
        if positions is None:
            raise UsageError("--positions is required for a custom configuration")
        word = ex.parse_word(args.word) if args.word else None
        return ex.martingale_constancy(cfg, word, args.kappa, positions, args.paths, params,
                                       args.times, args.workers)
    raise UsageError(f"unknown command {cmd}")


def _dump(report: ex.ExperimentReport, directory: str) -> None:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for name, run in report.runs.items():
        safe = "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in name)
        with open(out / f"{report.experiment}_{safe}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["path", "value"])
            for i, v in enumerate(run.values):
                w.writerow([i, repr(float(v))])


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ex.IntegrabilityWarning)
            report = run(args)
    except (UsageError, ValueError, KeyError) as exc:
        print(f"slemart: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    doc = json.dumps(report.to_json(), indent=2, sort_keys=True)
    if args.json:
        Path(args.json).write_text(doc + "\n")
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    if getattr(args, "dump", None):
        _dump(report, args.dump)
    if args.format == "json":
        sys.stdout.write(doc + "\n")
    elif "table" in report.data:
        w = csv.DictWriter(sys.stdout, fieldnames=list(report.data["table"][0]), lineterminator="\n")
        w.writeheader()
        w.writerows(report.data["table"])
    else:
        sys.stdout.write(report.to_csv())
    for w in report.warnings:
        print(f"slemart: warning: {w}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
