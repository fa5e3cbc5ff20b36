"""Exact Virasoro-module computations for SLE martingales, with a Monte Carlo harness."""

from .config import SleConfig, builtin_configs, get_config, load_config
from .kappa import KAPPA, KappaRational, central_charge, conformal_weight_h, delta_of_rho, dual_kappa
from .poly import GradedPoly, RationalExpr, VariableTable
from .sim import SimParams, monte_carlo, run_glued, run_until_stop
from .virasoro import VirasoroRep, decompose, generate_module, martingale_for_monomial

__version__ = "0.1.0"

__all__ = [
    "KAPPA",
    "KappaRational",
    "central_charge",
    "conformal_weight_h",
    "delta_of_rho",
    "dual_kappa",
    "GradedPoly",
    "RationalExpr",
    "VariableTable",
    "SleConfig",
    "builtin_configs",
    "get_config",
    "load_config",
    "VirasoroRep",
    "decompose",
    "generate_module",
    "martingale_for_monomial",
    "SimParams",
    "monte_carlo",
    "run_glued",
    "run_until_stop",
]
