"""Quantile-slice risk measures and VaR estimators for decision problems."""

from .distribution import DiscreteDistribution, cvar, expectation_slice, iqf, quantile, var
from .errors import SolverError, ValidationError
from .estimators import EstimateReport, EstimatorConfig, estimate_var_min, gap_metrics
from .model import BilinearProgram, FeasibleSet, solve_exact_small, var_ip
from .programs import cvar_min, expectation_via_dual, find_w, find_xt
from .threshold import AlphaStar, alpha_star
from .altmin import alternate_minimize
from .rlt import build_rlt, build_rlt_improved, build_rlt_shifted

__version__ = "0.1.0"

__all__ = [
    "AlphaStar", "BilinearProgram", "DiscreteDistribution", "EstimateReport",
    "EstimatorConfig", "FeasibleSet", "SolverError", "ValidationError", "alpha_star",
    "alternate_minimize", "build_rlt", "build_rlt_improved", "build_rlt_shifted", "cvar",
    "cvar_min", "estimate_var_min", "expectation_slice", "expectation_via_dual", "find_w",
    "find_xt", "gap_metrics", "iqf", "quantile", "solve_exact_small", "var", "var_ip",
]
