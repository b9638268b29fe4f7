"""Small LP/MIP layer: model container, dense simplex, branch-and-bound."""

from .model import EQ, GE, LE, Constraint, LinearProgram, Solution, Status, Variable
from .solve import BACKENDS, relax, solve_lp, solve_mip

__all__ = [
    "BACKENDS", "Constraint", "EQ", "GE", "LE", "LinearProgram", "Solution",
    "Status", "Variable", "relax", "solve_lp", "solve_mip",
]
