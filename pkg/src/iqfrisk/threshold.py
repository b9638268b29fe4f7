"""Threshold level above which the slice expectation collapses to VaR.

Starting from 0, the level is pushed toward ``gamma`` by ``(gamma - a)/b``
until the smallest cumulative mass reachable at or above it (a subset sum of
the probabilities) is already ``>= gamma``. No subset sum then falls in
``[a, gamma)``, so the quantile function is constant on that interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import lp as L
from .distribution import check_probabilities
from .errors import SolverError, ValidationError

TOL = 1e-9
MIP_MAX_N = 8


@dataclass
class AlphaStar:
    alpha_star: float
    o_star: float
    eta_star: np.ndarray
    gamma: float
    b: int
    steps: list[tuple[float, float]] = field(default_factory=list)


def _smallest_mass_mip(p: np.ndarray, level: float) -> tuple[float, np.ndarray]:
    lp = L.LinearProgram("threshold-step")
    o = lp.add_var("O", 0.0, math.inf)
    eta = lp.add_vars("eta", p.size, binary=True)
    terms = list(zip(eta, p))
    lp.add_constraint([(o, 1.0)] + [(j, -v) for j, v in terms], ">=", 0.0, "upper")
    lp.add_constraint(terms, ">=", level, "lower")
    lp.set_objective({o: 1.0})
    sol = L.solve_mip(lp)
    if sol.status is not L.Status.OPTIMAL:
        raise SolverError("threshold step", sol.status, sol.message)
    eta_v = np.round(sol.x[eta])
    return float(eta_v @ p), eta_v


class _SubsetSums:
    """Exact smallest subset sum >= level, by meet in the middle."""

    def __init__(self, p: np.ndarray):
        self.p = p
        half = p.size // 2
        self.left_idx = np.arange(half)
        self.right_idx = np.arange(half, p.size)
        self.left = self._all_sums(p[:half])
        right = self._all_sums(p[half:])
        self.order = np.argsort(right, kind="stable")
        self.right = right[self.order]

    @staticmethod
    def _all_sums(v: np.ndarray) -> np.ndarray:
        sums = np.zeros(1)
        for x in v:
            sums = np.concatenate([sums, sums + x])
        return sums

    def __call__(self, level: float) -> tuple[float, np.ndarray]:
        pos = np.searchsorted(self.right, level - self.left - 1e-15, side="left")
        ok = pos < self.right.size
        totals = np.full(self.left.size, math.inf)
        totals[ok] = self.left[ok] + self.right[pos[ok]]
        i = int(np.argmin(totals))
        eta = np.zeros(self.p.size)
        for bit, j in enumerate(self.left_idx):
            eta[j] = (i >> bit) & 1
        r = int(self.order[pos[i]])
        for bit, j in enumerate(self.right_idx):
            eta[j] = (r >> bit) & 1
        return float(eta @ self.p), eta


def alpha_star(probs: Sequence[float], gamma: float, b: int = 10,
               method: str = "auto") -> AlphaStar:
    """Run the geometric approach toward ``gamma``; see the module docstring.

    ``method`` picks the exact inner solver: ``"mip"`` (branch-and-bound),
    ``"subset"`` (meet-in-the-middle enumeration) or ``"auto"``.
    """
    p = check_probabilities(probs)
    gamma = float(gamma)
    if not 0.0 < gamma <= 1.0:
        raise ValidationError(f"gamma must lie in (0, 1], got {gamma}")
    if int(b) != b or b < 2:
        raise ValidationError(f"b must be an integer >= 2, got {b}")
    b = int(b)
    if method == "auto":
        method = "mip" if p.size <= MIP_MAX_N else "subset"
    if method == "mip":
        inner = lambda level: _smallest_mass_mip(p, level)  # noqa: E731
    elif method == "subset":
        if p.size > 44:
            raise ValidationError("subset enumeration supports at most 44 atoms")
        inner = _SubsetSums(p)
    else:
        raise ValueError(f"unknown method {method!r}")

    level = 0.0
    steps = []
    cap = 10 * b * p.size
    for _ in range(cap + 1):
        o_star, eta = inner(level)
        steps.append((level, o_star))
        if o_star >= gamma - TOL:
            return AlphaStar(level, o_star, eta, gamma, b, steps)
        level = level + (gamma - level) / b
    raise SolverError("threshold search", "iteration cap",
                      f"no certificate after {cap} steps")
