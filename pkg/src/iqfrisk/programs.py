"""Concrete LPs: slice expectation by duality, CVaR minimization, and the two
alternating subproblems (fix w' / fix (x, T))."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import lp as L
from .distribution import check_probabilities
from .errors import ValidationError
from .model import (BilinearProgram, FeasibleSet, _fixed_w_model, add_dual_polytope,
                    add_feasible_set, add_wprime, require_optimal)

FEAS_TOL = 1e-8


def _levels(alpha: float, gamma: float) -> tuple[float, float]:
    alpha, gamma = float(alpha), float(gamma)
    if not (0.0 <= alpha < gamma <= 1.0):
        raise ValidationError(f"need 0 <= alpha < gamma <= 1, got alpha={alpha}, gamma={gamma}")
    return alpha, gamma


def expectation_via_dual(T: Sequence[float], probs: Sequence[float],
                         alpha: float, gamma: float) -> float:
    """Slice expectation of a fixed vector via the joint min over (s, theta, w')."""
    T = np.asarray(T, dtype=float).ravel()
    p = check_probabilities(probs)
    if T.size != p.size:
        raise ValidationError("T and probs differ in length")
    alpha, gamma = _levels(alpha, gamma)
    lp = L.LinearProgram("slice-expectation")
    s, theta, _ = add_dual_polytope(lp, p, T_values=T)
    w, _ = add_wprime(lp, p, gamma)
    obj = {s: 1.0 - alpha}
    obj.update({int(t): 1.0 for t in theta})
    obj.update({int(w[i]): -T[i] * p[i] for i in range(p.size)})
    lp.set_objective(obj)
    sol = require_optimal(L.solve_lp(lp), "slice expectation LP")
    return sol.objective / (gamma - alpha)


def cvar_min(fs: FeasibleSet, probs: Sequence[float], gamma: float) -> L.Solution:
    """min over X_T of eta + sum(phi p) / (1 - g) with phi >= T - eta, phi >= 0."""
    p = check_probabilities(probs)
    gamma = float(gamma)
    if not 0.0 <= gamma < 1.0:
        raise ValidationError(f"CVaR level must lie in [0, 1), got {gamma}")
    if p.size != fs.n:
        raise ValidationError(f"{p.size} probabilities for {fs.n} scenarios")
    lp = L.LinearProgram("cvar-min")
    eta = lp.add_var("eta", -math.inf, math.inf)
    phi = lp.add_vars("phi", fs.n, 0.0, math.inf)
    _, T, _ = add_feasible_set(lp, fs)
    for q in range(fs.n):
        lp.add_constraint([(phi[q], 1.0), (T[q], -1.0), (eta, 1.0)], ">=", 0.0, f"tail{q}")
    obj = {eta: 1.0}
    obj.update({int(phi[q]): p[q] / (1.0 - gamma) for q in range(fs.n)})
    lp.set_objective(obj)
    return require_optimal(L.solve_lp(lp), "CVaR minimization")


@dataclass
class XtResult:
    value: float
    x: np.ndarray
    T: np.ndarray
    s: float
    theta: np.ndarray
    w: np.ndarray  # duals of the P rows, rescaled to the [0,1] box


def _check_wprime(bp: BilinearProgram, w: np.ndarray) -> None:
    if not np.any(w):
        return
    bad = (np.any(w < -FEAS_TOL) or np.any(w > 1 + FEAS_TOL)
           or abs(float(w @ bp.probs) - (1.0 - bp.gamma)) > FEAS_TOL)
    if bad:
        raise ValidationError("w' is not in the set {w' in [0,1]^n : sum w' p = 1 - gamma}")


def find_xt(bp: BilinearProgram, wprime: Sequence[float]) -> XtResult:
    """Minimize the bilinear objective over (x, T, s, theta) with w' fixed.

    An all-zero ``w'`` only belongs to W' when gamma = 1, so it is scored with
    that level: the value is then the minimal CVaR at ``alpha``.
    """
    w = np.asarray(wprime, dtype=float).ravel()
    if w.size != bp.n:
        raise ValidationError("w' has the wrong length")
    _check_wprime(bp, w)
    lp, idx = _fixed_w_model(bp, w)
    sol = require_optimal(L.solve_lp(lp), "fixed-w' subproblem")
    gamma = bp.gamma if np.any(w) else 1.0
    return XtResult(
        value=sol.objective / (gamma - bp.alpha),
        x=sol.x[idx["x"]],
        T=sol.x[idx["T"]],
        s=float(sol.x[idx["s"]]),
        theta=sol.x[idx["theta"]],
        w=sol.duals[idx["prows"]],
    )


def find_w(bp: BilinearProgram, x: Sequence[float], T: Sequence[float]) -> tuple[float, np.ndarray]:
    """Minimize over (s, theta, w') with (x, T) fixed; returns (value, w')."""
    x = np.asarray(x, dtype=float).ravel()
    T = np.asarray(T, dtype=float).ravel()
    if x.size != bp.fs.k or T.size != bp.n:
        raise ValidationError("x or T has the wrong length")
    if not bp.fs.contains(x, T, FEAS_TOL):
        raise ValidationError("(x, T) violates the feasible set")
    lp = L.LinearProgram("fixed-xT")
    s, theta, _ = add_dual_polytope(lp, bp.probs, T_values=T)
    w, _ = add_wprime(lp, bp.probs, bp.gamma)
    obj = {s: 1.0 - bp.alpha}
    obj.update({int(t): 1.0 for t in theta})
    obj.update({int(w[i]): -T[i] * bp.probs[i] for i in range(bp.n)})
    lp.set_objective(obj)
    sol = require_optimal(L.solve_lp(lp), "fixed-(x,T) subproblem")
    wv = np.clip(sol.x[w], 0.0, 1.0)
    return sol.objective / (bp.gamma - bp.alpha), wv
