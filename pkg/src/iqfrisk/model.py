"""Decision polyhedron, the bilinear slice-expectation program and exact oracles.

The polyhedron is ``X_T = {(x, T) : A x + B T <= c}``. The bilinear program
minimizes ``[(1-a) s + sum(theta) - sum(T p w')] / (g - a)`` jointly over
``(x, T) in X_T``, ``(s, theta) in P(T)`` and ``w' in W'``, where

* ``P(T) = {theta_i + s p_i >= T_i p_i, theta >= 0}``
* ``W' = {w' in [0,1]^n : sum(w' p) = 1 - g}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import lp as L
from .distribution import check_probabilities
from .errors import SolverError, ValidationError

TOL = 1e-9


@dataclass(frozen=True)
class FeasibleSet:
    """``A x + B T <= c`` with ``k`` decision variables and ``n`` scenarios."""

    A: np.ndarray
    B: np.ndarray
    c: np.ndarray
    x_names: tuple[str, ...] = ()
    t_lower: np.ndarray | None = None
    t_upper: np.ndarray | None = None
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        c = np.asarray(self.c, dtype=float).ravel()
        if A.size == 0:
            A = np.zeros((c.size, 0))
        if not (A.shape[0] == B.shape[0] == c.size):
            raise ValidationError(f"row counts differ: A {A.shape}, B {B.shape}, c {c.shape}")
        if B.shape[1] < 1:
            raise ValidationError("need at least one scenario column in B")
        for name, arr in (("A", A), ("B", B), ("c", c)):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} has non-finite entries")
        names = tuple(self.x_names) or tuple(f"x_{j}" for j in range(A.shape[1]))
        if len(names) != A.shape[1]:
            raise ValidationError("x_names length must match the columns of A")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "x_names", names)
        for attr in ("t_lower", "t_upper"):
            val = getattr(self, attr)
            if val is not None:
                val = np.broadcast_to(np.asarray(val, dtype=float), (B.shape[1],)).copy()
                object.__setattr__(self, attr, val)
        if self.check:
            probe = L.LinearProgram("feasibility")
            add_feasible_set(probe, self)
            probe.set_objective({})
            sol = L.solve_lp(probe)
            if sol.status is L.Status.INFEASIBLE:
                raise ValidationError("feasible set is empty")
            if sol.status is not L.Status.OPTIMAL:
                raise SolverError("feasibility check", sol.status, sol.message)

    @property
    def k(self) -> int:
        return self.A.shape[1]

    @property
    def n(self) -> int:
        return self.B.shape[1]

    @property
    def rows(self) -> int:
        return self.c.size

    def contains(self, x, T, tol: float = 1e-8) -> bool:
        x = np.asarray(x, dtype=float).reshape(self.k)
        T = np.asarray(T, dtype=float).reshape(self.n)
        return bool(np.all(self.A @ x + self.B @ T <= self.c + tol))

    @classmethod
    def fixed(cls, T: Sequence[float]) -> "FeasibleSet":
        """The singleton ``{T}`` written as two-sided rows, with no x."""
        T = np.asarray(T, dtype=float)
        n = T.size
        eye = np.eye(n)
        return cls(np.zeros((2 * n, 0)), np.vstack([eye, -eye]), np.concatenate([T, -T]),
                   t_lower=T, t_upper=T)

    # JSON ----------------------------------------------------------------
    def to_json(self, probs: Sequence[float] | None = None) -> str:
        doc = {"A": self.A.tolist(), "B": self.B.tolist(), "c": self.c.tolist(),
               "x_names": list(self.x_names)}
        if self.t_lower is not None:
            doc["t_lower"] = self.t_lower.tolist()
        if self.t_upper is not None:
            doc["t_upper"] = self.t_upper.tolist()
        if probs is not None:
            doc["probs"] = [float(p) for p in probs]
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, source: str | Path) -> tuple["FeasibleSet", np.ndarray | None]:
        """Load a feasible set and its optional ``probs`` entry."""
        try:
            doc = json.loads(Path(source).read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"feasible-set file is not valid JSON: {exc}") from None
        missing = {"A", "B", "c"} - set(doc)
        if missing:
            raise ValidationError(f"feasible-set JSON lacks {sorted(missing)}")
        fs = cls(np.asarray(doc["A"], dtype=float), np.asarray(doc["B"], dtype=float),
                 np.asarray(doc["c"], dtype=float), tuple(doc.get("x_names", ())),
                 doc.get("t_lower"), doc.get("t_upper"))
        probs = doc.get("probs")
        return fs, None if probs is None else np.asarray(probs, dtype=float)


@dataclass(frozen=True)
class BilinearProgram:
    fs: FeasibleSet
    probs: np.ndarray
    alpha: float
    gamma: float

    def __post_init__(self):
        p = check_probabilities(self.probs)
        if p.size != self.fs.n:
            raise ValidationError(f"{p.size} probabilities for {self.fs.n} scenarios")
        a, g = float(self.alpha), float(self.gamma)
        if not (0.0 <= a < g <= 1.0):
            raise ValidationError(f"need 0 <= alpha < gamma <= 1, got alpha={a}, gamma={g}")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "gamma", g)

    @property
    def n(self) -> int:
        return self.fs.n

    def with_levels(self, alpha: float, gamma: float) -> "BilinearProgram":
        return BilinearProgram(self.fs, self.probs, alpha, gamma)


@dataclass
class Point:
    x: np.ndarray
    T: np.ndarray
    s: float
    theta: np.ndarray
    wprime: np.ndarray


def evaluate_objective(bp: BilinearProgram, psi: Point | Mapping) -> float:
    get = psi.get if isinstance(psi, Mapping) else lambda k: getattr(psi, k)
    T = np.asarray(get("T"), dtype=float).ravel()
    theta = np.asarray(get("theta"), dtype=float).ravel()
    w = np.asarray(get("wprime"), dtype=float).ravel()
    x = np.asarray(get("x"), dtype=float).ravel()
    n = bp.n
    if T.size != n or theta.size != n or w.size != n or x.size != bp.fs.k:
        raise ValidationError("point dimensions do not match the program")
    s = float(get("s"))
    bracket = (1.0 - bp.alpha) * s + theta.sum() - float(T @ (bp.probs * w))
    return bracket / (bp.gamma - bp.alpha)


# shared LP building blocks -------------------------------------------------

def add_feasible_set(lp: L.LinearProgram, fs: FeasibleSet, prefix: str = "") -> tuple:
    """Declare free ``x`` and ``T`` and append the rows of ``A x + B T <= c``."""
    x = lp.add_vars(prefix + "x", fs.k, -math.inf, math.inf) if fs.k else np.zeros(0, np.int64)
    T = lp.add_vars(prefix + "T", fs.n, -math.inf, math.inf)
    rows = []
    for r in range(fs.rows):
        ax = np.flatnonzero(fs.A[r])
        bt = np.flatnonzero(fs.B[r])
        coeffs = list(zip(x[ax], fs.A[r, ax])) + list(zip(T[bt], fs.B[r, bt]))
        rows.append(lp.add_constraint(coeffs, "<=", fs.c[r], f"X{r}"))
    return x, T, np.array(rows, dtype=np.int64)


def add_dual_polytope(lp: L.LinearProgram, probs: np.ndarray, T=None,
                      T_values: np.ndarray | None = None) -> tuple:
    """Declare ``s`` (free) and ``theta >= 0`` with rows
    ``theta_i + s p_i - T_i p_i >= 0``. Pass either variable indices ``T`` or
    fixed numbers ``T_values``."""
    n = probs.size
    s = lp.add_var("s", -math.inf, math.inf)
    theta = lp.add_vars("theta", n, 0.0, math.inf)
    rows = []
    for i in range(n):
        if T is not None:
            coeffs = [(theta[i], 1.0), (s, probs[i]), (T[i], -probs[i])]
            rhs = 0.0
        else:
            coeffs = [(theta[i], 1.0), (s, probs[i])]
            rhs = probs[i] * T_values[i]
        rows.append(lp.add_constraint(coeffs, ">=", rhs, f"P{i}"))
    return s, theta, np.array(rows, dtype=np.int64)


def add_wprime(lp: L.LinearProgram, probs: np.ndarray, gamma: float) -> tuple:
    w = lp.add_vars("wprime", probs.size, 0.0, 1.0)
    row = lp.add_constraint(list(zip(w, probs)), "==", 1.0 - gamma, "W")
    return w, row


def require_optimal(sol: L.Solution, what: str) -> L.Solution:
    if sol.status is not L.Status.OPTIMAL:
        if sol.status is L.Status.INFEASIBLE:
            raise ValidationError(f"{what}: model is infeasible")
        raise SolverError(what, sol.status, sol.message)
    return sol


# exact oracle ---------------------------------------------------------------

EXACT_MAX_N = 14


def wprime_vertices(probs: Sequence[float], gamma: float, tol: float = TOL) -> list[np.ndarray]:
    """All vertices of ``W'``: a 0/1 support ``S`` with mass at most ``1-g``,
    completed by at most one fractional coordinate."""
    p = np.asarray(probs, dtype=float)
    n = p.size
    target = 1.0 - gamma
    seen: dict[tuple, np.ndarray] = {}

    def emit(w):
        key = tuple(np.round(w, 12))
        seen.setdefault(key, w)

    def visit(support, start, mass):
        gap = target - mass
        if abs(gap) <= tol:
            w = np.zeros(n)
            w[list(support)] = 1.0
            emit(w)
        elif gap > 0:
            for f in range(n):
                if f not in support and p[f] > gap + tol:
                    w = np.zeros(n)
                    w[list(support)] = 1.0
                    w[f] = gap / p[f]
                    emit(w)
        for j in range(start, n):
            if mass + p[j] <= target + tol:
                visit(support + (j,), j + 1, mass + p[j])

    visit((), 0, 0.0)
    return sorted(seen.values(), key=lambda w: (int((w > 0).sum()), tuple(-w)))


def _fixed_w_model(bp: BilinearProgram, w: np.ndarray) -> tuple[L.LinearProgram, dict]:
    lp = L.LinearProgram("fixed-wprime")
    x, T, xrows = add_feasible_set(lp, bp.fs)
    s, theta, prows = add_dual_polytope(lp, bp.probs, T=T)
    obj = {s: 1.0 - bp.alpha}
    for i in range(bp.n):
        obj[theta[i]] = 1.0
        if w[i]:
            obj[T[i]] = obj.get(T[i], 0.0) - bp.probs[i] * w[i]
    lp.set_objective(obj)
    return lp, {"x": x, "T": T, "s": s, "theta": theta, "prows": prows}


def solve_exact_small(bp: BilinearProgram) -> float:
    """Global minimum of the bilinear program by enumerating vertices of W'."""
    if bp.n > EXACT_MAX_N:
        raise ValidationError(f"exact oracle limited to n <= {EXACT_MAX_N}, got {bp.n}")
    best = math.inf
    for w in wprime_vertices(bp.probs, bp.gamma):
        lp, _ = _fixed_w_model(bp, w)
        sol = require_optimal(L.solve_lp(lp), "exact oracle vertex LP")
        best = min(best, sol.objective)
    return best / (bp.gamma - bp.alpha)


# VaR integer program ---------------------------------------------------------

def t_bounds(fs: FeasibleSet) -> tuple[np.ndarray, np.ndarray]:
    """Per-scenario bounds on T over X_T, from the stored bounds or box LPs."""
    lower = np.full(fs.n, -math.inf) if fs.t_lower is None else fs.t_lower.copy()
    upper = np.full(fs.n, math.inf) if fs.t_upper is None else fs.t_upper.copy()
    todo = [(i, s) for i in range(fs.n) for s, arr in (("min", lower), ("max", upper))
            if (fs.t_lower is None and s == "min") or (fs.t_upper is None and s == "max")]
    if not todo:
        return lower, upper
    lp = L.LinearProgram("box")
    _, T, _ = add_feasible_set(lp, fs)
    for i, sense in todo:
        lp.set_objective({T[i]: 1.0}, sense)
        sol = L.solve_lp(lp)
        if sol.status is L.Status.OPTIMAL:
            (lower if sense == "min" else upper)[i] = sol.objective
        elif sol.status is not L.Status.UNBOUNDED:
            raise SolverError("T bound LP", sol.status, sol.message)
    return lower, upper


def var_ip(fs: FeasibleSet, probs: Sequence[float], gamma: float,
           M: float | Sequence[float] | None = None, relax: bool = False) -> L.Solution:
    """min kappa  s.t.  sum z p >= g,  T_i <= kappa + M_i (1 - z_i),  (x,T) in X_T.

    ``kappa`` is bounded below by the smallest attainable ``T_i``, which is
    valid for the integer program and tightens its relaxation.
    """
    p = check_probabilities(probs)
    if p.size != fs.n:
        raise ValidationError(f"{p.size} probabilities for {fs.n} scenarios")
    gamma = float(gamma)
    if not 0.0 < gamma <= 1.0:
        raise ValidationError(f"gamma must be in (0, 1], got {gamma}")
    lower, upper = t_bounds(fs)
    kappa_lb = float(lower.min())
    if M is None:
        if not (np.all(np.isfinite(upper)) and math.isfinite(kappa_lb)):
            raise ValidationError("T is unbounded over the feasible set; pass M explicitly")
        Mv = np.maximum(upper - kappa_lb, 0.0)
    else:
        Mv = np.broadcast_to(np.asarray(M, dtype=float), (fs.n,)).copy()
        if np.any(Mv < 0):
            raise ValidationError("M must be non-negative")

    lp = L.LinearProgram("var-ip" + (" relaxed" if relax else ""))
    kappa = lp.add_var("kappa", kappa_lb, math.inf)
    z = lp.add_vars("z", fs.n, 0.0, 1.0, binary=not relax)
    x, T, _ = add_feasible_set(lp, fs)
    lp.add_constraint(list(zip(z, p)), ">=", gamma, "coverage")
    for i in range(fs.n):
        lp.add_constraint([(T[i], 1.0), (kappa, -1.0), (z[i], Mv[i])], "<=", Mv[i], f"bigM{i}")
    lp.set_objective({kappa: 1.0})
    if relax:
        return require_optimal(L.solve_lp(lp), "VaR integer program")
    Tcols = np.asarray(T)

    def cover_cheapest(point):
        # keep the lowest-loss scenarios until they cover gamma
        order = np.argsort(point[Tcols], kind="stable")
        zz = np.zeros(fs.n)
        mass = 0.0
        for i in order:
            if mass >= gamma - TOL:
                break
            zz[i], mass = 1.0, mass + p[i]
        return zz

    return require_optimal(L.solve_mip(lp, heuristic=cover_cheapest), "VaR integer program")
