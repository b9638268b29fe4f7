"""First-level reformulation-linearization of the bilinear program.

Every row of ``P(T)`` (including ``theta >= 0``) and of ``X_T`` is multiplied
by ``w'_j >= 0``, by ``1 - w'_j >= 0`` and by the equality
``sum_j w'_j p_j - (1 - g) = 0``. Products are linearized with

    Tw[i, j] ~ T_i w'_j    xw[l, j] ~ x_l w'_j
    thw[i, j] ~ theta_i w'_j    sw[j] ~ s w'_j

and the objective's bilinear term ``sum_i T_i p_i w'_i`` becomes
``sum_i p_i Tw[i, i]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import lp as L
from .errors import ValidationError
from .model import BilinearProgram, add_feasible_set, add_wprime, require_optimal
from .threshold import AlphaStar

TOL = 1e-9


@dataclass
class RltModel:
    program: L.LinearProgram
    bp: BilinearProgram
    variant: str
    idx: dict[str, np.ndarray]
    census: dict[str, int] = field(default_factory=dict)

    def solve(self, backend: str | None = None) -> float:
        sol = require_optimal(L.solve_lp(self.program, backend), f"{self.variant} RLT")
        self.solution = sol
        return sol.objective


class _Builder:
    def __init__(self, bp: BilinearProgram, name: str):
        self.bp = bp
        fs, n = bp.fs, bp.n
        self.lp = lp = L.LinearProgram(name)
        self.x, self.T, _ = add_feasible_set(lp, fs)
        self.s = lp.add_var("s", -math.inf, math.inf)
        self.theta = lp.add_vars("theta", n, 0.0, math.inf)
        self.w, _ = add_wprime(lp, bp.probs, bp.gamma)
        free = (-math.inf, math.inf)
        self.Tw = lp.add_vars("Tw", (n, n), *free)
        self.xw = lp.add_vars("xw", (fs.k, n), *free)
        self.thw = lp.add_vars("thw", (n, n), *free)
        self.sw = lp.add_vars("sw", n, *free)
        self.census: dict[str, int] = {}

    def count(self, family: str):
        self.census[family] = self.census.get(family, 0) + 1

    # A base row is represented as (coeff list on psi, rhs) meaning  sum >= rhs;
    # its "w'_j image" swaps each psi variable for its product with w'_j and the
    # constant for rhs * w'_j.
    def _image(self, terms, j):
        out = []
        for var, a in terms:
            out.append((self._times(var, j), a))
        return out

    def _times(self, var, j):
        kind, i = self.kind[var]
        if kind == "T":
            return self.Tw[i, j]
        if kind == "x":
            return self.xw[i, j]
        if kind == "theta":
            return self.thw[i, j]
        return self.sw[j]

    def index_kinds(self):
        self.kind = {}
        for i, v in enumerate(self.T):
            self.kind[int(v)] = ("T", i)
        for i, v in enumerate(self.x):
            self.kind[int(v)] = ("x", i)
        for i, v in enumerate(self.theta):
            self.kind[int(v)] = ("theta", i)
        self.kind[int(self.s)] = ("s", 0)

    def products(self, family: str, terms, rhs: float, skip_upper: set[int] = frozenset(),
                 equal_upper: set[int] = frozenset()):
        """Emit the products of ``sum(terms) >= rhs`` with the three multipliers."""
        lp, p, g = self.lp, self.bp.probs, self.bp.gamma
        n = self.bp.n
        for j in range(n):
            # (row) * w'_j >= 0  ->  image_j - rhs * w'_j >= 0
            lp.add_constraint(self._image(terms, j) + [(self.w[j], -rhs)], ">=", 0.0,
                              f"{family}*w{j}")
            self.count(f"{family}*w")
        for j in range(n):
            # (row) * (1 - w'_j) >= 0  ->  row - image_j - rhs + rhs w'_j >= 0
            coeffs = list(terms) + [(v, -a) for v, a in self._image(terms, j)]
            coeffs.append((self.w[j], rhs))
            rel = "==" if j in equal_upper else ">="
            lp.add_constraint(coeffs, rel, rhs, f"{family}*(1-w{j})")
            self.count(f"{family}*(1-w)")
        # (row) * (sum_j w'_j p_j - (1-g)) = 0
        coeffs = []
        for j in range(n):
            coeffs += [(v, a * p[j]) for v, a in self._image(terms, j)]
            coeffs.append((self.w[j], -rhs * p[j]))
        coeffs += [(v, -(1.0 - g) * a) for v, a in terms]
        lp.add_constraint(coeffs, "==", -(1.0 - g) * rhs, f"{family}*W")
        self.count(f"{family}*W")

    def objective(self):
        # The 1/(g - a) factor stays in the LP: when a is within ~1e-7 of g the
        # unscaled bracket is nearly flat and interior-point solvers crawl.
        bp = self.bp
        k = 1.0 / (bp.gamma - bp.alpha)
        obj = {int(self.s): (1.0 - bp.alpha) * k}
        for i in range(bp.n):
            obj[int(self.theta[i])] = k
            obj[int(self.Tw[i, i])] = -bp.probs[i] * k
        self.lp.set_objective(obj)


def _build(bp: BilinearProgram, improved: bool, name: str) -> RltModel:
    b = _Builder(bp, name)
    b.index_kinds()
    lp, p, n, fs = b.lp, bp.probs, bp.n, bp.fs

    # P rows: theta_i + p_i s - p_i T_i >= 0  (replaced in the improved variant)
    for i in range(n):
        if improved:
            lp.add_constraint([(b.theta[i], 1.0), (b.sw[i], p[i]), (b.Tw[i, i], -p[i])],
                              "==", 0.0, f"Pfix{i}")
            lp.add_constraint([(b.s, 1.0), (b.sw[i], -1.0), (b.T[i], -1.0), (b.Tw[i, i], 1.0)],
                              ">=", 0.0, f"Pcut{i}")
        else:
            lp.add_constraint([(b.theta[i], 1.0), (b.s, p[i]), (b.T[i], -p[i])], ">=", 0.0,
                              f"P{i}")

    for i in range(n):
        terms = [(int(b.theta[i]), 1.0), (int(b.s), p[i]), (int(b.T[i]), -p[i])]
        b.products(f"P{i}", terms, 0.0)
    for i in range(n):
        b.products(f"theta{i}", [(int(b.theta[i]), 1.0)], 0.0,
                   equal_upper={i} if improved else set())
    for r in range(fs.rows):
        # c_r - A_r x - B_r T >= 0
        ax = np.flatnonzero(fs.A[r])
        bt = np.flatnonzero(fs.B[r])
        terms = ([(int(b.x[l]), -fs.A[r, l]) for l in ax]
                 + [(int(b.T[i]), -fs.B[r, i]) for i in bt])
        b.products(f"X{r}", terms, -fs.c[r])
    b.objective()

    census = {
        "P*w": sum(v for k, v in b.census.items() if k.startswith("P") and k.endswith("*w")),
        "P*(1-w)": sum(v for k, v in b.census.items() if k.startswith("P") and k.endswith("(1-w)")),
        "P*W": sum(v for k, v in b.census.items() if k.startswith("P") and k.endswith("*W")),
        "theta*w": sum(v for k, v in b.census.items() if k.startswith("theta") and k.endswith("*w")),
        "theta*(1-w)": sum(v for k, v in b.census.items()
                           if k.startswith("theta") and k.endswith("(1-w)")),
        "theta*W": sum(v for k, v in b.census.items() if k.startswith("theta") and k.endswith("*W")),
        "X*w": sum(v for k, v in b.census.items() if k.startswith("X") and k.endswith("*w")),
        "X*(1-w)": sum(v for k, v in b.census.items() if k.startswith("X") and k.endswith("(1-w)")),
        "X*W": sum(v for k, v in b.census.items() if k.startswith("X") and k.endswith("*W")),
        "linearization_vars": b.Tw.size + b.xw.size + b.thw.size + b.sw.size,
    }
    idx = {"x": b.x, "T": b.T, "s": np.array([b.s]), "theta": b.theta, "wprime": b.w,
           "Tw": b.Tw, "xw": b.xw, "thw": b.thw, "sw": b.sw}
    return RltModel(lp, bp, name, idx, census)


def build_rlt(bp: BilinearProgram) -> RltModel:
    return _build(bp, improved=False, name="rlt")


def build_rlt_improved(bp: BilinearProgram, cert: AlphaStar) -> RltModel:
    """Tightened relaxation; valid only for ``alpha >= alpha*`` at this gamma."""
    if abs(cert.gamma - bp.gamma) > TOL:
        raise ValidationError(f"threshold certificate is for gamma={cert.gamma}, "
                              f"program has gamma={bp.gamma}")
    if bp.alpha < cert.alpha_star - TOL:
        raise ValidationError(f"alpha={bp.alpha} is below the threshold {cert.alpha_star}")
    return _build(bp, improved=True, name="rlt-improved")


def simplex_condition(probs, gamma: float) -> bool:
    return 1.0 - gamma < float(np.min(probs))


def build_rlt_shifted(bp: BilinearProgram, alpha_t: float, gamma_t: float) -> RltModel:
    """Relaxation at levels (alpha_t, gamma_t) where W' is a simplex, hence exact."""
    if not simplex_condition(bp.probs, gamma_t):
        raise ValidationError(f"gamma_t={gamma_t} must exceed 1 - min p = "
                              f"{1.0 - float(np.min(bp.probs))}")
    shifted = bp.with_levels(alpha_t, gamma_t)
    return _build(shifted, improved=False, name="rlt-shifted")
