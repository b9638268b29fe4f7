"""Dense two-phase bounded-variable revised simplex.

Every row gets a slack (``a x + s = b``) whose bounds encode the relation, so
the working problem is ``M z = b, lo <= z <= hi``. Rows whose slack cannot
absorb the initial residual get an artificial column; phase I drives the
artificials to zero and phase II fixes them at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import EQ, GE, LE, Status

TOL = 1e-9
PIVOT_TOL = 1e-9
HARRIS_TOL = 1e-10
REFACTOR_EVERY = 50
# consecutive degenerate pivots before switching to smallest-index pricing
BLAND_AFTER = 50

_LOWER, _UPPER, _FREE = 0, 1, 2


@dataclass
class SimplexResult:
    status: Status
    x: np.ndarray | None
    objective: float
    duals: np.ndarray | None
    dual_objective: float
    iterations: int
    message: str = ""


class _Tableau:
    def __init__(self, M, b, lo, hi, basis, z, at):
        self.M = M
        self.b = b
        self.lo = lo
        self.hi = hi
        self.basis = basis
        self.z = z
        self.at = at
        self.m = M.shape[0]
        self.is_basic = np.zeros(M.shape[1], dtype=bool)
        self.is_basic[basis] = True
        self.refactor()

    def refactor(self):
        self.Binv = np.linalg.inv(self.M[:, self.basis])
        nb = ~self.is_basic
        resid = self.b - self.M[:, nb] @ self.z[nb]
        self.z[self.basis] = self.Binv @ resid

    def run(self, cost, max_iter, bland_after, tol=TOL):
        """Pivot to optimality for ``cost``. Returns (status, iterations)."""
        M, lo, hi, z, at = self.M, self.lo, self.hi, self.z, self.at
        movable = hi > lo
        degenerate = 0
        bland = False
        for it in range(max_iter):
            if it and it % REFACTOR_EVERY == 0:
                self.refactor()
            y = cost[self.basis] @ self.Binv
            d = cost - y @ M
            nb = ~self.is_basic & movable
            up = nb & (((at == _LOWER) & (d < -tol)) | ((at == _FREE) & (d < -tol)))
            down = nb & (((at == _UPPER) & (d > tol)) | ((at == _FREE) & (d > tol)))
            eligible = up | down
            if not eligible.any():
                return Status.OPTIMAL, it
            cand = np.flatnonzero(eligible)
            j = cand[0] if bland else cand[np.argmax(np.abs(d[cand]))]
            direction = 1.0 if up[j] else -1.0

            alpha = self.Binv @ M[:, j]
            delta = direction * alpha
            zb = z[self.basis]
            lob, hib = lo[self.basis], hi[self.basis]
            dec = delta > PIVOT_TOL
            inc = delta < -PIVOT_TOL
            exact = np.full(self.m, math.inf)
            relaxed = np.full(self.m, math.inf)
            with np.errstate(invalid="ignore", divide="ignore"):
                exact[dec] = (zb[dec] - lob[dec]) / delta[dec]
                exact[inc] = (hib[inc] - zb[inc]) / -delta[inc]
                relaxed[dec] = (zb[dec] - lob[dec] + HARRIS_TOL) / delta[dec]
                relaxed[inc] = (hib[inc] - zb[inc] + HARRIS_TOL) / -delta[inc]
            exact = np.where(np.isnan(exact), math.inf, np.maximum(exact, 0.0))
            relaxed = np.where(np.isnan(relaxed), math.inf, relaxed)
            bound = max(relaxed.min(), 0.0) if self.m else math.inf
            flip = hi[j] - lo[j]

            if flip <= bound:
                if not math.isfinite(flip):
                    return Status.UNBOUNDED, it
                z[j] += direction * flip
                z[self.basis] = zb - flip * delta
                at[j] = _UPPER if direction > 0 else _LOWER
                degenerate = 0
                bland = False
                continue

            ties = np.flatnonzero(exact <= bound)
            size = np.abs(delta[ties])
            if bland:
                # smallest index among ties whose pivot is not tiny
                ties = ties[size >= 1e-2 * size.max()]
                r = ties[np.argmin(self.basis[ties])]
            else:
                r = ties[np.argmax(size)]
            t = exact[r]
            leaving = self.basis[r]
            z[j] += direction * t
            z[self.basis] = zb - t * delta
            if delta[r] > 0:
                z[leaving], at[leaving] = lo[leaving], _LOWER
            else:
                z[leaving], at[leaving] = hi[leaving], _UPPER
            self.basis[r] = j
            self.is_basic[leaving] = False
            self.is_basic[j] = True
            pivot_row = self.Binv[r] / alpha[r]
            self.Binv -= np.outer(alpha, pivot_row)
            self.Binv[r] = pivot_row

            if t <= tol:
                degenerate += 1
                if degenerate > bland_after:
                    bland = True
            else:
                degenerate = 0
                bland = False
        return Status.STALLED, max_iter


def solve_dense(A, relations, b, c, lb, ub, max_iter: int | None = None,
                tol: float = TOL) -> SimplexResult:
    """Minimize ``c x`` subject to ``A x (rel) b`` and ``lb <= x <= ub``."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    m, n = A.shape
    if np.any(lb > ub):
        return SimplexResult(Status.INFEASIBLE, None, math.nan, None, math.nan, 0,
                             "empty variable bounds")

    rel = np.asarray(relations, dtype=object)
    feas_tol = tol * (1.0 + (np.abs(b).max() if m else 0.0))
    nonempty = np.abs(A).sum(axis=1) > 0
    for i in np.flatnonzero(~nonempty):
        ok = ((rel[i] == LE and b[i] >= -feas_tol) or (rel[i] == GE and b[i] <= feas_tol)
              or (rel[i] == EQ and abs(b[i]) <= feas_tol))
        if not ok:
            return SimplexResult(Status.INFEASIBLE, None, math.nan, None, math.nan, 0,
                                 f"empty row {i} is violated")
    keep = np.flatnonzero(nonempty)
    Ak, bk, relk = A[keep], b[keep], rel[keep]
    mk = len(keep)

    slack_lo = np.where(relk == GE, -math.inf, 0.0).astype(float)
    slack_hi = np.where(relk == LE, math.inf, 0.0).astype(float)

    z_struct = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
    at_struct = np.where(np.isfinite(lb), _LOWER, np.where(np.isfinite(ub), _UPPER, _FREE))
    resid = bk - Ak @ z_struct
    slack_fits = (resid >= slack_lo - feas_tol) & (resid <= slack_hi + feas_tol)
    sign = np.where(resid >= 0, 1.0, -1.0)

    Mfull = np.hstack([Ak, np.eye(mk), np.diag(sign)])
    lo = np.concatenate([lb, slack_lo, np.zeros(mk)])
    hi = np.concatenate([ub, slack_hi, np.where(slack_fits, 0.0, math.inf)])
    z = np.concatenate([z_struct, np.zeros(2 * mk)])
    at_slack = np.where(np.isfinite(slack_lo), _LOWER, _UPPER)
    at = np.concatenate([at_struct, at_slack, np.full(mk, _LOWER)])
    basis = np.where(slack_fits, n + np.arange(mk), n + mk + np.arange(mk)).astype(np.int64)

    if max_iter is None:
        max_iter = max(20000, 30 * (mk + n + 2 * mk))
    try:
        return _two_phase(Mfull, bk, lo, hi, basis, z, at, c, Ak, lb, ub, keep,
                          m, n, mk, max_iter, tol, feas_tol)
    except np.linalg.LinAlgError:
        return SimplexResult(Status.STALLED, None, math.nan, None, math.nan, 0,
                             "singular basis")


def _two_phase(Mfull, bk, lo, hi, basis, z, at, c, Ak, lb, ub, keep, m, n, mk,
               max_iter, tol, feas_tol) -> SimplexResult:
    N = Mfull.shape[1]
    bland_after = BLAND_AFTER
    slack_fits = basis < n + mk
    tab = _Tableau(Mfull, bk, lo, hi, basis, z, at)

    iterations = 0
    artificial = np.zeros(N)
    artificial[n + mk:] = 1.0
    if not slack_fits.all():
        status, used = tab.run(artificial, max_iter, bland_after, tol)
        iterations += used
        if status is Status.STALLED:
            return SimplexResult(Status.STALLED, None, math.nan, None, math.nan,
                                 iterations, "phase I iteration limit")
        tab.refactor()
        infeas = float(tab.z[n + mk:].sum())
        if infeas > feas_tol:
            return SimplexResult(Status.INFEASIBLE, None, math.nan, None, math.nan,
                                 iterations, f"phase I residual {infeas:.3g}")
    tab.hi[n + mk:] = 0.0
    tab.z[n + mk:][~tab.is_basic[n + mk:]] = 0.0

    cost = np.concatenate([c, np.zeros(2 * mk)])
    tab.refactor()
    status, used = tab.run(cost, max_iter - iterations, bland_after, tol)
    iterations += used
    if status is not Status.OPTIMAL:
        msg = "unbounded ray" if status is Status.UNBOUNDED else "phase II iteration limit"
        return SimplexResult(status, None, math.nan, None, math.nan, iterations, msg)

    tab.refactor()
    zf = tab.z
    viol = np.maximum(tab.lo - zf, zf - tab.hi)
    worst = float(np.nanmax(np.where(np.isfinite(viol), viol, 0.0))) if N else 0.0
    if worst > 1e3 * feas_tol:
        return SimplexResult(Status.STALLED, None, math.nan, None, math.nan, iterations,
                             f"final basis violates bounds by {worst:.3g}")
    x = zf[:n].copy()
    # snap values that sit on a bound up to rounding
    x = np.where(np.abs(x - lb) <= feas_tol, lb, x)
    x = np.where(np.abs(x - ub) <= feas_tol, ub, x)

    y_kept = cost[tab.basis] @ tab.Binv
    duals = np.zeros(m)
    duals[keep] = y_kept
    reduced = c - y_kept @ Ak
    nonbasic = ~tab.is_basic[:n]
    dual_obj = float(y_kept @ bk + reduced[nonbasic] @ x[nonbasic])
    return SimplexResult(Status.OPTIMAL, x, float(c @ x), duals, dual_obj, iterations)
