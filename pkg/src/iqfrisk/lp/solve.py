"""Backend dispatch for LPs and best-bound branch-and-bound for binaries."""

from __future__ import annotations

import heapq
import itertools
import logging
import math
import os
from typing import Callable

import numpy as np

from .model import EQ, GE, LE, LinearProgram, LpArrays, Solution, Status
from .simplex import solve_dense

log = logging.getLogger(__name__)

# Dense tableau entries above which "auto" hands the LP to HiGHS.
DENSE_LIMIT = 400_000
INT_TOL = 1e-6
# Row count above which HiGHS runs interior point without crossover; the large
# RLT models are so degenerate that simplex and crossover take minutes.
IPM_ROWS = 20_000
HEURISTIC_EVERY = 25
BACKENDS = ("auto", "simplex", "highs")


def default_backend() -> str:
    name = os.environ.get("IQFRISK_LP_BACKEND", "auto")
    if name not in BACKENDS:
        raise ValueError(f"IQFRISK_LP_BACKEND must be one of {BACKENDS}")
    return name


def _pick(arr: LpArrays, backend: str | None) -> str:
    """Concrete engine; ``"simplex+"`` means simplex with a HiGHS retry on stall."""
    backend = backend or default_backend()
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}")
    if backend != "auto":
        return backend
    m, n = arr.shape
    return "simplex+" if m * (n + 2 * m) <= DENSE_LIMIT else "highs"


def _solve_arrays(arr: LpArrays, lb, ub, backend: str) -> Solution:
    sign = -1.0 if arr.maximize else 1.0
    c = sign * arr.c
    if backend == "simplex+":
        sol = _solve_arrays(arr, lb, ub, "simplex")
        if sol.status is not Status.STALLED:
            return sol
        log.info("dense simplex stalled (%s); retrying with HiGHS", sol.message)
        return _solve_highs(arr, c, lb, ub, sign)
    if backend == "simplex":
        res = solve_dense(arr.A.toarray(), arr.relations, arr.rhs, c, lb, ub)
        sol = Solution(res.status, iterations=res.iterations, backend="simplex",
                       message=res.message)
        if res.status is Status.OPTIMAL:
            sol.x = res.x
            sol.objective = sign * res.objective + arr.constant
            sol.duals = sign * res.duals
            sol.dual_objective = sign * res.dual_objective + arr.constant
        return sol
    return _solve_highs(arr, c, lb, ub, sign)


def _solve_highs(arr: LpArrays, c, lb, ub, sign) -> Solution:
    if arr.shape[0] > IPM_ROWS:
        return _solve_highs_ipm(arr, c, lb, ub, sign)
    from scipy.optimize import linprog

    rel = arr.relations
    le, ge, eq = rel == LE, rel == GE, rel == EQ
    ineq = np.flatnonzero(le | ge)
    flip = np.where(ge[ineq], -1.0, 1.0)
    A_ub = arr.A[ineq].multiply(flip[:, None]).tocsr() if ineq.size else None
    b_ub = arr.rhs[ineq] * flip if ineq.size else None
    eqi = np.flatnonzero(eq)
    A_eq = arr.A[eqi] if eqi.size else None
    b_eq = arr.rhs[eqi] if eqi.size else None
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=np.column_stack([lb, ub]), method="highs",
                  options={"primal_feasibility_tolerance": 1e-9,
                           "dual_feasibility_tolerance": 1e-9})
    status = {0: Status.OPTIMAL, 2: Status.INFEASIBLE, 3: Status.UNBOUNDED}.get(
        res.status, Status.STALLED)
    sol = Solution(status, iterations=int(getattr(res, "nit", 0) or 0),
                   backend="highs", message=str(res.message))
    if status is Status.OPTIMAL:
        duals = np.zeros(arr.shape[0])
        if ineq.size:
            duals[ineq] = res.ineqlin.marginals * flip
        if eqi.size:
            duals[eqi] = res.eqlin.marginals
        dual_obj = float(duals @ arr.rhs)
        for bound, marg in ((lb, res.lower.marginals), (ub, res.upper.marginals)):
            fin = np.isfinite(bound)
            dual_obj += float(bound[fin] @ marg[fin])
        sol.x = np.asarray(res.x, dtype=float)
        sol.objective = sign * float(res.fun) + arr.constant
        sol.duals = sign * duals
        sol.dual_objective = sign * dual_obj + arr.constant
    return sol


def _solve_highs_ipm(arr: LpArrays, c, lb, ub, sign) -> Solution:
    """Interior point, no crossover: the point is optimal to ``1e-9`` but not a vertex."""
    import highspy

    inf = highspy.kHighsInf
    rel = arr.relations
    A = arr.A.tocsc()
    lp = highspy.HighsLp()
    lp.num_row_, lp.num_col_ = A.shape
    lp.col_cost_ = np.asarray(c, dtype=float)
    lp.col_lower_ = np.where(np.isfinite(lb), lb, -inf)
    lp.col_upper_ = np.where(np.isfinite(ub), ub, inf)
    lp.row_lower_ = np.where(rel == LE, -inf, arr.rhs)
    lp.row_upper_ = np.where(rel == GE, inf, arr.rhs)
    lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    lp.a_matrix_.start_ = A.indptr
    lp.a_matrix_.index_ = A.indices
    lp.a_matrix_.value_ = A.data
    h = highspy.Highs()
    for key, val in (("output_flag", False), ("solver", "ipm"), ("run_crossover", "off"),
                     ("primal_feasibility_tolerance", 1e-9),
                     ("dual_feasibility_tolerance", 1e-9),
                     ("ipm_optimality_tolerance", 1e-9)):
        h.setOptionValue(key, val)
    h.passModel(lp)
    h.run()
    ms = h.getModelStatus()
    M = highspy.HighsModelStatus
    status = {M.kOptimal: Status.OPTIMAL, M.kInfeasible: Status.INFEASIBLE,
              M.kUnbounded: Status.UNBOUNDED}.get(ms, Status.STALLED)
    info = h.getInfo()
    sol = Solution(status, iterations=int(info.ipm_iteration_count), backend="highs",
                   message=h.modelStatusToString(ms))
    if status is Status.OPTIMAL:
        hs = h.getSolution()
        x = np.asarray(hs.col_value, dtype=float)
        duals = np.asarray(hs.row_dual, dtype=float)
        rc = np.asarray(hs.col_dual, dtype=float)
        bound = np.where(rc > 0, lb, ub)
        fin = np.isfinite(bound)
        dual_obj = float(duals @ arr.rhs) + float(rc[fin] @ bound[fin])
        sol.x = x
        sol.objective = sign * float(c @ x) + arr.constant
        sol.duals = sign * duals
        sol.dual_objective = sign * dual_obj + arr.constant
    return sol


def solve_lp(lp: LinearProgram, backend: str | None = None) -> Solution:
    """Solve the continuous program; binaries are not allowed here."""
    arr = lp.arrays()
    if arr.binary.any():
        raise ValueError("solve_lp got binary variables; use solve_mip")
    sol = _solve_arrays(arr, arr.lb, arr.ub, _pick(arr, backend))
    sol.program = lp
    return sol


def relax(lp: LinearProgram) -> LinearProgram:
    """Copy of ``lp`` with binaries replaced by [0, 1] continuous variables."""
    out = LinearProgram(lp.name + " (relaxed)")
    out.variables = [type(v)(v.name, v.lb, v.ub, False) for v in lp.variables]
    out.constraints = list(lp.constraints)
    out.objective = dict(lp.objective)
    out.sense, out.constant = lp.sense, lp.constant
    out.groups = dict(lp.groups)
    out._by_name = dict(lp._by_name)
    return out


def solve_mip(lp: LinearProgram, backend: str | None = None,
              node_limit: int = 200_000,
              heuristic: Callable[[np.ndarray], np.ndarray | None] | None = None) -> Solution:
    """Best-bound branch-and-bound on the binaries, branching on the most
    fractional one; ties in the bound go to the deepest node. Node LPs go
    through the same backend as ``solve_lp``.

    ``heuristic`` maps a node's LP point to proposed binary values (in the
    order of the binary columns) or None; proposals are completed by an LP
    with the binaries fixed and become incumbents when better.
    """
    arr = lp.arrays()
    bins = np.flatnonzero(arr.binary)
    if bins.size == 0:
        return solve_lp(lp, backend)
    engine = _pick(arr, backend)
    sign = -1.0 if arr.maximize else 1.0
    depth_cap = 10 * bins.size
    counter = itertools.count()

    def node(lb, ub):
        return _solve_arrays(arr, lb, ub, engine)

    root = node(arr.lb.copy(), arr.ub.copy())
    nodes = 1
    if root.status is not Status.OPTIMAL:
        root.program = lp
        root.nodes = nodes
        return root
    heap = [(sign * root.objective, 0, next(counter), arr.lb.copy(), arr.ub.copy(), root)]
    best: Solution | None = None
    best_key = math.inf

    def offer(lb, ub, values):
        nonlocal best, best_key, nodes
        lb2, ub2 = lb.copy(), ub.copy()
        lb2[bins] = ub2[bins] = values
        clean = node(lb2, ub2)
        nodes += 1
        if clean.status is Status.OPTIMAL and sign * clean.objective < best_key:
            best, best_key = clean, sign * clean.objective

    popped = 0
    while heap:
        key, negdepth, _, lb, ub, sol = heapq.heappop(heap)
        depth = -negdepth
        if key >= best_key - 1e-9 * max(1.0, abs(best_key)):
            continue
        frac = np.abs(sol.x[bins] - np.round(sol.x[bins]))
        if frac.max() <= INT_TOL:
            offer(lb, ub, np.round(sol.x[bins]))
            continue
        if heuristic is not None and popped % HEURISTIC_EVERY == 0:
            guess = heuristic(sol.x)
            if guess is not None:
                guess = np.round(np.asarray(guess, dtype=float))
                if np.all((guess >= lb[bins]) & (guess <= ub[bins])):
                    offer(lb, ub, guess)
                    if key >= best_key - 1e-9 * max(1.0, abs(best_key)):
                        continue
        popped += 1
        if depth >= depth_cap:
            raise RuntimeError("branch-and-bound depth cap exceeded")
        if nodes >= node_limit:
            log.warning("node limit %d reached", node_limit)
            break
        j = bins[np.argmin(np.abs(frac - 0.5) + (frac <= INT_TOL) * 10.0)]
        for value in (0.0, 1.0):
            lb2, ub2 = lb.copy(), ub.copy()
            lb2[j] = ub2[j] = value
            child = node(lb2, ub2)
            nodes += 1
            if child.status is Status.OPTIMAL and sign * child.objective < best_key:
                heapq.heappush(heap, (sign * child.objective, -(depth + 1), next(counter),
                                      lb2, ub2, child))
            elif child.status in (Status.UNBOUNDED, Status.STALLED):
                child.program = lp
                child.nodes = nodes
                return child
    if best is None:
        status = Status.STALLED if heap else Status.INFEASIBLE
        return Solution(status, nodes=nodes, backend=engine.rstrip("+"), program=lp,
                        message="no integral solution found")
    if heap:
        best.status = Status.STALLED
        best.message = "node limit reached; incumbent returned"
    best.program = lp
    best.nodes = nodes
    best.duals = None
    return best
