"""Alternating minimization upper bound for the bilinear program."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError, ValidationError
from .model import BilinearProgram
from .programs import find_w, find_xt

MAX_ROUNDS = 10_000


@dataclass
class AltMinResult:
    value: float
    rounds: int
    trace: list[float] = field(default_factory=list)
    x: np.ndarray | None = None
    T: np.ndarray | None = None
    wprime: np.ndarray | None = None

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iter", "value"])
        for i, v in enumerate(self.trace):
            w.writerow([i, repr(float(v))])
        return buf.getvalue()


def alternate_minimize(bp: BilinearProgram, eps: float = 1e-6,
                       max_rounds: int = MAX_ROUNDS) -> AltMinResult:
    """Fix w', solve for (x, T); fix (x, T), solve for w'; repeat from w' = 0
    until consecutive values differ by at most ``eps``.

    The returned value is the last (x, T)-step optimum, which never exceeds
    the minimal CVaR at ``alpha``.
    """
    if not eps > 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    wprime = np.zeros(bp.n)
    trace: list[float] = []
    for rounds in range(1, max_rounds + 1):
        xt = find_xt(bp, wprime)
        trace.append(xt.value)
        if bp.gamma == 1.0:
            # W' = {0}: the first step is already optimal.
            return AltMinResult(xt.value, rounds, trace, xt.x, xt.T, wprime)
        nu_w, wprime = find_w(bp, xt.x, xt.T)
        trace.append(nu_w)
        if abs(nu_w - xt.value) <= eps:
            return AltMinResult(xt.value, rounds, trace, xt.x, xt.T, wprime)
    raise SolverError("alternating minimization", "round cap",
                      f"no convergence in {max_rounds} rounds")
