"""Under- and overestimates of the minimal VaR over a decision polyhedron.

Five estimators are combined into one report:

* ``u1``: LP relaxation of the VaR integer program.
* ``u2``: tightened RLT relaxation at the threshold level ``alpha*``.
* ``o1``: minimal CVaR at ``gamma``.
* ``o2``: RLT relaxation at shifted levels where it is exact.
* ``o3``: alternating minimization at levels ``(gamma, gamma + delta')``.

Gap columns: ``g1 = o1 - u1``, ``our_g = o3(min delta') - u2`` and
``imp_pct = (g1 - our_g) / g1 * 100``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence, TypeVar

import numpy as np

from .altmin import alternate_minimize
from .distribution import check_probabilities
from .errors import ValidationError, tagged
from .model import BilinearProgram, FeasibleSet, var_ip
from .programs import cvar_min
from .rlt import build_rlt_improved, build_rlt_shifted, simplex_condition
from .threshold import alpha_star

log = logging.getLogger(__name__)

SLACK = 1e-6
# Gaps this small are solver noise and count as zero for the Imp% cases.
GAP_ZERO = 1e-9
_R = TypeVar("_R")


@dataclass(frozen=True)
class EstimatorConfig:
    delta_primes: tuple[float, ...] = (0.007, 0.01)
    b: int = 10
    eps: float = 1e-6
    with_ip_true: bool = False
    big_m: float | None = None
    # Shifted upper level for o2; None picks it automatically (see ``o2_levels``).
    gamma_tilde: float | None = None
    backend: str | None = None


@dataclass
class EstimateReport:
    label: str
    gamma: float
    u1: float | None = None
    u2: float | None = None
    o1: float | None = None
    o2: float | None = None
    o3: dict[float, float] = field(default_factory=dict)
    ip_true: float | None = None
    g1: float | None = None
    our_g: float | None = None
    imp_pct: float | None = None
    alpha_star: float | None = None
    gamma_tilde: float | None = None
    timings: dict[str, float] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    metadata: dict[str, object] = field(default_factory=dict)

    # Column layout ---------------------------------------------------------
    def columns(self) -> list[str]:
        o3 = [f"O3({_fmt_level(d)})" for d in sorted(self.o3, reverse=True)]
        return ["T(gamma)", "IP-true", "U1", "O1", "U2", "O2", *o3, "G1", "Our-G", "Imp%"]

    def values(self) -> list[float | None]:
        o3 = [self.o3[d] for d in sorted(self.o3, reverse=True)]
        return [self.ip_true, self.u1, self.o1, self.u2, self.o2, *o3,
                self.g1, self.our_g, self.imp_pct]

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(self.columns())
        w.writerow([f"{self.label} ({_fmt_level(self.gamma)})"]
                   + ["" if v is None else repr(float(v)) for v in self.values()])
        return buf.getvalue()

    def to_dict(self, include_timings: bool = False) -> dict:
        doc = {
            "label": self.label, "gamma": self.gamma, "ip_true": self.ip_true,
            "u1": self.u1, "u2": self.u2, "o1": self.o1, "o2": self.o2,
            "o3": {_fmt_level(d): v for d, v in sorted(self.o3.items())},
            "g1": self.g1, "our_g": self.our_g, "imp_pct": self.imp_pct,
            "alpha_star": self.alpha_star, "gamma_tilde": self.gamma_tilde,
            "checks": dict(self.checks), "warnings": list(self.warnings),
            "metadata": dict(self.metadata),
        }
        if include_timings:
            doc["timings"] = dict(self.timings)
        return doc

    def to_json(self, include_timings: bool = False) -> str:
        return json.dumps(self.to_dict(include_timings), indent=1, sort_keys=True)


def reports_to_csv(reports: Sequence[EstimateReport]) -> str:
    """One header per distinct column layout, then the rows."""
    out, last = [], None
    for r in reports:
        cols = r.columns()
        out.append(r.to_csv(header=cols != last))
        last = cols
    return "".join(out)


def _fmt_level(v: float) -> str:
    return f"{v:.10g}"


def gap_metrics(report: EstimateReport) -> EstimateReport:
    """Fill ``g1``, ``our_g`` and ``imp_pct`` from the bound columns."""
    if report.o1 is None or report.u1 is None or report.u2 is None or not report.o3:
        raise ValidationError("gap metrics need o1, u1, u2 and at least one o3 value")
    report.g1 = report.o1 - report.u1
    report.our_g = report.o3[min(report.o3)] - report.u2
    if report.g1 > GAP_ZERO:
        report.imp_pct = (report.g1 - report.our_g) / report.g1 * 100.0
    elif abs(report.our_g) <= GAP_ZERO:
        # 0/0: both gaps closed; reported as a full improvement.
        report.imp_pct = 100.0
    else:
        report.imp_pct = None
        msg = f"G1 = {report.g1!r} with Our-G = {report.our_g!r}: Imp% omitted"
        report.warnings.append(msg)
        log.warning(msg)
    return report


def o2_levels(probs: np.ndarray, gamma: float, delta_primes: Sequence[float]) -> tuple[float, float]:
    """Levels ``(gamma, gamma_t)`` for the shifted relaxation.

    ``gamma + min(delta')`` is used when it satisfies ``1 - gamma_t < min p``;
    otherwise the midpoint between ``max(gamma, 1 - min p)`` and 1.
    """
    gt = gamma + min(delta_primes)
    if gt <= 1.0 and simplex_condition(probs, gt):
        return gamma, gt
    floor = max(gamma, 1.0 - float(np.min(probs)))
    return gamma, 0.5 * (floor + 1.0)


def _check_config(probs: np.ndarray, gamma: float, cfg: EstimatorConfig) -> None:
    if not 0.0 < gamma < 1.0:
        raise ValidationError(f"gamma must lie in (0, 1), got {gamma}")
    if not cfg.delta_primes:
        raise ValidationError("delta' list is empty")
    for d in cfg.delta_primes:
        if not (d > 0 and gamma + d <= 1.0 + 1e-12):
            raise ValidationError(f"delta'={d} must be positive with gamma + delta' <= 1")
    if cfg.gamma_tilde is not None:
        if not (gamma < cfg.gamma_tilde <= 1.0 and simplex_condition(probs, cfg.gamma_tilde)):
            raise ValidationError(f"gamma_tilde={cfg.gamma_tilde} must lie in (gamma, 1] "
                                  f"and exceed 1 - min p")
    if cfg.b < 2:
        raise ValidationError(f"b must be at least 2, got {cfg.b}")


def estimate_var_min(fs: FeasibleSet, probs: Sequence[float], gamma: float,
                     cfg: EstimatorConfig = EstimatorConfig(), label: str = "") -> EstimateReport:
    """Run every estimator on ``min VaR_gamma T(x)`` over ``fs`` and fill the gap columns."""
    p = check_probabilities(probs)
    if p.size != fs.n:
        raise ValidationError(f"{p.size} probabilities for {fs.n} scenarios")
    gamma = float(gamma)
    _check_config(p, gamma, cfg)
    rep = EstimateReport(label=label, gamma=gamma)
    rep.metadata = {"delta_primes": [float(d) for d in cfg.delta_primes], "b": cfg.b,
                    "eps": cfg.eps, "with_ip_true": cfg.with_ip_true, "big_m": cfg.big_m,
                    "n_scenarios": fs.n, "n_decisions": fs.k}

    def timed(name: str, fn: Callable[[], _R]) -> _R:
        t0 = time.perf_counter()
        out = tagged(name, fn)
        rep.timings[name] = time.perf_counter() - t0
        return out

    bp = BilinearProgram(fs, p, 0.0, gamma)

    rep.u1 = timed("U1", lambda: var_ip(fs, p, gamma, cfg.big_m, relax=True).objective)

    cert = timed("alpha*", lambda: alpha_star(p, gamma, cfg.b))
    rep.alpha_star = cert.alpha_star
    rep.u2 = timed("U2", lambda: build_rlt_improved(bp.with_levels(cert.alpha_star, gamma), cert)
                   .solve(cfg.backend))

    rep.o1 = timed("O1", lambda: cvar_min(fs, p, gamma).objective)

    a_t, g_t = (gamma, cfg.gamma_tilde) if cfg.gamma_tilde is not None else \
        o2_levels(p, gamma, cfg.delta_primes)
    rep.gamma_tilde = g_t
    rep.o2 = timed("O2", lambda: build_rlt_shifted(bp, a_t, g_t).solve(cfg.backend))

    for d in sorted(set(float(d) for d in cfg.delta_primes)):
        g_up = min(gamma + d, 1.0)
        rep.o3[d] = timed(f"O3({_fmt_level(d)})", lambda: alternate_minimize(
            bp.with_levels(gamma, g_up), cfg.eps).value)

    if cfg.with_ip_true:
        rep.ip_true = timed("IP-true", lambda: var_ip(fs, p, gamma, cfg.big_m).objective)

    gap_metrics(rep)
    rep.checks = bound_checks(rep)
    return rep


def bound_checks(rep: EstimateReport, slack: float = SLACK) -> dict[str, bool]:
    """Validity chain against ``ip_true`` (when known) plus two observed orderings."""
    checks: dict[str, bool] = {}
    o3 = [rep.o3[d] for d in sorted(rep.o3)]
    if rep.u1 is not None and rep.u2 is not None:
        checks["u2_ge_u1"] = rep.u2 >= rep.u1 - slack
    if len(o3) > 1:
        checks["o3_monotone_in_delta"] = all(a <= b + slack for a, b in zip(o3, o3[1:]))
    if rep.o1 is not None and o3:
        checks["o3_le_o1"] = all(v <= rep.o1 + slack for v in o3)
    rho = rep.ip_true
    if rho is not None:
        checks["u1_le_ip"] = rep.u1 <= rho + slack
        checks["u2_le_ip"] = rep.u2 <= rho + slack
        checks["ip_le_o3"] = all(rho <= v + slack for v in o3)
        checks["ip_le_o1"] = rho <= rep.o1 + slack
        checks["o2_ge_ip"] = rep.o2 >= rho - slack
    return checks


def chain_holds(rep: EstimateReport) -> bool:
    """The guaranteed part of ``checks``: every comparison against ip and o1."""
    keys = ("o3_le_o1", "u1_le_ip", "u2_le_ip", "ip_le_o3", "ip_le_o1", "o2_ge_ip")
    return all(rep.checks.get(k, True) for k in keys)

