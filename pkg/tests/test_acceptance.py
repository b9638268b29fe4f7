"""Acceptance checks, one test per criterion; each prints a PASS/FAIL line."""

import time

import numpy as np
import pytest

from iqfrisk import lp as L
from iqfrisk.altmin import alternate_minimize
from iqfrisk.distribution import DiscreteDistribution
from iqfrisk.estimators import EstimateReport, chain_holds, gap_metrics
from iqfrisk.model import BilinearProgram, solve_exact_small, var_ip
from iqfrisk.nette import (CaseStudyConfig, enumerate_scenarios, run_case_study,
                           sample_link_failures, synthetic_topology, triangle, weibull_draws)
from iqfrisk.programs import cvar_min, expectation_via_dual
from iqfrisk.rlt import build_rlt, build_rlt_improved, build_rlt_shifted
from iqfrisk.threshold import alpha_star

from instances import random_feasible_set, random_probs
from oracles import binary_program_by_enumeration, lp_by_vertices
from test_lp import _build, random_lp


@pytest.fixture
def verdict(capsys):
    def emit(number: int, title: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\ncriterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")
        assert ok, detail
    return emit


def test_c1_dual_expectation_matches_slice(verdict):
    rng = np.random.default_rng(101)
    t0, worst = time.perf_counter(), 0.0
    for _ in range(200):
        n = int(rng.integers(1, 21))
        values = np.round(rng.normal(size=n) * 3, 3)
        probs = rng.dirichlet(np.ones(n))
        probs = np.maximum(probs, 1e-4)
        probs /= probs.sum()
        a, g = np.sort(rng.uniform(0, 1, 2))
        if g - a < 1e-6:
            g = min(1.0, a + 1e-3)
        d = DiscreteDistribution(values, probs)
        worst = max(worst, abs(expectation_via_dual(values, probs, a, g)
                               - d.expectation_slice(a, g)))
    took = time.perf_counter() - t0
    verdict(1, "dual LP vs slice", worst <= 1e-7 and took < 30,
            f"max |diff| {worst:.2e} over 200, {took:.1f}s")


def test_c2_slice_equals_var_above_threshold(verdict):
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 13))
        probs = rng.dirichlet(np.ones(n))
        probs = np.maximum(probs, 1e-3)
        probs /= probs.sum()
        d = DiscreteDistribution(np.round(rng.normal(size=n) * 5, 2), probs)
        g = float(rng.uniform(0.05, 0.999))
        cert = alpha_star(probs, g, 10)
        for a in rng.uniform(cert.alpha_star, g, 20):
            worst = max(worst, abs(d.expectation_slice(a, g) - d.quantile(g)))
    verdict(2, "slice above alpha* is VaR", worst <= 1e-9, f"max |diff| {worst:.2e}")


def test_c3_gamma_one_is_cvar(verdict):
    rng = np.random.default_rng(103)
    worst = 0.0
    for _ in range(50):
        fs = random_feasible_set(rng, k=int(rng.integers(1, 4)), n=int(rng.integers(2, 6)))
        p = random_probs(rng, fs.n)
        a = float(rng.uniform(0, 0.95))
        exact = solve_exact_small(BilinearProgram(fs, p, a, 1.0))
        worst = max(worst, abs(exact - cvar_min(fs, p, a).objective))
    verdict(3, "bilinear at gamma=1 vs CVaR LP", worst <= 1e-7, f"max |diff| {worst:.2e}")


def test_c4_rlt_exact_when_wprime_is_simplex(verdict):
    rng = np.random.default_rng(104)
    worst = 0.0
    for _ in range(50):
        fs = random_feasible_set(rng)
        p = random_probs(rng, fs.n)
        g = 1 - float(rng.uniform(0.05, 0.95)) * p.min()
        bp = BilinearProgram(fs, p, float(rng.uniform(0, g - 1e-3)), g)
        worst = max(worst, abs(build_rlt(bp).solve() - solve_exact_small(bp)))
    verdict(4, "RLT exactness", worst <= 1e-6, f"max |diff| {worst:.2e}")


def test_c5_bound_chain(verdict):
    rng = np.random.default_rng(105)
    tol = 1e-6
    failures, max_rounds = [], 0
    for trial in range(50):
        fs = random_feasible_set(rng)
        p = random_probs(rng, fs.n)
        g = float(rng.uniform(0.5, 0.95))
        cert = alpha_star(p, g, 10)
        a = float(rng.uniform(cert.alpha_star, g))
        bp = BilinearProgram(fs, p, a, g)
        rho = var_ip(fs, p, g).objective
        u1 = var_ip(fs, p, g, relax=True).objective
        r = build_rlt(bp).solve()
        ri = build_rlt_improved(bp, cert).solve()
        o1 = cvar_min(fs, p, g).objective
        gt = 1 - 0.5 * p.min()
        o2 = build_rlt_shifted(bp, g, gt).solve() if gt > g else None
        dp = float(rng.uniform(1e-3, 1 - g))
        am = alternate_minimize(bp.with_levels(g, g + dp))
        max_rounds = max(max_rounds, am.rounds)
        ok = (u1 <= rho + tol and r <= ri + tol and ri <= rho + tol
              and rho <= am.value + tol and am.value <= o1 + tol
              and (o2 is None or o2 >= rho - tol)
              and all(y <= x + 1e-9 for x, y in zip(am.trace, am.trace[1:]))
              and am.rounds < 10_000)
        if not ok:
            failures.append(trial)
    verdict(5, "bound chain", not failures,
            f"{50 - len(failures)}/50 instances hold, max AM rounds {max_rounds}")


def test_c6_table_arithmetic(verdict):
    r = gap_metrics(EstimateReport("net", 0.99, u1=0.33381, u2=0.43981, o1=0.59010,
                                   o3={0.007: 0.58008, 0.01: 0.59010}))
    ok = (abs(r.g1 - 0.25629) < 1e-12 and abs(r.our_g - 0.14027) < 1e-12
          and abs(r.imp_pct - 45.27) <= 0.005)
    verdict(6, "gap arithmetic", ok,
            f"G1 {r.g1:.5f}, Our-G {r.our_g:.5f}, Imp% {r.imp_pct:.4f}")


@pytest.mark.slow
def test_c7_te_pipeline(verdict):
    gammas = (0.8, 0.9, 0.99)
    cfg = CaseStudyConfig(gammas=gammas, seed=0)
    t0 = time.perf_counter()
    reports = run_case_study(triangle(), cfg) + run_case_study(synthetic_topology(seed=0), cfg)
    took = time.perf_counter() - t0
    chain = all(chain_holds(r) and r.ip_true is not None for r in reports)

    t = sample_link_failures(synthetic_topology(seed=0), 0)
    present = {s.failed for s in enumerate_scenarios(t, 1e-4).scenarios}
    probs = np.array([e.fail_prob for e in t.edges])
    none = float(np.prod(1 - probs))
    due = {(e.key,) for e, q in zip(t.edges, probs) if none * q / (1 - q) >= 1e-4}
    scenarios_ok = () in present and bool(due) and due <= present
    ok = len(reports) == 6 and took < 300 and chain and scenarios_ok
    verdict(7, "TE pipeline", ok,
            f"6 reports in {took:.1f}s, chain {'holds' if chain else 'broken'}, "
            f"{len(due)} single failures due at 1e-4, all present: {scenarios_ok}")


def test_c8_weibull_median(verdict):
    med = float(np.median(weibull_draws(10_000, seed=0)))
    verdict(8, "Weibull median", 0.0008 <= med <= 0.0012, f"median {med:.6f}")


def test_c9_solver_soundness(verdict):
    rng = np.random.default_rng(109)
    lp_bad = 0
    for _ in range(500):
        A, rel, b, c, lb, ub = random_lp(rng, n_max=3, m_max=4)
        expect, _ = lp_by_vertices(A, rel, b, c, lb, ub)
        sol = L.solve_lp(_build(A, rel, b, c, lb, ub))
        if expect is None:
            lp_bad += sol.status is not L.Status.INFEASIBLE
        else:
            lp_bad += sol.status is not L.Status.OPTIMAL or abs(sol.objective - expect) > 1e-7
    mip_bad = 0
    for _ in range(200):
        n = int(rng.integers(2, 13))
        m = int(rng.integers(1, 5))
        A = rng.integers(-3, 6, size=(m, n)).astype(float)
        rel = list(rng.choice(["<=", ">="], size=m))
        b = np.round(rng.uniform(-2, 6, size=m), 1)
        c = np.round(rng.normal(size=n), 2)
        expect = binary_program_by_enumeration(A, rel, b, c)
        sol = L.solve_mip(_build(A, rel, b, c, [0] * n, [1] * n, binary=True))
        if expect is None:
            mip_bad += sol.status is not L.Status.INFEASIBLE
        else:
            mip_bad += sol.status is not L.Status.OPTIMAL or abs(sol.objective - expect) > 1e-7
    verdict(9, "solver soundness", lp_bad == 0 and mip_bad == 0,
            f"LP mismatches {lp_bad}/500, MIP mismatches {mip_bad}/200")
