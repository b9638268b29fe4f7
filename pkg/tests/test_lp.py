"""LP/MIP layer: hand-checked examples plus cross-checks against enumeration."""

import math

import numpy as np
import pytest

from iqfrisk.lp import LinearProgram, Status, solve_lp, solve_mip
from iqfrisk.lp.simplex import solve_dense

from oracles import binary_program_by_enumeration, lp_by_vertices

BACKENDS = ["simplex", "highs"]


def _build(A, rel, b, c, lb, ub, binary=False, sense="min"):
    lp = LinearProgram()
    idx = [lp.add_var(f"v{j}", lb[j], ub[j], binary) for j in range(len(c))]
    for a, r, bi in zip(A, rel, b):
        lp.add_constraint({j: a[j] for j in idx if a[j]}, r, bi)
    lp.set_objective(dict(enumerate(c)), sense)
    return lp


def random_lp(rng, n_max=4, m_max=6):
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    A = np.round(rng.normal(size=(m, n)), 2)
    A[rng.random((m, n)) < 0.2] = 0.0
    rel = list(rng.choice(["<=", ">=", "=="], size=m, p=[0.45, 0.45, 0.1]))
    b = np.round(rng.normal(size=m) * 2, 2)
    c = np.round(rng.normal(size=n), 2)
    lb = np.where(rng.random(n) < 0.5, 0.0, -5.0)
    ub = np.full(n, 5.0)
    return A, rel, b, c, lb, ub


@pytest.mark.parametrize("backend", BACKENDS)
def test_textbook_max(backend):
    lp = _build([[1, 1], [1, 3]], ["<=", "<="], [4, 6], [3, 2], [0, 0],
                [math.inf, math.inf], sense="max")
    sol = solve_lp(lp, backend)
    assert sol.status is Status.OPTIMAL
    assert sol.objective == pytest.approx(12.0)
    assert sol.x == pytest.approx([4.0, 0.0])
    assert sol.duals == pytest.approx([3.0, 0.0])


@pytest.mark.parametrize("backend", BACKENDS)
def test_infeasible_and_unbounded(backend):
    bad = _build([[1.0]], [">="], [2.0], [1.0], [0.0], [1.0])
    assert solve_lp(bad, backend).status is Status.INFEASIBLE
    ray = _build([[1.0, -1.0]], ["<="], [1.0], [-1.0, 0.0], [0.0, 0.0],
                 [math.inf, math.inf])
    assert solve_lp(ray, backend).status is Status.UNBOUNDED


def test_free_variables_and_equalities():
    lp = _build([[1, 1], [1, -1]], ["==", "=="], [3, 1], [1, 1],
                [-math.inf, -math.inf], [math.inf, math.inf])
    sol = solve_lp(lp, "simplex")
    assert sol.x == pytest.approx([2.0, 1.0])
    assert sol.objective == pytest.approx(3.0)


def test_empty_rows_are_dropped_or_rejected():
    res = solve_dense(np.zeros((1, 1)), ["<="], [1.0], [1.0], [0.0], [1.0])
    assert res.status is Status.OPTIMAL and res.duals[0] == 0.0
    res = solve_dense(np.zeros((1, 1)), [">="], [1.0], [1.0], [0.0], [1.0])
    assert res.status is Status.INFEASIBLE


def test_degenerate_cycling_example_terminates():
    # Beale's classic cycling instance for naive Dantzig pricing.
    A = [[0.25, -60, -1 / 25, 9], [0.5, -90, -1 / 50, 3], [0, 0, 1, 0]]
    c = [-0.75, 150, -1 / 50, 6]
    res = solve_dense(A, ["<=", "<=", "<="], [0, 0, 1], c, [0] * 4, [math.inf] * 4)
    assert res.status is Status.OPTIMAL
    assert res.objective == pytest.approx(-0.05)


def test_dump_uses_variable_names():
    lp = LinearProgram("toy")
    s = lp.add_var("s", -math.inf)
    th = lp.add_vars("theta", 2)
    lp.add_constraint({th[0]: 1.0, s: 0.5}, ">=", 0.25)
    lp.set_objective({s: 1.0})
    text = lp.dump()
    assert "theta_0 + 0.5 s >= 0.25" in text
    assert "-inf <= s <= inf" in text


@pytest.mark.parametrize("backend", BACKENDS)
def test_matches_vertex_enumeration(backend):
    rng = np.random.default_rng(11)
    for _ in range(120):
        A, rel, b, c, lb, ub = random_lp(rng)
        expect, _ = lp_by_vertices(A, rel, b, c, lb, ub)
        sol = solve_lp(_build(A, rel, b, c, lb, ub), backend)
        if expect is None:
            assert sol.status is Status.INFEASIBLE
            continue
        assert sol.status is Status.OPTIMAL
        assert sol.objective == pytest.approx(expect, abs=1e-7)
        _check_certificate(A, rel, b, sol)


def _check_certificate(A, rel, b, sol):
    x, y = sol.x, sol.duals
    Ax = np.asarray(A) @ x
    for ax, r, bi, yi in zip(Ax, rel, b, y):
        if r == "<=":
            assert ax <= bi + 1e-8 and yi <= 1e-9
        elif r == ">=":
            assert ax >= bi - 1e-8 and yi >= -1e-9
        else:
            assert abs(ax - bi) <= 1e-8
        assert abs(yi * (ax - bi)) <= 1e-7
    assert sol.dual_objective == pytest.approx(sol.objective, abs=1e-7)


def test_mip_knapsack():
    lp = _build([[3, 4, 5]], ["<="], [7], [-4, -5, -6], [0] * 3, [1] * 3, binary=True)
    sol = solve_mip(lp)
    assert sol.status is Status.OPTIMAL
    assert sol.objective == pytest.approx(-9.0)
    assert sol.x == pytest.approx([1, 1, 0])


def test_mip_infeasible():
    lp = _build([[1, 1]], [">="], [3], [1, 1], [0, 0], [1, 1], binary=True)
    assert solve_mip(lp).status is Status.INFEASIBLE


def test_mip_with_continuous_part():
    lp = LinearProgram()
    z = lp.add_var("z", binary=True)
    k = lp.add_var("k", -10, 10)
    lp.add_constraint({k: 1.0, z: 5.0}, ">=", 2.0)
    lp.add_constraint({k: 1.0, z: -1.0}, ">=", -0.5)
    lp.set_objective({k: 1.0, z: 0.25})
    sol = solve_mip(lp)
    # z=0: k>=2 -> 2 ; z=1: k>=max(-3, 0.5) -> 0.75
    assert sol.objective == pytest.approx(0.75)


def test_mip_matches_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(60):
        n = int(rng.integers(2, 11))
        m = int(rng.integers(1, 5))
        A = rng.integers(-3, 6, size=(m, n)).astype(float)
        rel = list(rng.choice(["<=", ">="], size=m))
        b = np.round(rng.uniform(-2, 6, size=m), 1)
        c = np.round(rng.normal(size=n), 2)
        expect = binary_program_by_enumeration(A, rel, b, c)
        sol = solve_mip(_build(A, rel, b, c, [0] * n, [1] * n, binary=True))
        if expect is None:
            assert sol.status is Status.INFEASIBLE
        else:
            assert sol.objective == pytest.approx(expect, abs=1e-7)
            assert np.all(np.abs(sol.x - np.round(sol.x)) <= 1e-6)


def test_interior_point_path_agrees(monkeypatch):
    import iqfrisk.lp.solve as S

    monkeypatch.setattr(S, "IPM_ROWS", 0)
    rng = np.random.default_rng(5)
    checked = 0
    for _ in range(60):
        A, rel, b, c, lb, ub = random_lp(rng)
        expect, _ = lp_by_vertices(A, rel, b, c, lb, ub)
        sol = solve_lp(_build(A, rel, b, c, lb, ub), "highs")
        if expect is None:
            assert sol.status is Status.INFEASIBLE
            continue
        assert sol.status is Status.OPTIMAL
        assert sol.objective == pytest.approx(expect, abs=1e-7)
        assert sol.dual_objective == pytest.approx(expect, abs=1e-6)
        checked += 1
    assert checked > 20
