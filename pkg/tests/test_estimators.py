"""Estimator orchestration and gap arithmetic."""

import json
import logging

import numpy as np
import pytest

from iqfrisk.errors import ValidationError
from iqfrisk.estimators import (EstimateReport, EstimatorConfig, chain_holds, estimate_var_min,
                                gap_metrics, o2_levels, reports_to_csv)
from iqfrisk.rlt import simplex_condition

from instances import HALF, random_feasible_set, random_probs, seesaw


def report(o1, u1, u2, o3):
    return EstimateReport("X", 0.99, u1=u1, u2=u2, o1=o1, o3=o3)


def test_gap_arithmetic_wide_gap():
    r = gap_metrics(report(0.59010, 0.33381, 0.43981, {0.007: 0.58008, 0.01: 0.59010}))
    assert r.g1 == pytest.approx(0.25629, abs=1e-12)
    assert r.our_g == pytest.approx(0.14027, abs=1e-12)
    assert abs(r.imp_pct - 45.27) <= 0.005


def test_gap_arithmetic_narrow_gap():
    r = gap_metrics(report(0.58946, 0.49437, 0.56248, {0.007: 0.58946, 0.01: 0.58946}))
    assert r.g1 == pytest.approx(0.09509, abs=1e-12)
    assert r.our_g == pytest.approx(0.02698, abs=1e-12)
    assert abs(r.imp_pct - 71.63) <= 0.005


def test_zero_gap_conventions(caplog):
    assert gap_metrics(report(0.0, 0.0, 0.0, {0.007: 0.0})).imp_pct == 100.0
    assert gap_metrics(report(0.4, 0.2, 0.2, {0.007: 0.4})).imp_pct == pytest.approx(0.0)
    assert gap_metrics(report(0.4, 0.2, 0.3, {0.007: 0.3})).imp_pct == pytest.approx(100.0)
    with caplog.at_level(logging.WARNING):
        r = gap_metrics(report(0.3, 0.3, 0.1, {0.007: 0.2}))
    assert r.imp_pct is None and r.warnings and "Imp%" in caplog.text
    with pytest.raises(ValidationError):
        gap_metrics(EstimateReport("X", 0.9, u1=0.0, o1=0.0, u2=0.0))


def test_seesaw_report():
    r = estimate_var_min(seesaw(), HALF, 0.75, EstimatorConfig((0.2,), with_ip_true=True), "toy")
    assert r.ip_true == pytest.approx(0.5)
    for v in (r.u1, r.u2):
        assert -1e-9 <= v <= 0.5 + 1e-6
    for v in (r.o1, r.o2, r.o3[0.2]):
        assert v >= 0.5 - 1e-6
    assert chain_holds(r) and all(r.checks.values())
    assert r.g1 == pytest.approx(r.o1 - r.u1)


def test_csv_and_json_layout():
    r = estimate_var_min(seesaw(), HALF, 0.75, EstimatorConfig((0.2, 0.1)), "toy")
    header, row = r.to_csv().splitlines()
    assert header.split(",") == ["T(gamma)", "IP-true", "U1", "O1", "U2", "O2",
                                 "O3(0.2)", "O3(0.1)", "G1", "Our-G", "Imp%"]
    cells = row.split(",")
    assert cells[0] == "toy (0.75)" and cells[1] == ""
    assert float(cells[-2]) == pytest.approx(r.o3[0.1] - r.u2)
    doc = json.loads(r.to_json())
    assert "timings" not in doc and set(doc["o3"]) == {"0.1", "0.2"}
    assert "timings" in json.loads(r.to_json(include_timings=True))
    both = reports_to_csv([r, r]).splitlines()
    assert len(both) == 3


def test_rejects_bad_config():
    with pytest.raises(ValidationError):
        estimate_var_min(seesaw(), HALF, 0.75, EstimatorConfig(()))
    with pytest.raises(ValidationError):
        estimate_var_min(seesaw(), HALF, 0.95, EstimatorConfig((0.1,)))
    with pytest.raises(ValidationError):
        estimate_var_min(seesaw(), HALF, 0.75, EstimatorConfig((0.1,), gamma_tilde=0.4))


def test_solver_errors_carry_tag():
    with pytest.raises(ValidationError, match=r"\[U1\]"):
        # unbounded T, no big-M supplied
        from iqfrisk.model import FeasibleSet
        fs = FeasibleSet(np.zeros((1, 0)), np.array([[-1.0, 0.0]]), np.array([0.0]))
        estimate_var_min(fs, HALF, 0.75, EstimatorConfig((0.1,)))


def test_o2_level_rule():
    p = np.array([0.05, 0.95])
    assert o2_levels(p, 0.9, [0.07]) == (0.9, pytest.approx(0.97))
    g, gt = o2_levels(p, 0.9, [0.01])
    assert g == 0.9 and gt == pytest.approx(0.975) and simplex_condition(p, gt)
    g, gt = o2_levels(p, 0.99, [0.001])
    assert gt == pytest.approx(0.991)


def test_chain_on_random_instances():
    rng = np.random.default_rng(41)
    for _ in range(8):
        fs = random_feasible_set(rng)
        p = random_probs(rng, fs.n)
        g = float(rng.uniform(0.5, 0.9))
        r = estimate_var_min(fs, p, g, EstimatorConfig((0.05, 0.1), with_ip_true=True))
        assert chain_holds(r), r.checks
