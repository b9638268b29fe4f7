"""Quantile, IQF and slice-expectation arithmetic."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iqfrisk.distribution import DiscreteDistribution
from iqfrisk.errors import ValidationError

from oracles import quantile_by_sorting, slice_by_midpoint_rule

D4 = DiscreteDistribution(np.array([1.0, 2, 3, 4]), np.full(4, 0.25))


@pytest.mark.parametrize("p, expect", [(0.5, 2.0), (1.0, 4.0), (0.26, 2.0)])
def test_quantile_examples(p, expect):
    assert quantile_by_sorting(D4.values, D4.probs, p) == expect
    assert D4.quantile(p) == expect


@pytest.mark.parametrize("p, expect", [(0.5, 0.75), (0.0, 0.0), (1.0, 2.5)])
def test_iqf_examples(p, expect):
    assert D4.iqf(p) == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("a, g, expect", [(0.5, 1.0, 3.5), (0.0, 1.0, 2.5), (0.25, 0.75, 2.5)])
def test_slice_examples(a, g, expect):
    assert slice_by_midpoint_rule(D4.values, D4.probs, a, g) == pytest.approx(expect, abs=1e-4)
    assert D4.expectation_slice(a, g) == pytest.approx(expect, abs=1e-12)
    if g == 1.0:
        assert D4.cvar(a) == pytest.approx(expect, abs=1e-12)


def test_rejections():
    with pytest.raises(ValidationError):
        D4.quantile(0.0)
    with pytest.raises(ValidationError):
        D4.expectation_slice(0.5, 0.5)
    with pytest.raises(ValidationError):
        DiscreteDistribution(np.array([1.0, 2.0]), np.array([0.5, 0.4]))
    with pytest.raises(ValidationError):
        DiscreteDistribution(np.array([1.0]), np.array([0.5, 0.5]))
    with pytest.raises(ValidationError):
        DiscreteDistribution(np.array([1.0, 2.0]), np.array([1.0, 0.0]))


def test_order_independent_with_ties():
    a = DiscreteDistribution(np.array([3.0, 1, 3, 2]), np.array([0.1, 0.4, 0.2, 0.3]))
    b = DiscreteDistribution(np.array([1.0, 2, 3]), np.array([0.4, 0.3, 0.3]))
    for p in (0.2, 0.4, 0.7, 0.71, 1.0):
        assert a.quantile(p) == b.quantile(p)
        assert a.iqf(p) == pytest.approx(b.iqf(p), abs=1e-12)


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text(D4.to_csv())
    again = DiscreteDistribution.from_csv(path)
    assert np.array_equal(again.values, D4.values)
    assert np.allclose(again.probs, D4.probs)
    path.write_text("v,p\n1,1\n")
    with pytest.raises(ValidationError):
        DiscreteDistribution.from_csv(path)


@st.composite
def distributions(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    values = draw(st.lists(st.floats(-50, 50, allow_nan=False), min_size=n, max_size=n))
    weights = draw(st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n))
    w = np.array(weights)
    return DiscreteDistribution(np.array(values), w / w.sum())


levels = st.floats(0.0, 1.0, allow_nan=False)


@settings(max_examples=150, deadline=None)
@given(distributions(), levels, levels)
def test_quantile_monotone_and_matches_oracle(d, p1, p2):
    p1, p2 = sorted((max(p1, 1e-6), max(p2, 1e-6)))
    assert d.quantile(p1) <= d.quantile(p2)
    assert d.quantile(p2) == quantile_by_sorting(d.values, d.probs, p2 - 1e-9)


@settings(max_examples=150, deadline=None)
@given(distributions(), levels, levels)
def test_sandwich(d, a, g):
    a, g = sorted((a, g))
    if g - a < 1e-6 or a == 0.0:
        return
    e = d.expectation_slice(a, g)
    assert d.quantile(a) - 1e-9 <= e <= d.quantile(g) + 1e-9


@settings(max_examples=150, deadline=None)
@given(distributions(), st.lists(levels, min_size=3, max_size=3, unique=True))
def test_convex_combination_identity(d, trio):
    a, a1, g = sorted(trio)
    if min(a1 - a, g - a1) < 1e-6:
        return
    lam = (a1 - a) / (g - a)
    whole = d.expectation_slice(a, g)
    parts = lam * d.expectation_slice(a, a1) + (1 - lam) * d.expectation_slice(a1, g)
    assert whole == pytest.approx(parts, abs=1e-10 * max(1.0, abs(whole)))


@settings(max_examples=100, deadline=None)
@given(distributions(), levels, levels)
def test_cvar_monotone(d, a, a1):
    a, a1 = sorted((min(a, 0.999), min(a1, 0.999)))
    assert d.cvar(a) <= d.cvar(a1) + 1e-9


@settings(max_examples=60, deadline=None)
@given(distributions())
def test_iqf_convex(d):
    grid = np.linspace(0, 1, 401)
    vals = np.array([d.iqf(p) for p in grid])
    assert np.all(np.diff(vals, 2) >= -1e-12 * max(1.0, np.abs(d.values).max()))
    assert vals[0] == 0.0
