"""Alternating minimization: examples, monotone trace, sandwich."""

import numpy as np
import pytest

from iqfrisk.altmin import alternate_minimize
from iqfrisk.errors import ValidationError
from iqfrisk.model import BilinearProgram, FeasibleSet, solve_exact_small
from iqfrisk.programs import cvar_min

from instances import HALF, random_feasible_set, random_probs, seesaw


def test_examples():
    fixed = BilinearProgram(FeasibleSet.fixed([1.0, 3.0]), HALF, 0.5, 0.8)
    res = alternate_minimize(fixed)
    assert res.value == pytest.approx(3.0)
    assert res.rounds <= 2
    assert alternate_minimize(BilinearProgram(seesaw(), HALF, 0.5, 0.75)).value == pytest.approx(0.5)
    one = alternate_minimize(BilinearProgram(seesaw(), [0.3, 0.7], 0.2, 1.0))
    assert one.rounds == 1 and len(one.trace) == 1
    assert one.value == pytest.approx(cvar_min(seesaw(), [0.3, 0.7], 0.2).objective)


def test_rejects_nonpositive_eps():
    with pytest.raises(ValidationError):
        alternate_minimize(BilinearProgram(seesaw(), HALF, 0.5, 0.75), eps=0.0)


def test_trace_csv():
    res = alternate_minimize(BilinearProgram(seesaw(), HALF, 0.5, 0.75))
    lines = res.trace_csv().splitlines()
    assert lines[0] == "iter,value" and len(lines) == len(res.trace) + 1


def test_monotone_and_sandwiched():
    rng = np.random.default_rng(31)
    for _ in range(15):
        fs = random_feasible_set(rng)
        p = random_probs(rng, fs.n)
        a, g = np.sort(rng.uniform(0.05, 1.0, 2))
        bp = BilinearProgram(fs, p, a, g)
        res = alternate_minimize(bp)
        assert all(b <= a_ + 1e-9 for a_, b in zip(res.trace, res.trace[1:]))
        assert res.value <= cvar_min(fs, p, a).objective + 1e-7
        assert res.value >= solve_exact_small(bp) - 1e-7


def test_exact_minimum_grows_with_upper_level():
    rng = np.random.default_rng(32)
    for _ in range(6):
        fs = random_feasible_set(rng)
        p = random_probs(rng, fs.n)
        g = 0.7
        lo = solve_exact_small(BilinearProgram(fs, p, g, g + 0.1))
        hi = solve_exact_small(BilinearProgram(fs, p, g, g + 0.2))
        assert lo <= hi + 1e-7
