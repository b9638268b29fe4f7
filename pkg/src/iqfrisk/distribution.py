"""Finite discrete distributions and quantile-slice risk measures.

For a distribution with CDF ``F`` the generalized inverse is
``F^-1(p) = inf{t : F(t) >= p}`` and the integrated quantile function is
``IQF(p) = integral_0^p F^-1(u) du``. The slice expectation over
``(alpha, gamma]`` is the average of ``F^-1`` on that interval; VaR and CVaR
are its limiting cases.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ValidationError

TOL = 1e-9


def _check_level(name: str, p: float, *, allow_zero: bool = True) -> float:
    p = float(p)
    if not math.isfinite(p) or p < 0.0 or p > 1.0 or (p == 0.0 and not allow_zero):
        raise ValidationError(f"{name} must lie in {'[0' if allow_zero else '(0'}, 1], got {p}")
    return p


def check_probabilities(probs: Sequence[float]) -> np.ndarray:
    """Validate a probability vector and rescale away rounding drift."""
    p = np.asarray(probs, dtype=float).ravel()
    if p.size == 0:
        raise ValidationError("distribution needs at least one atom")
    if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
        raise ValidationError("probabilities must be finite and strictly positive")
    total = p.sum()
    if abs(total - 1.0) > TOL:
        raise ValidationError(f"probabilities sum to {total!r}, expected 1")
    return p / total


@dataclass(frozen=True)
class DiscreteDistribution:
    values: np.ndarray
    probs: np.ndarray
    _sorted: np.ndarray = field(init=False, repr=False, compare=False)
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise ValidationError("values must be finite")
        p = check_probabilities(self.probs)
        if v.size != p.size:
            raise ValidationError("values and probs differ in length")
        order = np.argsort(v, kind="stable")
        cum = np.cumsum(p[order])
        cum[-1] = 1.0
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "_sorted", v[order])
        object.__setattr__(self, "_cum", cum)

    def __len__(self) -> int:
        return self.values.size

    def cdf(self, t: float) -> float:
        k = np.searchsorted(self._sorted, t, side="right")
        return 0.0 if k == 0 else float(self._cum[k - 1])

    def quantile(self, p: float) -> float:
        """Smallest atom whose cumulative mass reaches ``p`` (up to 1e-9)."""
        p = _check_level("p", p, allow_zero=False)
        k = int(np.searchsorted(self._cum, p - TOL, side="left"))
        return float(self._sorted[min(k, len(self._sorted) - 1)])

    def _mass_in(self, lo: float, hi: float) -> np.ndarray:
        """Length of (lo, hi] covered by each sorted atom's quantile interval."""
        left = np.concatenate([[0.0], self._cum[:-1]])
        return np.clip(np.minimum(self._cum, hi) - np.maximum(left, lo), 0.0, None)

    def iqf(self, p: float) -> float:
        p = _check_level("p", p)
        return float(self._sorted @ self._mass_in(0.0, p))

    def expectation_slice(self, alpha: float, gamma: float) -> float:
        """Average quantile over (alpha, gamma]; requires 0 <= alpha < gamma <= 1."""
        alpha = _check_level("alpha", alpha)
        gamma = _check_level("gamma", gamma)
        if not alpha < gamma:
            raise ValidationError(f"need alpha < gamma, got {alpha} >= {gamma}")
        return float(self._sorted @ self._mass_in(alpha, gamma)) / (gamma - alpha)

    def var(self, gamma: float) -> float:
        return self.quantile(gamma)

    def cvar(self, alpha: float) -> float:
        return self.expectation_slice(alpha, 1.0)

    # I/O -----------------------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["value", "prob"])
        for v, p in zip(self.values, self.probs):
            w.writerow([repr(float(v)), repr(float(p))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, source: str | Path) -> "DiscreteDistribution":
        text = Path(source).read_text()
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows or set(rows[0]) != {"value", "prob"}:
            raise ValidationError("distribution CSV needs header 'value,prob'")
        try:
            values = [float(r["value"]) for r in rows]
            probs = [float(r["prob"]) for r in rows]
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad number in distribution CSV: {exc}") from None
        return cls(np.array(values), np.array(probs))


def quantile(d: DiscreteDistribution, p: float) -> float:
    return d.quantile(p)


def iqf(d: DiscreteDistribution, p: float) -> float:
    return d.iqf(p)


def expectation_slice(d: DiscreteDistribution, alpha: float, gamma: float) -> float:
    return d.expectation_slice(alpha, gamma)


def var(d: DiscreteDistribution, gamma: float) -> float:
    return d.quantile(gamma)


def cvar(d: DiscreteDistribution, alpha: float) -> float:
    return d.expectation_slice(alpha, 1.0)
