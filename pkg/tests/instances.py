"""Seeded random instances shared by several test modules."""

import numpy as np

from iqfrisk.model import FeasibleSet


def random_feasible_set(rng, k=None, n=None):
    """x in [0,1]^k, each T_i above two random affine pieces of x, T_i <= 10."""
    k = int(rng.integers(1, 4)) if k is None else k
    n = int(rng.integers(2, 6)) if n is None else n
    rows_A, rows_B, rhs = [], [], []
    for j in range(k):
        e = np.zeros(k)
        e[j] = 1.0
        rows_A += [e, -e]
        rows_B += [np.zeros(n), np.zeros(n)]
        rhs += [1.0, 0.0]
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = 1.0
        for _ in range(2):
            g = np.round(rng.normal(size=k), 3)
            h = round(float(rng.uniform(-1, 1)), 3)
            rows_A.append(g)      # g x - T_i <= -h
            rows_B.append(-ei)
            rhs.append(-h)
        rows_A.append(np.zeros(k))
        rows_B.append(ei)
        rhs.append(10.0)
    return FeasibleSet(np.array(rows_A), np.array(rows_B), np.array(rhs))


def random_probs(rng, n, floor=0.02):
    p = rng.dirichlet(np.ones(n)) * (1 - floor * n) + floor
    return p / p.sum()


def seesaw():
    """T1 = x, T2 = 1 - x, x in [0, 1]."""
    A = np.array([[1.0], [-1.0], [-1.0], [1.0], [1.0], [-1.0]])
    B = np.array([[-1.0, 0], [1, 0], [0, -1], [0, 1], [0, 0], [0, 0]])
    c = np.array([0.0, 0, -1, 1, 1, 0])
    return FeasibleSet(A, B, c)


HALF = np.array([0.5, 0.5])
