"""Linear and mixed-binary program container with named variable groups."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy import sparse

LE, GE, EQ = "<=", ">=", "=="
_RELATIONS = {LE: LE, GE: GE, EQ: EQ, "=": EQ, "<": LE, ">": GE}


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    STALLED = "stalled"


@dataclass
class Variable:
    name: str
    lb: float = 0.0
    ub: float = math.inf
    binary: bool = False


@dataclass
class Constraint:
    cols: np.ndarray
    vals: np.ndarray
    relation: str
    rhs: float
    name: str = ""

    def coeffs(self) -> dict[int, float]:
        return dict(zip(self.cols.tolist(), self.vals.tolist()))


class LinearProgram:
    """A linear objective over bounded variables with linear rows.

    Variables are addressed by integer index. ``add_vars`` registers a named
    group so solutions can be read back with ``Solution.group``.
    """

    def __init__(self, name: str = ""):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.objective: dict[int, float] = {}
        self.sense = "min"
        self.constant = 0.0
        self.groups: dict[str, np.ndarray] = {}
        self._by_name: dict[str, int] = {}

    # variables -----------------------------------------------------------
    def add_var(self, name: str, lb: float = 0.0, ub: float = math.inf,
                binary: bool = False) -> int:
        if name in self._by_name:
            raise ValueError(f"duplicate variable name {name!r}")
        lb, ub = float(lb), float(ub)
        if binary:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        if lb > ub:
            raise ValueError(f"variable {name!r} has lb {lb} > ub {ub}")
        self.variables.append(Variable(name, lb, ub, binary))
        idx = len(self.variables) - 1
        self._by_name[name] = idx
        return idx

    def add_vars(self, prefix: str, shape: int | tuple[int, ...],
                 lb: float = 0.0, ub: float = math.inf,
                 binary: bool = False) -> np.ndarray:
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        out = np.empty(shape, dtype=np.int64)
        for pos in np.ndindex(*shape):
            suffix = "_".join(str(p) for p in pos)
            out[pos] = self.add_var(f"{prefix}_{suffix}" if suffix else prefix,
                                    lb, ub, binary)
        self.groups[prefix] = out
        return out

    def index(self, name: str) -> int:
        return self._by_name[name]

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    @property
    def binaries(self) -> np.ndarray:
        return np.array([i for i, v in enumerate(self.variables) if v.binary],
                        dtype=np.int64)

    # rows ----------------------------------------------------------------
    def add_constraint(self, coeffs: Mapping[int, float] | Iterable[tuple[int, float]],
                       relation: str, rhs: float, name: str = "") -> int:
        if relation not in _RELATIONS:
            raise ValueError(f"unknown relation {relation!r}")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[int, float] = {}
        n = len(self.variables)
        for j, a in items:
            j = int(j)
            if not 0 <= j < n:
                raise ValueError(f"constraint references undeclared variable {j}")
            acc[j] = acc.get(j, 0.0) + float(a)
        cols = np.fromiter(acc.keys(), dtype=np.int64, count=len(acc))
        vals = np.fromiter(acc.values(), dtype=float, count=len(acc))
        keep = vals != 0.0
        self.constraints.append(Constraint(cols[keep], vals[keep],
                                           _RELATIONS[relation], float(rhs), name))
        return len(self.constraints) - 1

    def set_objective(self, coeffs: Mapping[int, float] | Iterable[tuple[int, float]],
                      sense: str = "min", constant: float = 0.0) -> None:
        if sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        obj: dict[int, float] = {}
        for j, a in items:
            obj[int(j)] = obj.get(int(j), 0.0) + float(a)
        self.objective = obj
        self.sense = sense
        self.constant = float(constant)

    # export --------------------------------------------------------------
    def arrays(self) -> "LpArrays":
        m, n = len(self.constraints), len(self.variables)
        rows, cols, vals = [], [], []
        for i, con in enumerate(self.constraints):
            rows.append(np.full(con.cols.size, i, dtype=np.int64))
            cols.append(con.cols)
            vals.append(con.vals)
        if m:
            A = sparse.csr_matrix((np.concatenate(vals),
                                   (np.concatenate(rows), np.concatenate(cols))),
                                  shape=(m, n))
        else:
            A = sparse.csr_matrix((0, n))
        c = np.zeros(n)
        for j, a in self.objective.items():
            c[j] += a
        return LpArrays(
            A=A,
            relations=np.array([con.relation for con in self.constraints], dtype=object),
            rhs=np.array([con.rhs for con in self.constraints], dtype=float),
            c=c,
            lb=np.array([v.lb for v in self.variables], dtype=float),
            ub=np.array([v.ub for v in self.variables], dtype=float),
            binary=np.array([v.binary for v in self.variables], dtype=bool),
            maximize=self.sense == "max",
            constant=self.constant,
        )

    def dump(self) -> str:
        """Algebraic text rendering, one row per line."""

        def term_list(pairs):
            parts = []
            for j, a in pairs:
                sign = "-" if a < 0 else "+"
                parts.append(f"{sign} {abs(a):.12g} {self.variables[j].name}")
            text = " ".join(parts)
            return text[2:] if text.startswith("+ ") else text or "0"

        lines = [f"\\ {self.name}" if self.name else "\\ model",
                 f"{self.sense}: {term_list(sorted(self.objective.items()))}"
                 + (f" + {self.constant:.12g}" if self.constant else "")]
        lines.append("subject to")
        for i, con in enumerate(self.constraints):
            label = con.name or f"r{i}"
            pairs = zip(con.cols.tolist(), con.vals.tolist())
            lines.append(f"  {label}: {term_list(pairs)} {con.relation} {con.rhs:.12g}")
        lines.append("bounds")
        for v in self.variables:
            lines.append(f"  {v.lb:.12g} <= {v.name} <= {v.ub:.12g}")
        bins = [v.name for v in self.variables if v.binary]
        if bins:
            lines.append("binary")
            lines.append("  " + " ".join(bins))
        lines.append("end")
        return "\n".join(lines) + "\n"


@dataclass
class LpArrays:
    A: sparse.csr_matrix
    relations: np.ndarray
    rhs: np.ndarray
    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    binary: np.ndarray
    maximize: bool
    constant: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


@dataclass
class Solution:
    status: Status
    objective: float = math.nan
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    dual_objective: float = math.nan
    iterations: int = 0
    nodes: int = 0
    backend: str = ""
    message: str = ""
    program: LinearProgram | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL

    def __getitem__(self, name: str) -> float:
        return float(self.x[self.program.index(name)])

    def group(self, prefix: str) -> np.ndarray:
        return self.x[self.program.groups[prefix]]

    def row_duals(self, rows) -> np.ndarray:
        return self.duals[np.asarray(rows, dtype=np.int64)]
