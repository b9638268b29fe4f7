"""Tunnel-based traffic engineering under independent link failures.

The pipeline turns a topology into a :class:`~iqfrisk.model.FeasibleSet`
whose decision vector is the traffic ``X[p, t]`` on tunnel ``t`` of demand
pair ``p`` and whose scenario losses are

    t_q >= 1 - sum_{t alive in q} X[p, t] / d_p   for every pair p,
    sum_{tunnels over e} X <= c_e,   X >= 0,   0 <= t_q <= 1,

so ``t_q`` is at least the largest fraction of any demand lost in scenario
``q``. Demand pairs are unordered and edges undirected.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .errors import ValidationError, tagged
from .estimators import EstimateReport, EstimatorConfig, estimate_var_min
from .model import FeasibleSet

log = logging.getLogger(__name__)

WEIBULL_SHAPE = 0.8
MEDIAN_FAIL_PROB = 1e-3
NORMALIZE, RESIDUAL = "normalize", "residual"


def weibull_scale(shape: float = WEIBULL_SHAPE, median: float = MEDIAN_FAIL_PROB) -> float:
    """Scale giving the Weibull law the requested median."""
    return median / math.log(2.0) ** (1.0 / shape)


# Topology ---------------------------------------------------------------------

@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    capacity: float
    fail_prob: float | None = None

    @property
    def key(self) -> str:
        return f"{self.u}-{self.v}"

    def joins(self, a: str, b: str) -> bool:
        return {self.u, self.v} == {a, b}


@dataclass(frozen=True)
class Topology:
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    name: str = "topology"

    def __post_init__(self):
        nodes = tuple(str(v) for v in self.nodes)
        if len(set(nodes)) != len(nodes):
            raise ValidationError("duplicate node names")
        known = set(nodes)
        seen = set()
        for e in self.edges:
            if e.u == e.v:
                raise ValidationError(f"self-loop at {e.u}")
            if e.u not in known or e.v not in known:
                raise ValidationError(f"edge {e.key} uses an unknown node")
            pair = frozenset((e.u, e.v))
            if pair in seen:
                raise ValidationError(f"parallel edge {e.key}")
            seen.add(pair)
            if not (e.capacity >= 0 and math.isfinite(e.capacity)):
                raise ValidationError(f"edge {e.key} needs a finite capacity >= 0")
            if e.fail_prob is not None and not 0.0 < e.fail_prob < 1.0:
                raise ValidationError(f"edge {e.key} failure probability must be in (0, 1)")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(self.edges))

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        for i, e in enumerate(self.edges):
            g.add_edge(e.u, e.v, index=i, capacity=e.capacity)
        return g

    def edge_index(self, a: str, b: str) -> int:
        for i, e in enumerate(self.edges):
            if e.joins(a, b):
                return i
        raise KeyError(f"no edge {a}-{b}")

    def pairs(self) -> list[tuple[str, str]]:
        return [(a, b) for i, a in enumerate(self.nodes) for b in self.nodes[i + 1:]]

    def to_json(self) -> str:
        edges = []
        for e in self.edges:
            doc = {"u": e.u, "v": e.v, "capacity": e.capacity}
            if e.fail_prob is not None:
                doc["fail_prob"] = e.fail_prob
            edges.append(doc)
        return json.dumps({"name": self.name, "nodes": list(self.nodes), "edges": edges},
                          indent=1)

    @classmethod
    def from_json(cls, source: str | Path) -> "Topology":
        path = Path(source)
        try:
            doc = json.loads(path.read_text())
            edges = tuple(Edge(str(e["u"]), str(e["v"]), float(e["capacity"]),
                               None if e.get("fail_prob") is None else float(e["fail_prob"]))
                          for e in doc["edges"])
            return cls(tuple(doc["nodes"]), edges, str(doc.get("name", path.stem)))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValidationError(f"bad topology file {path}: {exc!r}") from None


def prune_topology(t: Topology) -> Topology:
    """Repeatedly drop vertices of degree <= 1 (and their edges)."""
    g = t.graph()
    while True:
        leaves = [v for v in g.nodes if g.degree[v] <= 1]
        if not leaves:
            break
        g.remove_nodes_from(leaves)
    if g.number_of_nodes() == 0:
        raise ValidationError(f"pruning {t.name} leaves an empty graph")
    if not nx.is_connected(g):
        raise ValidationError(f"{t.name} is disconnected after pruning")
    removed = [v for v in t.nodes if v not in g]
    if removed:
        log.info("pruned %d vertices from %s: %s", len(removed), t.name, removed)
    kept_nodes = tuple(v for v in t.nodes if v in g)
    kept_edges = tuple(e for e in t.edges if e.u in g and e.v in g)
    return Topology(kept_nodes, kept_edges, t.name)


# Demands ------------------------------------------------------------------------

@dataclass(frozen=True)
class DemandMatrix:
    entries: tuple[tuple[str, str, float], ...]

    def __post_init__(self):
        seen = set()
        for s, d, v in self.entries:
            if s == d:
                raise ValidationError(f"demand from {s} to itself")
            if not v > 0:
                raise ValidationError(f"demand {s}-{d} must be positive")
            pair = frozenset((s, d))
            if pair in seen:
                raise ValidationError(f"pair {s}-{d} listed twice")
            seen.add(pair)

    def __len__(self) -> int:
        return len(self.entries)

    def pairs(self) -> list[tuple[str, str]]:
        return [(s, d) for s, d, _ in self.entries]

    def restricted_to(self, t: Topology) -> "DemandMatrix":
        """Drop (with a warning) demands whose endpoints are not in ``t``."""
        keep, known = [], set(t.nodes)
        for s, d, v in self.entries:
            if s in known and d in known:
                keep.append((s, d, v))
            else:
                log.warning("dropping demand %s-%s: endpoint pruned", s, d)
        return DemandMatrix(tuple(keep))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["src", "dst", "demand"])
        for s, d, v in self.entries:
            w.writerow([s, d, repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, source: str | Path) -> "DemandMatrix":
        with open(source, newline="") as fh:
            rows = list(csv.DictReader(fh))
        try:
            return cls(tuple((r["src"], r["dst"], float(r["demand"])) for r in rows))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad demand file {source}: {exc!r}") from None


def _routing_graph(t: Topology) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(t.nodes)
    g.add_edges_from((e.u, e.v) for e in t.edges if e.capacity > 0)
    return g


def max_link_utilization(t: Topology, d: DemandMatrix) -> float:
    """MLU when every demand follows one hop-shortest path over positive-capacity links."""
    g = _routing_graph(t)
    load = np.zeros(len(t.edges))
    for s, dst, v in d.entries:
        try:
            path = nx.shortest_path(g, s, dst)
        except nx.NetworkXNoPath:
            raise ValidationError(f"no path between {s} and {dst}") from None
        for a, b in zip(path, path[1:]):
            load[t.edge_index(a, b)] += v
    caps = np.array([e.capacity for e in t.edges])
    used = caps > 0
    return float(np.max(load[used] / caps[used])) if used.any() else 0.0


def gen_demands_gravity(t: Topology, target_mlu: float = 0.6, seed: int = 0,
                        noise: float = 0.0) -> DemandMatrix:
    """Gravity demands ``d(a, b) ~ w_a w_b`` with ``w`` = adjacent capacity, scaled to
    the target MLU. ``noise > 0`` multiplies each entry by a seeded lognormal factor."""
    if not 0.0 < target_mlu <= 1.0:
        raise ValidationError(f"target MLU must be in (0, 1], got {target_mlu}")
    weight = {v: 0.0 for v in t.nodes}
    for e in t.edges:
        weight[e.u] += e.capacity
        weight[e.v] += e.capacity
    rng = np.random.default_rng(seed)
    raw = []
    for a, b in t.pairs():
        v = weight[a] * weight[b]
        if noise > 0:
            v *= float(rng.lognormal(0.0, noise))
        if v > 0:
            raw.append((a, b, v))
    if not raw:
        raise ValidationError("no pair has positive gravity weight")
    base = DemandMatrix(tuple(raw))
    scale = target_mlu / max_link_utilization(t, base)
    return DemandMatrix(tuple((a, b, v * scale) for a, b, v in raw))


# Tunnels ------------------------------------------------------------------------

Path_ = tuple[str, ...]


@dataclass(frozen=True)
class TunnelSet:
    tunnels: dict[tuple[str, str], tuple[Path_, ...]]

    def __post_init__(self):
        for pair, paths in self.tunnels.items():
            if not paths:
                raise ValidationError(f"pair {pair} has no tunnel")
            for p in paths:
                if len(set(p)) != len(p) or {p[0], p[-1]} != set(pair):
                    raise ValidationError(f"tunnel {p} is not a simple {pair} path")

    def for_pair(self, a: str, b: str) -> tuple[Path_, ...]:
        if (a, b) in self.tunnels:
            return self.tunnels[(a, b)]
        if (b, a) in self.tunnels:
            return tuple(tuple(reversed(p)) for p in self.tunnels[(b, a)])
        raise ValidationError(f"no tunnels for pair {a}-{b}")

    def to_json(self) -> str:
        doc = [{"src": a, "dst": b, "paths": [list(p) for p in ps]}
               for (a, b), ps in self.tunnels.items()]
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, source: str | Path) -> "TunnelSet":
        try:
            doc = json.loads(Path(source).read_text())
            return cls({(r["src"], r["dst"]): tuple(tuple(p) for p in r["paths"]) for r in doc})
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValidationError(f"bad tunnel file {source}: {exc!r}") from None


def _path_edges(path: Path_) -> list[tuple[str, str]]:
    return list(zip(path, path[1:]))


def gen_tunnels(t: Topology, pairs: Iterable[tuple[str, str]]) -> TunnelSet:
    """Two tunnels per pair: the hop-shortest path, then the shortest path avoiding
    its links, or the next-shortest path when no link-disjoint one exists."""
    g = t.graph()
    out: dict[tuple[str, str], tuple[Path_, ...]] = {}
    for a, b in pairs:
        try:
            first = tuple(nx.shortest_path(g, a, b))
        except (nx.NetworkXNoPath, nx.NodeNotFound):
            raise ValidationError(f"no path between {a} and {b}") from None
        rest = g.copy()
        rest.remove_edges_from(_path_edges(first))
        try:
            second = tuple(nx.shortest_path(rest, a, b))
        except nx.NetworkXNoPath:
            second = None
            for p in nx.shortest_simple_paths(g, a, b):
                if tuple(p) != first:
                    second = tuple(p)
                    break
        if second is None:
            log.warning("pair %s-%s has a single tunnel", a, b)
            out[(a, b)] = (first,)
        else:
            out[(a, b)] = (first, second)
    return TunnelSet(out)


# Failures and scenarios -----------------------------------------------------

def weibull_draws(size: int, seed: int, shape: float = WEIBULL_SHAPE,
                  median: float = MEDIAN_FAIL_PROB) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return weibull_scale(shape, median) * rng.weibull(shape, size)


def sample_link_failures(t: Topology, seed: int, shape: float = WEIBULL_SHAPE,
                         median: float = MEDIAN_FAIL_PROB) -> Topology:
    """Assign every edge a Weibull failure probability (one draw per edge, in order)."""
    draws = weibull_draws(len(t.edges), seed, shape, median)
    if np.any(draws >= 1.0):
        raise ValidationError("a failure probability draw reached 1; lower the median")
    edges = tuple(replace(e, fail_prob=float(max(p, np.finfo(float).tiny)))
                  for e, p in zip(t.edges, draws))
    return Topology(t.nodes, edges, t.name)


@dataclass(frozen=True)
class Scenario:
    failed: tuple[str, ...]
    prob: float
    # Catch-all for the mass outside the enumerated scenarios; its loss is 1.
    residual: bool = False


@dataclass(frozen=True)
class ScenarioSet:
    scenarios: tuple[Scenario, ...]
    mode: str = NORMALIZE
    enumerated_mass: float = 1.0
    threshold: float | None = None

    def __post_init__(self):
        sets = [frozenset(s.failed) for s in self.scenarios if not s.residual]
        if len(set(sets)) != len(sets):
            raise ValidationError("duplicate failure scenarios")
        for s in self.scenarios:
            if not 0.0 < s.prob <= 1.0:
                raise ValidationError(f"scenario probability {s.prob} outside (0, 1]")

    def __len__(self) -> int:
        return len(self.scenarios)

    @property
    def probs(self) -> np.ndarray:
        return np.array([s.prob for s in self.scenarios])

    def to_json(self) -> str:
        doc = {"mode": self.mode, "enumerated_mass": self.enumerated_mass,
               "threshold": self.threshold,
               "scenarios": [{"failed": list(s.failed), "prob": s.prob,
                              **({"residual": True} if s.residual else {})}
                             for s in self.scenarios]}
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, source: str | Path) -> "ScenarioSet":
        try:
            doc = json.loads(Path(source).read_text())
            rows = doc["scenarios"] if isinstance(doc, dict) else doc
            meta = doc if isinstance(doc, dict) else {}
            sc = tuple(Scenario(tuple(r["failed"]), float(r["prob"]), bool(r.get("residual")))
                       for r in rows)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValidationError(f"bad scenario file {source}: {exc!r}") from None
        return cls(sc, meta.get("mode", NORMALIZE), float(meta.get("enumerated_mass", 1.0)),
                   meta.get("threshold"))


def enumerate_scenarios(t: Topology, threshold: float = 1e-3,
                        mode: str = NORMALIZE) -> ScenarioSet:
    """All failure sets of probability >= ``threshold`` under independent failures.

    Depth-first over edges (exclude branch first); a branch is cut as soon as
    its partial product drops below the threshold, which is safe because the
    remaining factors are at most 1.
    """
    if not 0.0 < threshold < 1.0:
        raise ValidationError(f"threshold must be in (0, 1), got {threshold}")
    if mode not in (NORMALIZE, RESIDUAL):
        raise ValidationError(f"mode must be {NORMALIZE!r} or {RESIDUAL!r}")
    p = []
    for e in t.edges:
        if e.fail_prob is None:
            raise ValidationError(f"edge {e.key} has no failure probability")
        p.append(e.fail_prob)
    m = len(p)
    found: list[tuple[tuple[int, ...], float]] = []
    stack: list[tuple[int, float, tuple[int, ...]]] = [(0, 1.0, ())]
    while stack:
        i, prod, failed = stack.pop()
        if prod < threshold:
            continue
        if i == m:
            found.append((failed, prod))
            continue
        # pushed last so it is explored first
        stack.append((i + 1, prod * p[i], failed + (i,)))
        stack.append((i + 1, prod * (1.0 - p[i]), failed))
    if not found:
        raise ValidationError(f"no failure scenario reaches probability {threshold}")
    found.sort(key=lambda f: (len(f[0]), f[0]))
    mass = math.fsum(pr for _, pr in found)
    keys = [e.key for e in t.edges]
    if mode == NORMALIZE:
        sc = [Scenario(tuple(keys[i] for i in f), pr / mass) for f, pr in found]
    else:
        sc = [Scenario(tuple(keys[i] for i in f), pr) for f, pr in found]
        rest = 1.0 - mass
        if rest > 0:
            sc.append(Scenario((), rest, residual=True))
    return ScenarioSet(tuple(sc), mode, mass, threshold)


# Reduction to a feasible set ----------------------------------------------------

@dataclass(frozen=True)
class TeIndex:
    """Where each routing variable lives in ``x``."""
    pairs: tuple[tuple[str, str], ...]
    demand: tuple[float, ...]
    tunnels: tuple[tuple[Path_, ...], ...]
    columns: tuple[tuple[int, ...], ...]
    alive: np.ndarray  # alive[col, q] = 1 when the tunnel survives scenario q


def _te_index(t: Topology, d: DemandMatrix, tun: TunnelSet, s: ScenarioSet) -> TeIndex:
    keys = {frozenset((e.u, e.v)): e.key for e in t.edges}
    known = set(keys.values())
    for sc in s.scenarios:
        bad = set(sc.failed) - known
        if bad:
            raise ValidationError(f"scenario names unknown links {sorted(bad)}")
    failed = [set(sc.failed) for sc in s.scenarios]
    pairs, dem, tuns, cols, alive = [], [], [], [], []
    col = 0
    for a, b, v in d.entries:
        paths = tun.for_pair(a, b)
        mine = []
        for path in paths:
            links = []
            for u, w in _path_edges(path):
                k = keys.get(frozenset((u, w)))
                if k is None:
                    raise ValidationError(f"tunnel {path} uses missing link {u}-{w}")
                links.append(k)
            alive.append([0.0 if sc.residual or f & set(links) else 1.0
                          for sc, f in zip(s.scenarios, failed)])
            mine.append(col)
            col += 1
        pairs.append((a, b))
        dem.append(v)
        tuns.append(paths)
        cols.append(tuple(mine))
    return TeIndex(tuple(pairs), tuple(dem), tuple(tuns), tuple(cols),
                   np.array(alive).reshape(col, len(s)))


def build_te_feasible_set(t: Topology, d: DemandMatrix, tun: TunnelSet,
                          s: ScenarioSet) -> tuple[FeasibleSet, TeIndex]:
    idx = _te_index(t, d, tun, s)
    k, n = idx.alive.shape[0], len(s)
    A_rows, B_rows, rhs = [], [], []

    def row(a=None, bq=None, c=0.0):
        ra, rb = np.zeros(k), np.zeros(n)
        for j, v in (a or {}).items():
            ra[j] += v
        for q, v in (bq or {}).items():
            rb[q] += v
        A_rows.append(ra)
        B_rows.append(rb)
        rhs.append(c)

    for q in range(n):
        for p, cols in enumerate(idx.columns):
            # -t_q - sum_alive X / d_p <= -1
            served = {j: -idx.alive[j, q] / idx.demand[p] for j in cols if idx.alive[j, q]}
            row(served, {q: -1.0}, -1.0)
    edge_cols: dict[str, list[int]] = {e.key: [] for e in t.edges}
    keys = {frozenset((e.u, e.v)): e.key for e in t.edges}
    for cols, paths in zip(idx.columns, idx.tunnels):
        for j, path in zip(cols, paths):
            for u, w in _path_edges(path):
                edge_cols[keys[frozenset((u, w))]].append(j)
    for e in t.edges:
        if edge_cols[e.key]:
            row({j: 1.0 for j in edge_cols[e.key]}, None, e.capacity)
    for j in range(k):
        row({j: -1.0})
    lower = np.array([1.0 if sc.residual else 0.0 for sc in s.scenarios])
    for q in range(n):
        row(None, {q: -1.0}, -lower[q])
        row(None, {q: 1.0}, 1.0)
    names = tuple(f"X[{a}>{b}#{i}]" for (a, b), cols in zip(idx.pairs, idx.columns)
                  for i, _ in enumerate(cols))
    fs = FeasibleSet(np.array(A_rows), np.array(B_rows), np.array(rhs), names,
                     t_lower=lower, t_upper=np.ones(n))
    return fs, idx


def scenario_losses(idx: TeIndex, x: Sequence[float]) -> np.ndarray:
    """Largest lost demand fraction per scenario for routing ``x`` (clipped to [0, 1])."""
    x = np.asarray(x, dtype=float)
    n = idx.alive.shape[1]
    loss = np.zeros(n)
    for p, cols in enumerate(idx.columns):
        served = x[list(cols)] @ idx.alive[list(cols)]
        loss = np.maximum(loss, 1.0 - served / idx.demand[p])
    return np.clip(loss, 0.0, 1.0)


# Synthetic topology ---------------------------------------------------------

def synthetic_topology(n_nodes: int = 12, n_edges: int = 38, seed: int = 0,
                       capacities: Sequence[float] = (10.0, 40.0, 100.0),
                       name: str | None = None) -> Topology:
    """Ring plus random chords: connected, every vertex of degree >= 2."""
    if n_nodes < 3 or not n_nodes <= n_edges <= n_nodes * (n_nodes - 1) // 2:
        raise ValidationError(f"cannot build {n_edges} edges on {n_nodes} nodes")
    rng = np.random.default_rng(seed)
    nodes = tuple(f"n{i}" for i in range(n_nodes))
    pairs = {frozenset((i, (i + 1) % n_nodes)) for i in range(n_nodes)}
    chords = [(i, j) for i in range(n_nodes) for j in range(i + 1, n_nodes)
              if frozenset((i, j)) not in pairs]
    pick = rng.choice(len(chords), size=n_edges - n_nodes, replace=False)
    ring = [(i, (i + 1) % n_nodes) for i in range(n_nodes)]
    links = ring + [chords[i] for i in sorted(pick)]
    caps = rng.choice(np.asarray(capacities, dtype=float), size=len(links))
    edges = tuple(Edge(nodes[min(a, b)], nodes[max(a, b)], float(c))
                  for (a, b), c in zip(links, caps))
    return Topology(nodes, edges, name or f"synthetic-{n_nodes}-{n_edges}-s{seed}")


def triangle(capacity: float = 10.0, fail_prob: float | None = None) -> Topology:
    e = [Edge("a", "b", capacity, fail_prob), Edge("b", "c", capacity, fail_prob),
         Edge("a", "c", capacity, fail_prob)]
    return Topology(("a", "b", "c"), tuple(e), "triangle")


# Pipeline -----------------------------------------------------------------------

@dataclass(frozen=True)
class CaseStudyConfig:
    gammas: tuple[float, ...] = (0.8, 0.9, 0.99)
    target_mlu: float = 0.6
    threshold: float = 1e-3
    seed: int = 0
    delta_primes: tuple[float, ...] = (0.007, 0.01)
    b: int = 10
    eps: float = 1e-6
    mode: str = NORMALIZE
    with_ip_true: bool = True
    weibull_shape: float = WEIBULL_SHAPE
    resample_failures: bool = False


@dataclass
class CaseStudy:
    topology: Topology
    demands: DemandMatrix
    tunnels: TunnelSet
    scenarios: ScenarioSet
    feasible_set: FeasibleSet
    index: TeIndex
    reports: list[EstimateReport] = field(default_factory=list)


def prepare_case(topology: Topology | str | Path, cfg: CaseStudyConfig = CaseStudyConfig(),
                 demands: DemandMatrix | None = None, tunnels: TunnelSet | None = None,
                 scenarios: ScenarioSet | None = None) -> CaseStudy:
    """Prune, assign failures, enumerate scenarios, build demands and tunnels.

    Edges that already carry a failure probability keep it unless
    ``cfg.resample_failures``; supplied artifacts replace the generated ones.
    """
    stage = tagged
    t = topology if isinstance(topology, Topology) else stage(
        "load", lambda: Topology.from_json(topology))
    t = stage("prune", lambda: prune_topology(t))
    if cfg.resample_failures or any(e.fail_prob is None for e in t.edges):
        drawn = stage("failures", lambda: sample_link_failures(t, cfg.seed, cfg.weibull_shape))
        if not cfg.resample_failures:
            drawn = Topology(t.nodes, tuple(
                e if e.fail_prob is not None else de for e, de in zip(t.edges, drawn.edges)),
                t.name)
        t = drawn
    s = scenarios or stage("scenarios", lambda: enumerate_scenarios(t, cfg.threshold, cfg.mode))
    d = (demands.restricted_to(t) if demands is not None
         else stage("demands", lambda: gen_demands_gravity(t, cfg.target_mlu, cfg.seed)))
    tun = tunnels or stage("tunnels", lambda: gen_tunnels(t, d.pairs()))
    fs, idx = stage("feasible set", lambda: build_te_feasible_set(t, d, tun, s))
    return CaseStudy(t, d, tun, s, fs, idx)


def estimate_case(case: CaseStudy, cfg: CaseStudyConfig = CaseStudyConfig()) -> list[EstimateReport]:
    """One report per gamma (big-M fixed to 1 since losses lie in [0, 1])."""
    ecfg = EstimatorConfig(delta_primes=tuple(cfg.delta_primes), b=cfg.b, eps=cfg.eps,
                           with_ip_true=cfg.with_ip_true, big_m=1.0)
    meta = {"seed": cfg.seed, "target_mlu": cfg.target_mlu, "threshold": cfg.threshold,
            "mode": cfg.mode, "weibull_shape": cfg.weibull_shape,
            "weibull_scale": weibull_scale(cfg.weibull_shape),
            "scenarios": len(case.scenarios), "enumerated_mass": case.scenarios.enumerated_mass,
            "nodes": len(case.topology.nodes), "edges": len(case.topology.edges),
            "pairs": len(case.demands), "tunnels": case.index.alive.shape[0]}
    reports = []
    for g in cfg.gammas:
        rep = tagged(f"estimate gamma={g}", lambda: estimate_var_min(
            case.feasible_set, case.scenarios.probs, g, ecfg, case.topology.name))
        rep.metadata.update(meta)
        reports.append(rep)
    case.reports = reports
    return reports


def run_case_study(topology: Topology | str | Path, cfg: CaseStudyConfig = CaseStudyConfig(),
                   demands: DemandMatrix | None = None, tunnels: TunnelSet | None = None,
                   scenarios: ScenarioSet | None = None) -> list[EstimateReport]:
    """Full pipeline; one report per gamma, labelled with the topology name."""
    return estimate_case(prepare_case(topology, cfg, demands, tunnels, scenarios), cfg)
