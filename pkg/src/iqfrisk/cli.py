"""Command-line entry point.

Subcommands::

    risk eval       slice expectation, VaR and CVaR of a distribution CSV
    risk alpha-star threshold level below gamma with no quantile jump
    estimate        every VaR estimator on a feasible-set JSON
    te synth        write a seeded synthetic topology
    te gen          write pruned topology, demands, tunnels, scenarios, feasible set
    te run          full traffic-engineering pipeline, one report per gamma

Exit status is 0 on success, 2 on bad input (including unknown flags) and 1
when a solver fails. Output is CSV unless ``--format json``; CSV output starts
with ``# key=value`` lines echoing every numeric setting.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import nette
from .distribution import DiscreteDistribution
from .errors import SolverError, ValidationError
from .estimators import EstimatorConfig, estimate_var_min, reports_to_csv
from .model import FeasibleSet
from .threshold import alpha_star

log = logging.getLogger("iqfrisk")

DEFAULT_DELTAS = (0.007, 0.01)
DEFAULT_GAMMAS = (0.8, 0.9, 0.99)


# Output helpers -----------------------------------------------------------------

def _num(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def _meta_lines(meta: dict) -> str:
    return "".join(f"# {k}={_json_scalar(v)}\n" for k, v in meta.items())


def _json_scalar(v) -> str:
    return v if isinstance(v, str) else json.dumps(v)


def _kv_csv(meta: dict, rows: Sequence[tuple[str, object]]) -> str:
    body = "quantity,value\n" + "".join(f"{k},{_num(v)}\n" for k, v in rows)
    return _meta_lines(meta) + body


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _reports_text(reports, fmt: str, meta: dict) -> str:
    if fmt == "json":
        doc = {"metadata": meta, "reports": [r.to_dict() for r in reports]}
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"
    return _meta_lines(meta) + reports_to_csv(reports)


# Subcommands --------------------------------------------------------------------

def cmd_risk_eval(a) -> int:
    d = DiscreteDistribution.from_csv(a.dist)
    rows = [("E", d.expectation_slice(a.alpha, a.gamma)), ("VaR", d.var(a.gamma)),
            ("CVaR", d.cvar(a.alpha))]
    meta = {"command": "risk eval", "alpha": a.alpha, "gamma": a.gamma, "atoms": len(d)}
    if a.format == "json":
        _emit(json.dumps({"metadata": meta, **dict(rows)}, indent=1, sort_keys=True) + "\n", a.out)
    else:
        _emit(_kv_csv(meta, rows), a.out)
    return 0


def cmd_risk_alpha_star(a) -> int:
    d = DiscreteDistribution.from_csv(a.dist)
    cert = alpha_star(d.probs, a.gamma, a.b)
    meta = {"command": "risk alpha-star", "gamma": a.gamma, "b": a.b, "atoms": len(d)}
    rows = [("alpha_star", cert.alpha_star), ("o_star", cert.o_star), ("steps", len(cert.steps))]
    if a.format == "json":
        doc = {"metadata": meta, **dict(rows), "eta_star": cert.eta_star.astype(int).tolist()}
        _emit(json.dumps(doc, indent=1, sort_keys=True) + "\n", a.out)
    else:
        _emit(_kv_csv(meta, rows), a.out)
    return 0


def _estimator_cfg(a) -> EstimatorConfig:
    return EstimatorConfig(delta_primes=tuple(a.delta_prime or DEFAULT_DELTAS), b=a.b,
                           eps=a.eps, with_ip_true=a.ip, big_m=a.big_m)


def cmd_estimate(a) -> int:
    fs, probs = FeasibleSet.from_json(a.feasible)
    if probs is None:
        raise ValidationError(f"{a.feasible} has no 'probs' entry")
    cfg = _estimator_cfg(a)
    label = a.label or Path(a.feasible).stem
    reports = [estimate_var_min(fs, probs, g, cfg, label) for g in a.gamma]
    meta = {"command": "estimate", "feasible": Path(a.feasible).name,
            "gamma": list(a.gamma), "delta_prime": list(cfg.delta_primes), "b": cfg.b,
            "eps": cfg.eps, "ip": cfg.with_ip_true, "big_m": cfg.big_m}
    _emit(_reports_text(reports, a.format, meta), a.out)
    return 0


def _case_cfg(a) -> nette.CaseStudyConfig:
    return nette.CaseStudyConfig(
        gammas=tuple(getattr(a, "gamma", None) or DEFAULT_GAMMAS), target_mlu=a.target_mlu,
        threshold=a.prob_threshold, seed=a.seed,
        delta_primes=tuple(getattr(a, "delta_prime", None) or DEFAULT_DELTAS),
        b=getattr(a, "b", 10), eps=getattr(a, "eps", 1e-6), mode=a.mode,
        with_ip_true=getattr(a, "ip", False), resample_failures=a.resample_failures)


def _topology(a) -> nette.Topology:
    if a.topology:
        return nette.Topology.from_json(a.topology)
    return nette.synthetic_topology(a.nodes, a.edges, a.seed)


def _optional(loader, path):
    return None if path is None else loader(path)


def cmd_te_synth(a) -> int:
    _emit(nette.synthetic_topology(a.nodes, a.edges, a.seed).to_json() + "\n", a.out)
    return 0


def cmd_te_gen(a) -> int:
    cfg = _case_cfg(a)
    case = nette.prepare_case(_topology(a), cfg)
    out = Path(a.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "topology.json": case.topology.to_json() + "\n",
        "demands.csv": case.demands.to_csv(),
        "tunnels.json": case.tunnels.to_json() + "\n",
        "scenarios.json": case.scenarios.to_json() + "\n",
        "feasible.json": case.feasible_set.to_json(case.scenarios.probs) + "\n",
    }
    for name, text in files.items():
        (out / name).write_text(text)
    meta = {"command": "te gen", "seed": cfg.seed, "target_mlu": cfg.target_mlu,
            "prob_threshold": cfg.threshold, "mode": cfg.mode,
            "scenarios": len(case.scenarios), "pairs": len(case.demands)}
    sys.stdout.write(_meta_lines(meta) + "".join(f"{out / n}\n" for n in files))
    return 0


def cmd_te_run(a) -> int:
    cfg = _case_cfg(a)
    reports = nette.run_case_study(
        _topology(a), cfg,
        demands=_optional(nette.DemandMatrix.from_csv, a.demands),
        tunnels=_optional(nette.TunnelSet.from_json, a.tunnels),
        scenarios=_optional(nette.ScenarioSet.from_json, a.scenarios))
    meta = {"command": "te run", "topology": Path(a.topology).name if a.topology else
            f"synthetic({a.nodes},{a.edges})", "seed": cfg.seed, "gamma": list(cfg.gammas),
            "delta_prime": list(cfg.delta_primes), "b": cfg.b, "eps": cfg.eps,
            "prob_threshold": cfg.threshold, "target_mlu": cfg.target_mlu, "mode": cfg.mode,
            "ip": cfg.with_ip_true}
    _emit(_reports_text(reports, a.format, meta), a.out)
    return 0


# Parser ---------------------------------------------------------------------------

def _unit(name: str):
    def parse(s: str) -> float:
        v = float(s)
        if not 0.0 <= v <= 1.0:
            raise argparse.ArgumentTypeError(f"{name} must lie in [0, 1], got {s}")
        return v
    return parse


def _positive(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="write the result here instead of stdout")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def _estimator_flags(p: argparse.ArgumentParser, gamma_required: bool) -> None:
    p.add_argument("--gamma", type=_unit("gamma"), action="append", required=gamma_required,
                   help="VaR level; repeat for several")
    p.add_argument("--delta-prime", type=_positive, action="append",
                   help="upper-level offset for alternating minimization; repeatable "
                        f"(default {' '.join(map(str, DEFAULT_DELTAS))})")
    p.add_argument("--b", type=int, default=10, help="threshold search base")
    p.add_argument("--eps", type=_positive, default=1e-6, help="alternating-minimization tolerance")
    p.add_argument("--ip", action="store_true", help="also solve the exact VaR integer program")


def _te_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--topology", help="topology JSON (default: seeded synthetic)")
    p.add_argument("--nodes", type=int, default=12, help="synthetic node count")
    p.add_argument("--edges", type=int, default=38, help="synthetic edge count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prob-threshold", type=_unit("prob-threshold"), default=1e-3)
    p.add_argument("--target-mlu", type=_positive, default=0.6)
    p.add_argument("--mode", choices=(nette.NORMALIZE, nette.RESIDUAL), default=nette.NORMALIZE)
    p.add_argument("--resample-failures", action="store_true",
                   help="redraw failure probabilities even where the topology has them")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="iqfrisk", description="Quantile-slice risk tools.")
    sub = ap.add_subparsers(dest="command", required=True)

    risk = sub.add_parser("risk", help="risk measures of one distribution")
    rsub = risk.add_subparsers(dest="risk_command", required=True)
    ev = rsub.add_parser("eval", help="E over (alpha, gamma], VaR_gamma and CVaR_alpha")
    ev.add_argument("--dist", required=True, help="CSV with columns value,prob")
    ev.add_argument("--alpha", type=_unit("alpha"), required=True)
    ev.add_argument("--gamma", type=_unit("gamma"), required=True)
    _common(ev)
    ev.set_defaults(func=cmd_risk_eval)
    st = rsub.add_parser("alpha-star", help="threshold level for gamma")
    st.add_argument("--dist", required=True, help="CSV with columns value,prob")
    st.add_argument("--gamma", type=_unit("gamma"), required=True)
    st.add_argument("--b", type=int, default=10)
    _common(st)
    st.set_defaults(func=cmd_risk_alpha_star)

    est = sub.add_parser("estimate", help="VaR estimators on a feasible-set JSON")
    est.add_argument("--feasible", required=True, help="JSON with A, B, c and probs")
    est.add_argument("--big-m", type=_positive, help="loss bound for the integer program")
    est.add_argument("--label", help="row label (default: file stem)")
    _estimator_flags(est, gamma_required=True)
    _common(est)
    est.set_defaults(func=cmd_estimate)

    te = sub.add_parser("te", help="traffic engineering under link failures")
    tsub = te.add_subparsers(dest="te_command", required=True)
    sy = tsub.add_parser("synth", help="write a seeded synthetic topology JSON")
    sy.add_argument("--nodes", type=int, default=12)
    sy.add_argument("--edges", type=int, default=38)
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--out")
    sy.add_argument("-v", "--verbose", action="store_true")
    sy.set_defaults(func=cmd_te_synth)
    gen = tsub.add_parser("gen", help="write demands, tunnels, scenarios and feasible set")
    _te_flags(gen)
    gen.add_argument("--out", help="output directory (default: current)")
    gen.add_argument("-v", "--verbose", action="store_true")
    gen.set_defaults(func=cmd_te_gen)
    run = tsub.add_parser("run", help="estimators for each gamma")
    _te_flags(run)
    run.add_argument("--demands", help="demand CSV from 'te gen'")
    run.add_argument("--tunnels", help="tunnel JSON from 'te gen'")
    run.add_argument("--scenarios", help="scenario JSON from 'te gen'")
    _estimator_flags(run, gamma_required=False)
    _common(run)
    run.set_defaults(func=cmd_te_run)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
