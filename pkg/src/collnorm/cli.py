"""Command-line entry point: ``collnorm <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys

from . import harness
from .dist import exact_l2_sq, exact_l3_cube, exact_t
from .oracle import BudgetExceeded, SampleOracle
from .params import Scaling
from .zoo import InvalidDistribution, parse_dist_spec, zoo_doc, zoo_names


def _scaling(ns) -> Scaling:
    return Scaling(ns.scale, ns.max_samples, ns.max_collisions)


def _common(p: argparse.ArgumentParser, dist: bool = True) -> None:
    if dist:
        p.add_argument("--dist", required=True, help="name:key=value,... or @file.csv")
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--eta", type=float, default=1 / 3)
    p.add_argument("--scale", type=float, default=1.0, help="multiplier on the sample-count constants")
    p.add_argument("--max-samples", type=int, default=None, help="ceiling on fixed sample counts")
    p.add_argument("--max-collisions", type=int, default=None, help="ceiling on the collision target")
    p.add_argument("--cap", type=int, default=None, help="per-trial sample budget")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--out", default=None, help=f"output file (default dir: ${harness.OUTPUT_DIR_ENV})")
    p.add_argument("--format", dest="fmt", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--timing", action="store_true", help="record per-trial wall time")
    p.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="collnorm", description="Collision-norm estimation from samples")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("estimate", help="run an estimator on a distribution")
    _common(p)
    p.add_argument("--estimator", default="top_level", choices=sorted(harness.ESTIMATORS))
    p.add_argument("--json", action="store_true", help="print a JSON object")

    p = sub.add_parser("bench", help="sample-count sweep over uniform(N)")
    _common(p, dist=False)
    p.add_argument("--sizes", default="64,256,1024")
    p.add_argument("--estimator", default="top_level", choices=sorted(harness.ESTIMATORS))

    p = sub.add_parser("advice-check", help="how often an advice finder dominates t")
    _common(p)
    p.add_argument("--regime", default="small", choices=sorted(harness.ADVICE))

    p = sub.add_parser("lowerbound", help="norm-deviation draws from the hard-instance ensemble")
    p.add_argument("--dist", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--format", dest="fmt", choices=("csv", "jsonl"), default="csv")

    p = sub.add_parser("zoo", help="distribution families")
    p.add_argument("action", choices=("list",))
    return ap


def _single(ns) -> int:
    d = parse_dist_spec(ns.dist)
    fn, target = harness.ESTIMATORS[ns.estimator]
    oracle = SampleOracle(d, ns.seed, ns.cap)
    try:
        rep = fn(oracle, harness._P(ns.eps, ns.eta, _scaling(ns)))
    except BudgetExceeded as exc:
        print(f"budget exceeded after {oracle.drawn} samples: {exc}", file=sys.stderr)
        return 3
    exact = {"l2": exact_l2_sq, "l3": exact_l3_cube}[target](d)
    out = {"value": rep.value, "samples": rep.samples, "branch": rep.branch, "exact": exact,
           "t": exact_t(d), "trace": [list(e) for e in rep.trace]}
    if ns.json:
        print(json.dumps(out))
    else:
        print(f"value    {rep.value:.10g}\nexact    {exact:.10g}\nsamples  {rep.samples}\nbranch   {rep.branch or '-'}")
    return 0


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        if ns.cmd == "zoo":
            for name in zoo_names():
                print(zoo_doc(name))
            return 0
        if ns.cmd == "estimate" and ns.trials == 1 and ns.out is None:
            return _single(ns)
        kind = {"estimate": "estimate", "bench": "bench", "advice-check": "advice_check", "lowerbound": "lowerbound"}[ns.cmd]
        kw = dict(kind=kind, eps=ns.eps, trials=ns.trials, seed=ns.seed, out=ns.out, fmt=ns.fmt)
        if kind == "lowerbound":
            kw["dist"] = ns.dist
        else:
            kw.update(eta=ns.eta, scale=_scaling(ns), cap=ns.cap, timing=ns.timing, jobs=ns.jobs)
            if kind == "bench":
                kw.update(sizes=tuple(int(x) for x in ns.sizes.split(",")), procedure=ns.estimator)
            else:
                kw.update(dist=ns.dist, procedure=ns.estimator if kind == "estimate" else ns.regime)
        res = harness.run_experiment(harness.ExperimentConfig(**kw))
    except (InvalidDistribution, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(res.summary, indent=2, sort_keys=True))
    if res.path is not None:
        print(f"rows written to {res.path}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
