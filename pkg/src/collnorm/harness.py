"""Experiment orchestration: seeded trials, summaries, CSV/JSONL output."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from . import advice, finite, norms, toplevel
from .dist import ExplicitDistribution, exact_l2_sq, exact_l3_cube, exact_t
from .lowerbound import PerturbationEnsemble, deviation_rows, pair_and_reduce, PreconditionError, check_pairing
from .norms import IterationCapExceeded
from .oracle import BudgetExceeded, SampleOracle, derive_seed
from .params import Scaling, ScaleLike, as_scaling, check_unit
from .zoo import parse_dist_spec

OUTPUT_DIR_ENV = "COLLNORM_OUTPUT_DIR"

KINDS = ("estimate", "bench", "advice_check", "lowerbound", "zoo")

# statistical bands used by summaries and the acceptance suite
BANDS = {
    "mean_se": 3.0,          # |mean - exact| <= 3 standard errors
    "binomial_z": 2.326,     # one-sided 99% normal band on a frequency
}


def binomial_margin(p: float, n: int) -> float:
    """One-sided 99% normal-approximation margin for a frequency over n trials."""
    return BANDS["binomial_z"] * math.sqrt(p * (1 - p) / n)


def _l2(oracle, p):
    return toplevel.estimate_l2_top_level(oracle, p.eps, p.eta, p.scale)


ESTIMATORS: dict[str, tuple[Callable, str]] = {
    "top_level": (_l2, "l2"),
    "bc": (lambda o, p: norms.estimate_l2_bc(o, min(p.eps, 0.5), p.eta, p.scale), "l2"),
    "base": (lambda o, p: norms.estimate_l2_base(o, p.eps, p.eta, None, p.scale), "l2"),
    "moments": (lambda o, p: norms.estimate_l2_moments(o, p.eps, p.eta, p.scale), "l2"),
    "l3": (lambda o, p: norms.estimate_l3(o, p.eps, p.eta, p.scale), "l3"),
    "l3_amplified": (lambda o, p: norms.estimate_l3_amplified(o, p.eps, p.eta, p.scale), "l3"),
    "l3_magnitude": (lambda o, p: norms.estimate_l3_magnitude(o, p.eps, p.eta, p.scale), "l3"),
}

ADVICE: dict[str, Callable] = {
    "small": lambda o, p: advice.find_advice_small(o, p.eps, p.eta, p.scale),
    "medium": lambda o, p: advice.find_advice_medium(o, p.eps, p.eta, p.scale),
    "large": lambda o, p: finite.find_advice_large(o, p.eps, p.eta, p.scale),
    "direct": lambda o, p: advice.estimate_t_directly(o, p.eps, p.eta, p.scale),
}


def exact_functional(target: str, d: ExplicitDistribution) -> float:
    return {"l2": exact_l2_sq, "l3": exact_l3_cube, "t": exact_t}[target](d)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    dist: str = "uniform:n=16"
    eps: float = 0.25
    eta: float = 1 / 3
    scale: ScaleLike = 1.0
    trials: int = 1
    seed: int = 0
    out: str | None = None
    fmt: str = "csv"
    procedure: str = "top_level"
    cap: int | None = None
    sizes: tuple[int, ...] = (64, 256, 1024)
    timing: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.fmt not in ("csv", "jsonl"):
            raise ValueError("fmt must be csv or jsonl")
        check_unit("eps", self.eps)
        check_unit("eta", self.eta, 1 / 3)
        as_scaling(self.scale)
        if self.kind == "estimate" and self.procedure not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.procedure!r}")
        if self.kind == "advice_check" and self.procedure not in ADVICE:
            raise ValueError(f"unknown advice regime {self.procedure!r}")
        if self.kind not in ("zoo", "bench"):
            parse_dist_spec(self.dist)


@dataclass
class TrialRow:
    trial: int
    seed: int
    dist: str
    value: float | None
    samples: int
    branch: str
    status: str
    wall_time: float | None = None


def _row_fields(timing: bool) -> list[str]:
    names = [f.name for f in fields(TrialRow)]
    return names if timing else [n for n in names if n != "wall_time"]


@dataclass
class ExperimentResult:
    summary: dict
    rows: list = field(default_factory=list)
    path: Path | None = None


def _trial(args) -> TrialRow:
    kind, procedure, spec, eps, eta, scale, cap, index, seed = args
    d = parse_dist_spec(spec)
    oracle = SampleOracle(d, seed, cap)
    params = _P(eps, eta, scale)
    fn = ESTIMATORS[procedure][0] if kind in ("estimate", "bench") else ADVICE[procedure]
    t0 = time.perf_counter()
    try:
        rep = fn(oracle, params)
        value, branch, status = float(rep.value), rep.branch, "ok"
    except BudgetExceeded:
        value, branch, status = None, "", "budget_exceeded"
    except IterationCapExceeded:
        value, branch, status = None, "", "iteration_cap"
    return TrialRow(index, seed, spec, value, oracle.drawn, branch, status, time.perf_counter() - t0)


@dataclass(frozen=True)
class _P:
    eps: float
    eta: float
    scale: ScaleLike


def summarize(rows: list[TrialRow], exact: float | None = None, eps: float | None = None,
              dominance: bool = False) -> dict:
    """Mean, standard error, quantiles, median samples, and in-range frequency.

    In-range means value within (1 +- eps) exact, or value >= exact when
    ``dominance`` is set (advice checks).
    """
    ok = [r for r in rows if r.status == "ok"]
    vals = np.array([r.value for r in ok], dtype=float)
    out = {"trials": len(rows), "ok": len(ok)}
    if vals.size:
        out["mean"] = math.fsum(vals.tolist()) / vals.size
        out["se"] = float(np.std(vals, ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
        q = np.quantile(vals, [0.1, 0.5, 0.9])
        out["q10"], out["q50"], out["q90"] = (float(x) for x in q)
        out["median_samples"] = float(np.median([r.samples for r in ok]))
    if exact is not None:
        out["exact"] = exact
        if vals.size:
            hit = vals >= exact if dominance else np.abs(vals - exact) <= (eps or 0) * exact
            out["in_range"] = float(np.mean(hit))
    return out


def _seeds(master: int, n: int, *prefix: int) -> list[int]:
    return [derive_seed(master, *prefix, i) for i in range(n)]


def _run_trials(cfg: ExperimentConfig, spec: str, seeds: list[int], procedure: str) -> list[TrialRow]:
    args = [(cfg.kind, procedure, spec, cfg.eps, cfg.eta, cfg.scale, cfg.cap, i, s) for i, s in enumerate(seeds)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            return list(pool.map(_trial, args, chunksize=max(1, len(args) // (4 * cfg.jobs))))
    return [_trial(a) for a in args]


def default_output(kind: str, seed: int, fmt: str) -> Path | None:
    base = os.environ.get(OUTPUT_DIR_ENV)
    if not base:
        return None
    return Path(base) / f"{kind}-{seed}.{fmt}"


def write_rows(rows: list, path: Path, fmt: str, names: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if fmt == "csv":
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names)
            for r in rows:
                d = asdict(r)
                w.writerow(["" if d[n] is None else (repr(d[n]) if isinstance(d[n], float) else d[n]) for n in names])
        else:
            for r in rows:
                d = asdict(r)
                fh.write(json.dumps({n: d[n] for n in names}, sort_keys=False) + "\n")


def read_rows(path: str | Path, fmt: str | None = None) -> list[TrialRow]:
    """Load TrialRows written by ``write_rows``."""
    path = Path(path)
    fmt = fmt or ("jsonl" if path.suffix == ".jsonl" else "csv")
    rows = []
    with open(path, newline="") as fh:
        if fmt == "csv":
            for d in csv.DictReader(fh):
                rows.append(TrialRow(int(d["trial"]), int(d["seed"]), d["dist"],
                                     float(d["value"]) if d["value"] else None, int(d["samples"]),
                                     d["branch"], d["status"],
                                     float(d["wall_time"]) if d.get("wall_time") else None))
        else:
            for line in fh:
                d = json.loads(line)
                d.setdefault("wall_time", None)
                rows.append(TrialRow(**d))
    return rows


def _write_summary(path: Path, summary: dict) -> None:
    with open(str(path) + ".summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run all trials of an experiment; per-trial seeds are derived from (seed, index)."""
    path = Path(cfg.out) if cfg.out else default_output(cfg.kind, cfg.seed, cfg.fmt)
    if cfg.kind == "zoo":
        from .zoo import zoo_doc, zoo_names
        return ExperimentResult({"families": [zoo_doc(n) for n in zoo_names()]})
    if cfg.kind == "lowerbound":
        return _run_lowerbound(cfg, path)
    if cfg.kind == "bench":
        rows, per = [], {}
        for j, n in enumerate(cfg.sizes):
            spec = f"uniform:n={n}"
            block = _run_trials(cfg, spec, _seeds(cfg.seed, cfg.trials, j), cfg.procedure)
            per[spec] = summarize(block, exact_l2_sq(parse_dist_spec(spec)), cfg.eps)
            rows.extend(block)
        summary = {"kind": "bench", "by_dist": per}
    else:
        d = parse_dist_spec(cfg.dist)
        seeds = _seeds(cfg.seed, cfg.trials)
        rows = _run_trials(cfg, cfg.dist, seeds, cfg.procedure)
        if cfg.kind == "estimate":
            summary = summarize(rows, exact_functional(ESTIMATORS[cfg.procedure][1], d), cfg.eps)
        else:
            summary = summarize(rows, exact_t(d), dominance=True)
        summary["kind"] = cfg.kind
    if path is not None:
        write_rows(rows, path, cfg.fmt, _row_fields(cfg.timing))
        _write_summary(path, summary)
    return ExperimentResult(summary, rows, path)


def _lowerbound_ensemble(d: ExplicitDistribution, eps: float) -> tuple[PerturbationEnsemble, str]:
    try:
        check_pairing(d)
        return PerturbationEnsemble(d, eps), "direct"
    except PreconditionError:
        red = pair_and_reduce(d)
        return PerturbationEnsemble(red.base, eps), "reduced"


def _run_lowerbound(cfg: ExperimentConfig, path: Path | None) -> ExperimentResult:
    d = parse_dist_spec(cfg.dist)
    ens, how = _lowerbound_ensemble(d, cfg.eps)
    rows = deviation_rows(ens, cfg.trials, cfg.seed)
    frac = sum(r.deviates for r in rows) / len(rows)
    summary = {"kind": "lowerbound", "lam": ens.lam, "pairs": ens.pairs, "construction": how,
               "deviation_fraction": frac, "trials": len(rows), "l2_base": exact_l2_sq(ens.base)}
    if path is not None:
        write_rows(rows, path, cfg.fmt, ["trial", "seed", "lam", "l2_nu", "deviates"])
        _write_summary(path, summary)
    return ExperimentResult(summary, rows, path)
