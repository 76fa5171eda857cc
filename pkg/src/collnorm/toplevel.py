"""Magnitude test and the top-level unbiased collision-norm estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import advice, finite, norms
from .params import EstimateReport, Meter, ScaleLike, TraceEntry, check_unit
from .primitives import amplification_count

ROUND_ACCURACY = 0.25
ROUND_ETA = 0.25


@dataclass
class MagnitudeVerdict:
    accept: bool
    samples: int
    trace: list[TraceEntry] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.accept


def markov_budget(eps: float, scale: ScaleLike = 1.0) -> int:
    """Q: draws one truncated round is expected to need when ||mu||_2 >= 2 eps.

    A BC copy stopping at k collisions needs about sqrt(2k)/||mu||_2 draws.
    """
    k = norms._bc_k(ROUND_ACCURACY, scale)
    return amplification_count(ROUND_ETA) * (math.ceil(math.sqrt(2 * k) / (2 * eps)) + 1)


def test_l2_magnitude(oracle, eps: float, eta: float, scale: ScaleLike = 1.0) -> MagnitudeVerdict:
    """Accept when ||mu||_2 <= eps, reject when ||mu||_2 >= 2 eps (each w.p. >= 1 - eta).

    Acceptance is cheap in the small case: a first BC estimate usually settles
    it. Otherwise R truncated BC rounds vote, each capped at 12Q draws.
    """
    check_unit("eps", eps)
    check_unit("eta", eta, 1 / 3)
    eps = min(eps, 0.25)
    meter = Meter(oracle)
    l1 = norms.estimate_l2_bc(oracle, 0.25, eta / 2, scale).value
    meter.mark("estimate_l2_bc", "first")
    if math.sqrt(l1) <= 1.5 * eps:
        return MagnitudeVerdict(True, meter.total, meter.trace, {"l1": l1})
    l2 = norms.estimate_l2_moments(oracle, 0.25, 0.5, scale).value
    meter.mark("estimate_l2_moments")
    rounds = math.ceil(18 * math.log(2 / (min(1.0, l2) * eta)))
    limit = 12 * markov_budget(eps, scale)
    votes = 0
    for _ in range(rounds):
        est = norms.bc_truncated(oracle, ROUND_ACCURACY, ROUND_ETA, limit, scale)
        if est is not None and math.sqrt(est) >= 1.5 * eps:
            votes += 1
    meter.mark("rounds", f"R={rounds},votes={votes}")
    accept = votes < rounds // 2
    return MagnitudeVerdict(accept, meter.total, meter.trace,
                            {"l1": l1, "l2": l2, "rounds": rounds, "votes": votes, "limit": limit})


def select_branch(ell: float, eps: float) -> str:
    """Branch by the rough norm estimate alone (before the magnitude test)."""
    root = math.sqrt(ell)
    if root <= 4 * eps:
        return "small"
    if root <= 2 * eps ** (2 / 3):
        return "medium"
    return "large"


def estimate_l2_top_level(oracle, eps: float, eta: float, scale: ScaleLike = 1.0,
                          advice_scale: ScaleLike | None = None) -> EstimateReport:
    """Unbiased (1 +- eps)-estimate of ||mu||_2^2 with instance-optimal sample use.

    An advice r >= t is found by the branch matching the rough norm, then the
    base estimator runs with it. ``advice_scale`` (default: ``scale``) sets the
    constants of the advice stage separately from the rough estimate and the
    final base call.
    """
    check_unit("eps", eps)
    check_unit("eta", eta, 1 / 3)
    ascale = scale if advice_scale is None else advice_scale
    meter = Meter(oracle)
    ell = norms.estimate_l2_bc(oracle, 0.25, min(eps ** 2, eta / 4), scale).value
    meter.mark("estimate_l2_bc", "ell")
    root = math.sqrt(ell)
    if root <= 4 * eps:
        branch = "small"
        r = advice.find_advice_small(oracle, eps, eta / 4, ascale).r
        meter.mark("find_advice_small", branch)
    else:
        verdict = test_l2_magnitude(oracle, eps, eta / 4, ascale)
        meter.mark("test_l2_magnitude", "accept" if verdict.accept else "reject")
        if verdict.accept:
            branch, r = "zero", 0.0
        elif root <= 2 * eps ** (2 / 3):
            branch = "medium"
            r = advice.find_advice_medium(oracle, eps, eta / 4, ascale).r
            meter.mark("find_advice_medium", branch)
        else:
            branch = "large"
            r = finite.find_advice_large(oracle, eps, eta / 4, ascale).r
            meter.mark("find_advice_large", branch)
    final = norms.estimate_l2_base(oracle, eps, eta / 4, r, scale)
    meter.mark("estimate_l2_base", "final")
    return EstimateReport(final.value, meter.total, meter.trace, branch=branch,
                          info={"ell": ell, "r": r, "m": final.info["m"]})
test_l2_magnitude.__test__ = False
