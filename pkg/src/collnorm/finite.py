"""Finite-domain tools: friendliness, sum-of-squares and large-cube estimates,
good partitions, and the advice finder for large collision norms."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

from . import advice, norms, primitives
from .dist import ExplicitDistribution, delta_vector, exact_l2_sq
from .oracle import Tally
from .params import AdviceReport, EstimateReport, Meter, ScaleLike, as_scaling, check_unit


class NotFriendly(ValueError):
    pass


def is_friendly(d: ExplicitDistribution) -> bool:
    """Every mass is at least 7/(13N)."""
    return bool(np.all(d.masses >= 7 / (13 * d.n)))


def t_friendly_lower_bound(d: ExplicitDistribution) -> float:
    """(1/(90 (N ||mu||^2)^2)) (1/N)(sum delta^2 + sum_{delta >= 1} delta^3), a lower bound on t."""
    if not is_friendly(d):
        raise NotFriendly("distribution is not friendly")
    n = d.n
    delta = delta_vector(d)
    big = delta[delta >= 1]
    s = math.fsum((delta * delta).tolist()) + math.fsum((big ** 3).tolist())
    return s / n / (90 * (n * exact_l2_sq(d)) ** 2)


def estimate_sum_squares(oracle, n: int, eps: float, eta: float, scale: ScaleLike = 1.0) -> EstimateReport:
    """Upper estimate of (1/N) sum delta_i^2 = N ||mu||^2 - 1 with additive resolution eps.

    Halves the resolution until the collision norm can no longer be told
    apart from 1/N, feeding each round the advice eps_{i-1} sqrt(N).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    check_unit("eps", eps, 1.0, closed=False)
    check_unit("eta", eta, 1.0, closed=False)
    meter = Meter(oracle)
    k = math.ceil(math.log2(1 / eps)) + 2
    eps_prev = 1.0
    p_prev = norms.estimate_l2_bc(oracle, eps_prev / 12, 3.0 ** (-k) * eta / (32 * n), scale).value
    meter.mark("estimate_l2_bc", "p0")
    if p_prev >= 1.25 / n:
        p = norms.estimate_l2_bc(oracle, 1 / 12, min(eta / 2, eps), scale).value
        meter.mark("estimate_l2_bc", "far")
        return EstimateReport(max(0.0, 3 * (n * p - 1)), meter.total, meter.trace, branch="far", info={"k": k})
    schedule = []
    for i in range(1, k + 1):
        eps_i = eps_prev / 2
        if p_prev < (1 + eps_prev / 2) / n:
            t_i = eps_prev * math.sqrt(n)
            schedule.append((eps_i, t_i))
            p_prev = norms.estimate_l2_base(oracle, eps_i / 12, 3.0 ** (i - k) * eta / 32, t_i, scale).value
            meter.mark("estimate_l2_base", f"i={i}")
        else:
            return EstimateReport(2 * eps_prev, meter.total, meter.trace, branch=f"stop@{i}",
                                  info={"k": k, "schedule": schedule})
        eps_prev = eps_i
    return EstimateReport(2 * eps_prev, meter.total, meter.trace, branch="exhausted",
                          info={"k": k, "schedule": schedule})


def sum_cubes_sample_count(n: int, eta: float, scale: ScaleLike = 1.0) -> int:
    return as_scaling(scale).samples(1000 * n * math.log(n ** 4 / eta), 1)


def estimate_sum_cubes(oracle, n: int, eta: float, scale: ScaleLike = 1.0) -> EstimateReport:
    """(8/N) sum of delta_hat^3 over empirically large elements (delta_hat >= 1/2)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    check_unit("eta", eta, 1.0, closed=False)
    meter = Meter(oracle)
    q = sum_cubes_sample_count(n, eta, scale)
    t = Tally()
    left = q
    while left:
        chunk = oracle.peek(min(left, 1 << 20))
        t.ingest(chunk)
        oracle.consume(chunk.size)
        left -= chunk.size
    counts = np.fromiter(t.counts().values(), dtype=np.float64)
    dhat = n * counts / q - 1
    big = dhat[dhat >= 0.5]
    meter.mark("learn", f"q={q}")
    return EstimateReport(8 / n * math.fsum((big ** 3).tolist()), meter.total, meter.trace, info={"q": q})


def estimate_t_friendly(oracle, n: int, eps: float, eta: float, scale: ScaleLike = 1.0) -> AdviceReport:
    """Advice for friendly distributions: min{360 (a + b) / (N l2)^2, sqrt N}."""
    check_unit("eps", eps, 1.0, closed=False)
    check_unit("eta", eta, 1.0, closed=False)
    meter = Meter(oracle)
    l2 = norms.estimate_l2_bc(oracle, 0.5, eta / 3, scale).value
    meter.mark("estimate_l2_bc")
    a = estimate_sum_squares(oracle, n, eps, eta / 3, scale).value
    meter.mark("estimate_sum_squares")
    b = estimate_sum_cubes(oracle, n, min(eta / 3, eps), scale).value
    meter.mark("estimate_sum_cubes")
    r = min(360 * (a + b) / (n * l2) ** 2, math.sqrt(n))
    return AdviceReport(r, meter.total, meter.trace, info={"l2": l2, "a": a, "b": b})


@dataclass(frozen=True)
class Partition:
    """Explicit heavy set A; B is everything else."""

    a_members: frozenset
    ell: float | None = None

    @property
    def cut(self) -> float | None:
        return None if self.ell is None else 0.6 * self.ell

    def in_a(self, labels) -> np.ndarray:
        return np.isin(np.asarray(labels, dtype=np.int64), np.fromiter(self.a_members, dtype=np.int64))

    def in_b(self, labels) -> np.ndarray:
        return ~self.in_a(labels)


def is_good_partition(d: ExplicitDistribution, p: Partition) -> bool:
    """A only above (11/20)||mu||^2, B only below (2/3)||mu||^2 (exact masses)."""
    l2 = exact_l2_sq(d)
    in_a = p.in_a(d.labels)
    extra = set(p.a_members) - set(d.labels.tolist())
    if extra:
        return False
    return bool(np.all(d.masses[in_a] > 11 / 20 * l2) and np.all(d.masses[~in_a] < 2 / 3 * l2))


def exact_good_partition(d: ExplicitDistribution) -> Partition:
    """A = labels with mass above (3/5)||mu||^2."""
    l2 = exact_l2_sq(d)
    return Partition(frozenset(d.labels[d.masses > 0.6 * l2].tolist()), l2)


def _learn_partition(oracle, ell: float, eps: float, eta: float, scale: ScaleLike) -> tuple[Partition, int]:
    ell = max(ell, sys.float_info.epsilon)
    q = as_scaling(scale).samples(1e4 * math.log(100 / (eta * eps * ell)) / ell, 1)
    t = Tally()
    left = q
    while left:
        chunk = oracle.peek(min(left, 1 << 20))
        t.ingest(chunk)
        oracle.consume(chunk.size)
        left -= chunk.size
    heavy = [x for x, c in t.counts().items() if c / q > 0.6 * ell]
    return Partition(frozenset(heavy), ell), q


def find_advice_large(oracle, eps: float, eta: float, scale: ScaleLike = 1.0) -> AdviceReport:
    """Advice for large norms.

    If t is visibly above 1/900 the direct estimate is returned. Otherwise the
    heavy elements A are learned; mu_A is then friendly, and the advice is
    r_A + 5(r_B + eps) with r_A the friendly estimate on mu_A and r_B the mass
    outside A. A crash of the rejection sampler yields 0.
    """
    check_unit("eps", eps, 1.0, closed=False)
    check_unit("eta", eta, 1 / 3)
    meter = Meter(oracle)
    t1 = advice.estimate_t_directly(oracle, 1e-4, min(eta / 10, eps), scale).r
    meter.mark("estimate_t_directly", "probe")
    if t1 >= 1 / 900:
        r = advice.estimate_t_directly(oracle, 1e-4, eta / 10, scale).r
        meter.mark("estimate_t_directly", "direct")
        return AdviceReport(r, meter.total, meter.trace, branch="direct", info={"t1": t1})
    ell = norms.estimate_l2_bc(oracle, 1 / 100, min(eta / 10, eps), scale).value
    meter.mark("estimate_l2_bc")
    part, q = _learn_partition(oracle, ell, eps, eta, scale)
    meter.mark("learn_partition", f"q={q},|A|={len(part.a_members)}")
    ind = primitives.IndicatorOracle(oracle, part.in_b)
    r_b = primitives.estimate_indicator_additive(ind, eps, eta / 10).value
    meter.mark("estimate_indicator_additive")
    info = {"t1": t1, "ell": ell, "a_size": len(part.a_members), "r_b": r_b}
    cond = primitives.ConditionalOracle(oracle, part.in_a, eta / 10)
    try:
        if not part.a_members:
            cond.peek(1)
        r_a = estimate_t_friendly(cond, len(part.a_members), eps, eta / 10, scale).r
    except primitives.RejectionCrash:
        meter.mark("estimate_t_friendly", "crash")
        return AdviceReport(0.0, meter.total, meter.trace, branch="crash", info=info)
    meter.mark("estimate_t_friendly")
    info["r_a"] = r_a
    return AdviceReport(r_a + 5 * (r_b + eps), meter.total, meter.trace, branch="partition", info=info)
