"""Collision-norm (L2) and three-way (L3) estimators."""

from __future__ import annotations

import math
from typing import Optional

from .oracle import count_fixed, stopping_times
from .params import EstimateReport, Meter, ScaleLike, as_scaling, check_unit
from .primitives import amplification_count, amplify_median, lower_median

L2Advice = Optional[float]


class IterationCapExceeded(RuntimeError):
    """The moment-matching loop ran past its iteration cap."""


def _check_eta(eta: float) -> None:
    check_unit("eta", eta, 1.0, closed=False)


def _bc_k(eps: float, scale: ScaleLike) -> int:
    return as_scaling(scale).collisions(1e6 / eps ** 4)


def _bc_values(oracle, k: int, copies: int, limit: int | None = None) -> list[float] | None:
    ms = stopping_times(oracle, k, copies, limit)
    return None if ms is None else [k / math.comb(m, 2) for m in ms]


def estimate_l2_bc(oracle, eps: float, eta: float, scale: ScaleLike = 1.0) -> EstimateReport:
    """Stop-at-k-collisions estimate k / C(M, 2), median-amplified for eta < 1/3.

    k = ceil(scale 10^6 / eps^4). Biased, but keeps negative moments bounded.
    """
    check_unit("eps", eps, 0.5)
    _check_eta(eta)
    meter = Meter(oracle)
    k = _bc_k(eps, scale)
    q = amplification_count(eta)
    # the q copies of the amplification run back to back on the stream
    value = lower_median(_bc_values(oracle, k, q))
    meter.mark("estimate_l2_bc", f"k={k}")
    return EstimateReport(value, meter.total, meter.trace, info={"k": k, "copies": q})


def bc_truncated(oracle, eps: float, eta: float, limit: int, scale: ScaleLike = 1.0) -> float | None:
    """Amplified BC estimate that gives up (returns None) after ``limit`` draws in total."""
    values = _bc_values(oracle, _bc_k(eps, scale), amplification_count(eta), limit)
    return None if values is None else lower_median(values)


def base_sample_count(eps: float, eta: float, ell: float, r: float, scale: ScaleLike = 1.0) -> int:
    """m = ceil((1/sqrt eta) max{10^3/(sqrt eta eps sqrt ell), 10^6 r/(eta eps^2)}), scaled, >= 2."""
    raw = max(1e3 / (math.sqrt(eta) * eps * math.sqrt(ell)), 1e6 * r / (eta * eps ** 2)) / math.sqrt(eta)
    return as_scaling(scale).samples(raw, 2)


def estimate_l2_base(oracle, eps: float, eta: float, advice: L2Advice = None, scale: ScaleLike = 1.0) -> EstimateReport:
    """Unbiased collision-norm estimate S_m / C(m, 2).

    The sample count m is fixed from a rough norm estimate and the advice r,
    which should upper-bound t = ||mu||_3^3/||mu||_2^4 - 1. Without advice the
    worst case r = sqrt(2/ell) is used.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    _check_eta(eta)
    if advice is not None and not advice >= 0:
        raise ValueError("advice must be >= 0")
    eps = min(eps, 0.1)
    meter = Meter(oracle)
    ell = estimate_l2_bc(oracle, 0.5, eta / 6, scale).value
    meter.mark("estimate_l2_bc", "ell")
    r = math.sqrt(2 / ell) if advice is None else float(advice)
    m = base_sample_count(eps, eta, ell, r, scale)
    t = count_fixed(oracle, m)
    meter.mark("collisions", f"m={m}")
    return EstimateReport(t.s2 / math.comb(m, 2), meter.total, meter.trace,
                          branch="advised" if advice is not None else "unadvised",
                          info={"m": m, "ell": ell, "r": r})


def estimate_l2_moments(oracle, eps: float, eta: float, scale: ScaleLike = 1.0) -> EstimateReport:
    """Base estimate accepted only once it is within a factor 2 of a fresh BC estimate.

    Unbiased-style output whose moments of order <= 1 stay controlled.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    _check_eta(eta)
    eps = min(eps, 0.2)
    cap = math.ceil(48 * math.log(1 / eta)) + 100
    meter = Meter(oracle)
    rounds: list[int] = []

    def once() -> float:
        for it in range(1, cap + 1):
            hi = estimate_l2_base(oracle, eps, 1 / 6, None, scale).value
            lo = estimate_l2_bc(oracle, eps, 1 / 6, scale).value
            if lo / 2 <= hi <= 2 * lo:
                rounds.append(it)
                return hi
        raise IterationCapExceeded(f"no agreement after {cap} rounds")

    value = amplify_median(once, eta)
    meter.mark("estimate_l2_moments", f"rounds={sum(rounds)}")
    return EstimateReport(value, meter.total, meter.trace, info={"rounds": rounds})


def estimate_l3(oracle, eps: float, eta: float, scale: ScaleLike = 1.0) -> EstimateReport:
    """Unbiased three-way collision estimate T_m / C(m, 3) of ||mu||_3^3."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    _check_eta(eta)
    eps = min(eps, 0.1)
    meter = Meter(oracle)
    ell = estimate_l2_bc(oracle, 0.5, eta / 6, scale).value
    meter.mark("estimate_l2_bc", "ell")
    m = as_scaling(scale).samples(1e12 / (eta * eps ** 2 * ell ** (2 / 3)), 3)
    t = count_fixed(oracle, m)
    meter.mark("collisions3", f"m={m}")
    return EstimateReport(t.s3 / math.comb(m, 3), meter.total, meter.trace, info={"m": m, "ell": ell})


def estimate_l3_amplified(oracle, eps: float, eta: float, scale: ScaleLike = 1.0) -> EstimateReport:
    """Lower median of estimate_l3 runs at error 1/3."""
    meter = Meter(oracle)
    value = amplify_median(lambda: estimate_l3(oracle, eps, 1 / 3, scale).value, eta)
    meter.mark("estimate_l3_amplified", f"copies={amplification_count(eta)}")
    return EstimateReport(value, meter.total, meter.trace)


def estimate_l3_magnitude(oracle, a: float, eta: float, scale: ScaleLike = 1.0) -> EstimateReport:
    """Unbiased ||mu||_3^3 estimate with additive error about a^3 (m = ceil(10^12/(eta a)))."""
    check_unit("a", a)
    _check_eta(eta)
    meter = Meter(oracle)
    m = as_scaling(scale).samples(1e12 / (eta * a), 3)
    t = count_fixed(oracle, m)
    meter.mark("collisions3", f"m={m}")
    return EstimateReport(t.s3 / math.comb(m, 3), meter.total, meter.trace, info={"m": m})
