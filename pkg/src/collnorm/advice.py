"""Advice finders for small and medium collision norms, and the direct t estimate."""

from __future__ import annotations

import math

from . import norms
from .params import AdviceReport, Meter, ScaleLike, check_unit


def estimate_t_directly(oracle, delta: float, eta: float, scale: ScaleLike = 1.0) -> AdviceReport:
    """Upper estimate of t from plug-in norm estimates.

    Returns min{2(Y1 + delta), Y2}: Y1 is the plug-in ratio at tight accuracy,
    Y2 a coarse but always-valid upper bound.
    """
    check_unit("delta", delta)
    check_unit("eta", eta, 1.0, closed=False)
    meter = Meter(oracle)
    e = min(eta, delta)
    l22 = norms.estimate_l2_moments(oracle, delta / 40, e / 4, scale).value
    meter.mark("estimate_l2_moments", "fine")
    l33 = norms.estimate_l3(oracle, delta / 30, e / 4, scale).value
    meter.mark("estimate_l3", "fine")
    y1 = max(0.0, l33 / l22 ** 2 - 1)
    c22 = norms.estimate_l2_moments(oracle, 0.5, e / 4, scale).value
    meter.mark("estimate_l2_moments", "coarse")
    c33 = norms.estimate_l3_amplified(oracle, 0.5, e / 4, scale).value
    meter.mark("estimate_l3_amplified", "coarse")
    y2 = 2 * c33 / (c22 / 1.5) ** 2
    r = min(2 * (y1 + delta), y2)
    assert 0 <= r <= y2 and r <= 2 * (y1 + delta)
    return AdviceReport(r, meter.total, meter.trace, info={"y1": y1, "y2": y2})


def find_advice_small(oracle, eps: float, eta: float, scale: ScaleLike = 1.0) -> AdviceReport:
    """Advice r >= t when ||mu||_2 is at most about 4 eps.

    r = 1.005 (l3 + a^3) / l2^2 with a^3 = 4.5 eps l2^{3/2}, so the additive
    slack a^3 in the cube estimate costs only eps/||mu||_2 in the advice.
    """
    check_unit("eps", eps)
    check_unit("eta", eta, 1 / 3)
    meter = Meter(oracle)
    l2 = norms.estimate_l2_moments(oracle, 1 / 1000, eta / 2, scale).value
    meter.mark("estimate_l2_moments")
    a = (4.5 * eps * l2 ** 1.5) ** (1 / 3)
    l3 = norms.estimate_l3_magnitude(oracle, min(a, 1.0), eta / 2, scale).value
    meter.mark("estimate_l3_magnitude")
    r = (1 + 1 / 200) * (l3 + a ** 3) / l2 ** 2
    assert r >= 0
    return AdviceReport(r, meter.total, meter.trace, branch="small", info={"l2": l2, "a": a, "l3": l3})


def find_advice_medium(oracle, eps: float, eta: float, scale: ScaleLike = 1.0) -> AdviceReport:
    """Advice for medium norms: the direct estimate at resolution delta = min{1, eps/sqrt(l2)}."""
    check_unit("eps", eps)
    check_unit("eta", eta, 1 / 3)
    meter = Meter(oracle)
    l2 = norms.estimate_l2_moments(oracle, 1 / 10, 1 / 3, scale).value
    meter.mark("estimate_l2_moments")
    delta = min(1.0, eps / math.sqrt(l2))
    rep = estimate_t_directly(oracle, delta, eta, scale)
    meter.mark("estimate_t_directly", f"delta={delta:.6g}")
    return AdviceReport(rep.r, meter.total, meter.trace, branch="medium", info={"l2": l2, "delta": delta})
