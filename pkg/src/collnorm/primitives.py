"""Median amplification, additive indicator estimation, rejection sampling."""

from __future__ import annotations

import math
from typing import Callable, Iterable

import numpy as np

from .params import EstimateReport, Meter, check_unit


def amplification_count(eta: float) -> int:
    """Copies needed to push a 1/3-error procedure down to error eta."""
    if eta >= 1 / 3:
        return 1
    return math.ceil(18 * math.log(1 / eta))


def lower_median(values: Iterable[float]) -> float:
    v = sorted(values)
    if not v:
        raise ValueError("no values")
    return v[(len(v) - 1) // 2]


def amplify_median(base: Callable[[], float], eta: float) -> float:
    """Lower median of ceil(18 ln(1/eta)) independent runs of ``base`` (one run if eta >= 1/3)."""
    return lower_median([base() for _ in range(amplification_count(eta))])


def member_of(labels: Iterable[int]) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized membership predicate for a fixed label set."""
    ref = np.unique(np.fromiter(labels, dtype=np.int64))
    return lambda x: np.isin(x, ref, assume_unique=False)


def not_member_of(labels: Iterable[int]) -> Callable[[np.ndarray], np.ndarray]:
    inside = member_of(labels)
    return lambda x: ~inside(x)


class IndicatorOracle:
    """Each call draws one sample and reports whether the predicate holds."""

    def __init__(self, oracle, predicate: Callable[[np.ndarray], np.ndarray]):
        self.oracle = oracle
        self.predicate = predicate

    @property
    def drawn(self) -> int:
        return self.oracle.drawn

    def __call__(self) -> bool:
        return bool(self.predicate(self.oracle.draw(1))[0])

    def successes(self, n: int) -> int:
        """Make n calls; return how many succeeded."""
        if n <= 0:
            return 0
        self.oracle.require(n)
        hits = 0
        left = n
        while left:
            chunk = self.oracle.peek(min(left, 1 << 20))
            hits += int(np.count_nonzero(self.predicate(chunk)))
            self.oracle.consume(chunk.size)
            left -= chunk.size
        return hits


def estimate_indicator_additive(ind: IndicatorOracle, eps: float, eta: float) -> EstimateReport:
    """Unbiased estimate of p = Pr[indicator], within p +- eps w.p. 1 - eta.

    A pilot of M1 calls sizes the main run of M2 calls; the output is the
    main run's success fraction.
    """
    check_unit("eps", eps)
    check_unit("eta", eta, 1.0, closed=False)
    meter = Meter(ind)
    lg = math.log(10 / eta)
    m1 = math.ceil(12 * lg / eps)
    s1 = ind.successes(m1)
    m2 = math.ceil(6 * lg * (s1 / m1 + eps) / eps ** 2)
    s2 = ind.successes(m2)
    meter.mark("estimate_indicator_additive")
    return EstimateReport(s2 / m2, meter.total, meter.trace, info={"m1": m1, "s1": s1, "m2": m2})


class RejectionCrash(RuntimeError):
    """The rejection sampler exhausted its budget."""


CRASH = object()


class ConditionalOracle:
    """Samples from mu restricted to A by rejection, with a crash budget.

    Request i (1-based, cumulative) may use at most 4(i + ceil(12 ln(1/eta)))
    base draws in total; past that the sampler crashes and stays crashed.
    Exposes the same peek/consume interface as the base oracle, raising
    ``RejectionCrash`` where a crash occurs.
    """

    def __init__(self, base, member: Callable[[np.ndarray], np.ndarray], eta: float):
        check_unit("eta", eta, 1.0, closed=False)
        self.base = base
        self.member = member
        self.slack = math.ceil(12 * math.log(1 / eta))
        self.served = 0
        self.base_used = 0
        self.crashed = False
        self._pending: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def drawn(self) -> int:
        return self.served

    def budget(self, i: int) -> int:
        return 4 * (i + self.slack)

    def require(self, n: int) -> None:
        pass

    def _scan(self, n: int):
        limit = self.budget(self.served + n) - self.base_used
        w = min(limit, 2 * n + 64)
        while True:
            window = self.base.peek(w)
            hits = np.flatnonzero(self.member(window))
            pos = self.base_used + hits + 1
            req = self.served + 1 + np.arange(hits.size)
            late = np.flatnonzero(pos > 4 * (req + self.slack))
            if late.size:
                j = int(late[0])
                return window[hits[:j]], pos[:j], True
            if hits.size >= n:
                return window[hits[:n]], pos[:n], False
            if window.size < w:
                return window[hits], pos, False
            if w >= limit:
                return window[hits], pos, True
            w = min(limit, 2 * w)

    def _crash(self) -> None:
        stop = self.budget(self.served + 1)
        self.base.consume(stop - self.base_used)
        self.base_used = stop
        self.crashed = True
        self._pending = None
        raise RejectionCrash(f"request {self.served + 1} exceeded {stop} base draws")

    def peek(self, n: int) -> np.ndarray:
        if self.crashed:
            raise RejectionCrash("sampler already crashed")
        labels, pos, crash = self._scan(n)
        if labels.size == 0 and crash:
            self._crash()
        self._pending = (labels, pos)
        return labels

    def consume(self, n: int) -> None:
        if n <= 0:
            return
        if self._pending is None or self._pending[0].size < n:
            self.peek(n)
            if self._pending[0].size < n:
                raise RejectionCrash("consume past the crash point")
        end = int(self._pending[1][n - 1])
        self.base.consume(end - self.base_used)
        self.base_used = end
        self.served += n
        self._pending = None

    def draw(self, n: int) -> np.ndarray:
        out = []
        left = n
        while left:
            chunk = self.peek(left).copy()
            self.consume(chunk.size)
            out.append(chunk)
            left -= chunk.size
        return np.concatenate(out) if out else np.empty(0, dtype=np.int64)


def conditional_draw(c: ConditionalOracle):
    """One sample from mu_A, or ``CRASH`` once the budget rule is violated."""
    try:
        return int(c.draw(1)[0])
    except RejectionCrash:
        return CRASH
