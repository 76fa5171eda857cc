"""Shared configuration and report types."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

_HUGE = 1 << 62


@dataclass(frozen=True)
class Scaling:
    """Constant-scale factor with optional ceilings on derived counts.

    ``factor`` multiplies every hard-coded constant inside a sample-count
    formula (1 = as published). ``max_samples`` caps fixed sample counts
    and ``max_collisions`` caps the stopping target of the collision-count
    estimator; both apply after scaling and default to no ceiling.
    """

    factor: float = 1.0
    max_samples: int | None = None
    max_collisions: int | None = None

    def __post_init__(self):
        if not self.factor > 0:
            raise ValueError("scale factor must be positive")
        for name in ("max_samples", "max_collisions"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be >= 1")

    def _count(self, raw: float, floor: int, ceiling: int | None) -> int:
        v = self.factor * raw
        n = _HUGE if not math.isfinite(v) or v >= _HUGE else max(floor, math.ceil(v))
        if ceiling is not None:
            n = min(n, max(ceiling, floor))
        return n

    def samples(self, raw: float, floor: int = 2) -> int:
        return self._count(raw, floor, self.max_samples)

    def collisions(self, raw: float) -> int:
        return self._count(raw, 1, self.max_collisions)


ScaleLike = Union[float, int, Scaling]


def as_scaling(scale: ScaleLike) -> Scaling:
    if isinstance(scale, Scaling):
        return scale
    return Scaling(float(scale))


def check_unit(name: str, value: float, upper: float = 1.0, closed: bool = True) -> None:
    ok = 0 < value <= upper if closed else 0 < value < upper
    if not ok:
        bracket = "]" if closed else ")"
        raise ValueError(f"{name}={value!r} must lie in (0, {upper}{bracket}")


@dataclass(frozen=True)
class EstimatorParams:
    eps: float
    eta: float
    scale: ScaleLike = 1.0
    cap: int | None = None

    def __post_init__(self):
        check_unit("eps", self.eps)
        check_unit("eta", self.eta, 1 / 3)
        as_scaling(self.scale)
        if self.cap is not None and self.cap < 1:
            raise ValueError("cap must be positive")


class TraceEntry(NamedTuple):
    procedure: str
    branch: str
    samples: int


@dataclass
class EstimateReport:
    value: float
    samples: int
    trace: list[TraceEntry] = field(default_factory=list)
    branch: str = ""
    info: dict = field(default_factory=dict)


@dataclass
class AdviceReport:
    r: float
    samples: int
    trace: list[TraceEntry] = field(default_factory=list)
    branch: str = ""
    info: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return self.r


class Meter:
    """Attributes oracle draws to named sub-steps."""

    def __init__(self, oracle):
        self.oracle = oracle
        self.start = oracle.drawn
        self._last = self.start
        self.trace: list[TraceEntry] = []

    def mark(self, procedure: str, branch: str = "") -> int:
        now = self.oracle.drawn
        n = now - self._last
        self.trace.append(TraceEntry(procedure, branch, n))
        self._last = now
        return n

    @property
    def total(self) -> int:
        return self.oracle.drawn - self.start
