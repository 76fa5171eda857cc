"""Explicit finite distributions and exact functionals."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

MASS_TOL = 1e-12


class InvalidDistribution(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ExplicitDistribution:
    """Finite list of (label, mass) pairs.

    Labels are opaque 64-bit ids. Zero-mass entries are allowed and count
    toward the domain size ``n``; samplers never emit them.
    """

    labels: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        masses = np.ascontiguousarray(self.masses, dtype=np.float64)
        if labels.ndim != 1 or labels.shape != masses.shape:
            raise InvalidDistribution("labels and masses must be 1-d arrays of equal length")
        if labels.size == 0:
            raise InvalidDistribution("empty distribution")
        if not np.all(np.isfinite(masses)) or np.any(masses < 0):
            raise InvalidDistribution("masses must be finite and non-negative")
        total = math.fsum(masses.tolist())
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidDistribution(f"masses sum to {total!r}, not 1")
        if np.unique(labels).size != labels.size:
            raise InvalidDistribution("labels must be distinct")
        labels.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def from_masses(cls, masses: Iterable[float], labels: Iterable[int] | None = None) -> "ExplicitDistribution":
        masses = np.asarray(list(masses) if not isinstance(masses, np.ndarray) else masses, dtype=np.float64)
        if labels is None:
            labels = np.arange(masses.size, dtype=np.int64)
        return cls(np.asarray(labels, dtype=np.int64), masses)

    @classmethod
    def from_weights(cls, weights: Iterable[float], labels: Iterable[int] | None = None) -> "ExplicitDistribution":
        """Normalize non-negative weights into a distribution."""
        w = np.asarray(list(weights) if not isinstance(weights, np.ndarray) else weights, dtype=np.float64)
        total = math.fsum(w.tolist())
        if not total > 0:
            raise InvalidDistribution("weights must have positive total")
        return cls.from_masses(w / total, labels)

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.labels.tolist(), self.masses.tolist()))

    def mass_of(self, label: int) -> float:
        idx = np.flatnonzero(self.labels == label)
        return float(self.masses[idx[0]]) if idx.size else 0.0

    def as_dict(self) -> dict[int, float]:
        return dict(self.entries)

    def support(self) -> np.ndarray:
        return self.labels[self.masses > 0]

    def restrict(self, labels: Iterable[int]) -> "ExplicitDistribution":
        """Conditional distribution on the given label subset (kept in this order)."""
        keep = np.isin(self.labels, np.fromiter(labels, dtype=np.int64))
        return ExplicitDistribution.from_weights(self.masses[keep], self.labels[keep])

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"ExplicitDistribution(n={self.n})"


def _fsum(x: np.ndarray) -> float:
    return math.fsum(np.asarray(x, dtype=np.float64).tolist())


def exact_l2_sq(d: ExplicitDistribution) -> float:
    """Collision probability sum mu(i)^2."""
    return _fsum(d.masses * d.masses)


def exact_l3_cube(d: ExplicitDistribution) -> float:
    """Three-way collision probability sum mu(i)^3."""
    return _fsum(d.masses ** 3)


def exact_t(d: ExplicitDistribution) -> float:
    """Hardness coefficient ||mu||_3^3 / ||mu||_2^4 - 1 (clamped at 0 against rounding)."""
    l2 = exact_l2_sq(d)
    return max(0.0, exact_l3_cube(d) / (l2 * l2) - 1.0)


def delta_vector(d: ExplicitDistribution) -> np.ndarray:
    """Relative deviations N mu(i) - 1 over the declared domain."""
    return d.n * d.masses - 1.0


def tv_distance(d1: ExplicitDistribution, d2: ExplicitDistribution) -> float:
    a, b = d1.as_dict(), d2.as_dict()
    return 0.5 * math.fsum(abs(a.get(x, 0.0) - b.get(x, 0.0)) for x in a.keys() | b.keys())


def collision_variance_bound(m: int, l2sq: float, l3cube: float) -> float:
    """Upper bound C(m,2) l2sq + m^3 (l3cube - l2sq^2) on Var[S_m]."""
    if m < 2:
        raise ValueError("m must be at least 2")
    return math.comb(m, 2) * l2sq + m ** 3 * (l3cube - l2sq * l2sq)


def chebyshev_tail(d: ExplicitDistribution, alpha: float) -> float:
    """Pr_{i~mu}[mu(i) outside (1 +- alpha) ||mu||_2^2], summed exactly."""
    l2 = exact_l2_sq(d)
    out = np.abs(d.masses - l2) >= alpha * l2
    return _fsum(d.masses[out])


def write_csv(d: ExplicitDistribution, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "mass"])
        for label, mass in d.entries:
            w.writerow([label, repr(mass)])


def read_csv(path: str | Path) -> ExplicitDistribution:
    labels, masses = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            if row[0].strip() == "label":
                continue
            if len(row) != 2:
                raise InvalidDistribution(f"expected 'label,mass' rows, got {row!r}")
            labels.append(int(row[0]))
            masses.append(float(row[1]))
    return ExplicitDistribution.from_masses(masses, labels)
