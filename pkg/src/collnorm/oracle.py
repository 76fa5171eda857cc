"""Seeded sample oracles with budget accounting, plus stream helpers."""

from __future__ import annotations

import numpy as np

from .dist import ExplicitDistribution
from .kernels import Tally

CollisionTally = Tally

_BLOCK = 4096
_CHUNK = 1 << 20


class BudgetExceeded(RuntimeError):
    """An oracle was asked for more samples than its cap allows."""


def derive_seed(master: int, *path: int) -> int:
    """64-bit seed for a sub-stream, derived from (master, path) via SeedSequence."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    """Philox counter-based generator; the only RNG the oracles use."""
    return np.random.Generator(np.random.Philox(int(seed)))


class AliasTable:
    """Vose alias table; one uniform per draw."""

    def __init__(self, masses: np.ndarray):
        p = np.asarray(masses, dtype=np.float64)
        k = p.size
        scaled = p * (k / p.sum())
        prob = np.ones(k)
        alias = np.arange(k, dtype=np.int64)
        small = [i for i in range(k) if scaled[i] < 1.0]
        large = [i for i in range(k) if scaled[i] >= 1.0]
        while small and large:
            s, g = small.pop(), large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] = (scaled[g] + scaled[s]) - 1.0
            (small if scaled[g] < 1.0 else large).append(g)
        self.prob = prob
        self.alias = alias
        self.k = k

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        x = rng.random(n) * self.k
        col = x.astype(np.int64)
        np.minimum(col, self.k - 1, out=col)
        frac = x - col
        return np.where(frac < self.prob[col], col, self.alias[col])


def tally_ingest(t: Tally, label: int) -> Tally:
    """Add one label: s2 grows by its prior count c, s3 by C(c, 2)."""
    t.add(int(label))
    return t


class SampleOracle:
    """Seeded i.i.d. label stream from an explicit distribution.

    The stream depends only on (distribution, seed): labels are produced
    from one uniform each, so how requests are chunked never changes it.
    ``peek`` looks ahead without consuming; ``consume`` advances ``drawn``.
    """

    def __init__(self, dist: ExplicitDistribution, seed: int, cap: int | None = None):
        keep = dist.masses > 0
        self.dist = dist
        self.seed = int(seed)
        self.cap = None if cap is None else int(cap)
        self.drawn = 0
        self._labels = dist.labels[keep]
        self._table = AliasTable(dist.masses[keep])
        self._rng = make_rng(seed)
        self._buf = np.empty(0, dtype=np.int64)
        self._pos = 0

    def _fill(self, n: int) -> None:
        have = self._buf.size - self._pos
        if have >= n:
            return
        need = n - have
        gen = -(-need // _BLOCK) * _BLOCK
        fresh = self._labels[self._table.sample(self._rng, gen)]
        self._buf = np.concatenate([self._buf[self._pos:], fresh])
        self._pos = 0

    @property
    def remaining(self) -> int | None:
        return None if self.cap is None else self.cap - self.drawn

    def require(self, n: int) -> None:
        """Fail fast if n more draws would exceed the cap."""
        if self.cap is not None and self.drawn + n > self.cap:
            raise BudgetExceeded(f"need {n} more samples, {self.cap - self.drawn} left of cap {self.cap}")

    def peek(self, n: int) -> np.ndarray:
        """Up to n upcoming labels (fewer only when the cap is near); not consumed."""
        if self.cap is not None:
            n = min(n, self.cap - self.drawn)
            if n <= 0:
                raise BudgetExceeded(f"cap {self.cap} reached")
        self._fill(n)
        return self._buf[self._pos:self._pos + n]

    def consume(self, n: int) -> None:
        if n <= 0:
            return
        self.require(n)
        self._fill(n)
        self._pos += n
        self.drawn += n

    def draw(self, n: int) -> np.ndarray:
        self.require(n)
        out = self.peek(n).copy() if n else np.empty(0, dtype=np.int64)
        self.consume(n)
        return out

    def draw_one(self) -> int:
        return int(self.draw(1)[0])


def count_fixed(oracle, m: int) -> Tally:
    """Tally exactly m draws from the oracle."""
    oracle.require(m)
    t = Tally()
    left = m
    while left > 0:
        chunk = oracle.peek(min(left, _CHUNK))
        t.ingest(chunk)
        oracle.consume(chunk.size)
        left -= chunk.size
    return t


def stopping_times(oracle, k: int, runs: int, limit: int | None = None) -> list[int] | None:
    """Run ``runs`` independent draw-until-k-pair-collisions copies back to back.

    Returns each copy's number of draws. With ``limit``, gives up (None) once
    that many draws in total did not complete every copy.
    """
    t = Tally()
    out: list[int] = []
    chunk = 1024
    used = 0
    while len(out) < runs:
        size = chunk if limit is None else min(chunk, limit - used)
        if size <= 0:
            return None
        labels = oracle.peek(size)
        done, n = t.stop_times(labels, k, runs - len(out))
        oracle.consume(n)
        used += n
        out.extend(done)
        chunk = min(chunk * 2, 1 << 16)
    return out


def draws_until_collisions(oracle, k: int, limit: int | None = None) -> int | None:
    """Draw until the pair-collision count reaches k; return the number drawn (None past ``limit``)."""
    res = stopping_times(oracle, k, 1, limit)
    return None if res is None else res[0]
