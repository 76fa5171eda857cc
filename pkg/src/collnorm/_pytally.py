"""Pure-numpy collision tally, used when the compiled module is unavailable."""

from __future__ import annotations

import numpy as np


def _c2(c):
    return c * (c - 1) // 2


def _c3(c):
    return c * (c - 1) * (c - 2) // 6


class Tally:
    """Per-label counts with running pair (s2) and triple (s3) collision totals."""

    __slots__ = ("_counts", "m", "s2", "s3")

    def __init__(self):
        self._counts: dict[int, int] = {}
        self.m = 0
        self.s2 = 0
        self.s3 = 0

    def add(self, label: int) -> None:
        label = int(label)
        c = self._counts.get(label, 0)
        self.s2 += c
        self.s3 += _c2(c)
        self._counts[label] = c + 1
        self.m += 1

    def ingest(self, labels) -> None:
        labels = np.asarray(labels, dtype=np.int64)
        if labels.size == 0:
            return
        if labels.size < 16:
            for x in labels.tolist():
                self.add(x)
            return
        uniq, cnt = np.unique(labels, return_counts=True)
        counts = self._counts
        get = counts.get
        s2 = self.s2
        s3 = self.s3
        for u, d in zip(uniq.tolist(), cnt.tolist()):
            c0 = get(u, 0)
            c1 = c0 + d
            s2 += _c2(c1) - _c2(c0)
            s3 += _c3(c1) - _c3(c0)
            counts[u] = c1
        self.s2 = s2
        self.s3 = s3
        self.m += int(labels.size)

    def ingest_until(self, labels, k) -> int:
        """Ingest a prefix of `labels`, stopping as soon as s2 >= k.

        Returns the number of labels ingested.
        """
        labels = np.asarray(labels, dtype=np.int64)
        # doubling windows keep the cost proportional to the prefix actually used
        done, width = 0, 256
        while done < labels.size and self.s2 < k:
            done += self._until_window(labels[done:done + width], k)
            width *= 2
        return done

    def _until_window(self, labels: np.ndarray, k) -> int:
        n = labels.size
        if self.s2 >= k or n == 0:
            return 0
        if n <= 32:
            for i, x in enumerate(labels.tolist()):
                self.add(x)
                if self.s2 >= k:
                    return i + 1
            return n
        # increment of label j = prior count + rank among equal labels earlier in the chunk
        uniq, inv = np.unique(labels, return_inverse=True)
        get = self._counts.get
        prior = np.fromiter((get(u, 0) for u in uniq.tolist()), dtype=np.int64, count=uniq.size)
        order = np.argsort(inv, kind="stable")
        sorted_inv = inv[order]
        starts = np.flatnonzero(np.r_[True, sorted_inv[1:] != sorted_inv[:-1]])
        group_start = np.repeat(starts, np.diff(np.r_[starts, n]))
        rank = np.empty(n, dtype=np.int64)
        rank[order] = np.arange(n, dtype=np.int64) - group_start
        inc = prior[inv] + rank
        cum = np.cumsum(inc)
        need = k - self.s2
        stop = int(np.searchsorted(cum, need, side="left"))
        used = n if stop >= n else stop + 1
        self.ingest(labels[:used])
        return used

    def clear(self) -> None:
        self._counts.clear()
        self.m = self.s2 = self.s3 = 0

    def stop_times(self, labels, k, runs: int):
        """Run up to `runs` back-to-back stop-at-k copies over `labels`.

        The tally holds the copy in progress and is cleared after each
        completed copy. Returns (stopping lengths of completed copies, labels used).
        """
        labels = np.asarray(labels, dtype=np.int64)
        out = []
        i = 0
        while i < labels.size and len(out) < runs:
            i += self.ingest_until(labels[i:], k)
            if self.s2 >= k:
                out.append(self.m)
                self.clear()
        return out, i

    def count(self, label) -> int:
        return self._counts.get(int(label), 0)

    def counts(self) -> dict:
        return dict(self._counts)

    def __len__(self) -> int:
        return len(self._counts)
