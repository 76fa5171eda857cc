# distutils: language = c++
# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled collision tally (open-addressing hash table)."""

from libc.stdint cimport int64_t, uint64_t
from libcpp.vector cimport vector

cdef int64_t _FLUSH = 1LL << 61
cdef int64_t _I64_MAX = 9223372036854775807LL
cdef uint64_t _MIX = 0x9E3779B97F4A7C15ULL


cdef class Tally:
    """Per-label counts with running pair (s2) and triple (s3) collision totals."""

    cdef vector[int64_t] _keys
    cdef vector[int64_t] _vals      # 0 marks an empty slot
    cdef vector[Py_ssize_t] _used   # occupied slots, in insertion order
    cdef int _shift
    cdef Py_ssize_t _mask
    cdef int64_t _m
    cdef int64_t _s2
    cdef int64_t _acc3
    cdef object _s3

    def __cinit__(self):
        self._alloc(6)
        self._m = 0
        self._s2 = 0
        self._acc3 = 0
        self._s3 = 0

    cdef void _alloc(self, int bits):
        self._keys.assign(1 << bits, 0)
        self._vals.assign(1 << bits, 0)
        self._used.clear()
        self._shift = 64 - bits
        self._mask = (1 << bits) - 1

    cdef inline Py_ssize_t _slot(self, int64_t label):
        cdef Py_ssize_t j = <Py_ssize_t>((<uint64_t>label * _MIX) >> self._shift)
        while self._vals[j] != 0 and self._keys[j] != label:
            j = (j + 1) & self._mask
        return j

    cdef void _grow(self):
        cdef vector[int64_t] keys = self._keys
        cdef vector[int64_t] vals = self._vals
        cdef vector[Py_ssize_t] used = self._used
        cdef Py_ssize_t i, j
        self._alloc(64 - self._shift + 1)
        for i in range(<Py_ssize_t>used.size()):
            j = self._slot(keys[used[i]])
            self._keys[j] = keys[used[i]]
            self._vals[j] = vals[used[i]]
            self._used.push_back(j)

    cdef inline void _push(self, int64_t label):
        cdef Py_ssize_t j = self._slot(label)
        cdef int64_t c = self._vals[j]
        if c == 0:
            self._keys[j] = label
            self._used.push_back(j)
        self._vals[j] = c + 1
        self._s2 += c
        if self._acc3 > _FLUSH:
            self._s3 += self._acc3
            self._acc3 = 0
        self._acc3 += c * (c - 1) // 2
        self._m += 1
        if c == 0 and 2 * <Py_ssize_t>self._used.size() > self._mask:
            self._grow()

    cdef void _reset(self):
        cdef Py_ssize_t i
        for i in range(<Py_ssize_t>self._used.size()):
            self._vals[self._used[i]] = 0
        self._used.clear()
        self._m = 0
        self._s2 = 0
        self._acc3 = 0

    def add(self, int64_t label):
        self._push(label)

    def ingest(self, const int64_t[::1] labels):
        cdef Py_ssize_t i, n = labels.shape[0]
        for i in range(n):
            self._push(labels[i])

    def ingest_until(self, const int64_t[::1] labels, k):
        """Ingest a prefix of `labels`, stopping as soon as s2 >= k.

        Returns the number of labels ingested.
        """
        cdef int64_t target = _I64_MAX if k > _I64_MAX else <int64_t>k
        cdef Py_ssize_t i = 0, n = labels.shape[0]
        if self._s2 >= target:
            return 0
        while i < n:
            self._push(labels[i])
            i += 1
            if self._s2 >= target:
                break
        return i

    def clear(self):
        self._reset()
        self._s3 = 0

    def stop_times(self, const int64_t[::1] labels, k, Py_ssize_t runs):
        """Run up to `runs` back-to-back stop-at-k copies over `labels`.

        The tally holds the copy in progress and is cleared after each
        completed copy. Returns (stopping lengths of completed copies, labels used).
        """
        cdef int64_t target = _I64_MAX if k > _I64_MAX else <int64_t>k
        cdef Py_ssize_t i = 0, n = labels.shape[0]
        cdef vector[int64_t] done
        while i < n and <Py_ssize_t>done.size() < runs:
            self._push(labels[i])
            i += 1
            if self._s2 >= target:
                done.push_back(self._m)
                self._reset()
                self._s3 = 0
        return [done[j] for j in range(<Py_ssize_t>done.size())], i

    @property
    def m(self):
        return self._m

    @property
    def s2(self):
        return self._s2

    @property
    def s3(self):
        return self._s3 + self._acc3

    def count(self, int64_t label):
        return self._vals[self._slot(label)]

    def counts(self):
        return {self._keys[j]: self._vals[j] for j in self._used}

    def __len__(self):
        return self._used.size()
