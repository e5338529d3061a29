"""Suffix array and BWT primitives.

All indices are 0-based. Suffixes are compared as plain byte (or integer)
sequences, so a suffix that is a proper prefix of another sorts first; this
is what makes the multi-sentinel termination used by the parser well defined.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import StructuralError
from .ingest import SENTINEL, byte_histogram


def _as_array(seq) -> np.ndarray:
    if isinstance(seq, (bytes, bytearray, memoryview)):
        return np.frombuffer(seq, dtype=np.uint8)
    return np.asarray(seq)


def sa_naive(text) -> np.ndarray:
    """Comparison sort of all suffixes. Oracle only: O(n^2 log n) time, O(n^2) memory."""
    if isinstance(text, (bytes, bytearray, memoryview)):
        text = bytes(text)
    else:
        text = tuple(int(x) for x in text)
    order = sorted(range(len(text)), key=lambda i: text[i:])
    return np.array(order, dtype=np.int64)


def sa_fast(text) -> np.ndarray:
    """Suffix array by prefix doubling over numpy ranks.

    Accepts bytes or any integer sequence. Runs O(log L) rounds where L is
    the longest repeated substring; each round is one argsort.
    """
    a = _as_array(text)
    n = len(a)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    _, inv = np.unique(a, return_inverse=True)
    rank = inv.astype(np.int64).reshape(-1)
    del inv
    sa = np.argsort(rank, kind="stable")
    if n == 1:
        return sa
    # buffers reused across rounds keep the peak near 4 words per symbol
    key = np.empty(n, dtype=np.int64)
    buf = np.empty(n, dtype=np.int64)
    k = 1
    while True:
        span = int(rank.max()) + 2
        # key = rank[i] * span + (rank[i + k] + 1), with 0 past the end
        np.multiply(rank, span, out=key)
        head = key[: n - k]
        np.add(head, rank[k:], out=head)
        head += 1
        del sa
        sa = np.argsort(key)
        np.take(key, sa, out=buf)
        fresh = buf[1:] != buf[:-1]
        buf[0] = 0
        np.cumsum(fresh, out=buf[1:])
        del fresh
        rank[sa] = buf
        if int(buf[-1]) == n - 1:
            return sa
        k *= 2
        if k >= n:
            # unreachable for well-formed input: suffix lengths differ
            raise StructuralError("prefix doubling failed to separate suffixes")


@dataclass(frozen=True)
class BwtString:
    data: bytes
    char_counts: np.ndarray
    c_array: np.ndarray

    @classmethod
    def from_bytes(cls, data) -> "BwtString":
        data = bytes(data)
        counts = byte_histogram(data)
        c_array = np.concatenate(([0], np.cumsum(counts)[:-1])).astype(np.int64)
        return cls(data, counts, c_array)

    @property
    def n(self) -> int:
        return len(self.data)

    @cached_property
    def _occurrences(self) -> dict[int, np.ndarray]:
        arr = np.frombuffer(self.data, dtype=np.uint8)
        order = np.argsort(arr, kind="stable")
        out = {}
        for c in np.flatnonzero(self.char_counts):
            lo = int(self.c_array[c])
            out[int(c)] = order[lo: lo + int(self.char_counts[c])]
        return out

    def rank(self, c: int, i: int) -> int:
        """Number of occurrences of byte ``c`` in ``data[0:i]``."""
        occ = self._occurrences.get(c)
        if occ is None:
            return 0
        return int(np.searchsorted(occ, i, side="left"))

    def lf_array(self) -> np.ndarray:
        """LF mapping for every L-position at once (stable counting order)."""
        arr = np.frombuffer(self.data, dtype=np.uint8)
        order = np.argsort(arr, kind="stable")
        lf = np.empty(len(arr), dtype=np.int64)
        lf[order] = np.arange(len(arr), dtype=np.int64)
        return lf


def bwt_from_sa(text, sa) -> BwtString:
    """BWT[i] = text[(SA[i] - 1) mod n]."""
    arr = _as_array(text)
    sa = np.asarray(sa, dtype=np.int64)
    return BwtString.from_bytes(arr[sa - 1].tobytes())  # index -1 wraps to n-1


def lf_step(bwt: BwtString, pos: int) -> int:
    c = bwt.data[pos]
    return int(bwt.c_array[c]) + bwt.rank(c, pos + 1) - 1


def run_boundaries(bwt) -> tuple[np.ndarray, np.ndarray]:
    """Positions of run starts and run ends of a byte sequence."""
    arr = _as_array(bytes(bwt.data if isinstance(bwt, BwtString) else bwt))
    n = len(arr)
    if n == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    change = np.flatnonzero(arr[1:] != arr[:-1]) + 1
    starts = np.concatenate(([0], change)).astype(np.int64)
    ends = np.concatenate((change - 1, [n - 1])).astype(np.int64)
    return starts, ends


@dataclass(frozen=True)
class SaSamplePairs:
    ssa: np.ndarray  # shape (r, 2): position, SA value
    esa: np.ndarray

    @property
    def r(self) -> int:
        return len(self.ssa)


def sample_from_sa(bwt, sa) -> SaSamplePairs:
    sa = np.asarray(sa, dtype=np.int64)
    starts, ends = run_boundaries(bwt)
    return SaSamplePairs(np.stack([starts, sa[starts]], axis=1),
                         np.stack([ends, sa[ends]], axis=1))


def invert_bwt_to_sa(bwt: BwtString, mode: str = "full"):
    """Recover the suffix array from a BWT by walking LF backwards through the text.

    The text is assumed to end in one or more sentinel bytes: the ``w`` smallest
    suffixes are the pure-sentinel ones, so SA[0..w-1] = n-1, ..., n-w, and the
    walk continues by LF from position w-1 (whose BWT byte is the last content
    byte). Values are produced in text order and scattered to their BWT
    positions at the end. ``mode`` is 'full' (SuffixArray) or 'sample'
    (SaSamplePairs at run boundaries).
    """
    if mode not in ("full", "sample"):
        raise ValueError(f"unknown mode {mode!r}")
    n = bwt.n
    w = int(bwt.char_counts[SENTINEL])
    if n == 0 or w == 0:
        raise StructuralError("BWT contains no sentinel")
    if w >= n:
        raise StructuralError("BWT contains no content bytes")
    if any(bwt.data[j] != SENTINEL for j in range(w - 1)):
        raise StructuralError("sentinel suffixes are not a prefix of the BWT")
    lf = bwt.lf_array().tolist()
    data = bwt.data
    # walk order: BWT position of text suffix t, for t = n-w-1 down to 0
    walk = np.empty(n - w, dtype=np.int64)
    pos = w - 1
    for t in range(n - w - 1, -1, -1):
        if data[pos] == SENTINEL:
            raise StructuralError(f"LF walk reached a sentinel early (text position {t})")
        pos = lf[pos]
        walk[n - w - 1 - t] = pos
    if data[pos] != SENTINEL:
        raise StructuralError("LF walk did not end at the cyclic sentinel")
    sa = np.full(n, -1, dtype=np.int64)
    sa[:w] = np.arange(n - 1, n - w - 1, -1)
    # counting-sort the out-of-order (bwt position, SA value) pairs
    sa[walk] = np.arange(n - w - 1, -1, -1)
    if (sa < 0).any() or len(np.unique(walk)) != len(walk) or (walk < w).any():
        raise StructuralError("LF walk is not a single cycle over the text")
    if mode == "full":
        return sa
    return sample_from_sa(bwt, sa)
