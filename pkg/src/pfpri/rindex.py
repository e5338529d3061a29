"""Run-length FM-index with run-boundary SA samples (r-index).

Counting uses rank over the run-length BWT. Locating keeps one SA value of
the current interval (the toehold) up to date during backward search and
then walks the interval with phi-inverse, SA[h] -> SA[h + 1], which needs
only a predecessor search over sampled SA values.
"""

from __future__ import annotations

import os
import random
import struct
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import IndexFormatError, StructuralError, VersionMismatchError
from .ingest import SENTINEL, SEPARATOR

MAGIC_PREFIX = b"PFPRI"
FORMAT_VERSION = 1
MAGIC = MAGIC_PREFIX + str(FORMAT_VERSION).encode()

# which run boundaries key the phi-inverse predecessor map
FAMILY_RUN_END = 0
FAMILY_RUN_START = 1

_HEADER = struct.Struct("<6sBQQ")


@dataclass(frozen=True)
class MatchState:
    lo: int
    hi: int
    toehold: int
    anchor: str  # 'lo' or 'hi': the interval end whose SA value is ``toehold``
    matched_len: int = 0

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1


def runs_of(chunks) -> tuple[np.ndarray, np.ndarray]:
    """Run heads and run lengths of a byte sequence given as an iterable of chunks."""
    heads, lengths = [], []
    last, pending = -1, 0
    for chunk in chunks:
        arr = np.frombuffer(chunk, dtype=np.uint8)
        if len(arr) == 0:
            continue
        cut = np.flatnonzero(arr[1:] != arr[:-1]) + 1
        starts = np.concatenate(([0], cut))
        lens = np.diff(np.concatenate((starts, [len(arr)])))
        h = arr[starts]
        if int(h[0]) == last:
            lens[0] += pending
        elif pending:
            heads.append(np.array([last], dtype=np.uint8))
            lengths.append(np.array([pending], dtype=np.int64))
        heads.append(h[:-1])
        lengths.append(lens[:-1].astype(np.int64))
        last, pending = int(h[-1]), int(lens[-1])
    if pending:
        heads.append(np.array([last], dtype=np.uint8))
        lengths.append(np.array([pending], dtype=np.int64))
    if not heads:
        return np.zeros(0, np.uint8), np.zeros(0, np.int64)
    return np.concatenate(heads).astype(np.uint8), np.concatenate(lengths)


def _read_chunks(path, size: int = 1 << 22):
    with open(path, "rb") as fh:
        while True:
            block = fh.read(size)
            if not block:
                return
            yield block


def _phi_map(family: int, ssa_vals: np.ndarray, esa_vals: np.ndarray):
    """Sorted (keys, satellites) for phi-inverse.

    Run-end family: key SA[e_i], satellite SA[e_i + 1] = SA[s_{i+1}], so both
    come from the samples. The run-start family would need SA[s_i + 1], which
    is not sampled unless the run has length 2, so it cannot be assembled here.
    """
    if family != FAMILY_RUN_END:
        raise StructuralError("run-start family needs unsampled SA values")
    sats = np.concatenate((ssa_vals[1:], [-1])).astype(np.int64)
    order = np.argsort(esa_vals, kind="stable")
    return esa_vals[order], sats[order]


def _phi_inverse_with(keys: list, sats: list, v: int) -> int:
    k = bisect_right(keys, v) - 1
    return sats[k] + v - keys[k]


def _family_passes(family: int, text: bytes) -> bool:
    from .suffix import bwt_from_sa, run_boundaries, sa_naive

    sa = sa_naive(text)
    bwt = bwt_from_sa(text, sa)
    starts, ends = run_boundaries(bwt)
    if family == FAMILY_RUN_END:
        keys, sats = sa[ends], np.concatenate((sa[starts[1:]], [-1]))
    else:
        keys = sa[starts]
        sats = np.array([sa[s + 1] if s + 1 < len(sa) else -1 for s in starts])
    order = np.argsort(keys, kind="stable")
    keys, sats = keys[order].tolist(), sats[order].tolist()
    for h in range(len(sa) - 1):
        v = int(sa[h])
        k = bisect_right(keys, v) - 1
        if k < 0 or sats[k] < 0 or sats[k] + v - keys[k] != sa[h + 1]:
            return False
    return True


@lru_cache(maxsize=None)
def select_phi_family(trials: int = 40, seed: int = 7) -> int:
    """Pick the boundary family whose predecessor map reproduces SA[h + 1] on random texts."""
    rng = random.Random(seed)
    texts = []
    for _ in range(trials):
        alphabet = b"ACGTN"[: rng.choice((2, 3, 4, 5))]
        body = bytes(rng.choice(alphabet) for _ in range(rng.randint(1, 200)))
        texts.append(body + bytes(rng.randint(1, 4)))
    for family in (FAMILY_RUN_END, FAMILY_RUN_START):
        if all(_family_passes(family, t) for t in texts):
            return family
    raise StructuralError("no boundary family satisfies the phi-inverse self-check")


class RIndex:
    def __init__(self, heads: np.ndarray, lengths: np.ndarray, ssa: np.ndarray,
                 esa: np.ndarray, family: int | None = None):
        self.heads = np.asarray(heads, dtype=np.uint8)
        self.lengths = np.asarray(lengths, dtype=np.int64)
        self.r = len(self.heads)
        if self.r == 0:
            raise StructuralError("empty BWT")
        self.n = int(self.lengths.sum())
        self.ssa = np.asarray(ssa, dtype=np.int64).reshape(-1, 2)
        self.esa = np.asarray(esa, dtype=np.int64).reshape(-1, 2)
        self._validate()
        self.family = select_phi_family() if family is None else family
        if self.family != FAMILY_RUN_END:
            raise StructuralError(f"unsupported boundary family {self.family}")
        counts = np.zeros(256, dtype=np.int64)
        np.add.at(counts, self.heads, self.lengths)
        self.c_array = np.concatenate(([0], np.cumsum(counts)[:-1])).astype(np.int64)
        self.last_sa = int(self.esa[-1, 1])

    def _validate(self):
        starts = np.concatenate(([0], np.cumsum(self.lengths)[:-1]))
        ends = starts + self.lengths - 1
        for name, pairs, expect in (("ssa", self.ssa, starts), ("esa", self.esa, ends)):
            if len(pairs) != self.r:
                raise StructuralError(f"{name} holds {len(pairs)} pairs for {self.r} runs")
            bad = np.flatnonzero(pairs[:, 0] != expect)
            if len(bad):
                i = int(bad[0])
                raise StructuralError(
                    f"{name} position {int(pairs[i, 0])} does not match run {i} "
                    f"boundary {int(expect[i])}")
        vals = np.concatenate((self.ssa[:, 1], self.esa[:, 1]))
        if len(vals) and (vals.min() < 0 or vals.max() >= self.n):
            raise StructuralError("sampled SA value outside [0, n)")
        if (self.lengths <= 0).any() or (self.heads[1:] == self.heads[:-1]).any():
            raise StructuralError("runs are not maximal")

    @property
    def n_over_r(self) -> float:
        return self.n / self.r

    # query-time tables, materialised as Python lists for fast scalar access
    @cached_property
    def _tables(self):
        run_start = np.concatenate(([0], np.cumsum(self.lengths))).tolist()
        by_char = {}
        for c in np.unique(self.heads).tolist():
            idx = np.flatnonzero(self.heads == c)
            cum = np.concatenate(([0], np.cumsum(self.lengths[idx]))).tolist()
            by_char[c] = (idx.tolist(), cum)
        keys, sats = _phi_map(self.family, self.ssa[:, 1], self.esa[:, 1])
        return (run_start, bytes(self.heads), by_char, self.ssa[:, 1].tolist(),
                self.esa[:, 1].tolist(), keys.tolist(), sats.tolist())

    def _run_of(self, i: int) -> int:
        return bisect_right(self._tables[0], i) - 1

    def rank(self, c: int, i: int) -> int:
        """Occurrences of byte ``c`` in BWT[0:i]."""
        run_start, heads, by_char = self._tables[:3]
        entry = by_char.get(c)
        if entry is None or i <= 0:
            return 0
        if i >= self.n:
            return entry[1][-1]
        t = bisect_right(run_start, i) - 1
        idx, cum = entry
        k = bisect_left(idx, t)
        extra = i - run_start[t] if heads[t] == c else 0
        return cum[k] + extra

    def access(self, i: int) -> int:
        return self._tables[1][self._run_of(i)]

    def initial_state(self, anchor: str = "lo") -> MatchState:
        """State for the empty pattern: the whole SA, toehold SA[0] or SA[n - 1]."""
        if anchor == "lo":
            return MatchState(0, self.n - 1, int(self.ssa[0, 1]), "lo", 0)
        if anchor == "hi":
            return MatchState(0, self.n - 1, self.last_sa, "hi", 0)
        raise ValueError(f"anchor must be 'lo' or 'hi', not {anchor!r}")

    def backward_step(self, st: MatchState, c: int) -> MatchState | None:
        """Extend the matched suffix Q to cQ; None when cQ does not occur."""
        run_start, heads, by_char, ssa_vals, esa_vals = self._tables[:5]
        entry = by_char.get(c)
        if entry is None:
            return None
        base = int(self.c_array[c])
        lo = base + self.rank(c, st.lo)
        hi = base + self.rank(c, st.hi + 1) - 1
        if lo > hi:
            return None
        idx = entry[0]
        if st.anchor == "lo":
            t = bisect_right(run_start, st.lo) - 1
            if heads[t] == c:
                toehold = st.toehold - 1
            else:
                # first c in [lo, hi] opens a run
                toehold = ssa_vals[idx[bisect_right(idx, t)]] - 1
        else:
            t = bisect_right(run_start, st.hi) - 1
            if heads[t] == c:
                toehold = st.toehold - 1
            else:
                # last c in [lo, hi] closes a run
                toehold = esa_vals[idx[bisect_left(idx, t) - 1]] - 1
        return MatchState(lo, hi, toehold, st.anchor, st.matched_len + 1)

    def search(self, pattern: bytes, anchor: str = "lo") -> MatchState | None:
        _check_pattern(pattern)
        st = self.initial_state(anchor)
        for c in reversed(pattern):
            st = self.backward_step(st, c)
            if st is None:
                return None
        return st

    def count(self, pattern: bytes) -> int:
        st = self.search(pattern)
        return 0 if st is None else st.size

    def phi_inverse(self, sa_val: int) -> int | None:
        """SA[h + 1] given SA[h]; None when ``sa_val`` is SA[n - 1]."""
        if sa_val == self.last_sa:
            return None
        keys, sats = self._tables[5:7]
        return _phi_inverse_with(keys, sats, sa_val)

    def locate_all(self, pattern: bytes, max_hits: int | None = None) -> list[int]:
        """Up to ``max_hits`` occurrence positions, in suffix-array order."""
        st = self.search(pattern, "lo")
        if st is None or max_hits == 0:
            return []
        want = st.size if max_hits is None else min(st.size, max_hits)
        keys, sats = self._tables[5:7]
        v = st.toehold
        out = [v]
        for _ in range(want - 1):
            k = bisect_right(keys, v) - 1
            v = sats[k] + v - keys[k]
            out.append(v)
        return out

    # serialisation
    def to_bytes(self) -> bytes:
        parts = [
            _HEADER.pack(MAGIC, self.family, self.n, self.r),
            self.c_array.astype("<u8").tobytes(),
            self.heads.tobytes(),
            self.lengths.astype("<u8").tobytes(),
            self.ssa.astype("<u8").tobytes(),
            self.esa.astype("<u8").tobytes(),
            struct.pack("<Q", self.last_sa),
        ]
        return b"".join(parts)

    def save(self, path) -> int:
        path = os.fspath(path)
        if not path:
            raise OSError("empty index path")
        blob = self.to_bytes()
        with open(path, "wb") as fh:
            fh.write(blob)
        return len(blob)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "RIndex":
        if len(blob) < _HEADER.size:
            raise IndexFormatError("truncated index header")
        magic, family, n, r = _HEADER.unpack_from(blob, 0)
        if magic[:5] != MAGIC_PREFIX:
            raise IndexFormatError(f"bad magic {magic!r}")
        if magic != MAGIC:
            raise VersionMismatchError(f"index format {magic[5:]!r}, expected {FORMAT_VERSION}")
        expected = _HEADER.size + 256 * 8 + r + 8 * r + 32 * r + 8
        if len(blob) != expected:
            raise IndexFormatError(f"index holds {len(blob)} bytes, header implies {expected}")
        off = _HEADER.size
        c_array = np.frombuffer(blob, "<u8", 256, off).astype(np.int64)
        off += 256 * 8
        heads = np.frombuffer(blob, np.uint8, r, off).copy()
        off += r
        lengths = np.frombuffer(blob, "<u8", r, off).astype(np.int64)
        off += 8 * r
        ssa = np.frombuffer(blob, "<u8", 2 * r, off).astype(np.int64).reshape(r, 2)
        off += 16 * r
        esa = np.frombuffer(blob, "<u8", 2 * r, off).astype(np.int64).reshape(r, 2)
        off += 16 * r
        (last_sa,) = struct.unpack_from("<Q", blob, off)
        try:
            idx = cls(heads, lengths, ssa, esa, family)
        except StructuralError as exc:
            raise IndexFormatError(f"inconsistent index: {exc}") from exc
        if idx.n != n or not np.array_equal(idx.c_array, c_array) or idx.last_sa != last_sa:
            raise IndexFormatError("index header disagrees with its run data")
        return idx

    @classmethod
    def load(cls, path) -> "RIndex":
        path = os.fspath(path)
        if not path:
            raise OSError("empty index path")
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def _check_pattern(pattern: bytes):
    if not pattern:
        raise ValueError("empty pattern")
    if SENTINEL in pattern or SEPARATOR in pattern:
        raise ValueError("pattern contains a reserved byte (0x00 or 0x01)")


def build_rindex(bwt, ssa, esa, family: int | None = None) -> RIndex:
    """Assemble an index from a BWT (bytes or file path) and its run-boundary pairs."""
    if isinstance(bwt, (bytes, bytearray, memoryview)):
        chunks = [bytes(bwt)]
    else:
        chunks = _read_chunks(bwt)
    heads, lengths = runs_of(chunks)
    return RIndex(heads, lengths, ssa, esa, family)
