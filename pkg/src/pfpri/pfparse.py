"""Prefix-free parsing: split a text at trigger windows into a dictionary and a parse.

A window of ``w`` bytes is a trigger when its Karp-Rabin hash is 0 mod ``p``.
The first window and the last window (the all-sentinel tail) are always
triggers. Consecutive triggers delimit phrases that overlap by exactly ``w``
bytes; the dictionary keeps each distinct phrase once, in lexicographic
order, and the parse lists the 1-based dictionary rank of every phrase
occurrence.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

import numpy as np

from .errors import IndexFormatError, RankOverflowError, StructuralError
from .ingest import SENTINEL, SEPARATOR, TextBuffer
from .suffix import sa_fast

MERSENNE_61 = (1 << 61) - 1
# MurmurHash2 multiplier
DEFAULT_BASE = 0x5BD1E995
MAX_PHRASES = (1 << 32) - 2


@dataclass(frozen=True)
class TriggerConfig:
    w: int = 10
    p: int = 100
    hash_base: int = DEFAULT_BASE
    hash_modulus: int = MERSENNE_61

    def __post_init__(self):
        if self.w < 1:
            raise ValueError("w must be >= 1")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.hash_modulus <= 1 << 32:
            raise ValueError("hash modulus must exceed 2^32")
        if not 1 < self.hash_base < self.hash_modulus:
            raise ValueError("hash base must lie in (1, modulus)")


def window_hash(window, cfg: TriggerConfig) -> int:
    """Polynomial hash sum(window[j] * base^(len-1-j)) mod modulus, computed from scratch."""
    h = 0
    for b in window:
        h = (h * cfg.hash_base + b) % cfg.hash_modulus
    return h


def _interior_triggers(data, offset: int, lo: int, hi: int, w: int, p: int,
                       base: int, mod: int) -> list[int]:
    """Trigger positions s in [lo, hi) of the global text.

    ``data`` holds the global bytes starting at ``offset`` and must cover
    every window that starts in [lo, hi).
    """
    if lo >= hi:
        return []
    mv = memoryview(data)
    a = lo - offset
    h = 0
    for b in mv[a:a + w]:
        h = (h * base + b) % mod
    found = [lo] if h % p == 0 else []
    top = pow(base, w - 1, mod)
    s = lo
    # slide: drop mv[s], take mv[s + w]
    for old, new in zip(mv[a:a + hi - lo - 1], mv[a + w:a + w + hi - lo - 1]):
        s += 1
        h = ((h - old * top) * base + new) % mod
        if h % p == 0:
            found.append(s)
    return found


def _chunk_job(args):
    return _interior_triggers(*args)


def find_triggers(text: TextBuffer, cfg: TriggerConfig, chunks: int = 1,
                  executor=None) -> list[int]:
    """Strictly increasing trigger positions, starting at 0 and ending at n - w.

    With ``chunks > 1`` the interior range is split into independent pieces
    (each carrying a ``w - 1`` byte overlap) and mapped over ``executor``
    (or computed serially); the merged result equals the sequential one.
    """
    data, w = text.data, cfg.w
    n = len(data)
    if n < w:
        raise ValueError("text shorter than the window")
    last = n - w
    if last == 0:
        return [0]
    lo, hi = 1, last
    chunks = max(1, min(chunks, hi - lo))
    bounds = np.linspace(lo, hi, chunks + 1).astype(int).tolist() if hi > lo else [lo, hi]
    jobs = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        if a < b:
            jobs.append((data[a:b + w - 1], a, a, b, w, cfg.p, cfg.hash_base, cfg.hash_modulus)
                        if chunks > 1 else
                        (data, 0, a, b, w, cfg.p, cfg.hash_base, cfg.hash_modulus))
    mapper = executor.map if executor is not None else map
    out = [0]
    for part in mapper(_chunk_job, jobs):
        out.extend(part)
    out.append(last)
    return out


@dataclass(frozen=True)
class Dictionary:
    """Sorted distinct phrases joined as ``t1 0x01 t2 0x01 ... td 0x01 0x00``."""

    text: bytes
    phrase_starts: np.ndarray
    phrase_lengths: np.ndarray
    w: int
    sa_d: np.ndarray | None = None

    @property
    def d(self) -> int:
        return len(self.phrase_starts)

    @property
    def length(self) -> int:
        return len(self.text)

    def phrase(self, i: int) -> bytes:
        """Phrase with 0-based dictionary index ``i`` (rank ``i + 1``)."""
        s = int(self.phrase_starts[i])
        return self.text[s:s + int(self.phrase_lengths[i])]

    def phrases(self) -> list[bytes]:
        return [self.phrase(i) for i in range(self.d)]

    @classmethod
    def from_phrases(cls, phrases, w: int, with_sa: bool = True) -> "Dictionary":
        lengths = np.fromiter((len(t) for t in phrases), dtype=np.int64, count=len(phrases))
        starts = np.zeros(len(phrases), dtype=np.int64)
        if len(phrases) > 1:
            np.cumsum(lengths[:-1] + 1, out=starts[1:])
        text = bytes([SEPARATOR]).join(phrases) + bytes([SEPARATOR, SENTINEL])
        sa_d = sa_fast(text) if with_sa else None
        return cls(text, starts, lengths, w, sa_d)

    def with_suffix_array(self) -> "Dictionary":
        if self.sa_d is not None:
            return self
        return dataclasses.replace(self, sa_d=sa_fast(self.text))


@dataclass
class Parse:
    ranks: np.ndarray  # uint32, 1-based dictionary ranks
    occ: np.ndarray  # int64, occ[i] = occurrences of rank i + 1
    bwt_p: np.ndarray | None = None

    def __len__(self):
        return len(self.ranks)


def parse_text(text: TextBuffer, cfg: TriggerConfig, chunks: int = 1,
               executor=None, with_sa: bool = True) -> tuple[Dictionary, Parse]:
    """Parse ``text`` into (Dictionary, Parse).

    With ``with_sa=False`` the dictionary suffix array is left out so the
    caller can release the text first and add it later via
    ``Dictionary.with_suffix_array``.
    """
    if text.w_pad < cfg.w:
        raise ValueError(f"text carries {text.w_pad} sentinels but w = {cfg.w}")
    triggers = find_triggers(text, cfg, chunks, executor)
    data, w = text.data, cfg.w
    first_seen: dict[bytes, int] = {}
    seq = np.empty(len(triggers) - 1, dtype=np.int64)
    for q in range(len(triggers) - 1):
        phrase = data[triggers[q]:triggers[q + 1] + w]
        seq[q] = first_seen.setdefault(phrase, len(first_seen))
    if len(first_seen) > MAX_PHRASES:
        raise RankOverflowError(f"{len(first_seen)} phrases do not fit 32-bit ranks")
    phrases = list(first_seen)
    del first_seen
    order = sorted(range(len(phrases)), key=phrases.__getitem__)
    rank_of = np.empty(len(phrases), dtype=np.int64)
    rank_of[order] = np.arange(1, len(phrases) + 1)
    ranks = rank_of[seq].astype(np.uint32)
    dictionary = Dictionary.from_phrases([phrases[i] for i in order], w, with_sa)
    occ = np.bincount(ranks, minlength=len(phrases) + 1)[1:].astype(np.int64)
    return dictionary, Parse(ranks, occ)


def parse_suffix_array(parse: Parse) -> np.ndarray:
    """Suffix array of the rank sequence followed by an end marker of rank 0.

    Also stores BWT_P on ``parse``: entry j is the rank preceding suffix
    SA_P[j], and 0 (the end marker) where SA_P[j] = 0.
    """
    seq = np.empty(len(parse.ranks) + 1, dtype=np.int64)
    seq[:-1] = parse.ranks
    seq[-1] = 0
    sa_p = sa_fast(seq)
    parse.bwt_p = seq[sa_p - 1].astype(np.uint32)
    return sa_p


def reconstruct(dictionary: Dictionary, parse: Parse) -> bytes:
    """Glue the parsed phrases back together, dropping each w-byte overlap."""
    w = dictionary.w
    out = bytearray()
    for q, rank in enumerate(parse.ranks.tolist()):
        phrase = dictionary.phrase(rank - 1)
        out += phrase if q == 0 else phrase[w:]
    return bytes(out)


def save_parse(base, dictionary: Dictionary, parse: Parse) -> list[str]:
    """Write ``<base>.dict``, ``<base>.parse`` and ``<base>.occ``; return the paths."""
    base = os.fspath(base)
    paths = [base + ".dict", base + ".parse", base + ".occ"]
    with open(paths[0], "wb") as fh:
        fh.write(dictionary.text)
    parse.ranks.astype("<u4").tofile(paths[1])
    parse.occ.astype("<u4").tofile(paths[2])
    return paths


def load_parse(base, w: int) -> tuple[Dictionary, Parse]:
    base = os.fspath(base)
    with open(base + ".dict", "rb") as fh:
        text = fh.read()
    if len(text) < 2 or text[-2:] != bytes([SEPARATOR, SENTINEL]):
        raise IndexFormatError(f"{base}.dict is not a separator-terminated dictionary")
    phrases = text[:-2].split(bytes([SEPARATOR]))
    dictionary = Dictionary.from_phrases(phrases, w)
    ranks = np.fromfile(base + ".parse", dtype="<u4").astype(np.uint32)
    occ = np.fromfile(base + ".occ", dtype="<u4").astype(np.int64)
    if len(occ) != dictionary.d or int(occ.sum()) != len(ranks):
        raise StructuralError("occurrence counts disagree with the parse")
    return dictionary, Parse(ranks, occ)
