"""BWT, suffix array and run-boundary SA samples straight from a prefix-free parse.

Every suffix of the text of length > w starts with exactly one
*representative* alpha: the suffix of a dictionary phrase, longer than w,
that it begins with. Scanning the dictionary suffix array yields these
alphas in lexicographic order, so the text suffix array splits into one
contiguous range per alpha. Inside a range, suffixes are ordered like the
BWT of the parse orders the phrases containing them, which the inverted
lists IL give directly. The BWT byte of each entry is the byte preceding
alpha inside its phrase, or the byte preceding the whole phrase occurrence
(PR) when alpha is the entire phrase; the SA value is the occurrence's end
position (EP) minus |alpha| plus one.

The w shortest suffixes consist of sentinels only and have no
representative; they are emitted first.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import StructuralError
from .ingest import SENTINEL
from .pfparse import Dictionary, Parse, parse_suffix_array

MODES = ("bwt", "sa", "sample")
DEFAULT_BATCH = 1 << 18


@dataclass(frozen=True)
class PfpTables:
    """Per-phrase IL/PR/EP lists stored back to back (CSR layout).

    Lists for the phrase with 0-based index i (rank i + 1) occupy
    ``offsets[i]:offsets[i + 1]`` of ``il``, ``pr`` and ``ep``.
    """

    il: np.ndarray
    pr: np.ndarray
    ep: np.ndarray
    offsets: np.ndarray
    n: int
    w: int
    last_content: int

    def il_of(self, i: int) -> np.ndarray:
        return self.il[self.offsets[i]:self.offsets[i + 1]]

    def pr_of(self, i: int) -> np.ndarray:
        return self.pr[self.offsets[i]:self.offsets[i + 1]]

    def ep_of(self, i: int) -> np.ndarray:
        return self.ep[self.offsets[i]:self.offsets[i + 1]]


def compute_tables(dictionary: Dictionary, parse: Parse) -> PfpTables:
    w = dictionary.w
    ranks = parse.ranks.astype(np.int64)
    if len(ranks) == 0:
        raise StructuralError("empty parse")
    sa_p = parse_suffix_array(parse)
    counts = np.bincount(parse.bwt_p, minlength=dictionary.d + 1)
    if counts[0] != 1 or len(counts) != dictionary.d + 1 or not np.array_equal(counts[1:], parse.occ):
        raise StructuralError("Occ disagrees with the phrase multiset of BWT_P")

    idx = ranks - 1
    lengths = dictionary.phrase_lengths[idx]
    ends = np.cumsum(lengths - w) + (w - 1)
    n = int(ends[-1]) + 1
    # byte before each occurrence: the one before the previous phrase's w-byte overlap
    pre = np.empty(len(ranks), dtype=np.uint8)
    pre[0] = SENTINEL  # cyclically, S[0] is preceded by S[n-1]
    dtext = np.frombuffer(dictionary.text, dtype=np.uint8)
    prev_starts = dictionary.phrase_starts[idx[:-1]]
    pre[1:] = dtext[prev_starts + lengths[:-1] - w - 1]
    last_content = int(dtext[dictionary.phrase_starts[idx[-1]] + lengths[-1] - w - 1])
    del prev_starts, dtext

    positions = np.flatnonzero(sa_p > 0)
    occurrence = sa_p[positions] - 1
    phrase = idx[occurrence]
    perm = np.argsort(phrase, kind="stable")
    offsets = np.zeros(dictionary.d + 1, dtype=np.int64)
    np.cumsum(parse.occ, out=offsets[1:])
    occurrence = occurrence[perm]
    return PfpTables(positions[perm].astype(np.int64), pre[occurrence], ends[occurrence],
                     offsets, n, w, last_content)


@dataclass
class _Memberships:
    """One row per (representative, phrase ending with it), in representative order."""

    group: np.ndarray  # running representative index
    phrase: np.ndarray  # 0-based phrase index
    alen: np.ndarray  # |alpha|
    pre: np.ndarray  # byte before alpha inside the phrase, -1 when alpha is the phrase
    dpos: np.ndarray  # start of alpha in the dictionary text


def _memberships(dictionary: Dictionary, block: int = 1 << 16) -> Iterator[_Memberships]:
    if dictionary.sa_d is None:
        raise StructuralError("dictionary suffix array not computed")
    w = dictionary.w
    text = dictionary.text
    dtext = np.frombuffer(text, dtype=np.uint8)
    starts, lengths = dictionary.phrase_starts, dictionary.phrase_lengths
    sa_d = dictionary.sa_d
    group = -1
    prev_pos, prev_len = -1, -1
    for b in range(0, len(sa_d), block):
        x = sa_d[b:b + block].astype(np.int64)
        pid = np.searchsorted(starts, x, side="right") - 1
        alen = starts[pid] + lengths[pid] - x
        keep = alen > w
        x, pid, alen = x[keep], pid[keep], alen[keep]
        if len(x) == 0:
            continue
        # equal suffixes of different phrases are adjacent in SA_D; compare bytes
        # only where the lengths agree
        same = np.zeros(len(x), dtype=bool)
        same[1:] = alen[1:] == alen[:-1]
        same[0] = alen[0] == prev_len
        for m in np.flatnonzero(same).tolist():
            y = prev_pos if m == 0 else int(x[m - 1])
            s, L = int(x[m]), int(alen[m])
            same[m] = text[s:s + L] == text[y:y + L]
        gid = group + np.cumsum(~same)
        group = int(gid[-1])
        prev_pos, prev_len = int(x[-1]), int(alen[-1])
        pre = np.where(x > starts[pid], dtext[x - 1].astype(np.int16), np.int16(-1))
        yield _Memberships(gid, pid, alen, pre, x)


def enumerate_representatives(dictionary: Dictionary) -> Iterator[tuple[bytes, list[int]]]:
    """Yield (alpha, 0-based phrase indices ending with alpha) in increasing alpha order."""
    current, members = None, []
    text = dictionary.text
    for mb in _memberships(dictionary):
        for g, pid, s, L in zip(mb.group.tolist(), mb.phrase.tolist(), mb.dpos.tolist(),
                                mb.alen.tolist()):
            if g != current:
                if current is not None:
                    yield alpha, members
                current, alpha, members = g, text[s:s + L], []
            members.append(pid)
    if current is not None:
        yield alpha, members


def _batches(dictionary: Dictionary, tables: PfpTables, batch: int) -> Iterator[_Memberships]:
    """Regroup membership rows so each batch holds whole groups and about ``batch`` elements."""
    occ = np.diff(tables.offsets)
    carry = None
    for mb in _memberships(dictionary):
        if carry is not None:
            mb = _concat([carry, mb])
        cnt = occ[mb.phrase]
        before = np.cumsum(cnt) - cnt
        heads = np.flatnonzero(np.r_[True, mb.group[1:] != mb.group[:-1]])
        # cut at the first group start past every multiple of ``batch``; the
        # last group may continue into the next block so it always carries over
        marks = np.arange(batch, int(before[heads[-1]]) + 1, batch)
        cuts = np.unique(heads[np.searchsorted(before[heads], marks)]).tolist()
        cuts = [c for c in cuts if c > 0]
        if not cuts or cuts[-1] != heads[-1]:
            cuts.append(int(heads[-1]))
        lo = 0
        for c in cuts:
            if c > lo:
                yield _slice(mb, lo, c)
            lo = c
        carry = _slice(mb, lo, len(mb.group))
    if carry is not None and len(carry.group):
        yield carry


def _concat(parts: list[_Memberships]) -> _Memberships:
    if len(parts) == 1:
        return parts[0]
    return _Memberships(*(np.concatenate([getattr(p, f) for p in parts])
                          for f in ("group", "phrase", "alen", "pre", "dpos")))


def _slice(mb: _Memberships, a: int, b: int) -> _Memberships:
    return _Memberships(mb.group[a:b], mb.phrase[a:b], mb.alen[a:b], mb.pre[a:b], mb.dpos[a:b])


def emit(dictionary: Dictionary, tables: PfpTables,
         batch: int = DEFAULT_BATCH) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Stream (BWT bytes, SA values) chunks in suffix-array order."""
    n, w = tables.n, tables.w
    head_bwt = np.zeros(w, dtype=np.uint8)
    head_bwt[-1] = tables.last_content
    yield head_bwt, np.arange(n - 1, n - w - 1, -1, dtype=np.int64)

    occ = np.diff(tables.offsets)
    emitted = w
    for mb in _batches(dictionary, tables, batch):
        cnt = occ[mb.phrase]
        if (cnt == 0).any():
            raise StructuralError("representative group refers to a phrase with no occurrences")
        total = int(cnt.sum())
        row = np.repeat(np.arange(len(cnt)), cnt)
        first = np.cumsum(cnt) - cnt
        flat = tables.offsets[mb.phrase][row] + (np.arange(total) - first[row])
        il = tables.il[flat]
        group = mb.group[row]
        chars = mb.pre[row]
        whole = chars < 0
        chars[whole] = tables.pr[flat[whole]]
        sa = tables.ep[flat] - mb.alen[row] + 1
        if len(mb.group) > 1 and not (mb.group[1:] != mb.group[:-1]).all():
            order = np.lexsort((il, group))
            chars, sa = chars[order], sa[order]
        emitted += total
        yield chars.astype(np.uint8), sa
    if emitted != n:
        raise StructuralError(f"representative ranges cover {emitted} of {n} suffixes")


class RunSampler:
    """Collects start-run and end-run (position, SA) pairs from streamed chunks."""

    def __init__(self):
        self.ssa: list[np.ndarray] = []
        self.esa: list[np.ndarray] = []
        self._pos = 0
        self._last_char = -1
        self._last_sa = -1

    def feed(self, chars: np.ndarray, sa: np.ndarray):
        m = len(chars)
        if m == 0:
            return
        change = np.zeros(m, dtype=bool)
        change[0] = int(chars[0]) != self._last_char
        change[1:] = chars[1:] != chars[:-1]
        t = np.flatnonzero(change)
        if len(t):
            j = t + self._pos
            self.ssa.append(np.stack([j, sa[t]], axis=1))
            prev_sa = np.where(t > 0, sa[np.maximum(t - 1, 0)], self._last_sa)
            keep = j > 0
            self.esa.append(np.stack([j[keep] - 1, prev_sa[keep]], axis=1))
        self._pos += m
        self._last_char = int(chars[-1])
        self._last_sa = int(sa[-1])

    def finish(self) -> tuple[np.ndarray, np.ndarray]:
        self.esa.append(np.array([[self._pos - 1, self._last_sa]], dtype=np.int64))
        ssa = np.concatenate(self.ssa).astype(np.int64) if self.ssa else np.zeros((0, 2), np.int64)
        esa = np.concatenate(self.esa).astype(np.int64)
        return ssa, esa


@dataclass
class BuildOutput:
    mode: str
    n: int
    bwt: bytes | None = None
    sa: np.ndarray | None = None
    ssa: np.ndarray | None = None
    esa: np.ndarray | None = None
    paths: dict | None = None

    @property
    def r(self) -> int | None:
        return None if self.ssa is None else len(self.ssa)


def build(dictionary: Dictionary, parse: Parse, tables: PfpTables | None = None,
          mode: str = "sample", batch: int = DEFAULT_BATCH) -> BuildOutput:
    """In-memory build. ``mode``: 'bwt', 'sa' (BWT + full SA) or 'sample' (BWT + run samples)."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    tables = tables or compute_tables(dictionary, parse)
    bwt_parts, sa_parts = [], []
    sampler = RunSampler() if mode == "sample" else None
    for chars, sa in emit(dictionary, tables, batch):
        bwt_parts.append(chars.tobytes())
        if mode == "sa":
            sa_parts.append(sa)
        elif sampler is not None:
            sampler.feed(chars, sa)
    out = BuildOutput(mode, tables.n, bwt=b"".join(bwt_parts))
    if mode == "sa":
        out.sa = np.concatenate(sa_parts)
    elif sampler is not None:
        out.ssa, out.esa = sampler.finish()
    return out


def build_to_files(base, dictionary: Dictionary, parse: Parse, tables: PfpTables | None = None,
                   mode: str = "sample", batch: int = DEFAULT_BATCH) -> BuildOutput:
    """Stream the build to ``<base>.bwt`` plus ``.sa`` or ``.ssa``/``.esa`` (u64 LE)."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    base = os.fspath(base)
    tables = tables or compute_tables(dictionary, parse)
    paths = {"bwt": base + ".bwt"}
    if mode == "sa":
        paths["sa"] = base + ".sa"
    sampler = RunSampler() if mode == "sample" else None
    with open(paths["bwt"], "wb") as fbwt, \
            (open(paths["sa"], "wb") if mode == "sa" else _Null()) as fsa:
        for chars, sa in emit(dictionary, tables, batch):
            fbwt.write(chars.tobytes())
            if mode == "sa":
                fsa.write(sa.astype("<u8").tobytes())
            elif sampler is not None:
                sampler.feed(chars, sa)
    out = BuildOutput(mode, tables.n, paths=paths)
    if sampler is not None:
        out.ssa, out.esa = sampler.finish()
        paths["ssa"], paths["esa"] = base + ".ssa", base + ".esa"
        write_pairs(paths["ssa"], out.ssa)
        write_pairs(paths["esa"], out.esa)
    return out


class _Null:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def write_pairs(path, pairs: np.ndarray):
    np.ascontiguousarray(pairs, dtype="<u8").tofile(path)


def read_pairs(path) -> np.ndarray:
    raw = np.fromfile(path, dtype="<u8")
    if len(raw) % 2:
        raise StructuralError(f"{path}: odd number of u64 values in a pair file")
    return raw.astype(np.int64).reshape(-1, 2)
