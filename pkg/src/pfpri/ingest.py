"""Loading raw bytes and FASTA files into sentinel-terminated text buffers.

Byte layout used throughout the package:

* ``0x00`` is the sentinel; a text ends with ``w_pad`` copies of it and it
  occurs nowhere else.
* ``0x01`` is reserved for the dictionary phrase separator.
* content bytes are ``>= 0x02``. ``0x02`` doubles as the optional FASTA
  record separator, which sorts below every DNA letter.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import IngestError

SENTINEL = 0x00
SEPARATOR = 0x01
RECORD_SEPARATOR = 0x02

DNA = b"ACGTN"
_WHITESPACE = b" \t\r\n\v\f"
_RESERVED = re.compile(b"[\x00\x01]")

_TO_UPPER_DNA = bytes.maketrans(b"acgtn", b"ACGTN")
_KEEP_DNA_DELETE = bytes(b for b in range(256) if b not in b"ACGTNacgtn")
_COMPLEMENT = bytes.maketrans(b"ACGTNacgtn", b"TGCANtgcan")


class RecordSeparatorPolicy(str, enum.Enum):
    CONCATENATE = "concatenate"
    SEPARATOR_BYTE = "per-record-separator-byte"


@dataclass(frozen=True)
class IngestConfig:
    strip_to_dna: bool = False
    add_revcomp: bool = False
    record_separator_policy: RecordSeparatorPolicy = RecordSeparatorPolicy.CONCATENATE


@dataclass(frozen=True)
class TextBuffer:
    data: bytes
    w_pad: int
    alphabet: tuple[int, ...] = field(default=())

    @property
    def n(self) -> int:
        return len(self.data)

    @property
    def sigma(self) -> int:
        return len(self.alphabet)

    @property
    def content(self) -> bytes:
        return self.data[: len(self.data) - self.w_pad]


def byte_histogram(data, chunk: int = 1 << 20) -> np.ndarray:
    """Per-byte-value counts of ``data`` as an int64 array of length 256."""
    arr = np.frombuffer(data, dtype=np.uint8)
    counts = np.zeros(256, dtype=np.int64)
    for start in range(0, len(arr), chunk):
        counts += np.bincount(arr[start:start + chunk], minlength=256)
    return counts


def reverse_complement(seq: bytes) -> bytes:
    """Byte-wise reverse complement; bytes other than ACGTN (any case) map to themselves."""
    return seq[::-1].translate(_COMPLEMENT)


def _terminate(content, w: int) -> TextBuffer:
    if w < 1:
        raise ValueError("window width must be positive")
    if not content:
        raise IngestError("empty input")
    bad = _RESERVED.search(content)
    if bad is not None:
        raise IngestError(f"reserved byte 0x{content[bad.start()]:02x}", bad.start())
    hist = byte_histogram(content)
    alphabet = tuple(int(b) for b in np.flatnonzero(hist))
    content += bytes(w)
    return TextBuffer(bytes(content), w, alphabet)


def text_from_bytes(content: bytes, w: int) -> TextBuffer:
    """Terminate in-memory content with ``w`` sentinels, validating it like ``load_raw``."""
    return _terminate(bytearray(content), w)


def load_raw(path, w: int) -> TextBuffer:
    """Read a file verbatim and append ``w`` sentinels."""
    with open(path, "rb") as fh:
        data = fh.read()
    return _terminate(bytearray(data), w)


def load_fasta(path, cfg: IngestConfig | None = None, w: int = 10) -> TextBuffer:
    """Read a FASTA file into a TextBuffer.

    Header lines are dropped and sequence lines joined. With
    ``cfg.strip_to_dna`` only A, C, G, T and N survive (lower case is folded
    to upper case); otherwise only whitespace is removed. With
    ``cfg.add_revcomp`` the reverse complement of all kept content is appended
    after the forward strand.
    """
    cfg = cfg or IngestConfig()
    if w < 2:
        raise ValueError("window width must be at least 2 for FASTA input")
    separate = cfg.record_separator_policy == RecordSeparatorPolicy.SEPARATOR_BYTE
    buf = bytearray()
    pending_sep = False
    try:
        with open(path, "rb") as fh:
            for line in fh:
                if line.startswith(b">"):
                    pending_sep = separate and len(buf) > 0
                    continue
                if cfg.strip_to_dna:
                    seq = line.translate(_TO_UPPER_DNA, _KEEP_DNA_DELETE)
                else:
                    seq = line.translate(None, _WHITESPACE)
                if not seq:
                    continue
                if pending_sep:
                    buf.append(RECORD_SEPARATOR)
                    pending_sep = False
                buf += seq
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if cfg.add_revcomp and buf:
        buf += reverse_complement(bytes(buf))
    return _terminate(buf, w)


def load_text(path, cfg: IngestConfig | None = None, w: int = 10, fmt: str = "auto") -> TextBuffer:
    """Dispatch on ``fmt`` ('fasta', 'raw' or 'auto': FASTA iff the file starts with '>')."""
    if fmt == "auto":
        try:
            with open(path, "rb") as fh:
                head = fh.read(1)
        except OSError as exc:
            raise IngestError(f"cannot read {path}: {exc.strerror or exc}") from exc
        fmt = "fasta" if head == b">" else "raw"
    if fmt == "fasta":
        return load_fasta(path, cfg, w)
    if fmt == "raw":
        try:
            return load_raw(path, w)
        except OSError as exc:
            raise IngestError(f"cannot read {path}: {exc.strerror or exc}") from exc
    raise ValueError(f"unknown input format {fmt!r}")
