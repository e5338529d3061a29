"""Prefix-free parsing construction of BWT, suffix array and r-index samples."""

__version__ = "0.1.0"

from .builder import build, build_to_files, compute_tables
from .errors import (IndexFormatError, IngestError, PfpError, RankOverflowError,
                     StructuralError, VersionMismatchError)
from .ingest import (IngestConfig, RecordSeparatorPolicy, TextBuffer, load_fasta, load_raw, load_text,
                     text_from_bytes)
from .pfparse import TriggerConfig, find_triggers, parse_suffix_array, parse_text
from .rindex import RIndex, build_rindex
from .suffix import BwtString, invert_bwt_to_sa, sa_fast, sa_naive

__all__ = [
    "BwtString", "IndexFormatError", "IngestConfig", "IngestError", "PfpError",
    "RIndex", "RankOverflowError", "RecordSeparatorPolicy", "StructuralError",
    "TextBuffer", "TriggerConfig", "VersionMismatchError", "build", "build_rindex",
    "build_to_files", "compute_tables", "find_triggers", "invert_bwt_to_sa",
    "load_fasta", "load_raw", "load_text", "parse_suffix_array", "parse_text",
    "sa_fast", "sa_naive", "text_from_bytes",
]
