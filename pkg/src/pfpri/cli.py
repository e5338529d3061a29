"""Command-line front end: parse, build, invert, count, locate, stats."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor


from . import __version__
from .builder import MODES, build_to_files, compute_tables, write_pairs
from .errors import PfpError
from .ingest import IngestConfig, RecordSeparatorPolicy, load_text
from .pfparse import TriggerConfig, parse_text, save_parse
from .rindex import RIndex, build_rindex
from .suffix import BwtString, invert_bwt_to_sa

log = logging.getLogger("pfpri")


class _Outputs:
    """Remembers files written by a command so they can be removed on failure."""

    def __init__(self):
        self.paths: list[str] = []

    def add(self, *paths):
        self.paths.extend(p for p in paths if p not in self.paths)

    def remove_all(self):
        for p in self.paths:
            try:
                os.remove(p)
            except FileNotFoundError:
                pass


def _ingest_config(args) -> IngestConfig:
    policy = (RecordSeparatorPolicy.SEPARATOR_BYTE if args.record_separators
              else RecordSeparatorPolicy.CONCATENATE)
    return IngestConfig(args.strip_to_dna, args.add_revcomp, policy)


def _parse_input(args, with_sa: bool):
    cfg = TriggerConfig(args.w, args.p)
    text = load_text(args.input, _ingest_config(args), args.w, args.format)
    log.info("loaded %s: n=%d sigma=%d", args.input, text.n, text.sigma)
    if args.threads > 1:
        with ProcessPoolExecutor(args.threads) as pool:
            dictionary, parse = parse_text(text, cfg, args.threads, pool, with_sa=False)
    else:
        dictionary, parse = parse_text(text, cfg, with_sa=False)
    # the text is not needed past this point; drop it before the dictionary SA
    del text
    return (dictionary.with_suffix_array() if with_sa else dictionary), parse


def cmd_parse(args, out: _Outputs) -> int:
    dictionary, parse = _parse_input(args, with_sa=False)
    out.add(*(args.output + ext for ext in (".dict", ".parse", ".occ")))
    save_parse(args.output, dictionary, parse)
    log.info("d=%d |D|=%d |P|=%d", dictionary.d, dictionary.length, len(parse))
    return 0


def cmd_build(args, out: _Outputs) -> int:
    base = args.output
    dictionary, parse = _parse_input(args, with_sa=True)
    out.add(base + ".dict", base + ".parse", base + ".occ")
    save_parse(base, dictionary, parse)
    tables = compute_tables(dictionary, parse)
    out.add(base + ".bwt", base + ".sa", base + ".ssa", base + ".esa")
    result = build_to_files(base, dictionary, parse, tables, args.mode)
    del tables, dictionary, parse
    n = result.n
    if os.path.getsize(base + ".bwt") != n:
        raise PfpError("BWT file has the wrong length")
    if args.mode == "sa" and os.path.getsize(base + ".sa") != 8 * n:
        raise PfpError("SA file has the wrong length")
    if args.mode == "sample":
        out.add(base + ".ri")
        index = build_rindex(base + ".bwt", result.ssa, result.esa)
        index.save(base + ".ri")
        log.info("n=%d r=%d n/r=%.3f", index.n, index.r, index.n_over_r)
    return 0


def cmd_invert(args, out: _Outputs) -> int:
    with open(args.bwt, "rb") as fh:
        bwt = BwtString.from_bytes(fh.read())
    if args.mode == "sa":
        sa = invert_bwt_to_sa(bwt, "full")
        out.add(args.output + ".sa")
        sa.astype("<u8").tofile(args.output + ".sa")
    else:
        sample = invert_bwt_to_sa(bwt, "sample")
        out.add(args.output + ".ssa", args.output + ".esa")
        write_pairs(args.output + ".ssa", sample.ssa)
        write_pairs(args.output + ".esa", sample.esa)
    return 0


def read_patterns(path) -> list[tuple[str, bytes]]:
    """(id, pattern) pairs from a FASTA file or a one-pattern-per-line file."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw.lstrip().startswith(b">"):
        records, name, seq = [], None, []
        for line in raw.splitlines():
            if line.startswith(b">"):
                if name is not None:
                    records.append((name, b"".join(seq)))
                fields = line[1:].split()
                name, seq = (fields[0].decode(errors="replace") if fields else str(len(records))), []
            else:
                seq.append(line.strip())
        if name is not None:
            records.append((name, b"".join(seq)))
        return records
    lines = [ln.strip() for ln in raw.splitlines()]
    return [(str(i), p) for i, p in enumerate(ln for ln in lines if ln)]


def _query(args, locate: bool) -> int:
    index = RIndex.load(args.index)
    patterns = read_patterns(args.patterns)

    def one(item):
        pid, pattern = item
        if locate:
            st = index.search(pattern)
            count = 0 if st is None else st.size
            return pid, count, index.locate_all(pattern, args.max_hits) if count else []
        return pid, index.count(pattern), None

    if args.threads > 1:
        with ThreadPoolExecutor(args.threads) as pool:
            rows = list(pool.map(one, patterns))
    else:
        rows = [one(item) for item in patterns]
    fh = open(args.output, "w") if args.output else sys.stdout
    try:
        fh.write("#pattern_id\tcount" + ("\tpositions" if locate else "") + "\n")
        for pid, count, positions in rows:
            cells = [pid, str(count)] + ([str(p) for p in positions] if locate else [])
            fh.write("\t".join(cells) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_count(args, out: _Outputs) -> int:
    if args.output:
        out.add(args.output)
    return _query(args, locate=False)


def cmd_locate(args, out: _Outputs) -> int:
    if args.output:
        out.add(args.output)
    return _query(args, locate=True)


def collect_stats(base) -> dict:
    index = RIndex.load(base + ".ri")
    stats = {"n": index.n, "r": index.r, "n/r": index.n / index.r}
    if os.path.exists(base + ".dict"):
        with open(base + ".dict", "rb") as fh:
            dict_len = len(fh.read())
        stats["|D|"] = dict_len
        stats["|P|"] = os.path.getsize(base + ".parse") // 4
        stats["d"] = os.path.getsize(base + ".occ") // 4
    stats["ri_bytes"] = os.path.getsize(base + ".ri")
    return stats


def cmd_stats(args, out: _Outputs) -> int:
    for key, value in collect_stats(args.base).items():
        print(f"{key}\t{value:.4f}" if isinstance(value, float) else f"{key}\t{value}")
    return 0


def _add_ingest_flags(p):
    p.add_argument("input", help="FASTA or raw text file")
    p.add_argument("-o", "--output", required=True, metavar="BASE", help="output basename")
    p.add_argument("-w", type=int, default=10, help="window width (default 10)")
    p.add_argument("-p", type=int, default=100, help="trigger modulus (default 100)")
    p.add_argument("--format", choices=("auto", "fasta", "raw"), default="auto")
    p.add_argument("--strip-to-dna", action="store_true", help="keep only A, C, G, T, N")
    p.add_argument("--add-revcomp", action="store_true", help="append the reverse complement")
    p.add_argument("--record-separators", action="store_true",
                   help="put byte 0x02 between FASTA records instead of concatenating")
    p.add_argument("--threads", type=int, default=1)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pfpri", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="prefix-free parse: .dict/.parse/.occ")
    _add_ingest_flags(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("build", help="BWT plus SA or SA sample (and .ri) from the parse")
    _add_ingest_flags(p)
    p.add_argument("--mode", choices=MODES, default="sample")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("invert", help="SA or SA sample by LF inversion of a .bwt file")
    p.add_argument("bwt")
    p.add_argument("-o", "--output", required=True, metavar="BASE")
    p.add_argument("--mode", choices=("sa", "sample"), default="sa")
    p.set_defaults(func=cmd_invert)

    for name, func in (("count", cmd_count), ("locate", cmd_locate)):
        p = sub.add_parser(name, help=f"{name} pattern occurrences; TSV output")
        p.add_argument("index", help=".ri file")
        p.add_argument("patterns", help="one pattern per line, or FASTA")
        p.add_argument("-o", "--output", help="TSV path (default stdout)")
        p.add_argument("--threads", type=int, default=1)
        if name == "locate":
            p.add_argument("--max-hits", type=int, default=None)
        p.set_defaults(func=func)

    p = sub.add_parser("stats", help="print n, r, n/r, |D|, |P|, d for a build")
    p.add_argument("base")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    out = _Outputs()
    try:
        return args.func(args, out)
    except (PfpError, OSError, ValueError) as exc:
        out.remove_all()
        print(f"pfpri {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except BaseException:
        out.remove_all()
        raise


if __name__ == "__main__":
    sys.exit(main())
