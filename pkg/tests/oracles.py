"""Brute-force reference implementations shared by the test modules."""

import numpy as np

from pfpri.builder import build
from pfpri.ingest import text_from_bytes
from pfpri.pfparse import TriggerConfig, parse_text
from pfpri.rindex import build_rindex
from pfpri.suffix import bwt_from_sa, sa_naive

ALPHABETS = {2: b"AC", 4: b"ACGT", 5: b"ACGTN"}


def random_content(rng, n, sigma):
    alphabet = np.frombuffer(ALPHABETS[sigma], dtype=np.uint8)
    return alphabet[rng.integers(0, sigma, n)].tobytes()


def mutate(seed: bytes, rate, rng, alphabet=b"ACGT"):
    arr = np.frombuffer(seed, dtype=np.uint8).copy()
    m = max(1, int(round(len(arr) * rate)))
    pos = rng.choice(len(arr), m, replace=False)
    letters = np.frombuffer(alphabet, dtype=np.uint8)
    for i in pos:
        choices = letters[letters != arr[i]]
        arr[i] = choices[rng.integers(0, len(choices))]
    return arr.tobytes()


def mutated_copies(seed: bytes, k, rate, rng):
    return seed + b"".join(mutate(seed, rate, rng) for _ in range(k - 1))


def naive_occurrences(text: bytes, pattern: bytes):
    out, i = [], text.find(pattern)
    while i >= 0:
        out.append(i)
        i = text.find(pattern, i + 1)
    return out


def oracle(text: bytes):
    """(SA, BWT bytes) of a terminated text by comparison sort."""
    sa = sa_naive(text)
    return sa, bwt_from_sa(text, sa).data


def oracle_boundaries(bwt: bytes, sa):
    arr = np.frombuffer(bwt, dtype=np.uint8)
    change = np.flatnonzero(arr[1:] != arr[:-1]) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change - 1, [len(arr) - 1]))
    return np.stack([starts, sa[starts]], 1), np.stack([ends, sa[ends]], 1)


def pfp(content: bytes, w, p, mode="sample", batch=None):
    """TextBuffer, Dictionary, Parse and BuildOutput for ``content`` under (w, p)."""
    text = text_from_bytes(content, w)
    dictionary, parse = parse_text(text, TriggerConfig(w, p))
    kwargs = {} if batch is None else {"batch": batch}
    return text, dictionary, parse, build(dictionary, parse, mode=mode, **kwargs)


def index_for(content: bytes, w=4, p=16):
    text, _, _, out = pfp(content, w, p, "sample")
    return text.data, build_rindex(out.bwt, out.ssa, out.esa)
