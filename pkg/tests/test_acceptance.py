"""Acceptance criteria 1-9, each at its stated tolerance.

Run alone with ``pytest tests/test_acceptance.py``; the terminal summary ends
with one PASS/FAIL line per criterion.
"""

import os
import subprocess
import sys
import time

import numpy as np
import pytest

from pfpri.cli import main
from pfpri.rindex import RIndex, build_rindex

from oracles import (index_for, mutate, mutated_copies, naive_occurrences, oracle,
                     oracle_boundaries, pfp, random_content)

WS, PS = (2, 4, 8), (1, 8, 64)
N_STRINGS = 1000
MAX_N = 4096


@pytest.fixture(scope="module")
def corpus():
    """1000 random contents with their oracle (SA, BWT) for each window width."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240601)
    items = []
    for i in range(N_STRINGS):
        sigma = (2, 4, 5)[i % 3]
        content = random_content(rng, int(rng.integers(1, MAX_N - max(WS) + 1)), sigma)
        items.append((content, {w: oracle(content + bytes(w)) for w in WS}))
    return items, time.perf_counter() - t0


def run_corpus(corpus, mode, check):
    items, oracle_time = corpus
    t0 = time.perf_counter()
    failures = 0
    for content, oracles in items:
        for w in WS:
            for p in PS:
                out = pfp(content, w, p, mode)[3]
                if not check(out, *oracles[w]):
                    failures += 1
    return failures, len(items) * len(WS) * len(PS), oracle_time + time.perf_counter() - t0


@pytest.mark.criterion(1)
def test_oracle_bwt_equality(corpus, report):
    failures, cases, elapsed = run_corpus(corpus, "bwt", lambda out, sa, bwt: out.bwt == bwt)
    report(f"{cases - failures}/{cases} BWTs equal the oracle, {elapsed:.1f}s (limit 120s)")
    assert failures == 0
    assert elapsed < 120


@pytest.mark.criterion(2)
def test_oracle_sa_equality(corpus, report):
    failures, cases, elapsed = run_corpus(
        corpus, "sa", lambda out, sa, bwt: out.bwt == bwt and np.array_equal(out.sa, sa))
    report(f"{cases - failures}/{cases} suffix arrays equal the oracle, {elapsed:.1f}s")
    assert failures == 0


def _sample_ok(out, sa, bwt):
    ssa, esa = oracle_boundaries(bwt, sa)
    return (np.array_equal(out.ssa, ssa) and np.array_equal(out.esa, esa)
            and out.r == len(ssa) == len(esa))


@pytest.mark.criterion(3)
def test_sample_correctness(corpus, report):
    failures, cases, elapsed = run_corpus(corpus, "sample", _sample_ok)
    report(f"{cases - failures}/{cases} run-boundary samples equal the oracle, {elapsed:.1f}s")
    assert failures == 0


def query_patterns(text: bytes, rng, count):
    content = text.rstrip(b"\x00")
    out = []
    for j in range(count):
        m = int(rng.integers(1, 33))
        if j % 2 == 0 and len(content) >= m:
            i = int(rng.integers(0, len(content) - m + 1))
            out.append(content[i:i + m])
        else:
            out.append(random_content(rng, m, 4))
    return out


@pytest.mark.criterion(4)
def test_query_correctness(report):
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    bad = total = 0
    for _ in range(50):
        content = random_content(rng, int(rng.integers(1, 65537)), int(rng.choice([2, 4, 5])))
        text, idx = index_for(content, 10, 100)
        for pattern in query_patterns(text, rng, 200):
            occ = naive_occurrences(text, pattern)
            located = idx.locate_all(pattern)
            total += 1
            if idx.count(pattern) != len(occ) or sorted(located) != occ:
                bad += 1
    elapsed = time.perf_counter() - t0
    report(f"{total - bad}/{total} patterns exact for count and locate, {elapsed:.1f}s (limit 300s)")
    assert bad == 0
    assert elapsed < 300


@pytest.mark.criterion(5)
def test_phi_inverse_sweep(report):
    rng = np.random.default_rng(5)
    bad = checked = 0
    for _ in range(100):
        w = int(rng.integers(1, 9))
        content = random_content(rng, int(rng.integers(1, 8192 - w + 1)), int(rng.choice([2, 4, 5])))
        text = content + bytes(w)
        sa, _ = oracle(text)
        out = pfp(content, w, 16, "sample")[3]
        idx = build_rindex(out.bwt, out.ssa, out.esa)
        sa_list = sa.tolist()
        for h in range(len(sa_list) - 1):
            checked += 1
            bad += idx.phi_inverse(sa_list[h]) != sa_list[h + 1]
        bad += idx.phi_inverse(sa_list[-1]) is not None
    report(f"{checked - bad}/{checked} phi-inverse values exact over 100 texts")
    assert bad == 0


@pytest.mark.criterion(6)
def test_cross_path_equality(corpus, tmp_path, report):
    items, _ = corpus
    t0 = time.perf_counter()
    bad = cases = 0
    raw = tmp_path / "c.txt"
    base, inv = str(tmp_path / "b"), str(tmp_path / "i")
    for content, _ in items:
        raw.write_bytes(content)
        for w in WS:
            for p in PS:
                cases += 1
                rc = main(["build", "-w", str(w), "-p", str(p), "--mode", "sa", "--format", "raw",
                           str(raw), "-o", base])
                rc |= main(["invert", base + ".bwt", "-o", inv, "--mode", "sa"])
                with open(base + ".sa", "rb") as a, open(inv + ".sa", "rb") as b:
                    bad += rc != 0 or a.read() != b.read()
    report(f"{cases - bad}/{cases} invert .sa files byte-identical to build --mode sa, "
           f"{time.perf_counter() - t0:.1f}s")
    assert bad == 0


KS = (1, 2, 4, 8, 16)


@pytest.fixture(scope="module")
def scaling(tmp_path_factory):
    """CLI builds on k mutated copies of a 1 MiB seed: stats, .ri size and peak RSS."""
    root = tmp_path_factory.mktemp("scaling")
    rng = np.random.default_rng(7)
    seed = random_content(rng, 1 << 20, 4)
    results = {}
    t0 = time.perf_counter()
    for k in KS:
        path = root / f"k{k}.fa"
        copies = [seed] + [mutate(seed, 0.001, rng) for _ in range(k - 1)]
        with open(path, "wb") as fh:
            for i, c in enumerate(copies):
                fh.write(b">copy%d\n" % i + c + b"\n")
        del copies
        base = str(root / f"k{k}")
        proc = subprocess.Popen([sys.executable, "-m", "pfpri", "build", str(path), "-o", base],
                                stdout=subprocess.DEVNULL, stderr=subprocess.PIPE)
        _, status, usage = os.wait4(proc.pid, 0)
        err = proc.stderr.read().decode()
        proc.stderr.close()
        assert os.waitstatus_to_exitcode(status) == 0, err
        out = subprocess.run([sys.executable, "-m", "pfpri", "stats", base],
                             capture_output=True, text=True, check=True).stdout
        stats = dict(line.split("\t") for line in out.strip().splitlines())
        # ru_maxrss is reported in KiB on Linux
        results[k] = {"n_over_r": float(stats["n/r"]), "ri": os.path.getsize(base + ".ri"),
                      "rss": usage.ru_maxrss * 1024, "n": int(stats["n"])}
        for ext in (".bwt", ".ssa", ".esa"):
            os.remove(base + ext)
        os.remove(path)
    return results, time.perf_counter() - t0


@pytest.mark.criterion(7)
def test_compression_trend(scaling, report):
    res, elapsed = scaling
    ratio = res[8]["n_over_r"] / res[1]["n_over_r"]
    size = res[16]["ri"] / res[1]["ri"]
    trend = ", ".join(f"k={k}: {res[k]['n_over_r']:.2f}" for k in KS)
    report(f"n/r {trend}; k8/k1 = {ratio:.2f} (need >= 4); .ri k16/k1 = {size:.2f} "
           f"(need <= 3); {elapsed:.0f}s (limit 600s)")
    assert ratio >= 4
    assert size <= 3
    assert elapsed < 600


@pytest.mark.criterion(8)
def test_sublinear_memory(scaling, report):
    res, _ = scaling
    ratio = res[16]["rss"] / res[1]["rss"]
    report(f"peak RSS k=1 {res[1]['rss'] / 2**20:.0f} MiB, k=16 {res[16]['rss'] / 2**20:.0f} MiB, "
           f"ratio {ratio:.2f} (need <= 2) for {res[16]['n'] / res[1]['n']:.1f}x the text")
    assert ratio <= 2


@pytest.mark.criterion(9)
def test_index_round_trip(tmp_path, report):
    rng = np.random.default_rng(9)
    text, idx = index_for(mutated_copies(random_content(rng, 20000, 4), 4, 0.001, rng), 10, 100)
    before = idx.to_bytes()
    path = tmp_path / "x.ri"
    idx.save(path)
    back = RIndex.load(path)
    pats = query_patterns(text, rng, 1000)
    same = sum(idx.count(p) == back.count(p) and idx.locate_all(p) == back.locate_all(p)
               for p in pats)
    report(f"{same}/1000 patterns identical after save/load; bytes identical: "
           f"{back.to_bytes() == before}")
    assert same == 1000
    assert back.to_bytes() == before
