"""Seeded, chunked Monte Carlo execution.

Trials are grouped into fixed-size chunks; chunk ``k`` draws from the
substream ``SeedSequence(seed, spawn_key=(k,))``. Results therefore depend
only on ``(seed, trials, chunk_size)``, never on the thread count or the
order in which workers finish.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from isac_netsim.params import McEstimate

DEFAULT_CHUNK = 10_000
THREADS_ENV = "ISAC_NETSIM_THREADS"

_MASK64 = (1 << 64) - 1


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return 1


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the counter ``key`` under master ``seed``."""
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def chunk_sizes(trials: int, chunk: int = DEFAULT_CHUNK):
    full, rest = divmod(int(trials), int(chunk))
    sizes = [chunk] * full
    if rest:
        sizes.append(rest)
    return sizes


def map_chunks(fn, trials: int, seed: int, *, chunk: int = DEFAULT_CHUNK,
               threads: int | None = None, stream: int = 0) -> list:
    """Call ``fn(rng, size)`` per chunk and return results in chunk order."""
    sizes = chunk_sizes(trials, chunk)
    threads = threads or default_threads()
    jobs = [(substream(seed, stream, k), n) for k, n in enumerate(sizes)]
    if threads <= 1 or len(jobs) <= 1:
        return [fn(rng, n) for rng, n in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


@dataclass
class _Moments:
    count: int = 0
    total: float = 0.0
    total_sq: float = 0.0
    singular: int = 0


def reduce_values(chunks, trials: int, seed: int) -> McEstimate:
    """Combine per-chunk value arrays (inf/nan = singular) into an estimate."""
    acc = _Moments()
    sums, sq = [], []
    for values in chunks:
        values = np.asarray(values, dtype=float)
        ok = np.isfinite(values)
        acc.singular += int(values.size - ok.sum())
        v = values[ok]
        acc.count += int(v.size)
        sums.append(math.fsum(v))
        sq.append(math.fsum(v * v))
    if acc.count == 0:
        return McEstimate(math.nan, math.nan, trials, seed, acc.singular)
    mean = math.fsum(sums) / acc.count
    if acc.count > 1:
        var = max(math.fsum(sq) / acc.count - mean * mean, 0.0) * acc.count / (acc.count - 1)
        se = math.sqrt(var / acc.count)
    else:
        se = 0.0
    return McEstimate(mean, se, trials, seed, acc.singular)


def mc_mean(fn, trials: int, seed: int, *, chunk: int = DEFAULT_CHUNK,
            threads: int | None = None, stream: int = 0) -> McEstimate:
    """Estimate E[value] where ``fn(rng, size)`` returns ``size`` samples."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return reduce_values(map_chunks(fn, trials, seed, chunk=chunk, threads=threads, stream=stream),
                         trials, seed)
