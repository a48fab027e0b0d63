"""Fixed-size chunking of replicate loops.

Chunk boundaries depend only on the total and the chunk size, and each chunk
owns its random stream, so a thread pool changes scheduling but never the
numbers produced.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

# replicates per random stream
CHUNK = 4096


def chunk_plan(total: int, chunk: int = CHUNK) -> list[tuple[int, int, int]]:
    """``(index, start, size)`` for each chunk covering ``range(total)``."""
    return [(i, s, min(chunk, total - s)) for i, s in enumerate(range(0, total, chunk))]


def run_chunks(fn: Callable[[int, int, int], np.ndarray], total: int,
               threads: int | None = None, chunk: int = CHUNK) -> np.ndarray:
    """Evaluate ``fn(index, start, size)`` per chunk and concatenate in order."""
    jobs = chunk_plan(total, chunk)
    if threads is None or threads <= 1 or len(jobs) == 1:
        parts = [fn(*j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as ex:
            parts = list(ex.map(lambda j: fn(*j), jobs))
    return np.concatenate(parts)


def map_ordered(fn: Callable, items, threads: int | None = None) -> list:
    """``list(map(fn, items))`` optionally on a thread pool."""
    if threads is None or threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=int(threads)) as ex:
        return list(ex.map(fn, items))
