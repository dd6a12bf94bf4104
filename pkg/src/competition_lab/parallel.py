"""Replicate fan-out. Workers only change wall-clock time, never results:
each replicate's randomness is keyed by its index and outputs are merged in
index order.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from functools import partial

WORKERS_ENV = "COMPETITION_LAB_WORKERS"


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    return max(1, workers)


def map_replicates(fn, n_reps: int, workers: int | None = None, **kwargs) -> list:
    """[fn(i, **kwargs) for i in range(n_reps)], optionally across processes."""
    workers = resolve_workers(workers)
    if workers == 1 or n_reps <= 1:
        return [fn(i, **kwargs) for i in range(n_reps)]
    call = partial(fn, **kwargs)
    chunk = max(1, n_reps // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(call, range(n_reps), chunksize=chunk))
