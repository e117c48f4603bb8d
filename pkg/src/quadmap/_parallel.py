"""Order-preserving worker pool used by verify, render and sweep."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

ENV_THREADS = "QUADMAP_THREADS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(ENV_THREADS, "1")))
    except ValueError:
        return 1


def parallel_map(fn, items, workers: int | None = None, chunksize: int = 16) -> list:
    """``list(map(fn, items))`` over a process pool; results keep input order."""
    items = list(items)
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
