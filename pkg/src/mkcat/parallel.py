"""Order-preserving map with an optional process pool (capped by MK_CAT_THREADS)."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def worker_count(requested: int | None = None) -> int:
    env = os.environ.get("MK_CAT_THREADS")
    cap = None
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise ValueError(f"MK_CAT_THREADS must be a positive integer, got {env!r}") from None
    n = requested if requested is not None else (cap or 1)
    if cap is not None:
        n = min(n, cap)
    return max(1, int(n))


def ordered_map(fn, items, workers: int | None = None) -> list:
    items = list(items)
    n = worker_count(workers)
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
