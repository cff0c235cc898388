"""Small shared helpers: capped thread pool for parameter sweeps."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    """Parallelism cap from MIRRORQED_THREADS (default: cpu count)."""
    raw = os.environ.get("MIRRORQED_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ValueError(f"MIRRORQED_THREADS must be an integer, got {raw!r}") from exc
        if n < 1:
            raise ValueError("MIRRORQED_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Order-preserving map over independent work items.

    Runs serially when the cap is 1 or there is a single item; otherwise
    uses threads (the heavy lifting in this package is numpy/numba code
    that releases the GIL).
    """
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
