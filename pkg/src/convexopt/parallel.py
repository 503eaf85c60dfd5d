"""Order-preserving parallel map capped by ``CONVEXOPT_THREADS``."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_THREADS = "CONVEXOPT_THREADS"


def max_workers(requested: Optional[int] = None) -> int:
    """Worker count: ``requested`` if given, else the environment cap, else 1."""
    if requested is not None:
        return max(1, int(requested))
    raw = os.environ.get(ENV_THREADS, "").strip()
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> list[R]:
    """``[fn(x) for x in items]``, possibly on a thread pool; results keep input order."""
    items = list(items)
    n = min(max_workers(workers), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
