from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_WORKERS = 1

ChunkFn = Callable[[int, int], np.ndarray]


def chunk_bounds(n_items: int, chunk: int) -> list[tuple[int, int]]:
    if chunk < 1:
        raise ValueError(f"chunk must be positive, got {chunk}")
    return [(start, min(start + chunk, n_items)) for start in range(0, n_items, chunk)]


def chunked_map(fn: ChunkFn, n_items: int, chunk: int, workers: int | None = None) -> np.ndarray:
    """Evaluate ``fn(start, stop)`` over consecutive chunks and stack along axis 0.

    Each item is computed independently of the chunk it lands in, so the worker
    count never changes the result.
    """

    bounds = chunk_bounds(n_items, chunk)
    if not bounds:
        return np.empty((0,))

    n_workers = max(1, int(workers or DEFAULT_WORKERS))
    if n_workers == 1 or len(bounds) == 1:
        parts = [fn(start, stop) for start, stop in bounds]
    else:
        logger.debug("chunked_map: %d chunks on %d workers", len(bounds), n_workers)
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(lambda b: fn(*b), bounds))
    return np.concatenate(parts, axis=0)


def set_default_workers(workers: int) -> None:
    global DEFAULT_WORKERS
    DEFAULT_WORKERS = max(1, int(workers))
