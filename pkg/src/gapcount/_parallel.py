"""Deterministic worker-pool mapping for embarrassingly parallel sweeps."""

from concurrent.futures import ThreadPoolExecutor


def parallel_map(fn, items, threads=None):
    """Map preserving input order; threads <= 1 runs inline."""
    items = list(items)
    if not threads or threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(fn, items))
