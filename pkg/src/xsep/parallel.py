"""Thread-pool helper honoring the XSEP_THREADS environment variable.

Work items are mapped in chunks and results gathered in submission order,
so output is bit-identical no matter how many workers run.
"""

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["worker_count", "chunked_map"]


def worker_count():
    """Worker cap from XSEP_THREADS; 0 or unset means auto (cpu count)."""
    raw = os.environ.get("XSEP_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"XSEP_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise ValueError("XSEP_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def chunked_map(fn, items, chunk=64):
    """Apply fn to each item, preserving order; threads per worker_count()."""
    items = list(items)
    workers = worker_count()
    if workers == 1 or len(items) <= chunk:
        return [fn(it) for it in items]
    chunks = [items[i : i + chunk] for i in range(0, len(items), chunk)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda block: [fn(it) for it in block], chunks)
        return [res for block in parts for res in block]
