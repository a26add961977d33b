"""Thread-count plumbing for row-blocked computations."""

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "TEACHSET_THREADS"


def thread_count():
    """Worker count from ``TEACHSET_THREADS`` (0 or unset means auto)."""
    raw = os.environ.get(ENV_THREADS, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def map_blocks(fn, n_rows, block=256):
    """Apply ``fn(start, stop)`` over row blocks, in parallel when allowed.

    Each block writes disjoint output, so results do not depend on the
    number of workers.
    """
    spans = [(s, min(s + block, n_rows)) for s in range(0, n_rows, block)]
    workers = min(thread_count(), len(spans))
    if workers <= 1:
        for s, e in spans:
            fn(s, e)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for fut in [pool.submit(fn, s, e) for s, e in spans]:
            fut.result()
