"""Worker-pool helper: thread-parallel map over independent work items.

The worker count comes from the VPBLAB_WORKERS environment variable (default 1,
i.e. serial).  Results preserve input order, so outputs are deterministic
regardless of the pool size; the heavy lifting inside each item is BLAS/LAPACK,
which releases the GIL.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_WORKERS = "VPBLAB_WORKERS"


def worker_count() -> int:
    try:
        n = int(os.environ.get(ENV_WORKERS, "1"))
    except ValueError:
        return 1
    return max(1, n)


def parallel_map(fn, items):
    n = worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
