from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor


def parallel_map(fn, items, threads: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool; order is kept."""
    items = list(items)
    if threads == 0:
        threads = os.cpu_count() or 1
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))


def fmt17(x) -> str:
    return format(float(x), ".17g")


def dumps_json(obj) -> str:
    # float repr is the shortest round-trip decimal
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"
