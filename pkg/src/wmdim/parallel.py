"""Order-preserving parallel map shared by the experiment drivers."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable


def resolve_jobs(jobs: int | None = None) -> int:
    """``WMDIM_JOBS`` wins over the argument; the fallback is the core count."""
    env = os.environ.get("WMDIM_JOBS")
    if env:
        jobs = int(env)
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    return jobs


def pmap(fn: Callable, items: Iterable, jobs: int | None = None) -> list:
    """``[fn(x) for x in items]``, computed by up to ``jobs`` worker processes.

    Results come back in input order, so output never depends on scheduling.
    """
    items = list(items)
    jobs = min(resolve_jobs(jobs), max(len(items), 1))
    if jobs == 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))
