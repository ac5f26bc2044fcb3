"""Deterministic first-witness search over an index range, optionally fanned out to processes."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional

JOBS_ENV = "NILREC_JOBS"


def resolve_jobs(jobs: Optional[int] = None) -> int:
    if jobs is None:
        env = os.environ.get(JOBS_ENV)
        jobs = int(env) if env else 1
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    return jobs


def _scan(pred: Callable[[int], bool], lo: int, hi: int) -> Optional[int]:
    for i in range(lo, hi):
        if pred(i):
            return i
    return None


def first_index(pred: Callable[[int], bool], start: int, stop: int, jobs: Optional[int] = None,
                chunk: int = 256) -> Optional[int]:
    """Smallest i in [start, stop) with pred(i), or None.

    With jobs > 1 the range is processed in rounds of `jobs` chunks; the
    answer is the minimum hit of the first round that has one, so it does
    not depend on scheduling.  `pred` must be picklable.
    """
    jobs = resolve_jobs(jobs)
    if jobs == 1 or stop - start <= chunk:
        return _scan(pred, start, stop)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        lo = start
        while lo < stop:
            bounds = []
            for _ in range(jobs):
                if lo >= stop:
                    break
                hi = min(stop, lo + chunk)
                bounds.append((lo, hi))
                lo = hi
            hits = [h for h in pool.map(_scan, [pred] * len(bounds), *zip(*bounds)) if h is not None]
            if hits:
                return min(hits)
    return None
