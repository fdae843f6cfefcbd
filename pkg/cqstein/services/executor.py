"""
Thread pool for independent per-letter, per-type and per-row evaluations.
Results always come back in input order so reductions are bit-stable.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from cqstein.core.config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(func: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Map func over items; inline when WORKERS is 1."""
    workers = settings.WORKERS if workers is None else workers
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def argmax_sorted(values: List[float]) -> int:
    """Index of the first maximum, so ties resolve to the smallest index."""
    best = 0
    for i, v in enumerate(values):
        if v > values[best]:
            best = i
    return best
