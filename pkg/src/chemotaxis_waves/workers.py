"""
Ordered worker-pool map for independent parameter points.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')


def ordered_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> List[R]:
    """
    Apply fn to every item, in a process pool when jobs > 1.

    Args:
        fn: Picklable module-level callable
        items: Inputs
        jobs: Worker count

    Returns:
        Results in input order
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    workers = min(jobs, len(items))
    logger.debug("mapping %d points over %d workers", len(items), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
