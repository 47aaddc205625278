"""Order-preserving thread map for the embarrassingly parallel loops."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from app.config import config

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Apply ``func`` to every item and return the results in input order.

    Args:
        func: Pure function of one item (no shared mutable state)
        items: Work items
        threads: Worker count; defaults to CSTAR_THREADS. 1 runs serially.

    Returns:
        List of results, ordered as ``items``
    """
    items = list(items)
    if threads is None:
        threads = config.CSTAR_THREADS
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.debug(f"parallel_map over {len(items)} items with {threads} threads")
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, items))
