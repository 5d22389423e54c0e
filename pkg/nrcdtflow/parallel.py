"""
Thread-pool map with deterministic result order.

Workers only change wall time: results are collected in submission order, so
every caller produces identical output for any worker count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")


def parallel_map(function: Callable[[Any], T], items: Sequence[Any], max_workers: int = 1) -> List[T]:
    if max_workers <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    logger.debug(f"Mapping {len(items)} items over {max_workers} workers")
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(function, items))
