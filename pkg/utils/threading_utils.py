"""Order-preserving parallel map over a thread pool."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
U = TypeVar("U")


def ordered_map(func: Callable[[T], U], items: Iterable[T], workers: int = 1) -> List[U]:
    """``[func(x) for x in items]``, computed on *workers* threads.

    Results come back in input order whatever the scheduling, and the
    first exception raised by *func* propagates.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
