"""Worker pool for ensemble loops.

Tasks must be pure functions of their argument. Results come back in input
order, so any reduction over them is independent of completion order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """Apply ``func`` to every item, returning results in input order.

    Args:
        func: Pure task function.
        items: Task arguments.
        threads: Worker count; 1 runs inline.

    Returns:
        List of results aligned with ``items``.
    """
    tasks = list(items)
    if threads <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    with ThreadPoolExecutor(max_workers=min(threads, len(tasks))) as pool:
        return list(pool.map(func, tasks))
