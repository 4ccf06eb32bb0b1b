"""Minimal worker-pool context handed to the numerical modules.

Work is always split into the same chunks regardless of the thread count, and
results come back in submission order, so serial and threaded runs reduce the
same partial sums in the same order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


class Pool:
    def __init__(self, threads: int = 1):
        if threads < 1:
            raise ValueError("threads must be positive")
        self.threads = threads
        self._executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    def map(self, func: Callable[[T], R], items: Iterable[T]) -> list[R]:
        items = list(items)
        if self._executor is None or len(items) < 2:
            return [func(x) for x in items]
        return list(self._executor.map(func, items))

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None

    def __enter__(self) -> "Pool":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


_SERIAL = Pool(1)


def serial() -> Pool:
    return _SERIAL
