"""Executor interface and thread-pool implementation for independent tasks."""

from abc import ABC, abstractmethod
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

from loguru import logger

from ..config import settings

T = TypeVar("T")
R = TypeVar("R")


class ExecutorInterface(ABC):
    """Interface for mapping a function over independent work items."""

    @abstractmethod
    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        """Apply fn to every item; results come back in submission order."""
        pass


class InlineExecutor(ExecutorInterface):
    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        return [fn(item) for item in items]


class ThreadPoolTaskExecutor(ExecutorInterface):
    """ThreadPoolExecutor-backed map; numpy and scipy release the GIL in the heavy parts."""

    def __init__(self, threads: int):
        self.threads = threads

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        items = list(items)
        logger.debug(f"Dispatching {len(items)} tasks on {self.threads} threads")
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(fn, items))


def get_executor(threads: int | None = None) -> ExecutorInterface:
    threads = threads or settings.threads
    if threads <= 1:
        return InlineExecutor()
    return ThreadPoolTaskExecutor(threads)


def run_tasks(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """Convenience function to map over independent tasks."""
    return get_executor(threads).map(fn, items)
