import os
import time
from contextlib import contextmanager
from typing import Callable, Iterable, List, Optional, TypeVar

from joblib import Parallel, delayed

from src.utils.config import settings
from src.utils.logging import logger

T = TypeVar("T")
R = TypeVar("R")


def thread_count(requested: Optional[int] = None) -> int:
    """Worker count: explicit request, then THREAD_COUNT from the environment, then 1."""
    if requested is not None and requested > 0:
        return requested
    if settings.THREAD_COUNT:
        return settings.THREAD_COUNT
    return 1


def parallel_map(fn: Callable[[T], R], items: Iterable[T], n_jobs: Optional[int] = None) -> List[R]:
    """
    Map `fn` over `items` with a thread pool, preserving input order.

    Results come back in input order, so reductions over them are independent
    of the number of workers.
    """
    items = list(items)
    jobs = min(thread_count(n_jobs), max(1, len(items)), os.cpu_count() or 1)
    if jobs <= 1:
        return [fn(item) for item in items]
    return Parallel(n_jobs=jobs, backend="threading")(delayed(fn)(item) for item in items)


@contextmanager
def task_context(task_name: str):
    """
    Context manager for task execution with logging and error handling.

    Args:
        task_name: The name of the task
    """
    start_time = time.time()
    logger.info(f"Starting task: {task_name}")
    try:
        yield
        execution_time = time.time() - start_time
        logger.info(f"Task {task_name} completed in {execution_time:.2f}s")
    except Exception as e:
        execution_time = time.time() - start_time
        logger.error(f"Task {task_name} failed after {execution_time:.2f}s: {str(e)}")
        raise
