# -*- coding: utf-8 -*-
"""worker_pool file.

File containing :class:`WorkerPool` to run independent tasks (the per-image
stages of the pipeline, the cells of a precision sweep) on a bounded pool
of threads.

Workers receive immutable inputs and return a value. Nothing is shared
between the workers: the results are gathered in the order of the inputs
once every worker has finished, and merged by the caller.

.. module:: worker_pool
   :synopsis: bounded pool of workers for per-image tasks.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Iterable, List, Optional

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TaskOutcome:
    """Result of one task: its value, or the exception it raised.

    :param key: key of the task (image identifier).
    :type key: str
    :param value: returned value, None on failure.
    :param error: exception raised by the task, None on success.
    :type error: Exception
    """
    key: str
    value: Any = None
    error: Optional[BaseException] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class WorkerPool:
    """
    Pool of worker threads.

    :param workers: maximal number of tasks running at the same time.
    :type workers: int

    Example

    >>> pool = WorkerPool(workers=4)
    >>> outcomes = pool.run(lambda x: x * x, [('a', 2), ('b', 3)])
    >>> [o.value for o in outcomes]
    [4, 9]

    """

    def __init__(self, workers: int = 4):
        """
        Default constructor of the class.
        """
        if workers < 1:
            raise ValueError(f'at least one worker is required, got {workers}')
        self.workers = int(workers)

    def run(self, task: Callable[[Any], Any], items: Iterable[tuple]) -> List[TaskOutcome]:
        """
        Apply a task to every (key, item) pair.

        An exception raised by a task is captured in its outcome and never
        stops the other tasks.

        :param task: function applied to each item.
        :type task: Callable
        :param items: (key, item) pairs.
        :type items: Iterable[tuple[str, Any]]
        :return: outcomes, in the order of the items.
        :rtype: list[TaskOutcome]
        """
        items = list(items)

        def guarded(pair) -> TaskOutcome:
            key, item = pair
            try:
                return TaskOutcome(key, task(item))
            except Exception as e:
                logger.debug('task %s raised %s: %s', key, type(e).__name__, e)
                return TaskOutcome(key, error=e)

        if self.workers == 1 or len(items) <= 1:
            return [guarded(pair) for pair in items]
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            return list(executor.map(guarded, items))
