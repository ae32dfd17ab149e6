import logging
import os
from collections import namedtuple
from typing import Any, Callable, Iterable, List, Optional

from .exceptions import ConfigurationError
from .scheduler import (
    BaseScheduler,
    ProcessScheduler,
    SerialScheduler,
    ThreadScheduler,
)

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "RANKGUARD_THREADS"

RankGuardConfig = namedtuple(
    "RankGuardConfig", ["parallel_mode", "max_threads", "max_processes"]
)


def workers_from_env() -> int:
    """
    Worker count from ``RANKGUARD_THREADS``; unset or ``0`` means one per CPU.
    """
    raw = os.environ.get(THREADS_ENV_VAR, "").strip()
    if raw == "":
        value = 0
    else:
        try:
            value = int(raw)
        except ValueError:
            raise ConfigurationError(
                "{} must be a non-negative integer, got {!r}".format(THREADS_ENV_VAR, raw)
            )
    if value < 0:
        raise ConfigurationError(
            "{} must be a non-negative integer, got {!r}".format(THREADS_ENV_VAR, raw)
        )
    if value == 0:
        value = os.cpu_count() or 1
    return value


class DriverContext:
    """
    Driver Context for running RankGuard's parallel operations

    Results never depend on the scheduler or the worker count: tasks are
    independent and results come back in task order.

    :param optional max_threads: The max number of threads RankGuard can spawn.
        Defaults to ``RANKGUARD_THREADS``.
    :param optional max_processes: The max number of processes, same default.
    :param optional parallel_mode:
        One of None, "multithreading" and "multiprocessing". With
        "multiprocessing" the mapped function and its tasks must be picklable.
    """

    def __init__(
        self,
        max_threads: Optional[int] = None,
        max_processes: Optional[int] = None,
        parallel_mode: Optional[str] = "multithreading",
    ):
        if parallel_mode not in (None, "multithreading", "multiprocessing"):
            raise ConfigurationError("unknown parallel_mode {!r}".format(parallel_mode))
        if max_threads is None:
            max_threads = workers_from_env()
        if max_processes is None:
            max_processes = workers_from_env()
        if max_threads < 1 or max_processes < 1:
            raise ConfigurationError("worker counts must be at least 1")
        self.config = RankGuardConfig(parallel_mode, max_threads, max_processes)
        self.scheduler = self._get_scheduler(parallel_mode)

    @staticmethod
    def _get_scheduler(parallel_mode) -> BaseScheduler:
        if parallel_mode == "multiprocessing":
            scheduler = ProcessScheduler()
        elif parallel_mode == "multithreading":
            scheduler = ThreadScheduler()
        else:
            scheduler = SerialScheduler()
        return scheduler

    def map(self, fn: Callable, tasks: Iterable) -> List[Any]:
        tasks = list(tasks)
        if len(tasks) <= 1:
            # If there's only one item, run it in the current thread.
            return SerialScheduler().map(fn, tasks, self.config)
        logger.debug(
            "mapping %d tasks with %s", len(tasks), type(self.scheduler).__name__
        )
        return self.scheduler.map(fn, tasks, self.config)

    def __repr__(self):
        return "DriverContext({})".format(self.config)

    def __reduce__(self):
        raise NotImplementedError("Should not serialize and share driver object!")


_default_context = None


def get_default_context() -> DriverContext:
    global _default_context
    if _default_context is None:
        _default_context = DriverContext()
    return _default_context
