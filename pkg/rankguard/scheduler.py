from abc import ABC, abstractmethod
from multiprocessing import Pool
from queue import Queue
from threading import Thread
from typing import Any, Callable, List, Sequence


class BaseScheduler(ABC):
    @abstractmethod
    def map(self, fn: Callable, tasks: Sequence, config) -> List[Any]:
        """Apply ``fn`` to every task and return the results in task order."""
        pass


class ThreadScheduler(BaseScheduler):
    class ParallelWorker(Thread):
        def __init__(self, queue, fn, results, errors):
            Thread.__init__(self)
            self.queue = queue
            self.fn = fn
            self.results = results
            self.errors = errors

        def run(self):
            while True:
                item = self.queue.get()
                if item is None:
                    self.queue.task_done()
                    return
                index, task = item
                try:
                    self.results[index] = self.fn(task)
                except BaseException as e:
                    self.errors[index] = e
                finally:
                    self.queue.task_done()

    def map(self, fn, tasks, config):
        queue = Queue()
        results = [None] * len(tasks)
        errors = {}
        parallelism = min(len(tasks), config.max_threads)
        for _ in range(parallelism):
            worker = ThreadScheduler.ParallelWorker(queue, fn, results, errors)
            worker.daemon = True
            worker.start()

        for index, task in enumerate(tasks):
            queue.put((index, task))
        for _ in range(parallelism):
            queue.put(None)
        queue.join()
        if errors:
            raise errors[min(errors)]
        return results


class ProcessScheduler(BaseScheduler):
    # fn and tasks must be picklable: module-level functions or partials of them.
    def map(self, fn, tasks, config):
        parallelism = min(len(tasks), config.max_processes)
        with Pool(parallelism) as pool:
            return pool.map(fn, tasks)


class SerialScheduler(BaseScheduler):
    def map(self, fn, tasks, config):
        return [fn(task) for task in tasks]
