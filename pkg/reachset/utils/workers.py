import multiprocessing as mproc
import os
from typing import Optional

from reachset.config import logger, threads_env_var


def _env_threads() -> int:
    raw = os.environ.get(threads_env_var, "").strip()
    try:
        return int(raw) if raw else 0
    except ValueError:
        logger.warning(f"ignoring non-integer {threads_env_var}={raw!r}")
        return 0


def worker_count(requested: Optional[int] = None) -> int:
    """
    resolves the number of worker processes.
    :param requested: explicit count; None reads the REACHSET_THREADS environment variable
    :return: a count >= 1, where 0 or unset means one worker per cpu; an explicit count is capped by a
        positive REACHSET_THREADS
    """
    cap = _env_threads()
    if requested is None:
        requested = cap
    elif cap > 0:
        requested = min(requested, cap) if requested > 0 else cap
    if requested <= 0:
        requested = os.cpu_count() or 1
    return max(1, requested)


class WorkerMap:
    """
    Abstracts the multiprocessing worker-pool; switches to no workers if jobs <= 1.

    Results always come back in input order, so chunked work reduces identically for any
    number of jobs.
    """
    def __init__(self, jobs: int):
        self.jobs = jobs
        if jobs <= 1:
            self.pool = None
            self.map_function = lambda f, x: list(map(f, x))
        else:
            self.pool = mproc.Pool(processes=jobs)
            self.map_function = self.pool.map

    def __enter__(self):
        return self.map_function

    def __exit__(self, exc_type, exc_value, traceback):
        if self.pool is not None:
            self.pool.terminate()
            self.pool.join()
