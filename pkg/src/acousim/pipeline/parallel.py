"""Process-pool execution whose results never depend on scheduling."""

import logging
import traceback
from concurrent.futures import ProcessPoolExecutor

import numpy as np

log = logging.getLogger(__name__)


def task_seed(master_seed, *task_id):
    """Independent RNG stream for one task, derived from the master seed."""
    return np.random.SeedSequence([int(master_seed), *[int(t) for t in task_id]])


def _call(fn, task_id, args):
    try:
        return task_id, True, fn(*args)
    except Exception as exc:  # reported per task, the rest keep running
        return task_id, False, f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}"


def run_parallel(fn, tasks, workers=1):
    """Run ``fn(*args)`` for every ``(task_id, args)`` in ``tasks``.

    Returns ``(results, failures)``: dicts keyed by task id. Every task runs
    even if others fail. With ``workers == 1`` everything runs in-process.
    """
    tasks = list(tasks)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or len(tasks) <= 1:
        outcomes = [_call(fn, tid, args) for tid, args in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            futures = [pool.submit(_call, fn, tid, args) for tid, args in tasks]
            outcomes = [f.result() for f in futures]
    results, failures = {}, {}
    for tid, ok, value in outcomes:
        if ok:
            results[tid] = value
        else:
            log.error("task %s failed: %s", tid, value.splitlines()[0])
            failures[tid] = value
    return results, failures
