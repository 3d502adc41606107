#!/usr/bin/env python3
import logging
import multiprocessing
import os
from functools import reduce
from typing import Callable, List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

THREADS_ENV = "COVERPLAN_THREADS"


def worker_count() -> int:
    """The worker cap read from COVERPLAN_THREADS, default 1 (sequential)."""
    value = os.environ.get(THREADS_ENV, "1")
    try:
        threads = int(value)
    except ValueError:
        logger.warning("Ignoring %s=%r, expected an integer.", THREADS_ENV, value)
        return 1
    return max(1, threads)


def parallel_map(func: Callable, items: Sequence, threads: Optional[int] = None) -> List:
    """
    Map func over items, in a process pool when more than one worker is allowed.

    Results are returned in item order, so the output does not depend on the worker count.
    func must be picklable (a module level function or a functools.partial of one).
    """
    items = list(items)
    if threads is None:
        threads = worker_count()
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with multiprocessing.Pool(min(threads, len(items))) as pool:
        return pool.map(func, items)


def convert_numpy_array_to_shared_memory(np_array, array_c_type=None):
    """
    Copy a numpy array into a multiprocessing shared memory buffer.

    The char table of shared memory can be find at:
    https://docs.python.org/3/library/struct.html#format-characters
    Note: the char table is different from the char table in numpy
    """
    dim = np_array.shape
    num = reduce(lambda x, y: x * y, dim, 1)
    if num == 0:
        return np_array
    if array_c_type is None:
        array_c_type = np_array.dtype.char
    base = multiprocessing.Array(array_c_type, num, lock=False)
    np_array_new = np.frombuffer(base, dtype=np_array.dtype).reshape(dim)
    np_array_new[:] = np_array
    return np_array_new
