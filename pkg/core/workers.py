"""
Workers - Deterministic partitioned execution for oracle sums and MC draws
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def default_workers() -> int:
    return min(8, os.cpu_count() or 1)


def run_partitioned(func: Callable[[T], R], partitions: Iterable[T],
                    workers: Optional[int] = None) -> List[R]:
    """
    Apply func to every partition, possibly in parallel.

    Results come back in partition order whatever the scheduling, so a
    reduction over them is reproducible. numpy releases the GIL inside the
    heavy kernels, which is what makes threads worthwhile here.

    Args:
        func: Work on one partition
        partitions: Partition descriptors (indices, seeds, ...)
        workers: Thread count; None picks a default, 1 runs inline

    Returns:
        [func(p) for p in partitions]
    """
    partitions = list(partitions)
    count = workers if workers is not None else default_workers()
    if count <= 1 or len(partitions) <= 1:
        return [func(p) for p in partitions]

    logger.debug("running %d partitions on %d threads", len(partitions), count)
    with ThreadPoolExecutor(max_workers=count) as executor:
        futures = [executor.submit(func, p) for p in partitions]
        return [future.result() for future in futures]
