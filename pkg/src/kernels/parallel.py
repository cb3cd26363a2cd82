"""Row-parallel kernel execution with one vector engine per worker."""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, TypeVar

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import DCSR_THREADS
from engine.vector_engine import VectorEngine

logger = logging.getLogger(__name__)

T = TypeVar("T")


def _run_chunk(fn: Callable[[int, VectorEngine], T], rows: range, engine: VectorEngine) -> List[T]:
    return [fn(r, engine) for r in rows]


def map_rows(
    fn: Callable[[int, VectorEngine], T],
    n_rows: int,
    engine: VectorEngine,
    workers: Optional[int] = None,
) -> List[T]:
    """
    Apply ``fn(row, engine)`` to every row, in row order.

    Rows are split into contiguous chunks, each chunk runs on its own
    spawned engine, and the chunk counters are merged into ``engine``
    afterwards. Counter totals do not depend on the worker count.

    Args:
        fn: Per-row computation
        n_rows: Number of rows
        engine: Engine that receives the merged counters
        workers: Worker count, capped by DCSR_THREADS; defaults to DCSR_THREADS

    Returns:
        Results of ``fn`` in row order
    """
    workers = min(workers or DCSR_THREADS, DCSR_THREADS, max(n_rows, 1))
    if workers <= 1:
        return _run_chunk(fn, range(n_rows), engine)

    step = -(-n_rows // workers)
    chunks = [range(start, min(start + step, n_rows)) for start in range(0, n_rows, step)]
    engines = [engine.spawn() for _ in chunks]
    logger.debug(f"Running {n_rows} rows on {len(chunks)} workers")

    with ThreadPoolExecutor(max_workers=len(chunks)) as executor:
        futures = [executor.submit(_run_chunk, fn, chunk, e) for chunk, e in zip(chunks, engines)]
        results = [future.result() for future in futures]

    for e in engines:
        engine.counters.merge(e.counters)
    return [item for chunk in results for item in chunk]
