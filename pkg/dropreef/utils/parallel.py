"""
Fixed-chunk parallel sweeps over node ranges
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, Tuple, TypeVar

from dropreef.core.config import settings
from dropreef.exceptions import ConfigurationError

T = TypeVar("T")


def node_chunks(count: int, chunk: int = 0) -> List[Tuple[int, int]]:
    """Split [0, count) into [start, stop) ranges of a fixed size"""
    chunk = chunk or settings.CHUNK_NODES
    return [(start, min(start + chunk, count)) for start in range(0, count, chunk)]


def map_chunks(
    func: Callable[[int, int], T],
    chunks: Sequence[Tuple[int, int]],
    threads: int = 0,
) -> List[T]:
    """
    Apply func to every chunk and return results in chunk order

    Chunk boundaries do not depend on `threads`, so any worker count yields
    the same results.
    """
    threads = threads or settings.DEFAULT_THREADS
    if threads < 1:
        raise ConfigurationError(f"Thread count must be positive, got {threads}")
    if threads == 1 or len(chunks) <= 1:
        return [func(start, stop) for start, stop in chunks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda bounds: func(*bounds), chunks))
