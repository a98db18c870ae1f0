import numpy as np


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Generator for one named substream of a master seed.

    Substreams are keyed by integer tuples, so trial ``i`` of an experiment
    always sees the same draws no matter how trials are scheduled.
    """
    if seed is None:
        raise ValueError("an explicit seed is required")
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream)))


def map_ordered(fn, items, threads: int = 1):
    """``list(map(fn, items))`` optionally spread over a thread pool; output order is preserved."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
