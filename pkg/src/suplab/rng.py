"""Counter-based random streams for reproducible, schedule-independent replication.

A stream is identified by a *key* derived from ``(seed, *tags)``.  Replications
are grouped into fixed-size blocks; block ``b`` of a stream draws from a Philox
generator whose counter starts at ``b << 64``, so any block can be regenerated
in isolation and the output of a replicated experiment does not depend on how
blocks are distributed over workers.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

BLOCK_SIZE = 1024

T = TypeVar("T")

Seed = int | Sequence[int]


def _tag_word(tag: object) -> int:
    if isinstance(tag, (int, np.integer)):
        if tag < 0:
            raise ValueError(f"negative tag {tag!r}")
        return int(tag)
    digest = hashlib.sha256(repr(tag).encode()).digest()
    return int.from_bytes(digest[:8], "little")


def stream_key(seed: Seed, *tags: object) -> np.ndarray:
    """Derive a 128-bit Philox key from a seed and any number of tags."""
    if isinstance(seed, (int, np.integer)):
        words = [int(seed)]
    else:
        words = [int(s) for s in seed]
    if any(w < 0 for w in words):
        raise ValueError("seeds must be non-negative")
    words.extend(_tag_word(t) for t in tags)
    return np.random.SeedSequence(words).generate_state(2, np.uint64)


def block_generator(key: np.ndarray, block: int) -> np.random.Generator:
    """Generator for block ``block`` of the stream identified by ``key``."""
    return np.random.Generator(np.random.Philox(key=key, counter=[0, block, 0, 0]))


def blocks(reps: int, block_size: int = BLOCK_SIZE) -> list[tuple[int, int, int]]:
    """Partition ``range(reps)`` into ``(block_index, start, stop)`` triples."""
    return [(b, s, min(s + block_size, reps)) for b, s in enumerate(range(0, reps, block_size))]


def map_blocks(
    fn: Callable[[int, int, int], T],
    reps: int,
    workers: int | None = 1,
    block_size: int = BLOCK_SIZE,
) -> list[T]:
    """Apply ``fn(block, start, stop)`` to every block; results in block order."""
    parts = blocks(reps, block_size)
    if not workers or workers <= 1 or len(parts) <= 1:
        return [fn(*p) for p in parts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: fn(*p), parts))


def sum_counts(parts: Iterable[np.ndarray]) -> np.ndarray:
    """Order-independent reduction of per-block integer hit counts."""
    total = None
    for p in parts:
        total = np.array(p, dtype=np.int64) if total is None else total + p
    if total is None:
        raise ValueError("no blocks to reduce")
    return total
