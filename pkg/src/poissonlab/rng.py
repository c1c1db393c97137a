"""Seed-derived random streams.

Replicas are processed in fixed-size blocks and every block draws from its own
stream, keyed by ``(seed, block_index)``. Results therefore do not depend on the
order in which blocks are run, only on the seed and the block size.
"""
from __future__ import annotations

from typing import Iterator

import numpy as np

BLOCK_SIZE = 4096


def _check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {seed!r}")
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    return int(seed)


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``seed`` and an integer key path."""
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def blocks(n: int, block_size: int = BLOCK_SIZE) -> Iterator[tuple[int, int]]:
    """Yield ``(block_index, size)`` covering ``n`` items."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    for b, start in enumerate(range(0, n, block_size)):
        yield b, min(block_size, n - start)
