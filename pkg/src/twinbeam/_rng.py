"""Counter-based random substreams.

Shots are generated in fixed-size blocks. Block ``b`` of a run seeded with
``seed`` always draws from ``SeedSequence(seed, spawn_key=(stage, b))``, so
shot ``i`` depends only on ``(seed, i)``: runs can be split across workers
by block and merged in index order without changing a single bit.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator

import numpy as np

BLOCK_SIZE = 1 << 14

# stage tags keep independent consumers of one seed apart
STAGE_SOURCE = 0
STAGE_PIPELINE = 1
STAGE_DARK = 2


def block_rng(seed: int, stage: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stage), int(block)))
    return np.random.Generator(np.random.PCG64(ss))


def blocks(count: int) -> Iterator[tuple[int, slice]]:
    for b, start in enumerate(range(0, count, BLOCK_SIZE)):
        yield b, slice(start, min(start + BLOCK_SIZE, count))


def run_blocks(
    count: int,
    seed: int,
    stage: int,
    fn: Callable[[np.random.Generator, int], tuple[np.ndarray, ...]],
    workers: int = 1,
) -> tuple[np.ndarray, ...]:
    """Evaluate ``fn(rng, BLOCK_SIZE)`` per block and concatenate in block order.

    Every block is drawn at full size and the last one truncated, so the
    values of shot ``i`` do not depend on ``count``.
    """
    jobs = list(blocks(count))

    def task(job):
        b, sl = job
        cols = fn(block_rng(seed, stage, b), BLOCK_SIZE)
        return tuple(c[: sl.stop - sl.start] for c in cols)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(task, jobs))
    else:
        parts = [task(job) for job in jobs]
    return tuple(np.concatenate(cols) for cols in zip(*parts))
