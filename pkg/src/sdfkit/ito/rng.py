"""Seeded Gaussian streams that do not depend on how paths are split up.

Paths are grouped in fixed blocks of ``BLOCK`` paths. Block ``k`` draws from
numpy's Philox4x64 counter-based generator keyed by
``SeedSequence(seed, spawn_key=(k,))``. Each standard normal is produced by
inverse-CDF transform: a 53-bit integer ``j`` is drawn and mapped to
``ndtri((j + 0.5) / 2**53)``, which never hits 0 or 1. Draws fill the block's
``(paths, steps, dims)`` array in C order, so a path's variates do not change
when the total path count changes, and worker count never affects output.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.special import ndtri

BLOCK = 1024
_TWO53 = float(2**53)


def block_normals(seed: int, block: int, shape: tuple[int, ...]) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))
    j = gen.integers(0, 2**53, size=shape, dtype=np.int64)
    return ndtri((j.astype(np.float64) + 0.5) / _TWO53)


def standard_normals(seed: int, n_paths: int, n_steps: int, dims: int, workers: int = 1) -> np.ndarray:
    """``(n_paths, n_steps, dims)`` standard normals."""
    n_blocks = -(-n_paths // BLOCK)

    def make(k):
        rows = min(BLOCK, n_paths - k * BLOCK)
        return block_normals(seed, k, (rows, n_steps, dims))

    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(make, range(n_blocks)))
    else:
        parts = [make(k) for k in range(n_blocks)]
    return np.concatenate(parts, axis=0)
