"""Numpy fallback for the chain-sampler kernel.

Bit-compatible with the compiled `_chain` extension: it evaluates the same
counter-based stream in the same draw order (0 source, 1 target, 2 accept
per run and step) and makes identical float comparisons, so the resulting
chains are identical. Vectorized across runs instead of looping.
"""

from __future__ import annotations

import numpy as np

from .rng import uniform_array


def _categorical_array(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    # first k with u < cum[k]; clamp to the end, then walk zero-mass ties back
    d = len(cum)
    idx = np.minimum(np.searchsorted(cum, u, side="right"), d - 1)
    while True:
        back = (idx > 0) & (cum[idx] == cum[np.maximum(idx - 1, 0)])
        if not back.any():
            return idx.astype(np.int64)
        idx = idx - back


def sample_chain(
    cum_init: np.ndarray,
    accept_prob: np.ndarray,
    run_start: int,
    run_count: int,
    steps: int,
    seed: int,
    counts: np.ndarray,
    reject_chain_counts: np.ndarray,
) -> None:
    """See `_chain.sample_chain`; accumulates into the two count arrays."""
    d = len(cum_init)
    runs = np.arange(run_start, run_start + run_count, dtype=np.uint64)
    x = np.zeros(run_count, dtype=np.int64)
    first_source = np.zeros(run_count, dtype=np.int64)
    alive = np.zeros(run_count, dtype=bool)
    for step in range(1, steps + 1):
        u0 = uniform_array(seed, runs, step, 0)
        if step == 1:
            i = _categorical_array(cum_init, u0)
        else:
            i = x  # point-mass diagonal; draw consumed regardless
        u1 = uniform_array(seed, runs, step, 1)
        jx = (u1 * (d - 1)).astype(np.int64)
        np.minimum(jx, d - 2, out=jx)
        j = jx + (jx >= i)
        u2 = uniform_array(seed, runs, step, 2)
        accepted = u2 < accept_prob[i, j]
        x = np.where(accepted, j, i)
        if step == 1:
            alive = ~accepted
            first_source = i
        else:
            alive &= ~accepted
        counts[step - 1] += np.bincount(x, minlength=d)
        reject_chain_counts[step - 1] += np.bincount(first_source[alive], minlength=d)
