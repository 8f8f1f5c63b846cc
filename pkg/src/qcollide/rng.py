"""Counter-based uniform random stream keyed by (seed, run, step, draw).

Every uniform is a pure function of its four coordinates: a chain of
splitmix64 finalizer rounds, one per coordinate. Workers can therefore
generate any slice of the stream independently, repeated executions are
bit-identical, and the compiled kernel evaluates exactly the same function
as the two implementations here (python-int scalar and numpy-vectorized).
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MULT1 = 0xBF58476D1CE4E5B9
_MULT2 = 0x94D049BB133111EB
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


def _mix(x: int) -> int:
    x &= _MASK
    x = ((x ^ (x >> 30)) * _MULT1) & _MASK
    x = ((x ^ (x >> 27)) * _MULT2) & _MASK
    return x ^ (x >> 31)


def uniform(seed: int, run: int, step: int, draw: int) -> float:
    """One uniform in [0, 1) addressed by its stream coordinates."""
    h = _mix((seed + _GOLDEN) & _MASK)
    h = _mix((h + _GOLDEN * (run + 1)) & _MASK)
    h = _mix((h + _GOLDEN * (step + 1)) & _MASK)
    h = _mix((h + _GOLDEN * (draw + 1)) & _MASK)
    return (h >> 11) * _INV53


def _mix_u64(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_MULT1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_MULT2)
    return x ^ (x >> np.uint64(31))


def uniform_array(seed: int, runs: np.ndarray, step: int, draw: int) -> np.ndarray:
    """Vectorized `uniform` over an array of run indices."""
    g = np.uint64(_GOLDEN)
    with np.errstate(over="ignore"):
        h0 = _mix_u64(np.uint64((seed + _GOLDEN) & _MASK))
        h = _mix_u64(h0 + g * (np.asarray(runs, dtype=np.uint64) + np.uint64(1)))
        h = _mix_u64(h + g * np.uint64(step + 1))
        h = _mix_u64(h + g * np.uint64(draw + 1))
    return (h >> np.uint64(11)).astype(np.float64) * _INV53


class CounterStream:
    """Draw-indexed view of one (seed, run, step) cell of the stream."""

    __slots__ = ("seed", "run", "step", "draw")

    def __init__(self, seed: int, run: int, step: int):
        self.seed = seed
        self.run = run
        self.step = step
        self.draw = 0

    def random(self) -> float:
        u = uniform(self.seed, self.run, self.step, self.draw)
        self.draw += 1
        return u
