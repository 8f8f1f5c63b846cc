"""Spectrum-matched thermal bath ancilla.

The ancilla has one ground level at zero energy plus one excited level per
system eigenstate pair, positioned so every system gap E_i - E_j equals a
ground-to-excited gap of the bath. Degenerate system pairs keep their own
(coinciding) levels, so the level count is always binomial(d, 2) + 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DimensionMismatch
from .model import TransitionTable


@dataclass(frozen=True)
class BathSpec:
    """Ancilla level energies plus the pair -> excited-level index map.

    levels[0] is the ground level at exactly 0; levels[pair_index[(i, j)]]
    equals the transition gap E_i - E_j bit-for-bit.
    """

    levels: np.ndarray
    pair_index: dict[tuple[int, int], int]

    @property
    def dim(self) -> int:
        return len(self.levels)

    @property
    def num_transitions(self) -> int:
        return len(self.levels) - 1


def build_bath_spec(table: TransitionTable) -> BathSpec:
    """One excited level per transition, stored in table pair order."""
    levels = np.concatenate(([0.0], table.gaps))
    pair_index = {pair: k + 1 for k, pair in enumerate(table.pairs)}
    return BathSpec(levels=levels, pair_index=pair_index)


def ancilla_state(spec: BathSpec, beta: float) -> np.ndarray:
    """Diagonal thermal state of the ancilla at inverse temperature beta."""
    if not (np.isfinite(beta) and beta >= 0):
        raise ValueError(f"beta must be finite and >= 0, got {beta}")
    # levels are >= 0 with ground at 0, so the shifted form never overflows
    weights = np.exp(-beta * (spec.levels - spec.levels.min()))
    return np.diag(weights / weights.sum()).astype(np.complex128)


def partition_function(spec: BathSpec, beta: float) -> float:
    """Z_a = sum_k exp(-beta * level_k), including the ground term 1."""
    if not (np.isfinite(beta) and beta >= 0):
        raise ValueError(f"beta must be finite and >= 0, got {beta}")
    return float(np.exp(-beta * spec.levels).sum())


def build_interaction(dim_system: int, spec: BathSpec, g: float) -> np.ndarray:
    """Joint-space interaction Hamiltonian, system factor on the slow axis.

    For every pair (i, j) it couples |i, ground> with |j, excited(i,j)> at
    strength g: the system drop i -> j excites the matched bath level and
    vice versa, so each coupled pair of joint states is degenerate in
    energy. Built symmetrically, so Hermiticity is exact.
    """
    m_plus_1 = spec.dim
    if dim_system * (dim_system - 1) != 2 * spec.num_transitions:
        raise DimensionMismatch(
            f"bath with {spec.num_transitions} transitions does not match "
            f"system dimension {dim_system}"
        )
    joint = dim_system * m_plus_1
    h = np.zeros((joint, joint), dtype=np.complex128)
    for (i, j), level in spec.pair_index.items():
        row = j * m_plus_1 + level  # |j> x |excited(i,j)>
        col = i * m_plus_1  # |i> x |ground>
        h[row, col] = g
        h[col, row] = g
    return h


def ratio_za_l(spec: BathSpec, beta: float, dim_system: int) -> float:
    """Z_a over the number of possible transitions L = d - 1."""
    if dim_system < 2:
        raise ValueError("dim_system must be >= 2")
    return partition_function(spec, beta) / (dim_system - 1)
