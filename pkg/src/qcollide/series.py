"""Per-step density-matrix record with derived observables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import trace_distance


@dataclass
class TimeSeries:
    """Density matrices indexed by step, states[0] being the initial state."""

    states: list[np.ndarray] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, n: int) -> np.ndarray:
        return self.states[n]

    def occupations(self) -> np.ndarray:
        """Real diagonal of every state, shape (steps + 1, d)."""
        return np.array([np.real(np.diag(s)) for s in self.states])

    def trace_distances_to(self, sigma: np.ndarray) -> np.ndarray:
        return np.array([trace_distance(s, sigma) for s in self.states])

    def min_eigenvalues(self) -> np.ndarray:
        """Smallest eigenvalue per step (recorded, never clamped)."""
        return np.array(
            [np.linalg.eigvalsh((s + s.conj().T) / 2).min() for s in self.states]
        )
