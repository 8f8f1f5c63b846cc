"""Spin-chain model construction: XXZ Hamiltonian, Gibbs states, and the
table of all energy-eigenstate transitions.

After diagonalization every downstream engine works in the energy
eigenbasis, where the diagonal of a density matrix is directly the vector
of occupation probabilities. Units: hbar = k_B = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import herm_eig  # noqa: F401  (re-exported convenience for callers)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
_ID2 = np.eye(2, dtype=np.complex128)


class NotSorted(ValueError):
    """Energies must be supplied in ascending order."""


@dataclass(frozen=True)
class SpinChainParams:
    """XXZ chain parameters: nearest-neighbor coupling J, field h, anisotropy."""

    n_sites: int
    coupling: float = 1.0
    field: float = 1.0
    anisotropy: float = 1.0

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError("n_sites must be >= 2 (nearest-neighbor sum needs a bond)")


@dataclass(frozen=True)
class TransitionTable:
    """All eigenstate pairs (i, j) with i > j and their gaps E_i - E_j.

    Pair order is fixed: j ascending in the outer loop, i ascending inside,
    so for d = 4 the order is (1,0), (2,0), (3,0), (2,1), (3,1), (3,2).
    """

    dim: int
    pairs: tuple[tuple[int, int], ...]
    gaps: np.ndarray

    @property
    def count(self) -> int:
        return len(self.pairs)

    def upper_indices(self) -> np.ndarray:
        return np.array([p[0] for p in self.pairs], dtype=np.int64)

    def lower_indices(self) -> np.ndarray:
        return np.array([p[1] for p in self.pairs], dtype=np.int64)


def _site_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for q in range(n):
        out = np.kron(out, op if q == site else _ID2)
    return out


def _bond_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for q in range(n):
        if q == site or q == site + 1:
            out = np.kron(out, op)
        else:
            out = np.kron(out, _ID2)
    return out


def build_xxz(params: SpinChainParams) -> np.ndarray:
    """Open-boundary XXZ Hamiltonian on 2^N dimensions.

    H = -J sum_q (sx sx + sy sy + anisotropy * sz sz) + (h/2) sum_q sz.
    The result is real symmetric (the two imaginary sy factors cancel).
    """
    n = params.n_sites
    dim = 2**n
    h = np.zeros((dim, dim), dtype=np.complex128)
    for q in range(n - 1):
        h -= params.coupling * (
            _bond_operator(SIGMA_X, q, n)
            + _bond_operator(SIGMA_Y, q, n)
            + params.anisotropy * _bond_operator(SIGMA_Z, q, n)
        )
    for q in range(n):
        h += 0.5 * params.field * _site_operator(SIGMA_Z, q, n)
    return h


def gibbs_state(energies: np.ndarray, beta: float) -> np.ndarray:
    """Thermal state diag(exp(-beta E_k))/Z in the energy eigenbasis.

    The minimum energy is subtracted before exponentiation so large beta
    never overflows.
    """
    e = np.asarray(energies, dtype=np.float64)
    if not (np.isfinite(beta) and beta >= 0):
        raise ValueError(f"beta must be finite and >= 0, got {beta}")
    weights = np.exp(-beta * (e - e.min()))
    return np.diag(weights / weights.sum()).astype(np.complex128)


def transitions(energies: np.ndarray) -> TransitionTable:
    """Enumerate every eigenstate pair of an ascending spectrum."""
    e = np.asarray(energies, dtype=np.float64)
    if np.any(np.diff(e) < 0):
        raise NotSorted("energies must be ascending")
    d = len(e)
    pairs = tuple((i, j) for j in range(d) for i in range(j + 1, d))
    gaps = np.array([e[i] - e[j] for (i, j) in pairs], dtype=np.float64)
    return TransitionTable(dim=d, pairs=pairs, gaps=gaps)


def uniform_superposition_state(dim: int) -> np.ndarray:
    """Pure state |psi><psi| for the equal superposition of all eigenstates."""
    return np.full((dim, dim), 1.0 / dim, dtype=np.complex128)
