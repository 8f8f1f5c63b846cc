"""Dense complex linear-algebra kernel.

All matrix functions (unitary exponential, the absolute value inside the
trace distance) are routed through one primitive, the Hermitian
eigendecomposition, which keeps a single well-tested code path for the
dimensions this package targets (<= ~2000).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-10


class NotSquare(ValueError):
    """Matrix expected to be square is not."""


class NotHermitian(ValueError):
    """Matrix deviates from its conjugate transpose beyond tolerance."""


class DimensionMismatch(ValueError):
    """Operands have incompatible dimensions."""


def _as_square(a: np.ndarray) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {m.shape}")
    return m


def _as_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    m = _as_square(a)
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        raise NotHermitian(f"max |A - A^dag| = {dev:.3e} exceeds {tol:.1e}")
    return m


@dataclass(frozen=True)
class EigenSystem:
    """Ascending real eigenvalues with matching orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.values)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; the first factor indexes the slow (outer) axis."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def herm_eig(h: np.ndarray) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises NotSquare / NotHermitian when the input fails its preconditions.
    Degenerate subspaces come back orthonormalized by the solver; no further
    canonicalization is applied.
    """
    m = _as_hermitian(h)
    values, vectors = np.linalg.eigh(m)
    return EigenSystem(values=values, vectors=vectors)


def unitary_exp(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) for Hermitian h, via the eigendecomposition."""
    eig = herm_eig(h)
    phases = np.exp(-1j * eig.values * t)
    return (eig.vectors * phases) @ eig.vectors.conj().T


def partial_trace_second(rho_joint: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    """Trace out the second (fast-axis) factor of a dim_a*dim_b joint operator."""
    m = _as_square(rho_joint)
    if dim_a <= 0 or dim_b <= 0 or m.shape[0] != dim_a * dim_b:
        raise DimensionMismatch(
            f"joint dimension {m.shape[0]} incompatible with {dim_a} x {dim_b}"
        )
    return np.trace(m.reshape(dim_a, dim_b, dim_a, dim_b), axis1=1, axis2=3)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the absolute eigenvalue sum of (rho - sigma); both must be Hermitian."""
    a = _as_hermitian(rho)
    b = _as_hermitian(sigma)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


def check_density_matrix(
    rho: np.ndarray,
    herm_tol: float = 1e-10,
    trace_tol: float = 1e-10,
    eig_floor: float = -1e-9,
) -> np.ndarray:
    """Validate a density matrix (Hermitian, unit trace, near-positive)."""
    m = _as_square(rho)
    if not np.all(np.isfinite(m.view(np.float64))):
        raise ValueError("density matrix contains non-finite entries")
    herm_dev = np.max(np.abs(m - m.conj().T))
    if herm_dev > herm_tol:
        raise ValueError(f"density matrix not Hermitian: deviation {herm_dev:.3e}")
    tr = complex(np.trace(m))
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr} deviates from 1")
    min_eig = float(np.linalg.eigvalsh((m + m.conj().T) / 2).min())
    if min_eig < eig_floor:
        raise ValueError(f"density matrix minimum eigenvalue {min_eig:.3e} below {eig_floor:.1e}")
    return m
