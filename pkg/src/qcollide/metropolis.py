"""Eigenstate-jump Metropolis engine with decoherence on rejection.

Stochastic side: independent trajectories propose uniform jumps between
energy eigenstates, accept with the Metropolis filter and, on rejection,
apply the coherence-damping map (1/(2 rho_ii))(|i><i| rho + rho |i><i|).
Deterministic side: the averaged single-step map, the exact expectation of
one trajectory step.

The trajectory hot loop runs in the compiled `_chain` kernel when the
extension is available and falls back to the bit-compatible numpy
implementation otherwise (force the fallback with QCOLLIDE_KERNEL=python).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .linalg import DimensionMismatch, check_density_matrix
from .parallel import worker_count
from .rng import CounterStream
from .series import TimeSeries

if os.environ.get("QCOLLIDE_KERNEL", "").lower() in ("python", "numpy"):
    from . import _chain_py as _kernel

    _BACKEND = "python"
else:
    try:
        from . import _chain as _kernel  # type: ignore[attr-defined]

        _BACKEND = "cython"
    except ImportError:
        from . import _chain_py as _kernel

        _BACKEND = "python"


def kernel_backend() -> str:
    """Which chain kernel was selected at import: 'cython' or 'python'."""
    return _BACKEND


class DegenerateState(ValueError):
    """Trajectory state has no population left to sample a source from."""


@dataclass(frozen=True)
class MetropolisConfig:
    beta: float
    steps: int
    runs: int
    seed: int

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise ValueError(f"beta must be finite and >= 0, got {self.beta}")


@dataclass
class TrajectoryState:
    """Per-run carrier: Hermitian, trace one, not necessarily positive."""

    matrix: np.ndarray
    weight: float = 1.0


def omega(e_i: float, e_j: float) -> float:
    """Uphill part of the energy change of the jump i -> j (0 if downhill)."""
    diff = e_j - e_i
    return diff if diff > 0 else 0.0


def acceptance(delta_e: float, beta: float) -> float:
    """Metropolis filter min(1, exp(-beta * delta_e))."""
    if delta_e <= 0:
        return 1.0
    return float(np.exp(-beta * delta_e))


def acceptance_matrix(energies: np.ndarray, beta: float) -> np.ndarray:
    """accept_prob[i, j] = min(1, exp(-beta (E_j - E_i))); diagonal unused."""
    e = np.asarray(energies, dtype=np.float64)
    uphill = np.maximum(e[None, :] - e[:, None], 0.0)
    return np.exp(-beta * uphill)


def _sample_categorical(cum: np.ndarray, u: float) -> int:
    # first k with u < cum[k]; clamp to the end, then walk zero-mass ties back
    d = len(cum)
    k = int(min(np.searchsorted(cum, u, side="right"), d - 1))
    while k > 0 and cum[k] == cum[k - 1]:
        k -= 1
    return k


def mc_trajectory_step(
    state: TrajectoryState,
    energies: np.ndarray,
    beta: float,
    rng,
) -> TrajectoryState:
    """One proposal/accept-or-reject update of a single trajectory.

    Consumes exactly three uniforms from `rng` (source, target, accept) so
    that driving it with a `CounterStream` reproduces the batched kernel.
    The source is sampled with probability rho_ii; acceptance jumps to the
    target projector, rejection applies the trace-preserving decoherence map
    around the source.
    """
    rho = state.matrix
    d = rho.shape[0]
    if len(energies) != d:
        raise DimensionMismatch(f"got {len(energies)} energies for dimension {d}")
    # clip rounding noise so the cumulative distribution is monotone
    populations = np.maximum(np.real(np.diag(rho)), 0.0)
    if populations.max(initial=0.0) <= 1e-15:
        raise DegenerateState("all diagonal entries vanish; no source to sample")

    i = _sample_categorical(np.cumsum(populations), rng.random())
    jx = min(int(rng.random() * (d - 1)), d - 2)
    j = jx + 1 if jx >= i else jx
    u_accept = rng.random()

    if u_accept < acceptance(omega(energies[i], energies[j]), beta):
        out = np.zeros_like(rho)
        out[j, j] = 1.0
        return TrajectoryState(out, 1.0)
    # rejection: keep only row/column i, rescaled to unit trace
    out = np.zeros_like(rho)
    scale = 2.0 * populations[i]
    out[i, :] = rho[i, :] / scale
    out[:, i] = rho[:, i] / scale
    out[i, i] = 1.0  # (rho_ii + rho_ii) / (2 rho_ii), pinned exactly
    return TrajectoryState(out, 1.0)


def mc_averaged_map(rho: np.ndarray, energies: np.ndarray, beta: float) -> np.ndarray:
    """Exact expectation of one trajectory step.

    Built directly from the accept/reject average over all proposals: the
    accepted branch lands population on the target projector, the rejected
    branch applies the decoherence map around the source, and each of the
    L = d - 1 targets is proposed with equal probability.
    """
    d = rho.shape[0]
    if len(energies) != d:
        raise DimensionMismatch(f"got {len(energies)} energies for dimension {d}")
    if d < 2:
        raise DimensionMismatch("need at least two eigenstates")
    alpha = acceptance_matrix(energies, beta)
    populations = np.real(np.diag(rho))
    # alpha's diagonal is 1, so subtracting populations removes the i == j term
    gain = alpha.T @ populations - populations
    reject_weight = d - alpha.sum(axis=1)  # sum_{j != i} (1 - alpha_ij)
    anticommutator = reject_weight[:, None] * rho + rho * reject_weight[None, :]
    return (np.diag(gain).astype(np.complex128) + 0.5 * anticommutator) / (d - 1)


def _coherence_templates(rho0: np.ndarray, populations: np.ndarray) -> dict[int, np.ndarray]:
    """Off-diagonal part of the step-1 rejected state for each source.

    A run that has only ever rejected carries the initial coherences of its
    first source's row/column, halved every step; everything else about the
    mean state is captured by the integer occupation counts.
    """
    templates = {}
    d = rho0.shape[0]
    off = rho0 - np.diag(np.diag(rho0))
    if not np.any(off):
        return templates
    for m in range(d):
        if populations[m] <= 0:
            continue
        t = np.zeros_like(rho0)
        scale = 2.0 * populations[m]
        t[m, :] = off[m, :] / scale
        t[:, m] = off[:, m] / scale
        if np.any(t):
            templates[m] = t
    return templates


def _run_chunked(cum0, accept_prob, runs, steps, seed):
    """Dispatch the kernel over run chunks; exact integer merge."""
    seed &= (1 << 64) - 1  # the compiled kernel takes the seed as uint64
    d = len(cum0)
    workers = min(worker_count(), max(1, runs // 1024))
    if workers <= 1:
        counts = np.zeros((steps, d), dtype=np.int64)
        alive = np.zeros((steps, d), dtype=np.int64)
        _kernel.sample_chain(cum0, accept_prob, 0, runs, steps, seed, counts, alive)
        return counts, alive
    bounds = np.linspace(0, runs, workers + 1, dtype=np.int64)
    results = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = []
        for w in range(workers):
            c = np.zeros((steps, d), dtype=np.int64)
            a = np.zeros((steps, d), dtype=np.int64)
            start = int(bounds[w])
            count = int(bounds[w + 1] - bounds[w])
            futures.append(
                pool.submit(
                    _kernel.sample_chain, cum0, accept_prob, start, count, steps, seed, c, a
                )
            )
            results.append((c, a))
        for f in futures:
            f.result()
    counts = sum(c for c, _ in results)
    alive = sum(a for _, a in results)
    return counts, alive


def _evolve_trajectories(energies, config: MetropolisConfig, rho0) -> TimeSeries:
    populations = np.maximum(np.real(np.diag(rho0)), 0.0)
    cum0 = np.cumsum(populations)
    accept_prob = acceptance_matrix(energies, config.beta)
    counts, alive = _run_chunked(cum0, accept_prob, config.runs, config.steps, config.seed)
    templates = _coherence_templates(rho0, populations)

    series = TimeSeries(states=[rho0.copy()])
    inv_runs = 1.0 / config.runs
    for n in range(1, config.steps + 1):
        state = np.diag(counts[n - 1] * inv_runs).astype(np.complex128)
        if templates:
            halvings = 2.0 ** (1 - n)  # coherences halve on every rejection
            for m in sorted(templates):
                weight = alive[n - 1, m] * inv_runs * halvings
                if weight:
                    state += weight * templates[m]
        series.states.append(state)
    return series


def _evolve_averaged(energies, config: MetropolisConfig, rho0) -> TimeSeries:
    series = TimeSeries(states=[rho0.copy()])
    for _ in range(config.steps):
        series.states.append(mc_averaged_map(series.states[-1], energies, config.beta))
    return series


def mc_evolve(
    energies: np.ndarray,
    config: MetropolisConfig,
    rho0: np.ndarray,
    mode: str = "trajectories",
) -> TimeSeries:
    """Evolve rho0 for config.steps steps.

    mode "trajectories" averages config.runs independent chains (counter
    seeded, so results are bit-reproducible and worker-count independent);
    mode "averaged_map" iterates the deterministic expectation map.
    """
    energies = np.asarray(energies, dtype=np.float64)
    rho = check_density_matrix(rho0)
    if len(energies) != rho.shape[0]:
        raise DimensionMismatch(
            f"got {len(energies)} energies for dimension {rho.shape[0]}"
        )
    if mode == "trajectories":
        return _evolve_trajectories(energies, config, rho)
    if mode == "averaged_map":
        return _evolve_averaged(energies, config, rho)
    raise ValueError(f"unknown mode {mode!r}")
