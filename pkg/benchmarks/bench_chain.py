"""Benchmark the compiled chain kernel against the numpy fallback.

Runs the Fig.-5-sized workload (N=2 chain, 20 steps) at increasing run
counts through both implementations, checks they produce identical counts,
and prints throughput and speedup.

Usage: python benchmarks/bench_chain.py [--runs 1000000]
"""

import argparse
import time

import numpy as np

from qcollide import MetropolisConfig, SpinChainParams, build_xxz, herm_eig
from qcollide import _chain_py
from qcollide.metropolis import acceptance_matrix

try:
    from qcollide import _chain

    HAVE_EXT = True
except ImportError:
    HAVE_EXT = False


def drive(kernel, cum0, acc, runs, steps, seed):
    d = len(cum0)
    counts = np.zeros((steps, d), dtype=np.int64)
    alive = np.zeros((steps, d), dtype=np.int64)
    t0 = time.perf_counter()
    kernel.sample_chain(cum0, acc, 0, runs, steps, seed, counts, alive)
    return time.perf_counter() - t0, counts, alive


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--runs", type=int, default=1_000_000)
    parser.add_argument("--steps", type=int, default=20)
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()

    energies = herm_eig(build_xxz(SpinChainParams(2))).values
    config = MetropolisConfig(beta=2.0, steps=args.steps, runs=args.runs, seed=args.seed)
    acc = acceptance_matrix(energies, config.beta)
    cum0 = np.cumsum(np.full(len(energies), 1.0 / len(energies)))

    print(f"workload: d={len(energies)} steps={config.steps} runs={config.runs:,}")
    t_py, counts_py, alive_py = drive(_chain_py, cum0, acc, config.runs, config.steps, config.seed)
    rate_py = config.runs * config.steps / t_py
    print(f"numpy fallback : {t_py:8.3f} s   {rate_py / 1e6:8.2f} M run-steps/s")

    if not HAVE_EXT:
        print("compiled kernel: not built (pip install -e . with a C compiler)")
        return

    t_cy, counts_cy, alive_cy = drive(_chain, cum0, acc, config.runs, config.steps, config.seed)
    rate_cy = config.runs * config.steps / t_cy
    print(f"cython kernel  : {t_cy:8.3f} s   {rate_cy / 1e6:8.2f} M run-steps/s")
    print(f"speedup        : {t_py / t_cy:8.2f} x")

    same = np.array_equal(counts_py, counts_cy) and np.array_equal(alive_py, alive_cy)
    print(f"outputs identical: {same}")
    if not same:
        raise SystemExit("kernel mismatch: fallback and extension disagree")


if __name__ == "__main__":
    main()
