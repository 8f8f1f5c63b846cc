"""Worker-count control for the engines.

QCOLLIDE_THREADS caps internal parallelism; results never depend on the
worker count because every parallel reduction is either over exact integer
counts or merged in fixed index order.
"""

from __future__ import annotations

import os


def worker_count() -> int:
    env = os.environ.get("QCOLLIDE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"QCOLLIDE_THREADS must be an integer, got {env!r}") from None
    return min(8, os.cpu_count() or 1)
