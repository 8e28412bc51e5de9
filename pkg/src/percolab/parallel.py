"""Seed-stream sharding with an order-preserving merge.

Samples are cut into fixed-size blocks whose stream ranges do not depend on
the worker count; block results are returned in block order, so any
reduction done by the caller is bit-identical for every ``workers`` value.
"""

from __future__ import annotations

import multiprocessing as mp
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable

BLOCK = 1 << 14


def blocks(n: int, block: int = BLOCK) -> list[tuple[int, int]]:
    """``(first_stream, count)`` pairs covering ``n`` samples."""
    return [(s, min(block, n - s)) for s in range(0, n, block)]


def run_blocks(fn: Callable[..., Any], n: int, args: tuple = (), workers: int = 1,
               block: int = BLOCK) -> list[Any]:
    """Call ``fn(*args, first, count)`` for every block and return results in order."""
    work = blocks(n, block)
    if workers <= 1 or len(work) <= 1:
        return [fn(*args, s, c) for s, c in work]
    ctx = mp.get_context("fork" if os.name == "posix" else "spawn")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as ex:
        futs = [ex.submit(fn, *args, s, c) for s, c in work]
        return [f.result() for f in futs]
