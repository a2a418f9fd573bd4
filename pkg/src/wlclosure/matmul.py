"""Exact int64 matrix multiplication with an a-priori overflow guard.

Both backends produce bit-identical results.  ``naive`` hands the whole
product to numpy's int64 kernel; ``blocked`` accumulates tile-by-tile
products (tile size 64), which keeps the working set cache-sized for large
operands.  Neither is allowed to wrap: before multiplying, the worst-case
magnitude ``k * max|a| * max|b|`` is bounded in exact Python integers and the
call aborts with :class:`OverflowGuardError` when it could exceed int64.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .graph import InputError

INT64_MAX = 2**63 - 1
TILE = 64
BACKENDS = ("naive", "blocked")


class OverflowGuardError(ArithmeticError):
    """The requested product could exceed the int64 range."""


def as_int_matrix(raw) -> np.ndarray:
    """Coerce to a 2-D C-contiguous int64 ndarray."""
    arr = np.ascontiguousarray(raw, dtype=np.int64)
    if arr.ndim != 2:
        raise InputError(f"expected a 2-D matrix, got ndim={arr.ndim}")
    return arr


def _max_abs(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    return max(abs(int(a.max())), abs(int(a.min())))


def _check_magnitudes(a: np.ndarray, b: np.ndarray) -> None:
    bound = a.shape[1] * _max_abs(a) * _max_abs(b)
    if bound > INT64_MAX:
        raise OverflowGuardError(
            f"product magnitude bound {bound} exceeds int64 max {INT64_MAX}"
        )


def _multiply_blocked(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    rows, inner = a.shape
    cols = b.shape[1]
    out = np.zeros((rows, cols), dtype=np.int64)
    for i0 in range(0, rows, TILE):
        i1 = min(i0 + TILE, rows)
        for k0 in range(0, inner, TILE):
            k1 = min(k0 + TILE, inner)
            a_blk = a[i0:i1, k0:k1]
            for j0 in range(0, cols, TILE):
                j1 = min(j0 + TILE, cols)
                out[i0:i1, j0:j1] += a_blk @ b[k0:k1, j0:j1]
    return out


def multiply(a, b, backend: str = "blocked") -> np.ndarray:
    """Exact product of two integer matrices.

    Raises :class:`OverflowGuardError` when the conservative magnitude bound
    does not fit int64; never returns a wrapped value.
    """
    a = as_int_matrix(a)
    b = as_int_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise InputError(f"inner dimensions differ: {a.shape} x {b.shape}")
    if backend not in BACKENDS:
        raise InputError(f"unknown backend {backend!r}, expected one of {BACKENDS}")
    _check_magnitudes(a, b)
    if backend == "naive":
        return a @ b
    return _multiply_blocked(a, b)


@dataclass(frozen=True)
class BenchResult:
    n: int
    backend: str
    seconds_median: float
    repetitions: int


def bench_multiply(
    sizes, backend: str = "blocked", repetitions: int = 5, seed: int = 0
) -> list[BenchResult]:
    """Time square products of random matrices with entries in 1..10**6."""
    if repetitions < 1:
        raise InputError("repetitions must be >= 1")
    rng = np.random.default_rng(seed)
    results = []
    for n in sizes:
        a = rng.integers(1, 10**6 + 1, size=(n, n), dtype=np.int64)
        b = rng.integers(1, 10**6 + 1, size=(n, n), dtype=np.int64)
        samples = []
        for _ in range(repetitions):
            t0 = time.perf_counter()
            multiply(a, b, backend=backend)
            samples.append(time.perf_counter() - t0)
        samples.sort()
        results.append(BenchResult(n, backend, samples[len(samples) // 2], repetitions))
    return results
