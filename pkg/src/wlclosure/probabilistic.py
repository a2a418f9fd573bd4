"""Monte Carlo refinement: random substitution plus exact integer products.

Instead of comparing full cell fingerprints, each iteration substitutes a
fresh random integer in ``1..m`` for every color -- one family for the left
(row) position, an independent family for the right (column) position -- and
multiplies the two numeric matrices exactly.  Cells whose fingerprints
differ collide in the product with probability at most ``2/m``; cells whose
fingerprints agree always receive equal numeric values.  The resulting
partition therefore *never* splits finer than the exact step, and a
refinement run can only err by stopping too early, one-sidedly.

All randomness flows through a caller-supplied ``numpy.random.Generator``
(``default_rng``/PCG64 by seed everywhere in this package).  Per iteration
the left family for colors ``1..r`` is drawn first, then the right family;
this draw order is part of the reproducibility contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classical import WlResult, RefinementInvariantError, iteration_budget
from .graph import (
    ColorMatrix,
    InputError,
    RefinementOutcome,
    color_counts,
    is_rainbow,
    rainbow_refine,
    refine_by,
)
from .matmul import INT64_MAX, OverflowGuardError, multiply


@dataclass(frozen=True)
class RandomSubstitution:
    """One iteration's random color values: ``left[c-1]``/``right[c-1]`` for color ``c``."""

    m: int
    left: np.ndarray
    right: np.ndarray


@dataclass(frozen=True)
class ValueMatrix:
    """Numeric product of one substitution round; entries lie in ``[n, n * m**2]``."""

    cells: np.ndarray

    @property
    def n(self) -> int:
        return self.cells.shape[0]


@dataclass(frozen=True)
class StoppingPolicy:
    """When a refinement run stops.

    ``theoretical`` runs the full :func:`iteration_budget` regardless of
    progress; ``practical`` stops after ``patience`` consecutive iterations
    without a split (each missed split survives one such iteration with
    probability at most ``2/m``, so the miss probability decays as
    ``(2/m)**patience``).
    """

    kind: str
    growth_constant: float = 1.0
    patience: int = 3

    def __post_init__(self) -> None:
        if self.kind not in ("theoretical", "practical"):
            raise InputError(f"unknown stopping policy kind {self.kind!r}")
        if self.growth_constant <= 0:
            raise InputError("growth constant must be positive")
        if self.patience < 1:
            raise InputError("patience must be >= 1")

    @classmethod
    def practical(cls, patience: int = 3) -> "StoppingPolicy":
        return cls("practical", patience=patience)

    @classmethod
    def theoretical(cls, growth_constant: float = 1.0) -> "StoppingPolicy":
        return cls("theoretical", growth_constant=growth_constant)


@dataclass(frozen=True)
class RunParams:
    """Knobs of one Monte Carlo run: substitution range, stopping rule, seed."""

    m: int
    policy: StoppingPolicy
    seed: int

    def __post_init__(self) -> None:
        if self.m < 2:
            raise InputError(f"m must be >= 2, got {self.m}")


def draw_substitution(r: int, m: int, rng: np.random.Generator) -> RandomSubstitution:
    """Draw fresh left and right families of uniform values in ``1..m``."""
    if r < 1:
        raise InputError(f"color count must be >= 1, got {r}")
    if m < 2:
        raise InputError(f"m must be >= 2, got {m}")
    if m > INT64_MAX:
        raise OverflowGuardError(f"m {m} exceeds the int64 value range")
    left = rng.integers(1, m + 1, size=r, dtype=np.int64)
    right = rng.integers(1, m + 1, size=r, dtype=np.int64)
    return RandomSubstitution(m, left, right)


def numeric_product(
    x: ColorMatrix, sub: RandomSubstitution, backend: str = "blocked"
) -> ValueMatrix:
    """Exact product of the substituted row and column matrices.

    Entry ``(u, v)`` is the sum over ``w`` of ``left[c(u, w)] * right[c(w, v)]``,
    a number in ``[n, n * m**2]``; the bound is checked up front against the
    int64 range and the run aborts rather than wrap.
    """
    if sub.left.shape[0] < x.r or sub.right.shape[0] < x.r:
        raise InputError("substitution covers fewer colors than the input uses")
    if x.n * sub.m**2 > INT64_MAX:
        raise OverflowGuardError(
            f"n * m**2 = {x.n * sub.m**2} exceeds int64 max {INT64_MAX}"
        )
    left_cells = sub.left[x.cells - 1]
    right_cells = sub.right[x.cells - 1]
    product = multiply(left_cells, right_cells, backend=backend)
    del left_cells, right_cells
    lo, hi = int(product.min()), int(product.max())
    if lo < x.n or hi > x.n * sub.m**2:
        raise RefinementInvariantError(
            f"product entries [{lo}, {hi}] left the guaranteed range"
        )
    return ValueMatrix(product)


def probabilistic_step(
    x: ColorMatrix, m: int, rng: np.random.Generator, backend: str = "blocked"
) -> RefinementOutcome:
    """One randomized refinement pass with a fresh substitution."""
    sub = draw_substitution(x.r, m, rng)
    return refine_by(x, numeric_product(x, sub, backend=backend).cells)


def probabilistic_closure(
    x: ColorMatrix, params: RunParams, backend: str = "blocked"
) -> WlResult:
    """Randomized refinement run from ``x`` to its (probable) closure.

    Identical inputs and params reproduce the identical result, trace and
    all.  The practical policy can stop early only by missing a split for
    ``patience`` consecutive independent iterations.
    """
    rng = np.random.default_rng(params.seed)
    current = rainbow_refine(x)
    trace: list[int] = []
    policy = params.policy
    if policy.kind == "theoretical":
        budget = iteration_budget(x.n, policy.growth_constant)
        for _ in range(budget):
            outcome = probabilistic_step(current, params.m, rng, backend=backend)
            trace.append(outcome.result.r)
            current = outcome.result
        return WlResult(current, budget, tuple(trace), "budget_exhausted")
    cap = (x.n * x.n + 2) * (policy.patience + 1)
    quiet = 0
    while quiet < policy.patience:
        if len(trace) > cap:
            raise RefinementInvariantError("run did not stabilize within its structural cap")
        outcome = probabilistic_step(current, params.m, rng, backend=backend)
        trace.append(outcome.result.r)
        quiet = 0 if outcome.refined else quiet + 1
        current = outcome.result
    return WlResult(current, len(trace), tuple(trace), "stable")


def check_coherent(x: ColorMatrix, m: int, trials: int, rng: np.random.Generator) -> bool:
    """Fast coherence test: does any of ``trials`` random passes split a class?

    A coloring that is not already rainbow is reported not coherent without
    sampling.  For coherent inputs the answer is always ``True``; for others
    each trial fails to notice a split with probability at most ``2/m``, so
    a wrong ``True`` occurs with probability at most ``(2/m)**trials``.
    """
    if trials < 1:
        raise InputError(f"trials must be >= 1, got {trials}")
    if not is_rainbow(x):
        return False
    for _ in range(trials):
        if probabilistic_step(x, m, rng).refined:
            return False
    return True


def error_bound(n: int, m: int, growth_constant: float = 1.0) -> float:
    """Bound on the probability that a theoretical-policy run misses a split.

    Each iteration compares at most ``n**4`` cell pairs, each colliding with
    probability at most ``2/m``, over ``growth_constant * n * log2(n)``
    iterations: ``min(1, 2 * growth_constant * n**5 * log2(n) / m)``.  For
    ``m <= 2 * n**4`` the premise gives nothing and the bound is 1.0; a
    single vertex can never be mis-refined, so ``n == 1`` gives 0.0.
    """
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    if m < 2:
        raise InputError(f"m must be >= 2, got {m}")
    if growth_constant <= 0:
        raise InputError("growth constant must be positive")
    if n == 1:
        return 0.0
    if m <= 2 * n**4:
        return 1.0
    return min(1.0, 2.0 * growth_constant * n**5 * math.log2(n) / m)


@dataclass(frozen=True)
class PairedRun:
    """Two lockstep runs under shared randomness, plus what they imply.

    Unpacks as ``(first, second, mapping)``.  ``mapping`` is a candidate
    vertex bijection read off the loop colors when both closures are
    discrete, else ``None``.  ``counts_trace[i]`` holds both sides' per-color
    cell counts after ``i`` steps (entry 0 is the rainbow-refined start);
    isomorphic inputs produce identical count vectors at every step.
    """

    first: WlResult
    second: WlResult
    mapping: tuple[int, ...] | None
    counts_trace: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def __iter__(self):
        yield self.first
        yield self.second
        yield self.mapping


def _loop_mapping(a: ColorMatrix, b: ColorMatrix) -> tuple[int, ...] | None:
    loops_a = [int(c) for c in a.cells.diagonal()]
    loops_b = [int(c) for c in b.cells.diagonal()]
    if len(set(loops_a)) != a.n or len(set(loops_b)) != b.n:
        return None
    position = {c: v for v, c in enumerate(loops_b)}
    if set(position) != set(loops_a):
        return None
    return tuple(position[c] for c in loops_a)


def paired_closure(
    x: ColorMatrix, y: ColorMatrix, params: RunParams, backend: str = "blocked"
) -> PairedRun:
    """Refine two same-size colorings in lockstep on one random stream.

    Every iteration draws a single substitution sized for the larger color
    count and applies it to both sides, so color ids that agree across the
    sides keep receiving the same random values.  Isomorphic inputs (written
    with a shared color vocabulary) then follow identical trajectories, and
    a divergence of the per-color count vectors certifies that no refinement
    run can treat the inputs alike.
    """
    if x.n != y.n:
        raise InputError("paired inputs must have the same size")
    rng = np.random.default_rng(params.seed)
    a = rainbow_refine(x)
    b = rainbow_refine(y)
    trace_a: list[int] = []
    trace_b: list[int] = []
    counts: list[tuple[tuple[int, ...], tuple[int, ...]]] = [
        (color_counts(a), color_counts(b))
    ]

    def one_iteration() -> bool:
        nonlocal a, b
        sub = draw_substitution(max(a.r, b.r), params.m, rng)
        out_a = refine_by(a, numeric_product(a, sub, backend=backend).cells)
        out_b = refine_by(b, numeric_product(b, sub, backend=backend).cells)
        a = out_a.result
        b = out_b.result
        trace_a.append(a.r)
        trace_b.append(b.r)
        counts.append((color_counts(a), color_counts(b)))
        return out_a.refined or out_b.refined

    policy = params.policy
    if policy.kind == "theoretical":
        budget = iteration_budget(x.n, policy.growth_constant)
        for _ in range(budget):
            one_iteration()
        reason = "budget_exhausted"
        iterations = budget
    else:
        cap = (x.n * x.n + 2) * (policy.patience + 1) * 2
        quiet = 0
        while quiet < policy.patience:
            if len(trace_a) > cap:
                raise RefinementInvariantError(
                    "paired run did not stabilize within its structural cap"
                )
            quiet = 0 if one_iteration() else quiet + 1
        reason = "stable"
        iterations = len(trace_a)

    return PairedRun(
        WlResult(a, iterations, tuple(trace_a), reason),
        WlResult(b, iterations, tuple(trace_b), reason),
        _loop_mapping(a, b),
        tuple(counts),
    )
