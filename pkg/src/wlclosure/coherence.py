"""Direct verification of the coherence axioms, plus named test fixtures.

A coloring is coherent when (a) loop colors never appear off the diagonal,
(b) the color of an arc determines the color of its reverse arc, and (c) for
any two cells of the same color and any color pair ``(i, j)``, the number of
intermediate vertices ``w`` with ``c(u, w) = i`` and ``c(w, v) = j`` is the
same.  This module checks the axioms by explicit counting -- dictionaries
and Counters over the raw grid, nothing shared with the refinement engines
-- so it can serve as a second, independent oracle: a coloring passes here
exactly when it is rainbow and no refinement step can split it.

Violations come with a witness naming the offending cells (0-based vertex
indices), found in row-major scan order, so a failed check is replayable by
hand.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .graph import ColorMatrix, InputError, validate


@dataclass(frozen=True)
class CoherenceWitness:
    """Two same-colored cells that break an axiom.

    ``kind`` is ``"diagonal_overlap"`` (first cell is a loop, second an arc
    of the same color), ``"transpose_split"`` (the cells' reverse arcs have
    different colors) or ``"profile_mismatch"`` (the cells disagree on the
    count of the ``pair`` of intermediate colors).
    """

    kind: str
    first_cell: tuple[int, int]
    second_cell: tuple[int, int]
    pair: tuple[int, int] | None = None


@dataclass(frozen=True)
class CoherenceReport:
    coherent: bool
    witness: CoherenceWitness | None


def verify_coherent(x: ColorMatrix) -> CoherenceReport:
    """Check the three coherence axioms by direct counting, O(n^3) time."""
    n = x.n
    grid = x.cells.tolist()
    columns = [list(col) for col in zip(*grid)]

    loop_cell_of: dict[int, tuple[int, int]] = {}
    for u in range(n):
        loop_cell_of.setdefault(grid[u][u], (u, u))
    for u in range(n):
        for v in range(n):
            if u != v and grid[u][v] in loop_cell_of:
                witness = CoherenceWitness(
                    "diagonal_overlap", loop_cell_of[grid[u][v]], (u, v)
                )
                return CoherenceReport(False, witness)

    reverse_of: dict[int, int] = {}
    seen_at: dict[int, tuple[int, int]] = {}
    for u in range(n):
        for v in range(n):
            color, reverse = grid[u][v], grid[v][u]
            if color not in reverse_of:
                reverse_of[color] = reverse
                seen_at[color] = (u, v)
            elif reverse_of[color] != reverse:
                witness = CoherenceWitness("transpose_split", seen_at[color], (u, v))
                return CoherenceReport(False, witness)

    class_sizes = Counter(c for row in grid for c in row)
    reference: dict[int, Counter] = {}
    ref_cell: dict[int, tuple[int, int]] = {}
    for u in range(n):
        for v in range(n):
            color = grid[u][v]
            if class_sizes[color] == 1:
                continue
            profile = Counter(zip(grid[u], columns[v]))
            if color not in reference:
                reference[color] = profile
                ref_cell[color] = (u, v)
            elif reference[color] != profile:
                ref = reference[color]
                pair = min(p for p in set(ref) | set(profile) if ref[p] != profile[p])
                witness = CoherenceWitness(
                    "profile_mismatch", ref_cell[color], (u, v), pair
                )
                return CoherenceReport(False, witness)

    return CoherenceReport(True, None)


def _fixture_trivial(n: int) -> ColorMatrix:
    if n < 1:
        raise InputError("trivial fixture needs n >= 1")
    grid = np.full((n, n), 2, dtype=np.int64)
    np.fill_diagonal(grid, 1)
    return validate(grid)


def _fixture_cyclic(n: int) -> ColorMatrix:
    if n < 1:
        raise InputError("cyclic fixture needs n >= 1")
    u = np.arange(n)
    return validate((u[None, :] - u[:, None]) % n + 1)


def _fixture_path(n: int) -> ColorMatrix:
    if n < 2:
        raise InputError("path fixture needs n >= 2")
    u = np.arange(n)
    dist = np.abs(u[None, :] - u[:, None])
    grid = np.where(dist == 0, 1, np.where(dist == 1, 2, 3))
    return validate(grid)


def _fixture_cycle5() -> ColorMatrix:
    u = np.arange(5)
    dist = (u[None, :] - u[:, None]) % 5
    grid = np.where(dist == 0, 1, np.where((dist == 1) | (dist == 4), 2, 3))
    return validate(grid)


def _fixture_petersen() -> ColorMatrix:
    vertices = [(a, b) for a in range(5) for b in range(a + 1, 5)]
    n = len(vertices)
    grid = np.empty((n, n), dtype=np.int64)
    for i, p in enumerate(vertices):
        for j, q in enumerate(vertices):
            if i == j:
                grid[i, j] = 1
            elif not set(p) & set(q):
                grid[i, j] = 2
            else:
                grid[i, j] = 3
    return validate(grid)


def _fixture_random(n: int, r: int, seed: int) -> ColorMatrix:
    if n < 1 or r < 1:
        raise InputError("random fixture needs n >= 1 and r >= 1")
    rng = np.random.default_rng(seed)
    return validate(rng.integers(1, r + 1, size=(n, n), dtype=np.int64))


_FIXTURES = {
    "trivial": (_fixture_trivial, ("n",)),
    "cyclic": (_fixture_cyclic, ("n",)),
    "path": (_fixture_path, ("n",)),
    "cycle5": (_fixture_cycle5, ()),
    "petersen": (_fixture_petersen, ()),
    "random": (_fixture_random, ("n", "r", "seed")),
}


def fixture_names() -> tuple[str, ...]:
    return tuple(_FIXTURES)


def make_fixture(name: str, *params: int) -> ColorMatrix:
    """Build a named example coloring.

    ``trivial(n)`` and ``cyclic(n)`` are coherent for every n, as are the
    two strongly regular examples ``cycle5`` and ``petersen`` (loop/edge/
    non-edge colorings); ``path(n)`` is rainbow but not coherent for n >= 3;
    ``random(n, r, seed)`` is an arbitrary seeded coloring.
    """
    if name not in _FIXTURES:
        raise InputError(f"unknown fixture {name!r}, expected one of {sorted(_FIXTURES)}")
    builder, arity = _FIXTURES[name]
    if len(params) != len(arity):
        wanted = ", ".join(arity) if arity else "no parameters"
        raise InputError(f"fixture {name!r} takes {wanted}, got {len(params)} values")
    return builder(*params)
