"""Canonical ordering of variable pairs.

Interactions and edge indicators are stored as flat vectors over the strict
lower triangle, row-major: (r, j) with r = 1..p-1 and j = 0..r-1 (0-based),
so the sequence is (1,0), (2,0), (2,1), (3,0), (3,1), (3,2), ...  The pairs
belonging to row r occupy the contiguous slice [r(r-1)/2, r(r+1)/2).

Every module uses this one ordering; serialized files carry explicit 1-based
(r, j) labels so the convention is visible on disk.
"""

from __future__ import annotations

import numpy as np


def pair_count(p: int) -> int:
    """Number of unordered pairs among p items."""
    return p * (p - 1) // 2


def pair_index(r: int, j: int, p: int | None = None) -> int:
    """Flat index of pair (r, j); order of r and j does not matter."""
    if r == j:
        raise ValueError(f"pair ({r}, {j}) is not off-diagonal")
    if r < j:
        r, j = j, r
    if j < 0 or (p is not None and r >= p):
        raise ValueError(f"pair ({r}, {j}) out of range for p={p}")
    return r * (r - 1) // 2 + j


def pair_list(p: int) -> list[tuple[int, int]]:
    """All pairs (r, j), r > j, in canonical order."""
    return [(r, j) for r in range(1, p) for j in range(r)]


def pair_array(p: int) -> np.ndarray:
    """(n_pairs, 2) int array of canonical pairs, columns (r, j)."""
    return np.array(pair_list(p), dtype=np.intp).reshape(pair_count(p), 2)


def row_slice(r: int) -> slice:
    """Slice of the flat pair vector holding (r, j) for all j < r."""
    return slice(r * (r - 1) // 2, r * (r + 1) // 2)


def pair_labels(names: list[str]) -> list[tuple[str, str]]:
    """Canonical pair labels (name_r, name_j) for named variables."""
    return [(names[r], names[j]) for r, j in pair_list(len(names))]
