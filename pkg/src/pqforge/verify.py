"""Exact checks of partial and complete colorings.

Two independent paths are provided: a chunked numpy scan used by default
and a plain itertools scan (``*_reference``) used as a cross-check.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterator, List, Tuple

import numpy as np

from .core import binom2, budget_table
from .engine import combinations_array, row_repeats, slot_pairs, with_sentinels
from .errors import PreconditionError

CHUNK_ROWS = 1 << 18


def as_matrix(coloring) -> np.ndarray:
    """Color matrix of a state, a coloring or a raw array."""
    mat = getattr(coloring, "color", None)
    if mat is None:
        mat = getattr(coloring, "matrix", coloring)
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise PreconditionError(f"expected a square color matrix, got shape {mat.shape}")
    return mat


def iter_subsets(n: int, k: int, chunk: int = CHUNK_ROWS) -> Iterator[np.ndarray]:
    """Yield all k-subsets of range(n) in lexicographic order, in chunks."""
    if k < 1 or k > n:
        return
    if k == 1:
        yield np.arange(n, dtype=np.int32).reshape(-1, 1)
        return
    tail = combinations_array(n, k - 1)
    firsts = tail[:, 0]
    for v in range(n - k + 1):
        # rows of the (k-1)-subset array starting above v form a suffix
        start = int(np.searchsorted(firsts, v + 1))
        block = tail[start:]
        for lo in range(0, len(block), chunk):
            part = block[lo : lo + chunk]
            rows = np.empty((len(part), k), dtype=np.int32)
            rows[:, 0] = v
            rows[:, 1:] = part
            yield rows


def subset_colors(mat: np.ndarray, S: np.ndarray) -> np.ndarray:
    a, b = slot_pairs(S.shape[1])
    return mat[S[:, a], S[:, b]]


def verify_partial(coloring, p: int = None, q: int = None, first_only: bool = False) -> List[Tuple[Tuple[int, ...], int, int]]:
    """Every vertex set of size 3..p whose colored edges exceed R(|S|) repeats."""
    mat = as_matrix(coloring)
    params = getattr(coloring, "params", None)
    if p is None or q is None:
        if params is None:
            raise PreconditionError("p and q are required for a raw matrix")
        p, q = params.p, params.q
    table = budget_table(p, q)
    n = mat.shape[0]
    out = []
    for s in range(3, min(p, n) + 1):
        R = table[s]
        if R + 1 > binom2(s):
            continue
        for S in iter_subsets(n, s):
            rep = row_repeats(with_sentinels(subset_colors(mat, S)))
            bad = np.flatnonzero(rep > R)
            for r in bad:
                out.append((tuple(int(x) for x in S[r]), int(rep[r]), R))
                if first_only:
                    return out
    return out


def verify_pq(coloring, p: int, q: int, first_only: bool = False) -> List[Tuple[Tuple[int, ...], int]]:
    """Every p-set seeing fewer than q colors, as (S, distinct colors)."""
    mat = as_matrix(coloring)
    n = mat.shape[0]
    iu = np.triu_indices(n, k=1)
    if (mat[iu] < 0).any():
        raise PreconditionError("verify_pq needs a complete coloring")
    m = binom2(p)
    out = []
    for S in iter_subsets(n, p):
        distinct = m - row_repeats(subset_colors(mat, S))
        bad = np.flatnonzero(distinct < q)
        for r in bad:
            out.append((tuple(int(x) for x in S[r]), int(distinct[r])))
            if first_only:
                return out
    return out


def count_colors(coloring) -> int:
    mat = as_matrix(coloring)
    iu = np.triu_indices(mat.shape[0], k=1)
    vals = mat[iu]
    return int(len(np.unique(vals[vals >= 0])))


def format_violations(violations) -> List[str]:
    """Report lines ``v1 ... vp distinct_colors``."""
    return [" ".join(str(v) for v in S) + f" {d}" for S, d in violations]


# --- reference path ---------------------------------------------------------------


def verify_partial_reference(coloring, p: int, q: int) -> List[Tuple[Tuple[int, ...], int, int]]:
    mat = as_matrix(coloring).tolist()
    n = len(mat)
    out = []
    for s in range(3, min(p, n) + 1):
        R = budget_table(p, q)[s]
        for S in combinations(range(n), s):
            cols = [mat[a][b] for a, b in combinations(S, 2) if mat[a][b] >= 0]
            r = len(cols) - len(set(cols))
            if r > R:
                out.append((S, r, R))
    return out


def verify_pq_reference(coloring, p: int, q: int) -> List[Tuple[Tuple[int, ...], int]]:
    mat = as_matrix(coloring).tolist()
    n = len(mat)
    if any(mat[a][b] < 0 for a, b in combinations(range(n), 2)):
        raise PreconditionError("verify_pq needs a complete coloring")
    out = []
    for S in combinations(range(n), p):
        d = len({mat[a][b] for a, b in combinations(S, 2)})
        if d < q:
            out.append((S, d))
    return out


__all__ = [
    "count_colors",
    "format_violations",
    "iter_subsets",
    "verify_partial",
    "verify_partial_reference",
    "verify_pq",
    "verify_pq_reference",
]
