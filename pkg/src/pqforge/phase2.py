"""Phase 2: finish the partial coloring with a fresh palette.

Fresh colors are stored as integers offset by the size of the real
palette, so real and fresh colors never coincide.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Set, Tuple

import numpy as np

from .core import binom2
from .engine import ColoringState, Phase1Result, combinations_array, row_repeats
from .errors import PreconditionError
from .verify import subset_colors, verify_pq

PHASE2_STREAM = 2


@dataclass
class FullColoring:
    matrix: np.ndarray
    p: int
    q: int
    num_real: int
    num_fresh: int
    seed: int
    phase2: np.ndarray  # bool matrix, True where the color is fresh

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def phase2_edges(self) -> List[Tuple[int, int]]:
        iu, iv = np.nonzero(np.triu(self.phase2, k=1))
        return list(zip(iu.tolist(), iv.tolist()))

    def is_fresh(self, c: int) -> bool:
        return c >= self.num_real


@dataclass
class Phase2Result:
    coloring: FullColoring
    rounds: int
    ok: bool
    reason: str = ""
    violations: List[Tuple[Tuple[int, ...], int]] = field(default_factory=list)


def phase2_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, PHASE2_STREAM])))


def _state_of(phase1) -> ColoringState:
    return phase1.state if isinstance(phase1, Phase1Result) else phase1


def complete_uniform(phase1, seed: int, num_fresh: Optional[int] = None, allow_failed: bool = False) -> FullColoring:
    """Give every uncolored edge an independent uniform fresh color."""
    if isinstance(phase1, Phase1Result) and not phase1.succeeded and not allow_failed:
        raise PreconditionError("Phase 1 did not reach i_max; pass allow_failed to complete anyway")
    st = _state_of(phase1)
    k = st.num_colors if num_fresh is None else int(num_fresh)
    if k < 1:
        raise PreconditionError(f"fresh palette must be non-empty, got {k}")
    rng = phase2_rng(seed)
    mat = st.color.copy()
    n = st.n
    mask = np.zeros((n, n), dtype=bool)
    ids = np.sort(st.uncolored_ids())
    if len(ids):
        draws = st.num_colors + rng.integers(0, k, size=len(ids))
        u, v = st.edges[ids, 0], st.edges[ids, 1]
        mat[u, v] = mat[v, u] = draws
        mask[u, v] = mask[v, u] = True
    return FullColoring(mat, st.params.p, st.params.q, st.num_colors, k, seed, mask)


def _sets_through(n: int, p: int, u: int, v: int) -> np.ndarray:
    others = np.array([w for w in range(n) if w != u and w != v], dtype=np.int32)
    W = combinations_array(len(others), p - 2)
    S = np.empty((len(W), p), dtype=np.int32)
    S[:, 0], S[:, 1] = min(u, v), max(u, v)
    S[:, 2:] = others[W]
    S.sort(axis=1)
    return S


def resample_until_valid(
    phase1,
    seed: int,
    max_rounds: Optional[int] = None,
    num_fresh: Optional[int] = None,
    allow_failed: bool = False,
) -> Phase2Result:
    """Resample fresh edges of violating p-sets until every p-set sees q colors."""
    col = complete_uniform(phase1, seed, num_fresh, allow_failed)
    p, q, n = col.p, col.q, col.n
    if max_rounds is None:
        from math import comb

        max_rounds = 10 * comb(n, p)
    if max_rounds < 1:
        raise PreconditionError(f"max_rounds must be at least 1, got {max_rounds}")
    # a separate stream for resampling keeps complete_uniform reproducible on its own
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, PHASE2_STREAM, 1])))
    mat = col.matrix
    bad: Set[Tuple[int, ...]] = {S for S, _ in verify_pq(mat, p, q)}
    m = binom2(p)
    rounds = 0
    while bad:
        if rounds >= max_rounds:
            viol = [(S, _distinct(mat, S)) for S in sorted(bad)]
            return Phase2Result(col, rounds, False, "max_rounds exhausted", viol)
        S = min(bad)
        pairs = [(a, b) for i, a in enumerate(S) for b in S[i + 1 :] if col.phase2[a, b]]
        if not pairs:
            viol = [(T, _distinct(mat, T)) for T in sorted(bad)]
            return Phase2Result(col, rounds, False, "phase1-inconsistency: violating set has no fresh edge", viol)
        draws = col.num_real + rng.integers(0, col.num_fresh, size=len(pairs))
        for (a, b), c in zip(pairs, draws):
            mat[a, b] = mat[b, a] = c
        rounds += 1
        touched = np.unique(np.concatenate([_sets_through(n, p, a, b) for a, b in pairs]), axis=0)
        distinct = m - row_repeats(subset_colors(mat, touched))
        for row, d in zip(touched, distinct):
            key = tuple(int(x) for x in row)
            if d < q:
                bad.add(key)
            else:
                bad.discard(key)
    return Phase2Result(col, rounds, True)


def _distinct(mat: np.ndarray, S) -> int:
    return len({int(mat[a, b]) for i, a in enumerate(S) for b in S[i + 1 :]})


def adversarial_check(phase1, rng: np.random.Generator, trials: int = 1000) -> Tuple[int, int]:
    """Color the uncolored edges of random p-sets with one new color.

    Only sets with at least q + r - 1 colored edges (r repeats among them)
    are tested; returns (sets tested, sets seeing fewer than q colors).
    """
    st = _state_of(phase1)
    p, q, n = st.params.p, st.params.q, st.n
    tested = failed = 0
    for _ in range(trials):
        S = np.sort(rng.choice(n, size=p, replace=False))
        cols = [int(st.color[a, b]) for i, a in enumerate(S) for b in S[i + 1 :]]
        colored = [c for c in cols if c >= 0]
        ell = len(colored)
        r = ell - len(set(colored))
        if ell < q + r - 1:
            continue
        tested += 1
        distinct = len(set(colored)) + (1 if ell < len(cols) else 0)
        if distinct < q:
            failed += 1
    return tested, failed


__all__ = [
    "FullColoring",
    "Phase2Result",
    "adversarial_check",
    "complete_uniform",
    "resample_until_valid",
]
