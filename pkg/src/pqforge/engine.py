"""Phase 1: the random greedy coloring process.

Colors are integers 0..num_colors-1 and the coloring lives in a symmetric
int32 matrix with -1 for uncolored pairs. Forbidden colors are kept in a
boolean (edge, color) matrix that only ever gains entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations
from typing import Dict, List, Optional, Set, Tuple

import numpy as np

from .core import REAL, Color, Edge, Params
from .errors import PreconditionError
from .platonic.types import COL, UNC, UNC_ANY, PartialEmbedding, PlatonicType

COLORED = "colored"
STUCK = "stuck"
REACHED_IMAX = "reached_imax"


@lru_cache(maxsize=64)
def combinations_array(n: int, k: int) -> np.ndarray:
    """All k-subsets of range(n) in lexicographic order, one per row."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.int32)
    if k > n:
        return np.zeros((0, k), dtype=np.int32)
    count = math.comb(n, k)
    flat = np.fromiter(
        (v for c in combinations(range(n), k) for v in c), dtype=np.int32, count=count * k
    )
    return flat.reshape(count, k)


@lru_cache(maxsize=16)
def slot_pairs(s: int) -> Tuple[np.ndarray, np.ndarray]:
    pairs = np.array(list(combinations(range(s), 2)), dtype=np.intp).reshape(-1, 2)
    return pairs[:, 0], pairs[:, 1]


def row_repeats(cols: np.ndarray) -> np.ndarray:
    """Repeats per row; negative entries must already be distinct sentinels."""
    if cols.shape[1] < 2:
        return np.zeros(cols.shape[0], dtype=np.int64)
    srt = np.sort(cols, axis=1)
    return np.count_nonzero(srt[:, 1:] == srt[:, :-1], axis=1)


def with_sentinels(cols: np.ndarray) -> np.ndarray:
    """Replace -1 by a distinct negative value per column."""
    sentinel = -1 - np.arange(cols.shape[1], dtype=cols.dtype)
    return np.where(cols < 0, sentinel, cols)


class ColoringState:
    """The partial coloring after some number of steps."""

    def __init__(self, params: Params, num_colors: Optional[int] = None):
        self.params = params
        self.n = n = params.n
        self.num_colors = int(num_colors if num_colors is not None else params.num_colors)
        self.color = np.full((n, n), -1, dtype=np.int32)
        iu, iv = np.triu_indices(n, k=1)
        self.edges = np.stack([iu, iv], axis=1).astype(np.int32)
        self.eid = np.full((n, n), -1, dtype=np.int64)
        self.eid[iu, iv] = np.arange(len(iu))
        self.eid[iv, iu] = np.arange(len(iu))
        self.unc = np.arange(len(iu), dtype=np.int64)
        self.pos = np.arange(len(iu), dtype=np.int64)
        self.n_unc = len(iu)
        self.history: List[Tuple[int, int, int, int]] = []
        self.color_classes: Dict[int, List[int]] = {}

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def step(self) -> int:
        return len(self.history)

    @property
    def t(self) -> float:
        return self.step / self.edge_count

    @property
    def uncolored(self) -> Set[Edge]:
        return {Edge(int(self.edges[k, 0]), int(self.edges[k, 1])) for k in self.unc[: self.n_unc]}

    def uncolored_ids(self) -> np.ndarray:
        return self.unc[: self.n_unc]

    @property
    def assignment(self) -> Dict[Edge, Optional[int]]:
        out = {}
        for k, (u, v) in enumerate(self.edges):
            c = int(self.color[u, v])
            out[Edge(int(u), int(v))] = None if c < 0 else c
        return out

    def is_colored(self, u: int, v: int) -> bool:
        return self.color[u, v] >= 0

    def edge_id(self, e) -> int:
        u, v = e
        k = int(self.eid[u, v])
        if k < 0:
            raise PreconditionError(f"({u}, {v}) is not an edge of K_{self.n}")
        return k

    def assign(self, k: int, c: int) -> None:
        u, v = (int(x) for x in self.edges[k])
        if self.color[u, v] >= 0:
            raise PreconditionError(f"edge ({u}, {v}) is already colored")
        if not 0 <= c < self.num_colors:
            raise PreconditionError(f"color {c} outside the palette of size {self.num_colors}")
        self.color[u, v] = self.color[v, u] = c
        j = self.pos[k]
        last = self.unc[self.n_unc - 1]
        self.unc[j], self.unc[self.n_unc - 1] = last, k
        self.pos[last], self.pos[k] = j, self.n_unc - 1
        self.n_unc -= 1
        self.history.append((self.step, u, v, c))
        self.color_classes.setdefault(c, []).append(k)

    def copy(self) -> "ColoringState":
        other = ColoringState.__new__(ColoringState)
        other.params = self.params
        other.n = self.n
        other.num_colors = self.num_colors
        other.color = self.color.copy()
        other.edges = self.edges
        other.eid = self.eid
        other.unc = self.unc.copy()
        other.pos = self.pos.copy()
        other.n_unc = self.n_unc
        other.history = list(self.history)
        other.color_classes = {c: list(v) for c, v in self.color_classes.items()}
        return other

    @classmethod
    def from_history(cls, params: Params, history, num_colors: Optional[int] = None) -> "ColoringState":
        st = cls(params, num_colors)
        for _, u, v, c in history:
            st.assign(st.edge_id((u, v)), int(c))
        return st


class AvailabilityIndex:
    """Forbidden colors at every uncolored edge."""

    def __init__(self, state: ColoringState):
        self.num_colors = state.num_colors
        self.forbidden = np.zeros((state.edge_count, state.num_colors), dtype=bool)
        self.counts = np.zeros(state.edge_count, dtype=np.int64)
        self.dead: Set[int] = set()

    def forbid(self, state: ColoringState, edge_ids: np.ndarray, colors: np.ndarray) -> int:
        """Mark pairs forbidden; returns how many were new."""
        if len(edge_ids) == 0:
            return 0
        flat = edge_ids.astype(np.int64) * self.num_colors + colors.astype(np.int64)
        flat = np.unique(flat)
        fb = self.forbidden.reshape(-1)
        new = flat[~fb[flat]]
        if len(new) == 0:
            return 0
        fb[new] = True
        rows = new // self.num_colors
        np.add.at(self.counts, rows, 1)
        full = np.unique(rows[self.counts[rows] >= self.num_colors])
        for k in full:
            u, v = state.edges[k]
            if state.color[u, v] < 0:
                self.dead.add(int(k))
        return len(new)

    def is_forbidden(self, state: ColoringState, e, c: int) -> bool:
        return bool(self.forbidden[state.edge_id(e), c])

    def forbidden_set(self, state: ColoringState, e) -> Set[int]:
        return set(np.flatnonzero(self.forbidden[state.edge_id(e)]).tolist())

    def available_array(self, k: int) -> np.ndarray:
        return np.flatnonzero(~self.forbidden[k])

    def discard(self, k: int) -> None:
        self.dead.discard(k)


def _forbid_tight(state: ColoringState, index: AvailabilityIndex, S: np.ndarray, s: int) -> int:
    """Given vertex sets S (rows), forbid colors of every tight set at its uncolored edges."""
    if len(S) == 0:
        return 0
    R = state.params.R(s)
    a, b = slot_pairs(s)
    cols = state.color[S[:, a], S[:, b]]
    unc = cols < 0
    rep = row_repeats(with_sentinels(cols))
    tight = (rep == R) & unc.any(axis=1) & (~unc).any(axis=1)
    if not tight.any():
        return 0
    S, cols, unc = S[tight], cols[tight], unc[tight]
    eids = state.eid[S[:, a], S[:, b]]
    # (row, uncolored slot j, colored slot k) -> forbid cols[row, k] at eids[row, j]
    sel = unc[:, :, None] & ~unc[:, None, :]
    shape = sel.shape
    e_all = np.broadcast_to(eids[:, :, None], shape)[sel]
    c_all = np.broadcast_to(cols[:, None, :], shape)[sel]
    return index.forbid(state, e_all, c_all)


def incremental_update(state: ColoringState, index: AvailabilityIndex, e, c: Optional[int] = None) -> int:
    """Update ``index`` after ``e`` was colored; returns the number of new forbidden pairs.

    Only vertex sets containing ``e`` change, so every such set of size
    3..p is rescanned.
    """
    u, v = (int(x) for x in e)
    k = state.edge_id((u, v))
    index.discard(k)
    others = np.array([w for w in range(state.n) if w != u and w != v], dtype=np.int32)
    added = 0
    for s in range(3, state.params.p + 1):
        W = combinations_array(len(others), s - 2)
        if len(W) == 0:
            continue
        S = np.empty((len(W), s), dtype=np.int32)
        S[:, 0] = u
        S[:, 1] = v
        S[:, 2:] = others[W]
        added += _forbid_tight(state, index, S, s)
    return added


def rebuild_index(state: ColoringState) -> AvailabilityIndex:
    """Build the index from scratch by scanning every vertex set."""
    index = AvailabilityIndex(state)
    for s in range(3, state.params.p + 1):
        _forbid_tight(state, index, combinations_array(state.n, s), s)
    return index


def forbidden_check_bruteforce(state: ColoringState, e, c: int) -> Tuple[bool, Optional[Tuple[int, ...]]]:
    """Direct test of the forbidden-color definition; returns a smallest witness."""
    u, v = (int(x) for x in e)
    if state.color[u, v] >= 0:
        raise PreconditionError(f"edge ({u}, {v}) is already colored")
    others = [w for w in range(state.n) if w not in (u, v)]
    colmat = state.color
    for s in range(3, state.params.p + 1):
        R = state.params.R(s)
        for W in combinations(others, s - 2):
            S = (u, v) + W
            cols = [int(colmat[x, y]) for x, y in combinations(S, 2) if colmat[x, y] >= 0]
            if c in cols and len(cols) - len(set(cols)) == R:
                return True, tuple(sorted(S))
    return False, None


def available_colors(state: ColoringState, index: AvailabilityIndex, e) -> Set[int]:
    u, v = e
    if state.color[u, v] >= 0:
        raise PreconditionError(f"edge ({u}, {v}) is colored; availability is defined on uncolored edges")
    return set(index.available_array(state.edge_id(e)).tolist())


@dataclass(frozen=True)
class StepOutcome:
    kind: str
    edge: Optional[Edge] = None
    color: Optional[int] = None
    eager: bool = False


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def step(state: ColoringState, index: AvailabilityIndex, rng: np.random.Generator, eager_stuck: bool = True) -> StepOutcome:
    """One step of the process."""
    if state.step > state.params.i_max:
        raise PreconditionError(f"step {state.step} is past i_max={state.params.i_max}")
    if state.step == state.params.i_max:
        return StepOutcome(REACHED_IMAX)
    if state.n_unc == 0:
        return StepOutcome(REACHED_IMAX)
    if eager_stuck and index.dead:
        k = min(index.dead)
        return StepOutcome(STUCK, Edge(*(int(x) for x in state.edges[k])), eager=True)
    k = int(state.unc[int(rng.integers(state.n_unc))])
    e = Edge(*(int(x) for x in state.edges[k]))
    avail = index.available_array(k)
    if len(avail) == 0:
        return StepOutcome(STUCK, e)
    c = int(avail[int(rng.integers(len(avail)))])
    state.assign(k, c)
    incremental_update(state, index, e, c)
    return StepOutcome(COLORED, e, c)


def probe_steps(edge_count: int, i_max: int) -> List[int]:
    stride = max(1, edge_count // 200)
    pts = set(range(0, i_max + 1, stride))
    for j in range(1, 10):
        i = int(round(j / 10 * edge_count))
        if i <= i_max:
            pts.add(i)
    pts.add(i_max)
    return sorted(pts)


@dataclass
class ProbeSample:
    i: int
    t: float
    uncolored: int
    mean_available: float
    min_available: int
    max_available: int


@dataclass
class Phase1Result:
    state: ColoringState
    outcome: StepOutcome
    seed: int
    metrics: List[ProbeSample] = field(default_factory=list)
    eager_stuck: bool = True
    index: Optional[AvailabilityIndex] = None

    @property
    def succeeded(self) -> bool:
        return self.outcome.kind == REACHED_IMAX


def sample_availability(state: ColoringState, index: AvailabilityIndex) -> ProbeSample:
    ids = state.uncolored_ids()
    if len(ids) == 0:
        return ProbeSample(state.step, state.t, 0, float("nan"), 0, 0)
    avail = state.num_colors - index.counts[ids]
    return ProbeSample(state.step, state.t, len(ids), float(avail.mean()), int(avail.min()), int(avail.max()))


def run_phase1(
    params: Params,
    seed: int,
    probes: bool = True,
    eager_stuck: bool = True,
    check_every_step: bool = False,
    num_colors: Optional[int] = None,
) -> Phase1Result:
    """Run the process until it gets stuck or reaches i_max."""
    state = ColoringState(params, num_colors)
    index = AvailabilityIndex(state)
    rng = make_rng(seed)
    schedule = set(probe_steps(state.edge_count, params.i_max)) if probes else set()
    metrics: List[ProbeSample] = []
    while True:
        if state.step in schedule:
            metrics.append(sample_availability(state, index))
        outcome = step(state, index, rng, eager_stuck)
        if outcome.kind != COLORED:
            break
        if check_every_step:
            from .verify import verify_partial

            bad = verify_partial(state, first_only=True)
            if bad:
                raise AssertionError(f"budget exceeded after step {state.step}: {bad[0]}")
    return Phase1Result(state, outcome, seed, metrics, eager_stuck, index)


# --- extension counting ---------------------------------------------------------


def _is_variable(c: Color) -> bool:
    return c.kind != REAL


def count_extensions(state: ColoringState, z: PlatonicType, phi: PartialEmbedding, index: Optional[AvailabilityIndex] = None) -> int:
    """Number of extensions of ``phi`` to the vertices of ``z`` that fit ``z``."""
    verts = list(z.vertices)
    dom = set(phi.domain)
    if not dom <= set(verts):
        raise PreconditionError(f"domain {sorted(dom)} is not inside {verts}")
    if any(not 0 <= phi(x) < state.n for x in dom):
        raise PreconditionError("embedding image outside the vertex set")
    if index is None:
        index = rebuild_index(state)
    # psi fixes every real color on z, so variables must avoid all of them
    real_used = {l.color.index for l in z.labels.values() if l.color is not None and l.color.kind == REAL}
    if any(c >= state.num_colors for c in real_used):
        return 0
    inner = [g for g in z.labels if g[0] in dom and g[1] in dom]
    if inner and _fits(state, index, z, {v: phi(v) for v in dom}, inner, real_used) is None:
        raise PreconditionError("the embedding does not fit the type on its own domain")
    rest = [v for v in verts if v not in dom]
    used = {phi(v) for v in dom}
    pool = [x for x in range(state.n) if x not in used]
    total = 0
    all_edges = list(z.labels)
    for img in permutations(pool, len(rest)):
        m = {v: phi(v) for v in dom}
        m.update(zip(rest, img))
        if _fits(state, index, z, m, all_edges, real_used) is not None:
            total += 1
    return total


def _fits(state, index, z, m, edges, real_used) -> Optional[dict]:
    """Return a color map witnessing the fit, or None."""
    psi: Dict[Color, int] = {}
    pending = []
    for g in edges:
        lab = z.labels[g]
        a, b = m[g[0]], m[g[1]]
        c_here = int(state.color[a, b])
        if lab.kind == COL:
            if c_here < 0:
                return None
            want = lab.color
            if want.kind == REAL:
                if want.index != c_here:
                    return None
            elif psi.setdefault(want, c_here) != c_here:
                return None
        elif lab.kind == UNC:
            if c_here >= 0:
                return None
            pending.append((state.eid[a, b], lab.color))
        elif lab.kind == UNC_ANY:
            if c_here >= 0:
                return None
    images = list(psi.values())
    if len(set(images)) != len(images) or set(images) & real_used:
        return None
    free_vars = []
    for k, c in pending:
        if c.kind == REAL:
            if c.index >= state.num_colors or index.forbidden[k, c.index]:
                return None
        elif c in psi:
            if index.forbidden[k, psi[c]]:
                return None
        else:
            free_vars.append((k, c))
    if free_vars and not _assign_free(index, free_vars, set(images) | real_used, {}):
        return None
    return psi


def _assign_free(index, free_vars, taken, chosen) -> bool:
    """Pick injective colors for unbacked variables so each is available."""
    if not free_vars:
        return True
    (k, c), rest = free_vars[0], free_vars[1:]
    if c in chosen:
        return (not index.forbidden[k, chosen[c]]) and _assign_free(index, rest, taken, chosen)
    for col in np.flatnonzero(~index.forbidden[k]):
        col = int(col)
        if col in taken:
            continue
        chosen[c] = col
        if _assign_free(index, rest, taken | {col}, chosen):
            return True
        del chosen[c]
    return False


__all__ = [
    "AvailabilityIndex",
    "ColoringState",
    "Phase1Result",
    "ProbeSample",
    "StepOutcome",
    "available_colors",
    "combinations_array",
    "count_extensions",
    "forbidden_check_bruteforce",
    "incremental_update",
    "make_rng",
    "rebuild_index",
    "run_phase1",
    "step",
]
