"""Closure of rooted preforbidder skeletons under predecessors."""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Tuple

from ..core import PLATONIC, Edge, binom2
from ..errors import ParameterError
from .enumerate import _pq, _vertex_map, prefbd_skeletons
from .preforb import predecessors
from .types import COL, UNC, UNC_ANY, WILD, PlatonicType, canonical_form, edges_of, is_legal_coloring, pow_


def _canon(y: PlatonicType) -> Tuple[tuple, PlatonicType]:
    key, seq, _ = canonical_form(y, (0, 1))
    return key, PlatonicType(y.vertices, dict(zip(edges_of(y.vertices), seq)))


def trackable_closure(p: int, q: int, depth_cap: Optional[int] = None) -> List[PlatonicType]:
    """Canonical rooted trackable types with root (0, 1)."""
    seen: Dict[tuple, PlatonicType] = {}
    queue = deque()
    for t in prefbd_skeletons(p, q):
        key, y = _canon(t.z)
        if key not in seen:
            seen[key] = y
            queue.append((y, 0))
    while queue:
        y, depth = queue.popleft()
        if depth_cap is not None and depth >= depth_cap:
            continue
        for g, lab in sorted(y.labels.items()):
            if lab.kind != COL:
                continue
            for pred in predecessors(y, g).types:
                key, yy = _canon(pred)
                if key not in seen:
                    seen[key] = yy
                    queue.append((yy, depth + 1))
    return sorted(seen.values())


def enumerate_trackable(root, params, depth_cap: Optional[int] = None) -> set:
    """Rooted trackable types with the given root edge.

    Predecessor families indexed by the real palette appear once, with a
    fresh color standing for the free choice. ``depth_cap`` limits the
    number of predecessor steps; None means run to closure.
    """
    if depth_cap is not None and depth_cap < 0:
        raise ParameterError(f"depth_cap must be non-negative, got {depth_cap}")
    p, q = _pq(params)
    root = Edge(*root)
    out = set()
    for y in trackable_closure(p, q, depth_cap):
        m = _vertex_map(root, y.size)
        out.add(PlatonicType([m[v] for v in y.vertices], {Edge(m[g[0]], m[g[1]]): l for g, l in y.labels.items()}))
    return out


def trackable_properties(y: PlatonicType, root, params) -> Dict[str, bool]:
    """Evaluate the five closure properties of a rooted trackable type."""
    p, q = _pq(params)
    beta = binom2(p) - q + 1
    f = Fraction(p - 2, beta)
    m_exp = Fraction(1, beta)
    root = Edge(*root)
    promoted = {}
    for g, lab in y.labels.items():
        if g == root:
            continue
        if lab.kind in (COL, UNC):
            promoted[tuple(g)] = lab.color
    legal_promoted = is_legal_coloring(promoted, y.vertices, p, q)

    others = [v for v in y.vertices if v not in root]
    pow_ok = True
    for k in range(1, len(others) + 1):
        for extra in combinations(others, k):
            if pow_(set(root) | set(extra), set(root), y, f) < m_exp:
                pow_ok = False
                break
        if not pow_ok:
            break

    reals = {lab.color for lab in y.labels.values() if lab.kind == COL and lab.color.kind != PLATONIC}
    no_wild = all(lab.kind not in (UNC_ANY, WILD) for g, lab in y.labels.items() if g != root)
    colored_plat = {lab.color for lab in y.labels.values() if lab.kind == COL and lab.color.kind == PLATONIC}
    unc_plat = {lab.color for lab in y.labels.values() if lab.kind == UNC and lab.color.kind == PLATONIC}
    return {
        "promoted_legal": legal_promoted,
        "pow_at_least_m": pow_ok,
        "one_real_color": len(reals) <= 1,
        "wildcards_only_at_root": no_wild,
        "platonic_unc_backed": unc_plat <= colored_plat,
    }


__all__ = ["enumerate_trackable", "trackable_closure", "trackable_properties"]
