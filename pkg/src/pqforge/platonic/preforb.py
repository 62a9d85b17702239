"""Predecessors of types and the preforbidder predicate."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Optional, Tuple

from ..core import FRESH, PLATONIC, Color, Edge, fresh
from ..errors import PreconditionError
from .types import COL, PlatonicType, _pq, col, is_legal_coloring, unc


@dataclass(frozen=True)
class PreforbidderWitness:
    y: PlatonicType
    e: Edge
    c: Color
    e_prime: Edge
    c_prime: Color

    def check(self, params) -> bool:
        return is_preforbidder(self.y, self.e, self.c, self.e_prime, self.c_prime, params)


def _real_colors(z: PlatonicType) -> set:
    return {c for c in z.colors_used() if c.kind != PLATONIC}


def _with_colored(z: PlatonicType, extra) -> dict:
    colored = {tuple(g): c for g, c in z.colored().items()}
    for g, c in extra:
        colored[tuple(g)] = c
    return colored


def is_preforbidder(y: PlatonicType, e, c: Color, e2, c2: Color, params) -> bool:
    """True iff ``y`` is an (e, c, e2, c2)-preforbidder."""
    p, q = _pq(params)
    e, e2 = Edge(*e), Edge(*e2)
    if e == e2:
        raise PreconditionError("e and e' must be distinct")
    verts = set(y.vertices)
    if not (set(e) <= verts and set(e2) <= verts):
        raise PreconditionError(f"{e} and {e2} must lie inside {y.vertices}")
    if y.size > 2 * p:
        raise PreconditionError(f"types have at most 2p={2 * p} vertices, got {y.size}")
    # (i)
    if y.labels[e].kind == COL or y.labels[e2].kind == COL:
        return False
    # (v)
    if len(_real_colors(y)) > 3:
        return False
    # (ii)
    if not is_legal_coloring(_with_colored(y, [(e, c)]), y.vertices, p, q):
        return False
    if not is_legal_coloring(_with_colored(y, [(e2, c2)]), y.vertices, p, q):
        return False
    both = _with_colored(y, [(e, c), (e2, c2)])
    # (iii)
    if is_legal_coloring(both, y.vertices, p, q):
        return False
    # (iv): proper subsets containing e and e'
    core = set(e) | set(e2)
    rest = [v for v in y.vertices if v not in core]
    for k in range(len(rest)):
        for extra in combinations(rest, k):
            sub = sorted(core | set(extra))
            inner = {g: cc for g, cc in both.items() if g[0] in sub and g[1] in sub}
            if not is_legal_coloring(inner, sub, p, q):
                return False
    return True


def next_fresh(z: PlatonicType) -> Color:
    used = [c.index for c in z.all_colors() if c.kind == FRESH]
    return fresh(max(used) + 1 if used else 0)


@dataclass(frozen=True)
class PredecessorSet:
    """Predecessors of a type at one edge.

    When ``per_color`` is false the set is ``types`` itself. Otherwise it is
    the family indexed by the real palette; ``types`` then holds a single
    representative in which ``marker`` (a fresh color) stands for the free
    choice of real color.
    """

    types: Tuple[PlatonicType, ...]
    per_color: bool
    marker: Optional[Color] = None
    base: Optional[PlatonicType] = None
    edges: Tuple[Edge, ...] = ()

    def size(self, palette_size: int) -> int:
        return palette_size if self.per_color else len(self.types)

    def materialize(self, palette: Iterable[Color]) -> Iterator[PlatonicType]:
        if not self.per_color:
            yield from self.types
            return
        for c in palette:
            yield self.base.replace({g: unc(c) for g in self.edges})

    def __iter__(self):
        return iter(self.types)


def predecessors(z: PlatonicType, e) -> PredecessorSet:
    e = Edge(*e)
    if e not in z.labels:
        raise PreconditionError(f"{e} is not an edge of the type")
    lab = z.labels[e]
    if lab.kind != COL:
        raise PreconditionError(f"predecessors need a colored edge, {e} is {lab!r}")
    c = lab.color
    count = sum(1 for l in z.labels.values() if l == col(c))
    if c.kind != PLATONIC or count > 1:
        return PredecessorSet((z.replace({e: unc(c)}),), per_color=False)
    edges = (e,) + tuple(g for g, l in sorted(z.labels.items()) if l == unc(c))
    marker = next_fresh(z)
    rep = z.replace({g: unc(marker) for g in edges})
    return PredecessorSet((rep,), per_color=True, marker=marker, base=z, edges=edges)
