"""Enumeration of rooted preforbidder triples and the mu coefficients.

A *skeleton* is a canonical triple (z, e', c*) on vertices 0..s-1 with
root (0, 1). Its uncolored edges other than the root and e' carry distinct
fresh colors, each standing for an arbitrary palette color. Expanding those
labels over a palette of size P yields P**free triples per skeleton.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations, product
from typing import Dict, Iterator, List, Optional, Tuple

from ..core import FRESH, PLATONIC, REAL, Color, Edge, Params, binom2, budget_table, platonic, real
from ..errors import EnumerationError, ParameterError
from .types import (
    COL,
    UNC_ANY_LABEL,
    PlatonicType,
    canonical_form,
    col,
    edges_of,
    fresh_label,
    unc,
)

ROOT = Edge(0, 1)
ROOT_COLOR = real(0)


@dataclass(frozen=True)
class PrefbdTriple:
    z: PlatonicType
    e_prime: Edge
    c_star: Color
    s: int
    ell: int
    eta: int

    @property
    def free(self) -> int:
        return binom2(self.s) - self.ell - 2

    @property
    def repeats(self) -> int:
        cols = [l.color for l in self.z.labels.values() if l.kind == COL]
        return len(cols) - len(set(cols))

    @property
    def real_count(self) -> int:
        return int(any(l.kind == COL and l.color.kind == REAL for l in self.z.labels.values()))


def _pq(params) -> Tuple[int, int]:
    if isinstance(params, Params):
        return params.p, params.q
    return tuple(params)


def equivalence_count(z: PlatonicType, e_prime, c_star: Optional[Color] = None, root=ROOT) -> int:
    """Number of symmetries of a rooted triple.

    Counts vertex bijections fixing both root endpoints and fixing e' as a
    set that carry the colored edges onto colored edges with the same
    colors, up to a renaming of Platonic colors (which must fix c* when c* is
    Platonic). Available-color labels are ignored.
    """
    root = Edge(*root)
    e_prime = Edge(*e_prime)
    others = [v for v in z.vertices if v not in root]
    count = 0
    for perm in permutations(others):
        sigma = dict(zip(others, perm))
        sigma[root[0]], sigma[root[1]] = root[0], root[1]
        if Edge(sigma[e_prime[0]], sigma[e_prime[1]]) != e_prime:
            continue
        pi: Dict[Color, Color] = {}
        ok = True
        for g, lab in z.labels.items():
            h = Edge(sigma[g[0]], sigma[g[1]])
            target = z.labels[h]
            if (lab.kind == COL) != (target.kind == COL):
                ok = False
                break
            if lab.kind != COL:
                continue
            a, b = lab.color, target.color
            if a.kind != PLATONIC or b.kind != PLATONIC:
                if a != b:
                    ok = False
                    break
                continue
            if pi.setdefault(a, b) != b:
                ok = False
                break
        if not ok or len(set(pi.values())) != len(pi):
            continue
        if c_star is not None and c_star.kind == PLATONIC and pi.get(c_star, c_star) != c_star:
            continue
        count += 1
    return count


class _Subsets:
    """Vertex subsets of sizes 3..min(p, s) with their edge lists."""

    def __init__(self, s: int, p: int, q: int):
        table = budget_table(p, q)
        self.items = []
        for k in range(3, min(p, s) + 1):
            for sub in combinations(range(s), k):
                self.items.append((sub, tuple(combinations(sub, 2)), table[k]))
        self.by_edge: Dict[tuple, list] = {}
        for item in self.items:
            for g in item[1]:
                self.by_edge.setdefault(g, []).append(item)

    @staticmethod
    def over(item, colored) -> bool:
        cols = [colored[g] for g in item[1] if g in colored]
        return len(cols) - len(set(cols)) > item[2]

    def legal(self, colored) -> bool:
        return not any(self.over(it, colored) for it in self.items)


def _root_skeletons(p: int, q: int, s: int) -> List[PrefbdTriple]:
    subsets = _Subsets(s, p, q)
    root = (0, 1)
    c = ROOT_COLOR
    reps = [(0, 2), (1, 2)] + ([(2, 3)] if s >= 4 else [])
    seen: Dict[tuple, PrefbdTriple] = {}

    for ep in reps:
        order = [g for g in combinations(range(s), 2) if g not in (root, ep)]
        colored: Dict[tuple, Color] = {root: c}
        full = set(range(s))
        core = {0, 1} | set(ep)

        def leaves(i: int, nplat: int):
            if i == len(order):
                yield nplat
                return
            g = order[i]
            yield from leaves(i + 1, nplat)
            for choice in [c] + [platonic(j) for j in range(nplat + 1)]:
                colored[g] = choice
                if not any(subsets.over(it, colored) for it in subsets.by_edge[g]):
                    yield from leaves(i + 1, nplat + (choice == platonic(nplat)))
                del colored[g]

        for nplat in leaves(0, 0):
            y = {g: col_ for g, col_ in colored.items() if g != root}
            for c_star in [c] + [platonic(j) for j in range(nplat)]:
                if c_star.kind == PLATONIC and c_star not in y.values():
                    continue
                with_ep = dict(y)
                with_ep[ep] = c_star
                if not subsets.legal(with_ep):
                    continue
                both = dict(with_ep)
                both[root] = c
                if subsets.legal(both):
                    continue
                # proper subsets containing e and e' stay legal
                proper_ok = True
                for it in subsets.items:
                    if core <= set(it[0]) and set(it[0]) != full and subsets.over(it, both):
                        proper_ok = False
                        break
                if not proper_ok:
                    continue
                labels = {}
                k = 0
                for g in combinations(range(s), 2):
                    if g == root:
                        labels[g] = UNC_ANY_LABEL
                    elif g == ep:
                        labels[g] = unc(c_star)
                    elif g in y:
                        labels[g] = col(y[g])
                    else:
                        labels[g] = fresh_label(k)
                        k += 1
                z = PlatonicType(range(s), labels)
                key, seq, m = canonical_form(z, root, marked=ep)
                if key in seen:
                    continue
                canon = PlatonicType(range(s), dict(zip(edges_of(range(s)), seq)))
                ep_c = Edge(m[ep[0]], m[ep[1]])
                cs = canon.labels[ep_c].color
                seen[key] = PrefbdTriple(
                    z=canon,
                    e_prime=ep_c,
                    c_star=cs,
                    s=s,
                    ell=len(y),
                    eta=equivalence_count(canon, ep_c, cs),
                )
    return sorted(seen.values(), key=lambda t: (t.s, t.ell, t.eta, t.e_prime, t.z))


@lru_cache(maxsize=None)
def prefbd_skeletons(p: int, q: int) -> Tuple[PrefbdTriple, ...]:
    """All canonical rooted triples with 3 <= s <= p for the pair (p, q)."""
    if p < 3:
        raise ParameterError(f"p must be at least 3, got {p}")
    out: List[PrefbdTriple] = []
    for s in range(3, p + 1):
        out.extend(_root_skeletons(p, q, s))
    return tuple(out)


def _vertex_map(e: Edge, s: int) -> Dict[int, int]:
    m = {0: e[0], 1: e[1]}
    nxt = 0
    for v in range(2, s):
        while nxt in e:
            nxt += 1
        m[v] = nxt
        nxt += 1
    return m


def _palette(c: Color, size: int) -> List[Color]:
    pal = [c]
    i = 0
    while len(pal) < size:
        if real(i) != c:
            pal.append(real(i))
        i += 1
    return pal


def _expand(t: PrefbdTriple, palette: List[Color]) -> Iterator[dict]:
    free = [g for g, l in sorted(t.z.labels.items()) if l.color is not None and l.color.kind == FRESH]
    for choice in product(palette, repeat=len(free)):
        yield dict(zip(free, (unc(cc) for cc in choice)))


def enumerate_prefbd(e, c: Color, params, palette_size: int) -> set:
    """All triples (z, e', c*) rooted at ``e`` for the real color ``c``.

    Uncolored edges other than e and e' range over a real palette of
    ``palette_size`` colors (containing ``c``); each such label stands for a
    palette color in general position, so it never creates a repeat.
    """
    if palette_size < 1:
        raise ParameterError(f"palette_size must be positive, got {palette_size}")
    if c.kind != REAL:
        raise ParameterError(f"root color must be real, got {c!r}")
    p, q = _pq(params)
    e = Edge(*e)
    palette = _palette(c, palette_size)
    out = set()
    for t in prefbd_skeletons(p, q):
        m = _vertex_map(e, t.s)

        def fix(lab):
            if lab.color == ROOT_COLOR:
                return type(lab)(lab.kind, c)
            return lab

        for changes in _expand(t, palette):
            z = t.z.replace(changes)
            lab = {Edge(m[g[0]], m[g[1]]): fix(l) for g, l in z.labels.items()}
            zz = PlatonicType([m[v] for v in z.vertices], lab)
            cs = c if t.c_star == ROOT_COLOR else t.c_star
            out.add((zz, Edge(m[t.e_prime[0]], m[t.e_prime[1]]), cs))
    return out


@dataclass
class MuTable:
    """mu(ell, eta, s) for one (p, q) pair."""

    p: int
    q: int
    entries: Dict[Tuple[int, int, int], int] = field(default_factory=dict)

    def __getitem__(self, key) -> int:
        return self.entries.get(tuple(key), 0)

    def __len__(self) -> int:
        return len(self.entries)

    def weight(self, s: Optional[int] = None) -> float:
        return sum(v / eta for (ell, eta, ss), v in self.entries.items() if s is None or ss == s)

    def sizes(self) -> List[int]:
        return sorted({s for (_, _, s) in self.entries})

    def lines(self) -> List[str]:
        rows = sorted((s, ell, eta, mu) for (ell, eta, s), mu in self.entries.items())
        return [f"{s} {ell} {eta} {mu}" for s, ell, eta, mu in rows]

    def dumps(self, kappa: Optional[float] = None) -> str:
        head = [f"# mu table p={self.p} q={self.q}", "# s ell eta mu"]
        if kappa is not None:
            head.append(f"# kappa {kappa!r}")
        return "\n".join(head + self.lines()) + "\n"

    @classmethod
    def loads(cls, text: str, p: int = 0, q: int = 0) -> "MuTable":
        entries = {}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                for tok in parts:
                    if tok.startswith("p="):
                        p = int(tok[2:])
                    elif tok.startswith("q="):
                        q = int(tok[2:])
                continue
            s, ell, eta, mu = (int(x) for x in line.split())
            entries[(ell, eta, s)] = mu
        return cls(p, q, entries)


def _skeleton_table(p: int, q: int) -> Dict[Tuple[int, int, int], int]:
    counts: Dict[Tuple[int, int, int], int] = {}
    for t in prefbd_skeletons(p, q):
        key = (t.ell, t.eta, t.s)
        counts[key] = counts.get(key, 0) + 1
    return counts


def mu_table_for_palette(params, size: int) -> MuTable:
    """Bucket the triples expanded over a palette of ``size`` colors, divided out.

    Raises :class:`EnumerationError` when a bucket is not divisible by the
    number of free-edge colorings.
    """
    p, q = _pq(params)
    if size < 1:
        raise ParameterError(f"palette size must be positive, got {size}")
    palette = _palette(ROOT_COLOR, size)
    buckets: Dict[Tuple[int, int, int], int] = {}
    for t in prefbd_skeletons(p, q):
        free = [g for g, l in t.z.labels.items() if l.color is not None and l.color.kind == FRESH]
        if len(free) != t.free:
            raise EnumerationError(
                f"skeleton with s={t.s}, ell={t.ell} has {len(free)} free edges, expected {t.free}"
            )
        n_expanded = sum(1 for _ in _expand(t, palette))
        key = (t.ell, t.eta, t.s)
        buckets[key] = buckets.get(key, 0) + n_expanded
    quot = {}
    for (ell, eta, s), cnt in buckets.items():
        denom = size ** (binom2(s) - ell - 2)
        if cnt % denom:
            raise EnumerationError(
                f"bucket (ell={ell}, eta={eta}, s={s}) count {cnt} is not divisible by {denom}"
            )
        quot[(ell, eta, s)] = cnt // denom
    return MuTable(p, q, dict(sorted(quot.items())))


def mu_table(params, palette_sizes: Tuple[int, int] = (1, 2)) -> MuTable:
    """mu table checked to be the same for every palette size given."""
    if len(set(palette_sizes)) < 2:
        raise ParameterError("need two distinct palette sizes")
    tables = [mu_table_for_palette(params, size) for size in palette_sizes]
    if any(t.entries != tables[0].entries for t in tables[1:]):
        raise EnumerationError("mu quotients depend on the palette size")
    return tables[0]


_MU_CACHE: Dict[Tuple[int, int], MuTable] = {}


def cached_mu_table(p: int, q: int) -> MuTable:
    """mu table for (p, q), computed once per process."""
    key = (p, q)
    if key not in _MU_CACHE:
        table = MuTable(p, q, dict(sorted(_skeleton_table(p, q).items())))
        if not table.entries:
            raise EnumerationError(f"no rooted preforbidders found for p={p}, q={q}")
        _MU_CACHE[key] = table
    return _MU_CACHE[key]


__all__ = [
    "MuTable",
    "PrefbdTriple",
    "cached_mu_table",
    "enumerate_prefbd",
    "equivalence_count",
    "mu_table",
    "prefbd_skeletons",
]
