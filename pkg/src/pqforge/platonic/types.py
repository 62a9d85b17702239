"""Types on Platonic vertex sets and the coincidence/pow calculus on them."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, permutations
from typing import Dict, Iterable, Iterator, Mapping, NamedTuple, Optional, Sequence, Tuple

from ..core import FRESH, PLATONIC, REAL, Color, Edge, Params, budget_table, repeats
from ..errors import PreconditionError, UnionError

COL = "col"
UNC = "unc"
UNC_ANY = "unc?"
WILD = "*"


class Label(NamedTuple):
    kind: str
    color: Optional[Color] = None

    def __repr__(self) -> str:
        if self.color is None:
            return self.kind
        return f"{self.kind}{{{self.color!r}}}"

    @property
    def colored(self) -> bool:
        return self.kind == COL


WILD_LABEL = Label(WILD)
UNC_ANY_LABEL = Label(UNC_ANY)


def col(c: Color) -> Label:
    return Label(COL, c)


def unc(c: Color) -> Label:
    return Label(UNC, c)


def fresh_label(i: int) -> Label:
    """unc{} of the i-th fresh color, a real color in general position."""
    return Label(UNC, Color(FRESH, i))


def edges_of(vertices: Iterable[int]) -> list:
    return [Edge(a, b) for a, b in combinations(sorted(vertices), 2)]


class PlatonicType:
    """A labeling of every edge of a vertex set.

    Instances are immutable and hashable. Legality is a predicate
    (:func:`is_legal`), not an invariant.
    """

    __slots__ = ("vertices", "labels", "_key")

    def __init__(self, vertices: Iterable[int], labels: Mapping):
        verts = tuple(sorted(set(vertices)))
        lab = {Edge(*g): l for g, l in labels.items()}
        expected = set(edges_of(verts))
        if set(lab) != expected:
            missing = expected - set(lab)
            extra = set(lab) - expected
            raise PreconditionError(
                f"labels must cover exactly the edges of {verts}; "
                f"missing {sorted(missing)}, extra {sorted(extra)}"
            )
        self.vertices = verts
        self.labels: Dict[Edge, Label] = lab
        self._key = None

    @classmethod
    def build(cls, vertices: Iterable[int], labels: Mapping = (), default: Label = WILD_LABEL):
        """Type on ``vertices`` with ``labels`` and every other edge ``default``."""
        verts = sorted(set(vertices))
        lab = {g: default for g in edges_of(verts)}
        for g, l in dict(labels).items():
            lab[Edge(*g)] = l
        return cls(verts, lab)

    def key(self):
        if self._key is None:
            self._key = (self.vertices, tuple(sorted(self.labels.items())))
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, PlatonicType) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __lt__(self, other: "PlatonicType") -> bool:
        return sort_key(self) < sort_key(other)

    def __repr__(self) -> str:
        body = ", ".join(f"{g[0]}{g[1]}:{l!r}" for g, l in sorted(self.labels.items()))
        return f"PlatonicType({list(self.vertices)}; {body})"

    def __getitem__(self, g) -> Label:
        return self.labels[Edge(*g)]

    @property
    def size(self) -> int:
        return len(self.vertices)

    def replace(self, changes: Mapping) -> "PlatonicType":
        lab = dict(self.labels)
        for g, l in changes.items():
            g = Edge(*g)
            if g not in lab:
                raise PreconditionError(f"edge {g} is not inside {self.vertices}")
            lab[g] = l
        return PlatonicType(self.vertices, lab)

    def colored(self) -> Dict[Edge, Color]:
        return {g: l.color for g, l in self.labels.items() if l.kind == COL}

    def colors_used(self) -> set:
        """Colors on colored edges."""
        return {l.color for l in self.labels.values() if l.kind == COL}

    def all_colors(self) -> set:
        return {l.color for l in self.labels.values() if l.color is not None}


_KIND_RANK = {COL: 0, UNC: 1, UNC_ANY: 2, WILD: 3}
_COLOR_RANK = {REAL: 0, PLATONIC: 1, FRESH: 2}


def label_key(l: Label) -> tuple:
    if l.color is None:
        return (_KIND_RANK[l.kind], -1, -1)
    return (_KIND_RANK[l.kind], _COLOR_RANK[l.color.kind], l.color.index)


def sort_key(z: PlatonicType) -> tuple:
    return (z.vertices, tuple((g, label_key(l)) for g, l in sorted(z.labels.items())))


# --- legality ---------------------------------------------------------------


def _pq(params) -> Tuple[int, int]:
    if isinstance(params, Params):
        return params.p, params.q
    return params


def subset_violations(colored: Mapping[Edge, Color], vertices: Sequence[int], p: int, q: int):
    """Yield (S, repeats, R(|S|)) for every subset exceeding its budget."""
    table = budget_table(p, q)
    verts = sorted(vertices)
    for s in range(3, min(p, len(verts)) + 1):
        limit = table[s]
        for sub in combinations(verts, s):
            cols = [colored[g] for g in combinations(sub, 2) if g in colored]
            if len(cols) > limit:
                r = len(cols) - len(set(cols))
                if r > limit:
                    yield sub, r, limit


def is_legal_coloring(colored: Mapping[Edge, Color], vertices: Sequence[int], p: int, q: int) -> bool:
    for _ in subset_violations(colored, vertices, p, q):
        return False
    return True


def is_legal(z: PlatonicType, params) -> bool:
    """Every subset of 3..p vertices carries at most R(|S'|) repeats."""
    p, q = _pq(params)
    if z.size > 2 * p:
        raise PreconditionError(f"types have at most 2p={2 * p} vertices, got {z.size}")
    colored = {tuple(g): c for g, c in z.colored().items()}
    return is_legal_coloring(colored, z.vertices, p, q)


# --- restrictions, colored portion, unions ------------------------------------


def restriction(z: PlatonicType, sub: Iterable[int]) -> PlatonicType:
    sub = sorted(set(sub))
    if not set(sub) <= set(z.vertices):
        raise PreconditionError(f"{sub} is not a subset of {z.vertices}")
    return PlatonicType(sub, {g: z.labels[g] for g in edges_of(sub)})


def colored_portion(z: PlatonicType) -> PlatonicType:
    """Replace every unc{c} label by the wildcard."""
    return PlatonicType(
        z.vertices,
        {g: (WILD_LABEL if l.kind == UNC else l) for g, l in z.labels.items()},
    )


def compatible(y1: PlatonicType, y2: PlatonicType) -> bool:
    common = set(y1.vertices) & set(y2.vertices)
    for g in edges_of(common):
        a, b = y1.labels[g], y2.labels[g]
        if (a.kind == COL or b.kind == COL) and a != b:
            return False
    return True


def union_types(y1: PlatonicType, y2: PlatonicType) -> PlatonicType:
    """The colors-only type agreeing with both colored portions."""
    if not compatible(y1, y2):
        raise UnionError("types disagree on a colored edge of their common vertices")
    verts = sorted(set(y1.vertices) | set(y2.vertices))
    lab = {g: WILD_LABEL for g in edges_of(verts)}
    for y in (y1, y2):
        for g, l in y.labels.items():
            if l.kind == COL:
                lab[g] = l
            elif l.kind == UNC_ANY and lab[g] == WILD_LABEL:
                lab[g] = l
    return PlatonicType(verts, lab)


# --- coincidences -------------------------------------------------------------


def _edge_set(E) -> set:
    return {Edge(*g) for g in E}


def free_colors(E, E2, z: PlatonicType) -> set:
    """Platonic colors on colored edges of E \\ E2 that are absent from E2."""
    E, E2 = _edge_set(E), _edge_set(E2)
    outer = {z.labels[g].color for g in E - E2 if z.labels[g].kind == COL}
    inner = {z.labels[g].color for g in E2 if z.labels[g].kind == COL}
    return {c for c in outer if c.kind == PLATONIC and c not in inner}


def edgcoi(E, E2, z: PlatonicType, check: bool = True) -> int:
    """|colored edges of E \\ E2| minus the number of free Platonic colors."""
    E, E2 = _edge_set(E), _edge_set(E2)
    if check:
        if not E2 <= E:
            raise PreconditionError("edgcoi needs E' to be a subset of E")
        if not E <= set(z.labels):
            raise PreconditionError("edgcoi needs E to be edges of the type")
    moved = sum(1 for g in E - E2 if z.labels[g].kind == COL)
    return moved - len(free_colors(E, E2, z))


def coi(S, S2, z: PlatonicType) -> int:
    S, S2 = set(S), set(S2)
    if not (S2 <= S <= set(z.vertices)):
        raise PreconditionError("coi needs S' <= S <= vertices(z)")
    return edgcoi(edges_of(S), edges_of(S2), z, check=False)


def _f(f) -> Fraction:
    return f.f_exp if isinstance(f, Params) else Fraction(f)


def pow_(S, S2, z: PlatonicType, f) -> Fraction:
    """|S \\ S'| - f * coi(S, S', z); ``f`` is the color-count exponent or a Params."""
    S, S2 = set(S), set(S2)
    return len(S - S2) - _f(f) * coi(S, S2, z)


def maxpow(S, S3, z: PlatonicType, f) -> Fraction:
    """max of pow(S, S', z) over S3 <= S' <= S."""
    S, S3 = set(S), set(S3)
    if not S3 <= S:
        raise PreconditionError("maxpow needs S'' <= S")
    rest = sorted(S - S3)
    best = None
    for k in range(len(rest) + 1):
        for extra in combinations(rest, k):
            v = pow_(S, S3 | set(extra), z, f)
            if best is None or v > best:
                best = v
    return best


def nu(E1, E2, E3, z: PlatonicType) -> int:
    """Platonic colors in E1 \\ E2 and in E3 but not in E2 \\ E3."""
    E1, E2, E3 = _edge_set(E1), _edge_set(E2), _edge_set(E3)
    if not (E3 <= E2 <= E1):
        raise PreconditionError("nu needs E3 <= E2 <= E1")
    return len(free_colors(E1 - E3, E2 - E3, z) - free_colors(E1, E2, z))


def cross_edges(A, B) -> set:
    """The edges [A, B] with one endpoint in A and the other in B."""
    return {Edge(a, b) for a in A for b in B if a != b}


# --- canonical forms ------------------------------------------------------------


def _rename(seq):
    """Rename Platonic and fresh colors by order of first appearance."""
    names: dict = {}
    counters = {PLATONIC: 0, FRESH: 0}
    out = []
    for l in seq:
        c = l.color
        if c is not None and c.kind in counters:
            if c not in names:
                names[c] = Color(c.kind, counters[c.kind])
                counters[c.kind] += 1
            l = Label(l.kind, names[c])
        out.append(l)
    return tuple(out)


def relabel(z: PlatonicType, mapping: Mapping[int, int]) -> PlatonicType:
    return PlatonicType(
        [mapping[v] for v in z.vertices],
        {Edge(mapping[g[0]], mapping[g[1]]): l for g, l in z.labels.items()},
    )


def canonical_form(
    z: PlatonicType,
    root: Sequence[int],
    marked: Optional[Sequence[int]] = None,
):
    """Minimal key of ``z`` over relabelings fixing ``root`` pointwise.

    The vertices are first mapped to 0..s-1 with the root sent to (0, 1).
    Platonic and fresh colors are renamed by first appearance. ``marked`` is
    an extra edge whose image is recorded in the key.
    """
    a, b = root
    others = [v for v in z.vertices if v not in (a, b)]
    order = list(edges_of(range(len(z.vertices))))
    best = None
    for perm in permutations(others):
        m = {a: 0, b: 1}
        m.update({v: i + 2 for i, v in enumerate(perm)})
        inv = {}
        for g, l in z.labels.items():
            inv[Edge(m[g[0]], m[g[1]])] = l
        seq = _rename([inv[g] for g in order])
        k = (tuple(label_key(l) for l in seq),)
        if marked is not None:
            k += (tuple(Edge(m[marked[0]], m[marked[1]])),)
        if best is None or k < best[0]:
            best = (k, seq, m)
    return best


def canonical_type(z: PlatonicType, root, marked=None):
    """The canonical representative of ``z`` and the image of ``marked``."""
    _, seq, m = canonical_form(z, root, marked)
    order = edges_of(range(len(z.vertices)))
    rep = PlatonicType(range(len(z.vertices)), dict(zip(order, seq)))
    if marked is None:
        return rep, None
    return rep, Edge(m[marked[0]], m[marked[1]])


def repeats_of(z: PlatonicType, sub: Optional[Iterable[int]] = None) -> int:
    verts = z.vertices if sub is None else sub
    return repeats(z.labels[g].color for g in edges_of(verts) if z.labels[g].kind == COL)


def iter_subsets(items: Sequence, min_size: int = 0, max_size: Optional[int] = None) -> Iterator[tuple]:
    items = list(items)
    top = len(items) if max_size is None else min(max_size, len(items))
    for k in range(min_size, top + 1):
        yield from combinations(items, k)


class PartialEmbedding:
    """An injection from some Platonic vertices into the host vertex set."""

    __slots__ = ("mapping",)

    def __init__(self, mapping: Mapping[int, int]):
        m = dict(mapping)
        if len(set(m.values())) != len(m):
            raise PreconditionError(f"partial embedding is not injective: {m}")
        self.mapping = m

    @property
    def domain(self) -> tuple:
        return tuple(sorted(self.mapping))

    @property
    def order(self) -> int:
        return len(self.mapping)

    def __call__(self, v: int) -> int:
        return self.mapping[v]

    def __repr__(self) -> str:
        return f"PartialEmbedding({self.mapping})"
