"""Exhaustive and sampled checks of the coincidence calculus.

Each check records how many instances were examined and how many failed.
Checks whose proofs need the theorem's (p, q) regime are only reported
outside it; everything else is asserted.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from ..core import FRESH, PLATONIC, REAL, Color, Edge, binom2, budget_table, platonic, real
from .preforb import PreforbidderWitness, is_preforbidder
from .types import (
    COL,
    UNC,
    WILD_LABEL,
    Label,
    PlatonicType,
    coi,
    col,
    colored_portion,
    compatible,
    cross_edges,
    edgcoi,
    edges_of,
    maxpow,
    nu,
    pow_,
    unc,
    union_types,
)


@dataclass
class CheckResult:
    name: str
    asserted: bool
    checked: int = 0
    failed: int = 0
    example: Optional[str] = None

    def record(self, ok: bool, detail=None) -> None:
        self.checked += 1
        if not ok:
            self.failed += 1
            if self.example is None and detail is not None:
                self.example = detail() if callable(detail) else str(detail)

    @property
    def passed(self) -> bool:
        return self.failed == 0

    def line(self) -> str:
        mode = "assert" if self.asserted else "report"
        status = "PASS" if self.passed else "FAIL"
        return f"{status} [{mode}] {self.name}: {self.checked} checked, {self.failed} failed"


@dataclass
class LemmaReport:
    p: int
    q: int
    results: Dict[str, CheckResult] = field(default_factory=dict)
    coverage: List[str] = field(default_factory=list)

    def get(self, name: str, asserted: bool = True) -> CheckResult:
        if name not in self.results:
            self.results[name] = CheckResult(name, asserted)
        return self.results[name]

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results.values() if r.asserted)

    def lines(self) -> List[str]:
        out = [f"# lemma suite p={self.p} q={self.q}"]
        out += [f"# coverage: {c}" for c in self.coverage]
        out += [r.line() for r in self.results.values()]
        for r in self.results.values():
            if r.example:
                out.append(f"#   first failure of {r.name}: {r.example}")
        return out


# --- random types ------------------------------------------------------------


def random_type(
    rng: random.Random,
    s: int,
    n_platonic: int = 3,
    n_real: int = 2,
    p_colored: float = 0.6,
    p_unc: float = 0.2,
) -> PlatonicType:
    palette = [platonic(i) for i in range(n_platonic)] + [real(i) for i in range(n_real)]
    labels = {}
    for g in edges_of(range(s)):
        u = rng.random()
        if u < p_colored and palette:
            labels[g] = col(rng.choice(palette))
        elif u < p_colored + p_unc and palette:
            labels[g] = unc(rng.choice(palette))
        else:
            labels[g] = WILD_LABEL
    return PlatonicType(range(s), labels)


def _random_subset(rng: random.Random, items: Sequence, prob: float = 0.5) -> set:
    return {x for x in items if rng.random() < prob}


def check_identities(y: PlatonicType, f: Fraction, report: LemmaReport, rng: random.Random, edge_samples: int = 40) -> None:
    """Additivity, monotonicity and excision on one type."""
    verts = list(y.vertices)
    edges = edges_of(verts)

    add = report.get("additivity")
    mono = report.get("monotonicity")
    exc_lemma = report.get("excision lemma")
    colport = report.get("colored portion pow")
    yc = colored_portion(y)

    # every chain T3 <= T2 <= T1 <= T, by giving each vertex a level
    for levels in product(range(4), repeat=len(verts)):
        T1 = {v for v, l in zip(verts, levels) if l >= 1}
        T2 = {v for v, l in zip(verts, levels) if l >= 2}
        T3 = {v for v, l in zip(verts, levels) if l >= 3}
        lhs = coi(T1, T3, y)
        mid = coi(T1, T2, y) + coi(T2, T3, y)
        add.record(lhs == mid, lambda: f"coi {sorted(T1)} {sorted(T2)} {sorted(T3)} on {y}")
        p13 = pow_(T1, T3, y, f)
        add.record(p13 == pow_(T1, T2, y, f) + pow_(T2, T3, y, f))
        mono.record(coi(T2, T3, y) <= lhs and coi(T1, T2, y) <= lhs)

        F1 = set(edges_of(T1))
        F2 = F1 - cross_edges(T1 - T2, T3)
        F3 = set(edges_of(T2))
        F4 = set(edges_of(T3)) | cross_edges(T2 - T3, T3)
        rhs = coi(T1 - T3, T2 - T3, y) + edgcoi(F1, F2, y) + nu(F2, F3, F4, y)
        exc_lemma.record(coi(T1, T2, y) == rhs, lambda: f"T1={sorted(T1)} T2={sorted(T2)} T3={sorted(T3)} y={y}")
        pw = pow_(T1 - T3, T2 - T3, y, f) - f * (edgcoi(F1, F2, y) + nu(F2, F3, F4, y))
        exc_lemma.record(pow_(T1, T2, y, f) == pw)
        colport.record(pow_(T1, T2, y, f) == pow_(T1, T2, yc, f))

    eadd = report.get("edge additivity")
    emono = report.get("edge monotonicity")
    edge_exc = report.get("edge excision identity")
    sloppy = report.get("sloppy excision")
    for _ in range(edge_samples):
        E1 = _random_subset(rng, edges, 0.8)
        E2 = _random_subset(rng, sorted(E1), 0.6)
        E3 = _random_subset(rng, sorted(E2), 0.5)
        E4 = _random_subset(rng, sorted(E3), 0.5)
        a = edgcoi(E1, E3, y)
        eadd.record(a == edgcoi(E1, E2, y) + edgcoi(E2, E3, y), lambda: f"{E1} {E2} {E3} {y}")
        emono.record(edgcoi(E2, E4, y) <= edgcoi(E1, E4, y) and edgcoi(E2, E4, y) >= edgcoi(E2, E3, y))
        edge_exc.record(
            edgcoi(E1, E2, y) == edgcoi(E1 - E3, E2 - E3, y) + nu(E1, E2, E3, y),
            lambda: f"{E1} {E2} {E3} {y}",
        )
        edge_exc.record(nu(E1, E2, set(), y) == 0)
        # E3 unrelated to E2 here
        E3b = _random_subset(rng, sorted(E1), 0.4)
        sloppy.record(edgcoi(E1, E2, y) >= edgcoi(E1 - E3b, E2 - E3b, y), lambda: f"{E1} {E2} {E3b} {y}")


# --- general preforbidders ----------------------------------------------------


def _over(sub_edges, limit, colored) -> bool:
    cols = [colored[g] for g in sub_edges if g in colored]
    return len(cols) - len(set(cols)) > limit


def enumerate_preforbidders(
    p: int,
    q: int,
    max_s: Optional[int] = None,
    max_platonic: int = 3,
    max_real: int = 2,
    budget: Optional[int] = None,
    coverage: Optional[List[str]] = None,
) -> Iterator[PreforbidderWitness]:
    """Preforbidders rooted at (0, 1) with e' in {(0, 2), (2, 3)}.

    Colored edges use at most ``max_platonic`` Platonic and ``max_real``
    real colors (up to renaming); c and c' range over the colors of y plus
    one new color of each kind. Stops after ``budget`` witnesses.
    """
    table = budget_table(p, q)
    top = p if max_s is None else min(p, max_s)
    produced = 0
    for s in range(3, top + 1):
        subs = []
        for k in range(3, min(p, s) + 1):
            for sub in combinations(range(s), k):
                subs.append((sub, tuple(combinations(sub, 2)), table[k]))
        by_edge: Dict[tuple, list] = {}
        for it in subs:
            for g in it[1]:
                by_edge.setdefault(g, []).append(it)
        full_edges = tuple(combinations(range(s), 2))
        R = table[s]
        count_s = 0
        for ep in [(0, 2)] + ([(2, 3)] if s >= 4 else []):
            order = [g for g in full_edges if g not in ((0, 1), ep)]
            colored: Dict[tuple, Color] = {}

            def leaves(i, nplat, nreal):
                if i == len(order):
                    yield nplat, nreal
                    return
                g = order[i]
                yield from leaves(i + 1, nplat, nreal)
                choices = [platonic(j) for j in range(min(nplat + 1, max_platonic))]
                choices += [real(j) for j in range(min(nreal + 1, max_real))]
                for ch in choices:
                    colored[g] = ch
                    if not any(_over(it[1], it[2], colored) for it in by_edge[g]):
                        yield from leaves(
                            i + 1,
                            nplat + (ch == platonic(nplat)),
                            nreal + (ch == real(nreal)),
                        )
                    del colored[g]

            for nplat, nreal in leaves(0, 0, 0):
                cols = list(colored.values())
                rep = len(cols) - len(set(cols))
                if rep < R - 1:
                    continue
                labels = {g: (col(colored[g]) if g in colored else WILD_LABEL) for g in full_edges}
                y = PlatonicType(range(s), labels)
                cands = [platonic(j) for j in range(nplat + 1)] + [real(j) for j in range(nreal + 1)]
                for c, c2 in product(cands, repeat=2):
                    if is_preforbidder(y, (0, 1), c, ep, c2, (p, q)):
                        yield PreforbidderWitness(y, Edge(0, 1), c, Edge(*ep), c2)
                        produced += 1
                        count_s += 1
                        if budget is not None and produced >= budget:
                            if coverage is not None:
                                coverage.append(
                                    f"preforbidders: budget {budget} reached inside s={s}; "
                                    f"sizes below {s} complete"
                                )
                            return
        if coverage is not None:
            coverage.append(f"preforbidders: s={s} complete ({count_s} witnesses)")


def alpha(w: PreforbidderWitness, sub) -> int:
    """Platonic colors among {c, c'} on colored edges of S but not of S'."""
    sub = set(sub)
    inside = {l.color for g, l in w.y.labels.items() if l.kind == COL and g[0] in sub and g[1] in sub}
    everywhere = w.y.colors_used()
    return len({c for c in (w.c, w.c_prime) if c.kind == PLATONIC and c in everywhere and c not in inside})


def check_preforbidder(w: PreforbidderWitness, p: int, q: int, report: LemmaReport, regime: bool) -> None:
    beta = binom2(p) - q + 1
    f = Fraction(p - 2, beta)
    m = Fraction(1, beta)
    y = w.y
    S = set(y.vertices)
    report.get("preforbidder swap symmetry").record(
        is_preforbidder(y, w.e_prime, w.c_prime, w.e, w.c, (p, q)), lambda: repr(w)
    )
    if w.c.kind != PLATONIC or w.c_prime.kind != PLATONIC:
        report.get("preforbidder pow bound").record(pow_(S, set(w.e), y, f) <= f, lambda: repr(w))
    core = set(w.e) | set(w.e_prime)
    rest = sorted(S - core)
    bound = report.get("preforbidder pow bound by alpha")
    for k in range(len(rest)):
        for extra in combinations(rest, k):
            sub = core | set(extra)
            bound.record(pow_(S, sub, y, f) <= f * alpha(w, sub) - m, lambda: f"{w} S'={sorted(sub)}")
    cut = report.get("cut coincidence", asserted=regime)
    verts = sorted(S)
    all_edges = set(edges_of(verts))
    for labels in product(range(3), repeat=len(verts)):
        R1 = {v for v, l in zip(verts, labels) if l == 0}
        R2 = {v for v, l in zip(verts, labels) if l == 1}
        R3 = {v for v, l in zip(verts, labels) if l == 2}
        if not R1 or not R2 or len(R3) > 2 or min(R1) > min(R2):
            continue
        cut.record(
            edgcoi(all_edges, all_edges - cross_edges(R1, R2), y) >= 1,
            lambda: f"{w} R1={sorted(R1)} R2={sorted(R2)} R3={sorted(R3)}",
        )


# --- unions of trackable types with preforbidders ------------------------------


def _is_realish(c: Color) -> bool:
    return c.kind in (REAL, FRESH)


def _embed(
    y1: PlatonicType,
    w: PreforbidderWitness,
    phi: Dict[int, int],
    forced: Dict[Color, Color],
) -> Optional[Tuple[PlatonicType, Edge, Edge]]:
    """Map the preforbidder through ``phi`` and rename its colors.

    Colors are identified with y1's wherever a common edge is colored in
    either type, plus the ``forced`` identifications. Returns None when no
    consistent kind-preserving identification exists.
    """
    kappa = dict(forced)
    y2 = w.y
    S1 = set(y1.vertices)
    for g, lab in y2.labels.items():
        h = Edge(phi[g[0]], phi[g[1]])
        if h[0] in S1 and h[1] in S1:
            l1 = y1.labels[h]
            if (lab.kind == COL) != (l1.kind == COL):
                return None
            if lab.kind == COL:
                if kappa.setdefault(lab.color, l1.color) != l1.color:
                    return None
    for a, b in kappa.items():
        if (a.kind == PLATONIC) != (b.kind == PLATONIC):
            return None
    if len(set(kappa.values())) != len(kappa):
        return None
    used = y1.all_colors() | set(kappa.values())
    nxt = {PLATONIC: 0, REAL: 0}
    for c in sorted(y2.all_colors() | {w.c, w.c_prime}):
        if c in kappa:
            continue
        kind = PLATONIC if c.kind == PLATONIC else REAL
        while Color(kind, nxt[kind]) in used:
            nxt[kind] += 1
        kappa[c] = Color(kind, nxt[kind])
        used.add(kappa[c])
    labels = {}
    for g, lab in y2.labels.items():
        h = Edge(phi[g[0]], phi[g[1]])
        labels[h] = lab if lab.color is None else Label(lab.kind, kappa[lab.color])
    z2 = PlatonicType(phi.values(), labels)
    return z2, Edge(phi[w.e[0]], phi[w.e[1]]), Edge(phi[w.e_prime[0]], phi[w.e_prime[1]])


def _random_phi(rng, y1: PlatonicType, w: PreforbidderWitness, pinned: Dict[int, int], need_new: bool) -> Optional[Dict[int, int]]:
    S1 = list(y1.vertices)
    phi = dict(pinned)
    if len(set(phi.values())) != len(phi):
        return None
    free_targets = [v for v in S1 if v not in phi.values()]
    rng.shuffle(free_targets)
    nxt = max(S1) + 1
    for v in w.y.vertices:
        if v in phi:
            continue
        if free_targets and rng.random() < 0.5:
            phi[v] = free_targets.pop()
        else:
            phi[v] = nxt
            nxt += 1
    if need_new and all(t in set(S1) for t in phi.values()):
        return None
    return phi


def search_unions(
    p: int,
    q: int,
    trackables: Sequence[PlatonicType],
    witnesses: Sequence[PreforbidderWitness],
    trials: int,
    rng: random.Random,
    report: LemmaReport,
    regime: bool,
) -> None:
    """Random search for instances of the two union lemmas."""
    beta = binom2(p) - q + 1
    f = Fraction(p - 2, beta)
    m = Fraction(1, beta)
    root = Edge(0, 1)
    app = report.get("append preforbidder", asserted=regime)
    uni = report.get("union with preforbidder", asserted=regime)
    if not trackables or not witnesses:
        return
    for _ in range(trials):
        y1 = rng.choice(trackables)
        w = rng.choice(witnesses)
        base = pow_(set(y1.vertices), set(root), y1, f)
        unc_edges = [g for g, l in y1.labels.items() if l.kind == UNC]
        if rng.random() < 0.5 and len(unc_edges) >= 2:
            # appendpreforb: e2 and e3 land on uncolored edges of y1
            g2, g3 = rng.sample(unc_edges, 2)
            pinned = {}
            ok = True
            for src, dst in ((w.e, g2), (w.e_prime, g3)):
                dst = list(dst)
                rng.shuffle(dst)
                for a, b in zip(src, dst):
                    if pinned.setdefault(a, b) != b:
                        ok = False
            if not ok:
                continue
            phi = _random_phi(rng, y1, w, pinned, need_new=True)
            if phi is None:
                continue
            l2, l3 = y1.labels[g2], y1.labels[g3]
            forced = {w.c: l2.color}
            if forced.setdefault(w.c_prime, l3.color) != l3.color:
                continue
            if any(_is_realish(a) != _is_realish(b) for a, b in forced.items()):
                continue
            got = _embed(y1, w, phi, forced)
            if got is None:
                continue
            z2, _, _ = got
            if not compatible(y1, z2):
                continue
            u = union_types(y1, z2)
            val = maxpow(set(u.vertices), set(root), u, f)
            app.record(val <= base - m, lambda: f"y1={y1} y2={z2} maxpow={val} bound={base - m}")
        else:
            # union lemma: e3 on an uncolored edge of y1, e2 sticking out, c real
            if w.c.kind == PLATONIC:
                continue
            cands = [g for g in unc_edges if g != root]
            if not cands:
                continue
            g3 = rng.choice(cands)
            dst = list(g3)
            rng.shuffle(dst)
            pinned = dict(zip(w.e_prime, dst))
            phi = _random_phi(rng, y1, w, pinned, need_new=True)
            if phi is None:
                continue
            e2 = Edge(phi[w.e[0]], phi[w.e[1]])
            if set(e2) <= set(y1.vertices):
                continue
            l3 = y1.labels[g3]
            forced = {w.c_prime: l3.color}
            if _is_realish(w.c_prime) != _is_realish(l3.color):
                continue
            got = _embed(y1, w, phi, forced)
            if got is None:
                continue
            z2, _, _ = got
            if not compatible(y1, z2):
                continue
            u = union_types(y1, z2)
            val = maxpow(set(u.vertices), set(root) | set(e2), u, f)
            uni.record(val <= base - m, lambda: f"y1={y1} y2={z2} maxpow={val} bound={base - m}")


def run_lemma_suite(
    p: int,
    q: int,
    seed: int = 0,
    random_types: int = 20,
    max_s: int = 6,
    preforbidder_budget: int = 2000,
    union_trials: int = 2000,
    trackable_cap: int = 400,
) -> LemmaReport:
    """Run every check for one (p, q) pair and collect a report."""
    from .trackable import trackable_closure, trackable_properties

    rng = random.Random(seed)
    beta = binom2(p) - q + 1
    f = Fraction(p - 2, beta)
    regime = 4 * q <= p * p - 26 * p + 55
    report = LemmaReport(p, q)
    s_top = min(2 * p, max_s)
    for i in range(random_types):
        s = 3 + i % (s_top - 2)
        y = random_type(rng, s)
        check_identities(y, f, report, rng)
    report.coverage.append(f"identities: {random_types} random types on 3..{s_top} vertices, every vertex chain")

    witnesses = list(
        enumerate_preforbidders(p, q, budget=preforbidder_budget, coverage=report.coverage)
    )
    for w in witnesses:
        check_preforbidder(w, p, q, report, regime)

    trackables = trackable_closure(p, q)
    tp = report.get("trackable properties")
    for y in trackables:
        props = trackable_properties(y, (0, 1), (p, q))
        tp.record(all(props.values()), lambda: f"{y}: {props}")
    report.coverage.append(f"trackable: full closure, {len(trackables)} types")

    sample = trackables if len(trackables) <= trackable_cap else rng.sample(trackables, trackable_cap)
    search_unions(p, q, sample, witnesses, union_trials, rng, report, regime)
    report.coverage.append(f"unions: {union_trials} random embeddings")
    return report


__all__ = [
    "CheckResult",
    "LemmaReport",
    "alpha",
    "check_identities",
    "check_preforbidder",
    "enumerate_preforbidders",
    "random_type",
    "run_lemma_suite",
    "search_unions",
]
