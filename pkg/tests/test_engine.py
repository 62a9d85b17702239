import random
from itertools import combinations

import pytest

from oracles import falling, forbidden_sets, naive_extensions
from pqforge import PreconditionError, derive_params, fresh, real
from pqforge.core import platonic
from pqforge.engine import (
    COLORED,
    REACHED_IMAX,
    STUCK,
    AvailabilityIndex,
    ColoringState,
    available_colors,
    count_extensions,
    forbidden_check_bruteforce,
    make_rng,
    probe_steps,
    rebuild_index,
    run_phase1,
    step,
)
from pqforge.platonic import UNC_ANY_LABEL, WILD_LABEL, PartialEmbedding, PlatonicType, col, unc
from pqforge.platonic.lemmas import random_type


def params(p, q, n, colors, eps=10):
    return derive_params(p, q, n, epsilon=eps, num_colors=colors)


def partial_state(prm, seed, steps):
    st = ColoringState(prm)
    idx = AvailabilityIndex(st)
    rng = make_rng(seed)
    for _ in range(steps):
        if step(st, idx, rng).kind != COLORED:
            break
    return st, idx


def as_lists(st):
    return st.color.tolist()


# --- state and single steps ---------------------------------------------------


def test_initial_state():
    st = ColoringState(params(4, 5, 8, 10))
    assert st.step == 0 and st.t == 0 and st.n_unc == 28
    assert len(st.uncolored) == 28
    assert (st.color == -1).all()


def test_assign_guards():
    st = ColoringState(params(4, 5, 6, 4))
    st.assign(st.edge_id((0, 1)), 2)
    with pytest.raises(PreconditionError):
        st.assign(st.edge_id((0, 1)), 1)
    with pytest.raises(PreconditionError):
        st.assign(st.edge_id((0, 2)), 4)
    with pytest.raises(PreconditionError):
        st.edge_id((3, 3))


def test_available_on_colored_edge_rejected():
    st = ColoringState(params(4, 5, 6, 4))
    st.assign(st.edge_id((0, 1)), 0)
    with pytest.raises(PreconditionError):
        available_colors(st, rebuild_index(st), (0, 1))


def test_proper_coloring_case():
    # q = C(p,2): every triangle needs distinct colors
    st = ColoringState(params(3, 3, 5, 5))
    st.assign(st.edge_id((0, 1)), 0)
    idx = rebuild_index(st)
    assert 0 not in available_colors(st, idx, (0, 2))
    assert 0 not in available_colors(st, idx, (1, 4))
    assert 0 in available_colors(st, idx, (2, 3))
    assert forbidden_check_bruteforce(st, (0, 2), 0) == (True, (0, 1, 2))


def test_four_five_forbidden_example():
    # R(3) = 0, R(4) = 1 for (4, 5): 01 and 23 share color 0
    st = ColoringState(params(4, 5, 6, 6))
    st.assign(st.edge_id((0, 1)), 0)
    st.assign(st.edge_id((2, 3)), 0)
    idx = rebuild_index(st)
    # the 4-set {0,1,2,3} is tight: its colors are forbidden at 02, 03, 12, 13
    for e in ((0, 2), (0, 3), (1, 2), (1, 3)):
        assert 0 not in available_colors(st, idx, e)
    assert 0 not in available_colors(st, idx, (0, 4))  # triangle 014
    assert 0 in available_colors(st, idx, (4, 5))


def test_step_deterministic():
    prm = params(4, 5, 10, 12)
    a = run_phase1(prm, 11)
    b = run_phase1(prm, 11)
    assert a.state.history == b.state.history
    assert a.outcome == b.outcome
    c = run_phase1(prm, 12)
    assert c.state.history != a.state.history


def test_zero_imax():
    prm = derive_params(4, 5, 8, num_colors=10)
    assert prm.i_max == 0
    res = run_phase1(prm, 0)
    assert res.outcome.kind == REACHED_IMAX and res.state.step == 0


def test_triangle_run():
    prm = params(3, 3, 3, 3)
    res = run_phase1(prm, 4)
    assert res.state.step == prm.i_max == 2
    cols = [c for _, _, _, c in res.state.history]
    assert len(set(cols)) == 2


def test_stuck_is_reported():
    prm = params(3, 3, 6, 2)
    res = run_phase1(prm, 0)
    assert res.outcome.kind == STUCK and res.outcome.edge is not None
    lazy = run_phase1(prm, 0, eager_stuck=False)
    assert lazy.outcome.kind == STUCK


def test_probe_steps_include_deciles_and_end():
    pts = probe_steps(100, 80)
    for i in (0, 10, 50, 80):
        assert i in pts
    assert max(pts) == 80 and pts == sorted(pts)


# --- availability against the definition ------------------------------------


@pytest.mark.parametrize("pq,colors", [((4, 5), 36), ((5, 9), 30), ((3, 3), 14)])
def test_index_matches_definition(pq, colors):
    prm = params(*pq, 12, colors)
    st = ColoringState(prm)
    idx = AvailabilityIndex(st)
    rng = make_rng(3)
    checked = 0
    while True:
        truth = forbidden_sets(as_lists(st), *pq)
        for (u, v), bad in truth.items():
            assert idx.forbidden_set(st, (u, v)) == bad
        checked += 1
        if step(st, idx, rng).kind != COLORED:
            break
    assert checked > 10


def test_incremental_equals_rebuild():
    st, idx = partial_state(params(4, 5, 12, 36), 5, 40)
    again = rebuild_index(st)
    ids = st.uncolored_ids()
    assert (idx.forbidden[ids] == again.forbidden[ids]).all()


def test_bruteforce_agrees_with_index():
    st, idx = partial_state(params(4, 5, 10, 20), 9, 25)
    for k in st.uncolored_ids()[:12]:
        e = tuple(int(x) for x in st.edges[k])
        for c in range(st.num_colors):
            bad, witness = forbidden_check_bruteforce(st, e, c)
            assert bad == idx.is_forbidden(st, e, c)
            if bad:
                assert set(e) <= set(witness)


def test_phase1_never_exceeds_budget():
    from pqforge.verify import verify_partial_reference

    res = run_phase1(params(4, 5, 10, 20), 2)
    assert verify_partial_reference(res.state, 4, 5) == []


# --- extension counting ----------------------------------------------------------


def oracle_labels(z):
    out = {}
    for g, l in z.labels.items():
        c = None if l.color is None else (l.color.kind, l.color.index)
        out[g] = (l.kind, c)
    return out


def available_map(st, idx):
    out = {}
    for u, v in combinations(range(st.n), 2):
        if st.color[u, v] < 0:
            out[(u, v)] = set(idx.available_array(st.edge_id((u, v))).tolist())
    return out


def naive(st, idx, z, phi):
    return naive_extensions(as_lists(st), available_map(st, idx), st.num_colors, list(z.vertices), oracle_labels(z), dict(phi.mapping))


def abstract_type(st, idx, S, rng):
    """A type read off the live coloring on S, with random abstraction."""
    labels = {}
    plat = {}
    for i, j in combinations(range(len(S)), 2):
        a, b = S[i], S[j]
        c = int(st.color[a, b])
        r = rng.random()
        if c >= 0:
            if r < 0.2:
                labels[(i, j)] = WILD_LABEL
            elif r < 0.5:
                labels[(i, j)] = col(real(c))
            else:
                labels[(i, j)] = col(plat.setdefault(c, platonic(len(plat))))
        else:
            avail = idx.available_array(st.edge_id((a, b)))
            if r < 0.3 or len(avail) == 0:
                labels[(i, j)] = UNC_ANY_LABEL
            elif r < 0.5:
                labels[(i, j)] = WILD_LABEL
            elif r < 0.7:
                labels[(i, j)] = unc(fresh(i * 10 + j))
            else:
                labels[(i, j)] = unc(real(int(rng.choice(list(avail)))))
    return PlatonicType(range(len(S)), labels)


def test_count_extensions_matches_naive_on_live_types():
    rng = random.Random(0)
    nonzero = 0
    for seed in range(4):
        st, idx = partial_state(params(4, 5, 9, 8), seed, 10 + 4 * seed)
        for _ in range(8):
            S = rng.sample(range(st.n), 4)
            z = abstract_type(st, idx, S, rng)
            phi = PartialEmbedding({0: S[0], 1: S[1]})
            got = count_extensions(st, z, phi, idx)
            assert got == naive(st, idx, z, phi)
            nonzero += got > 0
    assert nonzero > 10


def test_count_extensions_matches_naive_on_random_types():
    rng = random.Random(1)
    st, idx = partial_state(params(4, 5, 8, 6), 3, 12)
    for _ in range(40):
        z = random_type(rng, rng.choice([3, 4]), n_platonic=2, n_real=3)
        phi = PartialEmbedding({0: rng.randrange(st.n)})
        assert count_extensions(st, z, phi, idx) == naive(st, idx, z, phi)


def test_all_wild_counts_injections():
    st, _ = partial_state(params(4, 5, 9, 10), 0, 5)
    for s in (2, 3, 4):
        z = PlatonicType.build(range(s), {}, WILD_LABEL)
        assert count_extensions(st, z, PartialEmbedding({0: 3})) == falling(st.n - 1, s - 1)
        assert count_extensions(st, z, PartialEmbedding({})) == falling(st.n, s)


def test_colored_label_on_empty_coloring_is_zero():
    st = ColoringState(params(4, 5, 7, 10))
    z = PlatonicType.build(range(3), {(0, 1): col(platonic(0))}, WILD_LABEL)
    assert count_extensions(st, z, PartialEmbedding({2: 0})) == 0


def test_embedding_must_fit_its_domain():
    st = ColoringState(params(4, 5, 7, 10))
    z = PlatonicType.build(range(3), {(0, 1): col(platonic(0))}, WILD_LABEL)
    with pytest.raises(PreconditionError):
        count_extensions(st, z, PartialEmbedding({0: 0, 1: 1}))
    with pytest.raises(PreconditionError):
        count_extensions(st, z, PartialEmbedding({5: 0}))


def test_real_on_unc_blocks_platonic_image():
    # psi fixes real colors on z, so a Platonic color cannot map onto one of them
    st = ColoringState(params(3, 3, 5, 4))
    st.assign(st.edge_id((0, 1)), 1)
    idx = rebuild_index(st)
    z = PlatonicType.build(range(4), {(0, 1): col(platonic(0)), (2, 3): unc(real(1))}, WILD_LABEL)
    assert count_extensions(st, z, PartialEmbedding({0: 0}), idx) == 0
    z2 = PlatonicType.build(range(4), {(0, 1): col(platonic(0)), (2, 3): unc(real(2))}, WILD_LABEL)
    # 1 is forced to host vertex 1 and 23 can be any of the 6 ordered pairs in {2,3,4}
    assert count_extensions(st, z2, PartialEmbedding({0: 0}), idx) == 6
