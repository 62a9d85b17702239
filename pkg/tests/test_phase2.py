import numpy as np
import pytest

from pqforge import PreconditionError, derive_params
from pqforge.engine import ColoringState, run_phase1
from pqforge.phase2 import adversarial_check, complete_uniform, resample_until_valid
from pqforge.verify import verify_partial, verify_pq


def prm(p, q, n, colors):
    return derive_params(p, q, n, epsilon=10, num_colors=colors)


def phase1(p, q, n, colors, seed):
    return run_phase1(prm(p, q, n, colors), seed)


def test_uniform_leaves_phase1_edges():
    res = phase1(4, 5, 10, 12, 0)
    full = complete_uniform(res, 7, allow_failed=True)
    colored = res.state.color >= 0
    assert (full.matrix[colored] == res.state.color[colored]).all()
    iu = np.triu_indices(10, k=1)
    assert (full.matrix[iu] >= 0).all()
    # fresh colors sit exactly on the formerly uncolored edges
    assert ((full.matrix >= full.num_real) == full.phase2).all()
    assert (full.phase2 == ~colored & ~np.eye(10, dtype=bool)).all()


def test_uniform_deterministic():
    res = phase1(4, 5, 10, 12, 0)
    a = complete_uniform(res, 3, allow_failed=True)
    b = complete_uniform(res, 3, allow_failed=True)
    c = complete_uniform(res, 4, allow_failed=True)
    assert (a.matrix == b.matrix).all()
    assert not (a.matrix == c.matrix).all()


def test_skip_phase1_uniform():
    st = ColoringState(prm(3, 3, 30, 5))
    full = complete_uniform(st, 0)
    iu = np.triu_indices(30, k=1)
    vals = full.matrix[iu]
    assert set(np.unique(vals)) == set(range(5, 10))
    counts = np.bincount(vals - 5)
    assert counts.min() > 0.6 * len(vals) / 5


def test_zero_uncolored_is_identity():
    st = ColoringState(prm(3, 3, 4, 3))
    from oracles import k4_one_factorization

    mat = np.array(k4_one_factorization())
    for u in range(4):
        for v in range(u + 1, 4):
            st.assign(st.edge_id((u, v)), int(mat[u, v]))
    full = complete_uniform(st, 0)
    assert (full.matrix == mat).all() and not full.phase2.any()
    out = resample_until_valid(st, 0)
    assert out.ok and out.rounds == 0


def test_failed_run_needs_override():
    res = phase1(3, 3, 6, 2, 0)
    assert not res.succeeded
    with pytest.raises(PreconditionError):
        complete_uniform(res, 0)


def test_max_rounds_guard():
    st = ColoringState(prm(3, 3, 5, 3))
    with pytest.raises(PreconditionError):
        resample_until_valid(st, 0, max_rounds=0)


def test_phase1_inconsistency_flagged():
    st = ColoringState(prm(3, 3, 4, 3))
    for u in range(4):
        for v in range(u + 1, 4):
            st.assign(st.edge_id((u, v)), 0)
    out = resample_until_valid(st, 0)
    assert not out.ok and out.reason.startswith("phase1-inconsistency")
    assert out.rounds == 0 and len(out.violations) == 4


def test_resampling_repairs_and_keeps_phase1():
    st = ColoringState(prm(3, 3, 7, 4))
    st.assign(st.edge_id((0, 1)), 0)
    st.assign(st.edge_id((2, 3)), 1)
    out = resample_until_valid(st, 5, num_fresh=12)
    assert out.ok and verify_pq(out.coloring.matrix, 3, 3) == []
    assert out.coloring.matrix[0, 1] == 0 and out.coloring.matrix[2, 3] == 1


def test_resampling_exhaustion_reports_residue():
    # two fresh colors cannot properly color K5
    st = ColoringState(prm(3, 3, 5, 3))
    out = resample_until_valid(st, 0, max_rounds=50, num_fresh=2)
    assert not out.ok and out.reason == "max_rounds exhausted" and out.violations


def test_full_runs_verify():
    params = derive_params(4, 5, 14, epsilon=0.3, num_colors=20)
    for seed in range(3):
        res = run_phase1(params, seed)
        assert res.succeeded and res.state.n_unc > 30
        out = resample_until_valid(res, seed)
        assert out.ok
        assert verify_pq(out.coloring.matrix, 4, 5) == []


def test_adversarial_on_phase1_outputs():
    rng = np.random.default_rng(0)
    for seed in range(10):
        res = phase1(4, 5, 12, 16, seed)
        assert verify_partial(res.state) == []
        tested, failed = adversarial_check(res, rng, trials=300)
        assert failed == 0
