import math
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import ceil_budget
from pqforge import (
    Color,
    Edge,
    EnumerationError,
    ParameterError,
    binom2,
    budget_table,
    derive_params,
    fresh,
    kappa_from_mu,
    real,
    repeat_budget,
    repeats,
)
from pqforge.core import platonic


def admissible(pmax=12):
    for p in range(3, pmax + 1):
        for q in range(2, binom2(p) + 1):
            yield p, q


@pytest.mark.parametrize("p,q,s,expected", [(4, 5, 3, 0), (4, 5, 4, 1), (5, 9, 4, 1), (3, 3, 3, 0)])
def test_budget_examples(p, q, s, expected):
    assert repeat_budget(derive_params(p, q, 100, kappa=1.0), s) == expected


def test_budget_at_p_is_edges_minus_q():
    for p, q in admissible():
        assert budget_table(p, q)[p] == binom2(p) - q


def test_budget_sandwich_exhaustive():
    for p, q in admissible():
        beta = binom2(p) - q + 1
        for s in range(3, p + 1):
            R = budget_table(p, q)[s]
            x = Fraction((s - 2) * beta, p - 2)
            assert x - 1 <= R <= x - Fraction(1, p - 2)
            assert R == ceil_budget(p, q, s)


def test_budget_nondecreasing():
    for p, q in admissible():
        table = budget_table(p, q)
        assert all(table[s] <= table[s + 1] for s in range(3, p))


def test_budget_range_check():
    params = derive_params(4, 5, 20, kappa=1.0)
    for s in (2, 5):
        with pytest.raises(ParameterError):
            repeat_budget(params, s)


@pytest.mark.parametrize("items,expected", [([], 0), (["a", "a", "b"], 1), (["a", "a", "a", "b", "b"], 3)])
def test_repeats_examples(items, expected):
    assert repeats(items) == expected


@given(st.lists(st.integers(0, 5)), st.lists(st.integers(6, 11)))
def test_repeats_additive_on_disjoint_supports(a, b):
    assert repeats(a + b) == repeats(a) + repeats(b)


@given(st.lists(st.integers(0, 4)), st.lists(st.integers(0, 4)))
def test_repeats_superadditive(a, b):
    assert repeats(a + b) >= repeats(a) + repeats(b)


@pytest.mark.parametrize("p,q", [(3, 3), (4, 5), (4, 3), (5, 9)])
def test_distinct_colors_iff_repeat_bound(p, q):
    m = binom2(p)
    palette = range(3)
    for cols in product(palette, repeat=m) if m <= 6 else []:
        assert (len(set(cols)) >= q) == (repeats(cols) <= m - q)


@given(st.integers(3, 5).flatmap(lambda p: st.tuples(st.just(p), st.integers(2, binom2(p)),
                                                      st.lists(st.integers(0, 4), min_size=binom2(p), max_size=binom2(p)))))
def test_distinct_colors_iff_repeat_bound_random(args):
    p, q, cols = args
    assert (len(set(cols)) >= q) == (repeats(cols) <= binom2(p) - q)


def test_derive_params_4_5_100():
    P = derive_params(4, 5, 100, kappa=2.0)
    assert (P.beta, P.f_exp, P.m_exp, P.hm_exp) == (2, 1, Fraction(1, 2), Fraction(1, 4))
    assert P.epsilon == Fraction(1, 1000 * 4**6)
    assert P.kappa_overridden and not P.epsilon_overridden


def test_derive_params_num_colors_formula():
    P = derive_params(4, 5, 100, kappa=2.0)
    assert P.num_colors == math.ceil(2.0 * 100 / math.sqrt(math.log(100)))
    assert P.i_max == math.floor((1 - 100 ** -float(P.epsilon)) * binom2(100))
    assert not P.in_theorem_regime


def test_derive_params_3_3_10():
    P = derive_params(3, 3, 10, kappa=1.0)
    assert P.beta == 1 and P.f_exp == 1 and P.R(3) == 0


@pytest.mark.parametrize("args", [(4, 7, 10), (4, 5, 3), (2, 2, 10), (4, 1, 10)])
def test_derive_params_rejects(args):
    with pytest.raises(ParameterError):
        derive_params(*args, kappa=1.0)


def test_derive_params_overrides():
    P = derive_params(4, 5, 30, epsilon=Fraction(3, 10), num_colors=90)
    assert P.num_colors == 90 and P.colors_overridden and P.epsilon_overridden
    # kappa follows the palette: |C| = kappa n / sqrt(ln n) for (4, 5)
    assert P.kappa == pytest.approx(90 * math.sqrt(math.log(30)) / 30)
    with pytest.raises(ParameterError):
        derive_params(4, 5, 30, kappa=1.0, num_colors=9)


def test_regime_flag():
    assert derive_params(30, 20, 40, kappa=1.0).in_theorem_regime
    assert not derive_params(5, 9, 40, kappa=1.0).in_theorem_regime


def test_default_kappa_uses_mu():
    P = derive_params(4, 5, 100)
    assert P.kappa > 0 and not P.kappa_overridden


def test_edge_canonical():
    assert Edge(3, 1) == (1, 3) and Edge(3, 1).u == 1
    with pytest.raises(ParameterError):
        Edge(2, 2)


def test_palettes_disjoint():
    assert real(0) != platonic(0) != fresh(0) and real(0) != fresh(0)
    assert isinstance(real(1), Color) and real(1).is_real and platonic(1).is_platonic


def test_kappa_from_mu_unit():
    eps = Fraction(1, 100)
    # single entry mu = eps, eta = 1: ratio eps / weight = 1
    assert kappa_from_mu(4, 5, eps, {(1, 1, 3): eps}) == pytest.approx(1.0)


@pytest.mark.parametrize("mu", [{}, {(1, 1, 3): 0}])
def test_kappa_from_mu_empty(mu):
    with pytest.raises(EnumerationError):
        kappa_from_mu(4, 5, Fraction(1, 100), mu)
