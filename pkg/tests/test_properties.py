import random
from fractions import Fraction as Q

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import invariants as inv
from superfair.classify import betting_subspace, classify_star, live, orthogonal_to
from superfair.family import apply_word, delta_risk, validate, word_matrix
from superfair.generators import random_family, random_vector, random_word
from superfair.geometry import birkhoff_tau, hilbert_distance
from superfair.numerics import (
    add,
    dot,
    lp_max,
    lp_max_capped,
    mat_mul,
    norm1,
    rank,
    row_space_basis,
    scale,
    submatrix,
    support,
    vec_mat,
)
from superfair.support import (
    act_mask,
    bits,
    bscc_structure,
    build_support_automaton,
    is_pseudo_mixing,
    pseudo_mixing_word,
    reachability_graph,
    star_check,
    stationary_distribution,
    synchronizing_word,
    to_mask,
)

rngs = st.randoms(use_true_random=False)
rationals = st.fractions(min_value=0, max_value=5, max_denominator=7)
HEAVY = settings(max_examples=150, deadline=None)
LIGHT = settings(max_examples=400, deadline=None)


def _star_family(rng, max_m=4):
    for _ in range(50):
        f = random_family(rng, rng.randint(1, max_m), rng.randint(2, 3), fair=rng.random() < 0.6, density=0.5)
        if star_check(reachability_graph(f)):
            return f
    assume(False)


# the randomized checks shared with the acceptance suite

@LIGHT
@given(rngs)
def test_dh_non_expansion(rng):
    inv.check_dh_non_expansion(rng)


@LIGHT
@given(rngs)
def test_norm_below_dh(rng):
    inv.check_norm_below_dh(rng)


@LIGHT
@given(rngs)
def test_birkhoff_contraction(rng):
    inv.check_birkhoff(rng)


@LIGHT
@given(rngs)
def test_supermartingale(rng):
    inv.check_supermartingale(rng)


@LIGHT
@given(rngs)
def test_word_homomorphism(rng):
    inv.check_word_homomorphism(rng)


@HEAVY
@given(rngs)
def test_live_properties(rng):
    inv.check_live(rng)


@LIGHT
@given(rngs)
def test_support_union(rng):
    inv.check_support_union(rng)


@HEAVY
@given(rngs)
def test_span_depth(rng):
    inv.check_span_depth(rng)


# numerics

@given(st.lists(rationals, min_size=1, max_size=5), st.lists(rationals, min_size=1, max_size=5))
def test_norm_additive(u, v):
    n = min(len(u), len(v))
    u, v = tuple(u[:n]), tuple(v[:n])
    assert norm1(add(u, v)) == norm1(u) + norm1(v)


@settings(deadline=None)
@given(st.lists(rationals, min_size=2, max_size=4),
       st.lists(st.lists(st.integers(-3, 3), min_size=4, max_size=4), max_size=3))
def test_lp_capped(cap, raw):
    cap = tuple(cap)
    B = row_space_basis([tuple(Q(x) for x in r[:len(cap)]) for r in raw]) if raw else []
    val = lp_max_capped(cap, B)
    assert val <= norm1(cap)
    assert (val == norm1(cap)) == all(dot(cap, b) == 0 for b in B)


@given(st.lists(st.lists(st.integers(-4, 4), min_size=3, max_size=3), min_size=1, max_size=5))
def test_row_space_basis(raw):
    rows = [tuple(Q(x) for x in r) for r in raw]
    B = row_space_basis(rows)
    assert rank(B) == len(B)
    for r in rows:
        assert rank(B + [r]) == len(B)


def test_exact_products_reproducible():
    rng = random.Random(1)
    f = random_family(rng, 3)
    w = random_word(rng, f, 12)
    assert word_matrix(f, w) == word_matrix(f, w)


# geometry

@given(rngs)
def test_dh_metric(rng):
    m = rng.randint(1, 4)
    S = [i for i in range(m) if rng.random() < 0.7] or [0]
    u, v, x = (random_vector(rng, m, S) for _ in range(3))
    assert hilbert_distance(u, v) == hilbert_distance(v, u)
    assert hilbert_distance(u, x) <= hilbert_distance(u, v) + hilbert_distance(v, x) + 1e-9
    assert hilbert_distance(u, scale(Q(3), u)) == 0


# family

@given(rngs)
def test_norm_martingale_iff_fair(rng):
    f = random_family(rng, rng.randint(1, 3), fair=rng.random() < 0.5)
    fair = validate(f).kind == "Fair"
    equal = True
    for _ in range(5):
        v = random_vector(rng, f.dim)
        w = random_word(rng, f, rng.randint(0, 3))
        u = apply_word(f, v, w)
        avg = sum(norm1(vec_mat(u, M)) for M in f.matrices) / f.k
        assert avg <= norm1(u)
        equal &= avg == norm1(u)
    if fair:
        assert equal
    # unit vectors detect any strictly shrinking row
    units_equal = all(
        sum(norm1(vec_mat(tuple(Q(int(i == j)) for j in range(f.dim)), M)) for M in f.matrices) == f.k
        for i in range(f.dim)
    )
    assert units_equal == fair


@given(rngs, rationals.filter(lambda q: q > 0))
def test_delta_scale_invariant(rng, lam):
    f = random_family(rng, rng.randint(1, 3), fair=rng.random() < 0.5)
    u = random_vector(rng, f.dim)
    assert delta_risk(f, scale(lam, u)) == delta_risk(f, u)


# support

@settings(max_examples=150, deadline=None)
@given(rngs)
def test_sync_and_pseudo_mixing_words(rng):
    f = _star_family(rng)
    aut = build_support_automaton(f)
    bs = bscc_structure(aut)
    w = synchronizing_word(aut, bs)
    for E in aut.states:
        assert bs.in_bscc(act_mask(f, E, w))
    if bs.nonnull_bscc is None:
        return
    for i in range(f.dim):
        # every singleton reaches the non-null BSCC or dies
        assert aut.run(1 << i, w) in bs.nonnull_bscc or aut.run(1 << i, w) == 0
    F = bits(bs.minimal_member)
    pm = pseudo_mixing_word(f, F, bs, aut)
    assert is_pseudo_mixing(f, pm, F)
    pi = stationary_distribution(aut, bs.nonnull_bscc)
    assert sum(pi.values()) == 1 and all(p > 0 for p in pi.values())


@settings(max_examples=200, deadline=None)
@given(rngs)
def test_pseudo_mixing_checker_oracle(rng):
    f = random_family(rng, rng.randint(1, 4), density=0.4)
    w = random_word(rng, f, rng.randint(1, 8))
    F = [i for i in range(f.dim) if rng.random() < 0.6] or [0]
    Mw = word_matrix(f, w)
    Fset = set(F)
    rows = [set(support(Mw[i])) for i in F]
    image = set().union(*rows)
    expected = image == Fset and all(r in (set(), Fset) for r in rows)
    assert is_pseudo_mixing(f, w, F) == expected


# classify

def _words(f, L):
    frontier = [()]
    for _ in range(L + 1):
        yield from frontier
        frontier = [z + (a,) for z in frontier for a in f.alphabet]


@settings(max_examples=60, deadline=None)
@given(rngs)
def test_cone_membership_oracle(rng):
    f = random_family(rng, rng.randint(1, 3), fair=rng.random() < 0.6)
    V = betting_subspace(f)
    ones = [1] * f.dim
    # a cone point from the LP and a generic point
    _, s = lp_max(tuple(Q(rng.randint(1, 5)) for _ in ones), tuple(Q(1) for _ in ones), list(V.basis))
    for v in (tuple(s), random_vector(rng, f.dim)):
        if norm1(v) == 0:
            continue
        constant = all(norm1(apply_word(f, v, z)) == norm1(v) for z in _words(f, 6))
        assert orthogonal_to(v, V) == constant


@settings(max_examples=60, deadline=None)
@given(rngs)
def test_fixed_direction_unique(rng):
    f = _star_family(rng, 3)
    c = classify_star(f)
    assume(c.case != "0")
    F = sorted(c.F)
    w = c.pseudo_mixing_word
    Mw = np.array(word_matrix(f, w), dtype=float)
    x = np.array([float(t) for t in c.fixed.x])
    for _ in range(2):
        u = np.array([float(t) for t in random_vector(rng, f.dim, F)])
        for _ in range(3000):
            u = u @ Mw
            u /= u.sum()
        assert np.abs(u - x).sum() < 1e-6


@settings(max_examples=60, deadline=None)
@given(rngs)
def test_pseudo_mixing_contraction(rng):
    f = _star_family(rng, 4)
    aut = build_support_automaton(f)
    bs = bscc_structure(aut)
    assume(bs.nonnull_bscc is not None)
    F = bits(bs.minimal_member)
    w = pseudo_mixing_word(f, F, bs, aut)
    Fm = to_mask(F)
    Ep = [i for i in F if act_mask(f, 1 << i, w) == Fm]
    Mw = word_matrix(f, w)
    tau = birkhoff_tau(submatrix(Mw, Ep, F))
    assert tau < 1
    u, v = random_vector(rng, f.dim, F), random_vector(rng, f.dim, F)
    uw, vw = vec_mat(u, Mw), vec_mat(v, Mw)
    assert hilbert_distance(uw, vw) <= tau * hilbert_distance(u, v) + 1e-9


@settings(max_examples=100, deadline=None)
@given(rngs)
def test_live_hilbert_continuity(rng):
    f = random_family(rng, rng.randint(2, 3), fair=rng.random() < 0.6)
    V = betting_subspace(f)
    u = random_vector(rng, f.dim)
    eps = Q(1, rng.randint(50, 500))
    # multiplicative perturbation by factors in [1, e^eps) keeps d_H <= eps
    factors = [1 + eps * Q(rng.randint(0, 9), 10) / 2 for _ in range(f.dim)]
    v = tuple(a * b for a, b in zip(u, factors))
    v = scale(norm1(u) / norm1(v), v)
    d = hilbert_distance(u, v)
    assert abs(live(f, V, u) - live(f, V, v)) <= 3 * d * norm1(u) + 1e-12


@settings(max_examples=60, deadline=None)
@given(rngs)
def test_case2_iff_no_risk_along_x(rng):
    f = _star_family(rng, 3)
    c = classify_star(f)
    assume(c.case != "0" and c.fixed.exact)
    zero_risk = all(
        norm1(apply_word(f, c.fixed.x, z)) == 0 or delta_risk(f, apply_word(f, c.fixed.x, z)) == 0
        for z in _words(f, 5)
    )
    assert (c.case == "2") == zero_risk


def test_word_matrix_assoc_example(case2):
    assert word_matrix(case2, "10") == mat_mul(case2.matrix("1"), case2.matrix("0"))
