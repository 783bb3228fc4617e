import itertools
import math
from fractions import Fraction as Q

import pytest

from superfair.classify import (
    betting_subspace,
    char_poly,
    classify_general,
    classify_star,
    find_witness,
    fixed_direction,
    full_support_in_cone,
    live,
    live_contraction_probe,
    orthogonal_to,
    rational_perron_root,
)
from superfair.errors import DegenerateLiveCone, NotPseudoMixing, NotSuperfair, StarViolated
from superfair.family import MatrixFamily, apply_word, delta_risk
from superfair.geometry import hilbert_distance
from superfair.numerics import norm1, vec_mat


def test_char_poly_two_by_two():
    # t^2 - 5t + 4 for [[2,1],[2,3]]
    assert char_poly(((Q(2), Q(1)), (Q(2), Q(3)))) == [4, -5, 1]


def test_rational_perron_root():
    assert rational_perron_root(((Q(1, 4), Q(2, 3)), (Q(3, 4), Q(1, 3)))) == 1
    assert rational_perron_root(((Q(1), Q(1)), (Q(1), Q(0)))) is None  # golden ratio


def test_fixed_direction_examples(case1, case2, x_case2):
    fd = fixed_direction(case2, range(4), "10")
    assert fd.exact and fd.x == x_case2
    fd = fixed_direction(case1, [0, 1], "0")
    assert fd.x == (Q(3, 10), Q(7, 10))
    xw = vec_mat(fd.x, case1.matrix("0"))
    assert hilbert_distance(xw, fd.x) == 0


def test_fixed_direction_float_agrees(case2, x_case2):
    fd = fixed_direction(case2.to_mode("float"), range(4), "10")
    assert not fd.exact and fd.residual < 1e-12
    assert max(abs(a - float(b)) for a, b in zip(fd.x, x_case2)) < 1e-9


def test_fixed_direction_forced_float_from_other_start(case2, x_case2):
    fd = fixed_direction(case2, range(4), "00", force_float=True)
    assert max(abs(a - float(b)) for a, b in zip(fd.x, x_case2)) < 1e-9


def test_fixed_direction_rejects(case2):
    with pytest.raises(NotPseudoMixing):
        fixed_direction(case2, range(4), "1")


def test_betting_subspace_examples(case0, case2, x_case2):
    V = betting_subspace(case0)
    assert V.dim == 1
    assert {g.vector for g in V.generators if g.depth == 0} == {(Q(-1),), (Q(1),)}
    V = betting_subspace(case2)
    assert orthogonal_to(x_case2, V)
    assert all(sum(a * b for a, b in zip(x_case2, g.vector)) == 0 for g in V.generators)


def test_betting_subspace_trivial_when_rows_stochastic():
    f = MatrixFamily.build({"0": [["1/2", "1/2"], [1, 0]], "1": [[0, 1], ["1/3", "2/3"]]})
    assert betting_subspace(f).dim == 0


def test_span_depth_bounded(case2):
    V = betting_subspace(case2)
    for dims in V.per_letter_depth_dims.values():
        assert dims[case2.dim - 1] == dims[-1]


def test_classify_examples(case0, case1, case2, case1_half, x_case2):
    assert classify_star(case0).case == "0"
    c = classify_star(case1)
    assert c.case == "1" and c.witness == () and c.delta_at_witness > 0
    c = classify_star(case2)
    assert c.case == "2" and c.fixed.x == x_case2
    assert classify_star(case1_half).case == "2"


def test_classify_json_shape(case2):
    d = classify_star(case2).to_dict()
    assert d["case"] == "2" and d["x"] == ["1/5", "1/4", "3/10", "1/4"]
    assert d["F"] == [1, 2, 3, 4] and d["certificates"]["rigorous"]


def test_classify_rejects(mixed):
    with pytest.raises(StarViolated):
        classify_star(mixed)
    with pytest.raises(NotSuperfair):
        classify_star(MatrixFamily.build({"0": [[2]], "1": [[1]]}))


def test_cone_certificate_matches_orthogonality(case1, case2):
    assert full_support_in_cone(range(4), betting_subspace(case2))[0]
    assert not full_support_in_cone(range(2), betting_subspace(case1))[0]


def test_irrational_direction_still_decided():
    # Perron root of the reduced block is irrational; the cone LP decides.
    f = MatrixFamily.build({
        "0": [["1/2", "1/2"], ["1/2", 0]],
        "1": [["1/2", "1/2"], ["1/2", 1]],
    })
    c = classify_star(f)
    assert not c.fixed.exact
    assert c.certificates["cone_certificate"] == (c.case == "2")


def test_live_examples(case1, case2, x_case2):
    V2 = betting_subspace(case2)
    assert live(case2, V2, (0, 0, 0, 0)) == 0
    assert live(case2, V2, x_case2) == 0
    V1 = betting_subspace(case1)
    for v in ((Q(1), Q(0)), (Q(2, 3), Q(5, 7))):
        assert live(case1, V1, v) == norm1(v)


def test_witness_is_shortest(case2):
    # perturb x slightly: the witness must be the shortest betting word
    V = betting_subspace(case2)
    y = (Q(1, 5), Q(1, 4), Q(1, 4), Q(3, 10))
    z = find_witness(case2, y, V)
    assert z is not None
    assert delta_risk(case2, apply_word(case2, y, z)) > 0
    for L in range(len(z)):
        for w in itertools.product(case2.alphabet, repeat=L):
            u = apply_word(case2, y, w)
            assert norm1(u) == 0 or delta_risk(case2, u) == 0


def test_probe_examples(case0, case1):
    # only the all-zero word (probability 2^-10) avoids death
    r = live_contraction_probe(case0, 10, 1000, seed=1)
    assert 0.99 <= r.fraction_contracting < 1 and r.alpha_hat == float("inf")
    r = live_contraction_probe(case1, 50, 200, seed=1)
    assert r.alpha_hat > 0
    with pytest.raises(DegenerateLiveCone):
        live_contraction_probe(MatrixFamily.build({"0": [[1]], "1": [[1]]}), 5, 5)


def test_probe_reproducible(case1):
    a = live_contraction_probe(case1, 20, 50, seed=3)
    b = live_contraction_probe(case1, 20, 50, seed=3)
    assert a == b


def test_general_single_component_matches_star(case2):
    rep = classify_general(case2, probe=False)
    assert rep.star and len(rep.components) == 1
    assert rep.components[0]["case"] == rep.classification.case == "2"


def test_general_mixed(mixed):
    rep = classify_general(mixed, probe=False)
    assert rep.mixed and {c["case"] for c in rep.components} == {"1", "2"}
    assert rep.leakage_edges == []


def test_general_leakage(leaky):
    rep = classify_general(leaky, probe_N=100, probe_trials=200, seed=0)
    first = rep.components[0]
    assert first["indices"] == [1, 2] and first["fairness"] == "SuperfairStrict"
    assert first["case"] != "2" and rep.strict_never_case2
    assert rep.leakage_edges == [(0, 2), (1, 2)]
    assert rep.probe.fraction_contracting >= 0.95
    assert math.isfinite(rep.probe.alpha_hat) or rep.probe.alpha_hat == math.inf
