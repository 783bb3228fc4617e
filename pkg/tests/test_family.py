import json
import math
from fractions import Fraction as Q

import pytest

from superfair.errors import Malformed, NotNonNegative, UnknownSymbol, ZeroVector
from superfair.family import (
    MatrixFamily,
    cumulative_risk,
    delta_risk,
    is_non_betting_step,
    log_capital,
    validate,
    word_matrix,
)
from superfair.numerics import identity


def test_validate_examples(case0, case1):
    assert validate(case0).kind == "Fair"
    assert validate(case1).kind == "Fair"
    bad = MatrixFamily.build({"0": [[2]], "1": [[1]]})
    v = validate(bad)
    assert v.kind == "NotSuperfair"
    assert v.witnesses == ((0, Q(3)),)


def test_validate_strict():
    f = MatrixFamily.build({"0": [[1]], "1": [["1/2"]]})
    v = validate(f)
    assert v.kind == "SuperfairStrict" and v.witnesses == ((0, Q(3, 2)),)


def test_word_matrix_examples(case2, case1_half):
    assert word_matrix(case2, "10") == (
        (0, 0, 0, 0),
        (Q(9, 20), Q(1, 4), Q(19, 30), Q(2, 3)),
        (0, 0, 0, 0),
        (Q(7, 20), Q(3, 4), Q(17, 30), Q(1, 3)),
    )
    assert word_matrix(case2, "") == identity(4)
    assert word_matrix(case1_half, "00") == ((1, 1), (0, 0))


def test_word_matrix_unknown_symbol(case2):
    with pytest.raises(UnknownSymbol):
        word_matrix(case2, "2")


def test_log_capital_examples(case0, case2):
    assert log_capital(case0, (Q(1),), "0") == pytest.approx(math.log(2))
    assert log_capital(case0, (Q(1),), "01") == -math.inf
    assert log_capital(case2, (Q(1, 4),) * 4, "") == 0


def test_delta_risk_examples(case0, case1, case2, x_case2):
    assert delta_risk(case2, x_case2) == 0
    assert delta_risk(case0, (Q(1),)) == 1
    assert delta_risk(case1, (Q(3, 10), Q(7, 10))) == pytest.approx(-0.5 * math.log(0.84), abs=1e-12)
    with pytest.raises(ZeroVector):
        delta_risk(case2, (0, 0, 0, 0))


def test_delta_risk_scale_invariant(case1):
    u = (Q(1, 3), Q(1, 2))
    assert delta_risk(case1, u) == pytest.approx(delta_risk(case1, tuple(5 * t for t in u)), abs=1e-14)


def test_non_betting_step_matches_delta(case2, x_case2):
    assert is_non_betting_step(case2, x_case2)
    assert not is_non_betting_step(case2, (1, 0, 0, 0))


def test_cumulative_risk_examples(case1, case2, x_case2, case0):
    assert cumulative_risk(case1, (Q(3, 10), Q(7, 10)), "") == (0.0, False)
    val, dead = cumulative_risk(case1, (Q(3, 10), Q(7, 10)), "0")
    assert val == pytest.approx(-0.5 * math.log(0.84)) and not dead
    assert cumulative_risk(case2, x_case2, "0110100110").value == 0
    val, dead = cumulative_risk(case0, (Q(1),), "010")
    assert dead and val == 2.0


def test_json_roundtrip(case2):
    text = case2.dumps()
    data = json.loads(text)
    assert data["matrices"]["0"][0] == ["1/4", "5/4", "1/2", "0"]
    assert MatrixFamily.from_dict(data) == case2


def test_json_float_mode(case2):
    f = MatrixFamily.from_dict(json.loads(case2.dumps()), mode="float")
    assert f.mode == "float" and f.matrices[0][0][1] == 1.25


@pytest.mark.parametrize(
    "data,err",
    [
        ({"alphabet": ["0"], "matrices": {"0": [[1, 2]]}}, Malformed),
        ({"alphabet": ["0"], "matrices": {"0": [[-1]]}}, NotNonNegative),
        ({"alphabet": ["0", "1"], "matrices": {"0": [[1]]}}, Malformed),
        ({"alphabet": ["0"], "matrices": {"0": []}}, Malformed),
        ({"alphabet": ["0"], "dim": 2, "matrices": {"0": [[1]]}}, Malformed),
        ({"matrices": {}}, Malformed),
    ],
)
def test_json_rejections(data, err):
    with pytest.raises(err):
        MatrixFamily.from_dict(data)
