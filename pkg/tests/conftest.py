from fractions import Fraction as Q

import pytest

from superfair.examples import block_diagonal, example_automaton, example_family


@pytest.fixture(scope="session")
def case0():
    return example_family("case0")


@pytest.fixture(scope="session")
def case1():
    return example_family("case1")


@pytest.fixture(scope="session")
def case1_half():
    return example_family("case1", p1="1/2", p2="1/2")


@pytest.fixture(scope="session")
def case2():
    return example_family("case2")


@pytest.fixture(scope="session")
def fig1():
    return example_automaton("fig1")


@pytest.fixture(scope="session")
def x_case2():
    return (Q(1, 5), Q(1, 4), Q(3, 10), Q(1, 4))


@pytest.fixture(scope="session")
def mixed(case1, case2):
    return block_diagonal(case1, case2)


@pytest.fixture(scope="session")
def leaky():
    """Two betting states leaking into a sink that never bets."""
    from superfair.family import MatrixFamily

    h = Q(1, 2)
    return MatrixFamily.build({
        "0": [[h, 1, h], [0, 0, 0], [0, 0, 1]],
        "1": [[0, 0, 0], [h, 1, h], [0, 0, 1]],
    })
