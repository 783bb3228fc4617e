"""The worked example automata: sudden death, ruin, stabilization, and the
four-state automaton used for the expected-capital example.

States are named ``s0, s1, ...`` and listed in that order, so state
``s_i`` is matrix index ``i`` (label ``i+1`` in JSON output).
"""

from __future__ import annotations

from fractions import Fraction

from .betting import BettingAutomaton, to_matrix_family

NAMES = ("case0", "case1", "case2", "fig1")


def _automaton(states, alphabet, delta, gamma) -> BettingAutomaton:
    q = lambda x: Fraction(x)  # noqa: E731
    d = {s: {a: {t: q(p) for t, p in delta[s][a].items()} for a in alphabet} for s in states}
    g = {s: {a: q(gamma[s][a]) for a in alphabet} for s in states}
    return BettingAutomaton(tuple(states), states[0], tuple(alphabet), d, g, "exact")


def case0() -> BettingAutomaton:
    """One state that stakes everything on ``0`` forever."""
    return _automaton(
        ["s0"], ["0", "1"],
        {"s0": {"0": {"s0": 1}, "1": {"s0": 1}}},
        {"s0": {"0": 2, "1": 0}},
    )


def case1(p1="3/10", p2="3/5") -> BettingAutomaton:
    """``s0`` stakes all on ``0``, ``s1`` all on ``1``; moves ignore the bit."""
    p1, p2 = Fraction(p1), Fraction(p2)
    move0 = {"s0": p1, "s1": 1 - p1}
    move1 = {"s0": 1 - p2, "s1": p2}
    return _automaton(
        ["s0", "s1"], ["0", "1"],
        {"s0": {"0": move0, "1": move0}, "s1": {"0": move1, "1": move1}},
        {"s0": {"0": 2, "1": 0}, "s1": {"0": 0, "1": 2}},
    )


def case2() -> BettingAutomaton:
    rows = {
        "s0": {"s0": "1/8", "s1": "5/8", "s2": "1/4"},
        "s1": {"s0": "1/10", "s1": "1/2", "s2": "2/5"},
        "s2": {"s0": "1/4", "s2": "1/3", "s3": "5/12"},
        "s3": {"s0": "3/10", "s2": "1/5", "s3": "1/2"},
    }
    bet0 = {"s0": 2, "s1": 0, "s2": 2, "s3": 0}
    states = ["s0", "s1", "s2", "s3"]
    return _automaton(
        states, ["0", "1"],
        {s: {"0": rows[s], "1": rows[s]} for s in states},
        {s: {"0": bet0[s], "1": 2 - bet0[s]} for s in states},
    )


def fig1() -> BettingAutomaton:
    half = "1/2"
    delta = {
        "s0": {"a": {"s1": 1}, "b": {"s2": half, "s3": half}},
        "s1": {"a": {"s1": 1}, "b": {"s3": 1}},
        "s2": {"a": {"s3": half, "s2": half}, "b": {"s2": 1}},
        "s3": {"a": {"s1": half, "s0": half}, "b": {"s3": 1}},
    }
    bet_a = {"s0": 1, "s1": "3/2", "s2": "1/2", "s3": "1/2"}
    gamma = {s: {"a": Fraction(x), "b": 2 - Fraction(x)} for s, x in bet_a.items()}
    return _automaton(list(delta), ["a", "b"], delta, gamma)


def example_automaton(name: str, p1="3/10", p2="3/5") -> BettingAutomaton:
    if name == "case0":
        return case0()
    if name == "case1":
        return case1(p1, p2)
    if name == "case2":
        return case2()
    if name == "fig1":
        return fig1()
    raise KeyError(name)


def example_family(name: str, **kw):
    fam, _ = to_matrix_family(example_automaton(name, **kw))
    return fam


def block_diagonal(*families):
    """Direct sum of families over a common alphabet."""
    from .family import MatrixFamily

    alphabet = families[0].alphabet
    m = sum(f.dim for f in families)
    zero = families[0].zero()
    mats = {}
    for a in alphabet:
        M = [[zero] * m for _ in range(m)]
        off = 0
        for f in families:
            A = f.matrix(a)
            for i in range(f.dim):
                for j in range(f.dim):
                    M[off + i][off + j] = A[i][j]
            off += f.dim
        mats[a] = M
    return MatrixFamily.build(mats, families[0].mode, alphabet)
