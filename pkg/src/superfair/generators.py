"""Random rational families and automata for property tests and benchmarks.

Each basis row is drawn across all letters at once and rescaled so its
letter-sum of norms is exactly ``|A|`` (fair) or a random value below it
(superfair). Entries are small-denominator rationals so exact arithmetic
stays cheap.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .betting import BettingAutomaton
from .family import MatrixFamily


def _weights(rng: random.Random, n: int, density: float, hi: int = 6) -> list:
    w = [rng.randint(1, hi) if rng.random() < density else 0 for _ in range(n)]
    if not any(w):
        w[rng.randrange(n)] = rng.randint(1, hi)
    return w


def random_family(
    rng: random.Random,
    m: int,
    k: int = 2,
    fair: bool = True,
    density: float = 0.6,
    alphabet=None,
) -> MatrixFamily:
    """Random superfair family; ``fair=False`` shrinks some rows strictly."""
    alphabet = tuple(alphabet or (str(a) for a in range(k)))
    mats = {a: [[Fraction(0)] * m for _ in range(m)] for a in alphabet}
    for i in range(m):
        w = _weights(rng, k * m, density)
        total = Fraction(k)
        if not fair and rng.random() < 0.5:
            total = Fraction(rng.randint(1, 4 * k - 1), 4)
        s = sum(w)
        for t, x in enumerate(w):
            a, j = divmod(t, m)
            mats[alphabet[a]][i][j] = total * x / s
    return MatrixFamily.build(mats, "exact", alphabet)


def stochastic_family(rng: random.Random, m: int, k: int = 2, density: float = 0.6) -> MatrixFamily:
    """Every row of every matrix sums to 1: nothing is ever bet."""
    alphabet = tuple(str(a) for a in range(k))
    mats = {}
    for a in alphabet:
        rows = []
        for _ in range(m):
            w = _weights(rng, m, density)
            rows.append([Fraction(x, sum(w)) for x in w])
        mats[a] = rows
    return MatrixFamily.build(mats, "exact", alphabet)


def random_automaton(
    rng: random.Random,
    n_states: int,
    k: int = 2,
    density: float = 0.6,
    idle: float = 0.0,
) -> BettingAutomaton:
    """Random valid automaton; with probability ``idle`` a state bets 1 on every symbol."""
    states = tuple(f"s{i}" for i in range(n_states))
    alphabet = tuple(str(a) for a in range(k))
    delta, gamma = {}, {}
    for s in states:
        delta[s], gamma[s] = {}, {}
        for a in alphabet:
            w = _weights(rng, n_states, density)
            delta[s][a] = {t: Fraction(x, sum(w)) for t, x in zip(states, w) if x}
        if rng.random() < idle:
            bets = [Fraction(1)] * k
        else:
            w = [rng.randint(0, 4) for _ in range(k)]
            if not any(w):
                w = [1] * k
            bets = [Fraction(k * x, sum(w)) for x in w]
        for a, g in zip(alphabet, bets):
            gamma[s][a] = g
    return BettingAutomaton(states, states[0], alphabet, delta, gamma, "exact")


def random_positive_matrix(rng: random.Random, n: int, hi: int = 9) -> tuple:
    return tuple(tuple(Fraction(rng.randint(1, hi), rng.randint(1, 4)) for _ in range(n)) for _ in range(n))


def random_vector(rng: random.Random, m: int, support=None, hi: int = 9) -> tuple:
    idx = range(m) if support is None else support
    v = [Fraction(0)] * m
    for i in idx:
        v[i] = Fraction(rng.randint(1, hi), rng.randint(1, 4))
    return tuple(v)


def random_word(rng: random.Random, f: MatrixFamily, length: int) -> tuple:
    return tuple(rng.choice(f.alphabet) for _ in range(length))
