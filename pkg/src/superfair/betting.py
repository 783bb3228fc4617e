"""Probabilistic betting automata and their capital.

An automaton in state ``s`` reading ``a`` multiplies its capital by
``gamma(s, a)`` and moves to a random next state drawn from
``delta(s, a)``. Its expected capital along a word is the norm of
``e_{s0} M_w`` for the family ``M_a = D_a T_a``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidAutomaton, Malformed, NotNonNegative, SequenceTooShort, UnknownSymbol
from .family import MatrixFamily, apply_word
from .numerics import EPS_CMP, check_mode, format_scalar, norm1, parse_scalar, unit

MC_CHUNK = 10_000


@dataclass(frozen=True)
class BettingAutomaton:
    states: tuple
    initial: str
    alphabet: tuple
    delta: dict  # state -> symbol -> {state: prob}
    gamma: dict  # state -> symbol -> bet
    mode: str = "exact"

    @property
    def k(self) -> int:
        return len(self.alphabet)

    def to_dict(self) -> dict:
        return {
            "states": list(self.states),
            "initial": self.initial,
            "alphabet": list(self.alphabet),
            "mode": self.mode,
            "delta": {
                s: {a: {t: format_scalar(p) for t, p in self.delta[s][a].items()} for a in self.alphabet}
                for s in self.states
            },
            "gamma": {s: {a: format_scalar(self.gamma[s][a]) for a in self.alphabet} for s in self.states},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict, mode: str | None = None) -> "BettingAutomaton":
        for key in ("states", "initial", "alphabet", "delta", "gamma"):
            if key not in data:
                raise Malformed(f"automaton JSON is missing {key!r}")
        mode = check_mode(mode or data.get("mode", "exact"))
        states = tuple(str(s) for s in data["states"])
        alphabet = tuple(str(a) for a in data["alphabet"])
        if not states or not alphabet:
            raise Malformed("states and alphabet must be non-empty")
        if len(set(states)) != len(states) or len(set(alphabet)) != len(alphabet):
            raise Malformed("duplicate state or symbol names")
        if data["initial"] not in states:
            raise Malformed(f"initial state {data['initial']!r} is not a state")
        delta, gamma = {}, {}
        for s in states:
            try:
                drow, grow = data["delta"][s], data["gamma"][s]
            except (KeyError, TypeError):
                raise Malformed(f"missing delta/gamma entry for state {s!r}") from None
            delta[s], gamma[s] = {}, {}
            for a in alphabet:
                if a not in drow or a not in grow:
                    raise Malformed(f"missing delta/gamma entry for ({s!r}, {a!r})")
                dist = {}
                for t, p in drow[a].items():
                    if t not in states:
                        raise UnknownSymbol(f"delta({s!r}, {a!r}) targets unknown state {t!r}")
                    dist[t] = parse_scalar(p, mode)
                    if dist[t] < 0:
                        raise NotNonNegative(f"negative probability in delta({s!r}, {a!r})")
                delta[s][a] = dist
                gamma[s][a] = parse_scalar(grow[a], mode)
                if gamma[s][a] < 0:
                    raise NotNonNegative(f"negative bet gamma({s!r}, {a!r})")
        return cls(states, data["initial"], alphabet, delta, gamma, mode)

    @classmethod
    def load(cls, path, mode: str | None = None) -> "BettingAutomaton":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise Malformed(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data, mode)


def _close(x, y, mode: str) -> bool:
    return x == y if mode == "exact" else abs(x - y) <= EPS_CMP * max(1.0, abs(x), abs(y))


def validate_automaton(b: BettingAutomaton) -> list:
    """Every violated invariant as a readable message; empty when valid."""
    problems = []
    for s in b.states:
        for a in b.alphabet:
            total = sum(b.delta[s][a].values())
            if not _close(total, 1, b.mode):
                problems.append(f"delta({s}, {a}) sums to {format_scalar(total)}, not 1")
            if any(p > 1 for p in b.delta[s][a].values()):
                problems.append(f"delta({s}, {a}) has a probability above 1")
        bets = sum(b.gamma[s][a] for a in b.alphabet)
        if not _close(bets, b.k, b.mode):
            problems.append(f"bets at {s} sum to {format_scalar(bets)}, not {b.k}")
    return problems


def require_valid(b: BettingAutomaton) -> None:
    problems = validate_automaton(b)
    if problems:
        raise InvalidAutomaton("; ".join(problems))


def to_matrix_family(b: BettingAutomaton) -> tuple:
    """``(family, v0)`` with ``M_a(s, t) = gamma(s, a) * delta(s, a)(t)`` and ``v0 = e_{s0}``."""
    require_valid(b)
    pos = {s: i for i, s in enumerate(b.states)}
    zero = 0 if b.mode == "exact" else 0.0
    mats = {}
    for a in b.alphabet:
        M = [[zero] * len(b.states) for _ in b.states]
        for s in b.states:
            for t, p in b.delta[s][a].items():
                M[pos[s]][pos[t]] += b.gamma[s][a] * p
        mats[a] = M
    fam = MatrixFamily.build(mats, b.mode, b.alphabet)
    return fam, unit(pos[b.initial], len(b.states), b.mode)


def _take(X, n: int) -> tuple:
    if hasattr(X, "take"):
        return X.take(n)
    w = tuple(X)[:n]
    if len(w) < n:
        raise SequenceTooShort(f"sequence has {len(w)} symbols, {n} needed")
    return w


def expected_capital(b: BettingAutomaton, X, n: int):
    """``E[C_n]`` along ``X[1..n]``, exact in exact mode."""
    fam, v0 = to_matrix_family(b)
    return norm1(apply_word(fam, v0, _take(X, n)))


@dataclass(frozen=True)
class CapitalEstimate:
    mean: float
    std_error: float
    trials: int
    seed: int

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std_error": self.std_error, "trials": self.trials, "seed": self.seed}


def _merge(a: tuple, b: tuple) -> tuple:
    """Combine ``(count, mean, M2)`` summaries (Chan et al.)."""
    na, ma, qa = a
    nb, mb, qb = b
    if na == 0:
        return b
    if nb == 0:
        return a
    n = na + nb
    d = mb - ma
    return n, ma + d * nb / n, qa + qb + d * d * na * nb / n


def _pairwise(parts: list) -> tuple:
    while len(parts) > 1:
        parts = [_merge(parts[i], parts[i + 1]) if i + 1 < len(parts) else parts[i]
                 for i in range(0, len(parts), 2)]
    return parts[0]


def _simulate_chunk(rng, b: BettingAutomaton, word: tuple, count: int) -> tuple:
    pos = {s: i for i, s in enumerate(b.states)}
    S = len(b.states)
    state = np.full(count, pos[b.initial])
    capital = np.ones(count)
    for a in word:
        bets = np.array([float(b.gamma[s][a]) for s in b.states])
        probs = np.zeros((S, S))
        for s in b.states:
            for t, p in b.delta[s][a].items():
                probs[pos[s], pos[t]] += float(p)
        cum = np.cumsum(probs, axis=1)
        cum[:, -1] = 1.0
        capital *= bets[state]
        u = rng.random(count)
        state = (u[:, None] >= cum[state]).sum(axis=1)
    mean = float(capital.mean())
    return count, mean, float(((capital - mean) ** 2).sum())


def mc_capital(b: BettingAutomaton, X, n: int, trials: int, seed: int = 0) -> CapitalEstimate:
    """Monte Carlo estimate of ``E[C_n]``.

    Trials are cut into fixed-size chunks, each with its own Philox stream
    spawned from ``seed``; chunk summaries are merged pairwise, so the result
    is reproducible and does not depend on evaluation order.
    """
    require_valid(b)
    word = _take(X, n)
    for a in word:
        if a not in b.alphabet:
            raise UnknownSymbol(f"symbol {a!r} not in alphabet")
    sizes = [MC_CHUNK] * (trials // MC_CHUNK)
    if trials % MC_CHUNK:
        sizes.append(trials % MC_CHUNK)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    parts = [
        _simulate_chunk(np.random.Generator(np.random.Philox(ss)), b, word, c)
        for ss, c in zip(seeds, sizes)
    ]
    count, mean, m2 = _pairwise(parts)
    se = math.sqrt(m2 / (count - 1)) / math.sqrt(count) if count > 1 else 0.0
    return CapitalEstimate(mean, se, count, seed)


def automaton_or_family(data: dict):
    """Tell the two JSON schemas apart by their keys."""
    if "delta" in data and "gamma" in data:
        return "automaton"
    if "matrices" in data:
        return "family"
    raise Malformed("JSON is neither a matrix family nor a betting automaton")

