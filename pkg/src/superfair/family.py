"""Superfair matrix families and the martingale quantities built on them.

A family assigns a non-negative ``m x m`` matrix to every letter of an
alphabet. Reading a word ``w = a1...ak`` multiplies a row vector by
``M_a1 ... M_ak``; the norm of the result is the capital, its log is
``L^v(w)``, and ``delta_risk`` measures the one-step Jensen gap.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import Malformed, NotNonNegative, UnknownSymbol, ZeroVector
from .numerics import (
    EPS_CMP,
    check_mode,
    convert,
    exact_log,
    format_scalar,
    identity,
    mat_mul,
    norm1,
    parse_scalar,
    support,
    vec_mat,
)

Word = tuple


@dataclass(frozen=True)
class MatrixFamily:
    """Immutable family ``{M_a}`` over an ordered alphabet."""

    alphabet: tuple
    matrices: tuple
    mode: str = "exact"
    eps: float = field(default=EPS_CMP, compare=False)

    def __post_init__(self):
        check_mode(self.mode)
        if not self.alphabet:
            raise Malformed("alphabet must not be empty")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise Malformed("alphabet symbols must be distinct")
        if len(self.matrices) != len(self.alphabet):
            raise Malformed("one matrix per alphabet symbol is required")
        m = len(self.matrices[0])
        if m == 0:
            raise Malformed("dimension must be at least 1")
        for a, M in zip(self.alphabet, self.matrices):
            if len(M) != m or any(len(row) != m for row in M):
                raise Malformed(f"matrix for {a!r} is not {m}x{m}")
            if any(x < 0 for row in M for x in row):
                raise NotNonNegative(f"matrix for {a!r} has a negative entry")

    @classmethod
    def build(cls, matrices: dict, mode: str = "exact", alphabet=None, eps: float = EPS_CMP):
        """Create a family from ``{symbol: rows}`` with any numeric entries."""
        alphabet = tuple(alphabet) if alphabet is not None else tuple(matrices)
        missing = [a for a in alphabet if a not in matrices]
        if missing:
            raise Malformed(f"no matrix for symbols {missing}")
        mats = tuple(
            tuple(tuple(parse_scalar(x, mode) for x in row) for row in matrices[a])
            for a in alphabet
        )
        return cls(alphabet, mats, mode, eps)

    @property
    def dim(self) -> int:
        return len(self.matrices[0])

    @property
    def k(self) -> int:
        return len(self.alphabet)

    @cached_property
    def _index(self) -> dict:
        return {a: i for i, a in enumerate(self.alphabet)}

    def letter(self, a) -> int:
        try:
            return self._index[a]
        except KeyError:
            raise UnknownSymbol(f"symbol {a!r} not in alphabet {list(self.alphabet)}") from None

    def matrix(self, a):
        return self.matrices[self.letter(a)]

    def letters(self, w) -> list:
        """Word (string or sequence of symbols) -> list of letter indices."""
        return [self.letter(a) for a in w]

    @cached_property
    def arrays(self) -> np.ndarray:
        """Float copy of the matrices, shape ``(k, m, m)``."""
        return np.array([[[float(x) for x in row] for row in M] for M in self.matrices])

    @cached_property
    def row_masks(self) -> tuple:
        """``row_masks[a][i]``: bitmask of the support of row ``i`` of ``M_a``."""
        out = []
        for M in self.matrices:
            masks = []
            for row in M:
                bits = 0
                for j in support(row, self.eps):
                    bits |= 1 << j
                masks.append(bits)
            out.append(tuple(masks))
        return tuple(out)

    def zero(self):
        return Fraction(0) if self.mode == "exact" else 0.0

    def one(self):
        return Fraction(1) if self.mode == "exact" else 1.0

    def vector(self, values) -> tuple:
        v = tuple(parse_scalar(x, self.mode) if isinstance(x, str) else convert(x, self.mode) for x in values)
        if len(v) != self.dim:
            raise Malformed(f"vector has length {len(v)}, expected {self.dim}")
        if any(x < 0 for x in v):
            raise NotNonNegative("vector has a negative entry")
        return v

    def to_mode(self, mode: str) -> "MatrixFamily":
        if mode == self.mode:
            return self
        mats = tuple(tuple(tuple(convert(x, mode) for x in row) for row in M) for M in self.matrices)
        return MatrixFamily(self.alphabet, mats, mode, self.eps)

    def restrict(self, indices) -> "MatrixFamily":
        """Subfamily ``{M_a^[K x K]}`` on the sorted index set ``K``."""
        idx = sorted(indices)
        mats = tuple(tuple(tuple(M[i][j] for j in idx) for i in idx) for M in self.matrices)
        return MatrixFamily(self.alphabet, mats, self.mode, self.eps)

    def is_close(self, x, y) -> bool:
        if self.mode == "exact":
            return x == y
        return abs(x - y) <= self.eps * max(1.0, abs(x), abs(y))

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "alphabet": list(self.alphabet),
            "dim": self.dim,
            "mode": self.mode,
            "matrices": {
                a: [[format_scalar(x) for x in row] for row in M]
                for a, M in zip(self.alphabet, self.matrices)
            },
        }

    @classmethod
    def from_dict(cls, data: dict, mode: str | None = None) -> "MatrixFamily":
        if not isinstance(data, dict) or "matrices" not in data or "alphabet" not in data:
            raise Malformed("family JSON needs 'alphabet' and 'matrices'")
        mode = check_mode(mode or data.get("mode", "exact"))
        alphabet = data["alphabet"]
        if not isinstance(alphabet, list) or not all(isinstance(a, str) for a in alphabet):
            raise Malformed("'alphabet' must be a list of strings")
        mats = data["matrices"]
        if not isinstance(mats, dict):
            raise Malformed("'matrices' must map symbols to row lists")
        for a in alphabet:
            M = mats.get(a)
            if not isinstance(M, list) or not all(isinstance(r, list) for r in M):
                raise Malformed(f"matrix for {a!r} must be a list of rows")
        fam = cls.build(mats, mode, alphabet)
        if "dim" in data and data["dim"] != fam.dim:
            raise Malformed(f"declared dim {data['dim']} but matrices are {fam.dim}x{fam.dim}")
        return fam

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def load(cls, path, mode: str | None = None) -> "MatrixFamily":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise Malformed(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data, mode)


def format_word(f: MatrixFamily, w) -> str:
    if all(len(a) == 1 for a in f.alphabet):
        return "".join(w)
    return " ".join(w)


def parse_word(f: MatrixFamily, text: str) -> Word:
    if all(len(a) == 1 for a in f.alphabet):
        w = tuple(text)
    else:
        w = tuple(text.split())
    f.letters(w)
    return w


# -- fairness ----------------------------------------------------------------

@dataclass(frozen=True)
class FairnessVerdict:
    kind: str  # "Fair" | "SuperfairStrict" | "NotSuperfair"
    witnesses: tuple  # (basis index, sum over letters of the row norms)

    @property
    def superfair(self) -> bool:
        return self.kind != "NotSuperfair"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "witnesses": [{"index": i + 1, "sum": format_scalar(s)} for i, s in self.witnesses],
        }


def row_sums(f: MatrixFamily) -> tuple:
    """``sum_a norm1(e_i M_a)`` for every basis index ``i``."""
    return tuple(
        sum((norm1(M[i]) for M in f.matrices), f.zero()) for i in range(f.dim)
    )


def validate(f: MatrixFamily) -> FairnessVerdict:
    """Classify the family as fair, strictly superfair or not superfair.

    Checking the canonical basis suffices: the averaged norm is linear on
    the non-negative cone.
    """
    k = f.k
    sums = row_sums(f)
    over, under = [], []
    for i, s in enumerate(sums):
        if f.is_close(s, k):
            continue
        (over if s > k else under).append((i, s))
    if over:
        return FairnessVerdict("NotSuperfair", tuple(over))
    if under:
        return FairnessVerdict("SuperfairStrict", tuple(under))
    return FairnessVerdict("Fair", tuple(enumerate(sums)))


# -- words -------------------------------------------------------------------

def word_matrix(f: MatrixFamily, w) -> tuple:
    """``M_w``; the empty word gives the identity."""
    M = identity(f.dim, f.mode)
    for a in f.letters(w):
        M = mat_mul(M, f.matrices[a])
    return M


def apply_word(f: MatrixFamily, v, w) -> tuple:
    """``v M_w`` computed letter by letter (no matrix products)."""
    for a in f.letters(w):
        v = vec_mat(v, f.matrices[a])
    return v


def log_capital(f: MatrixFamily, v, w) -> float:
    """``L^v(w) = ln norm1(v M_w)``; ``-inf`` when the product vanishes."""
    return exact_log(norm1(apply_word(f, v, w)))


def step_norms(f: MatrixFamily, u) -> tuple:
    return tuple(norm1(vec_mat(u, M)) for M in f.matrices)


def delta_risk(f: MatrixFamily, u) -> float:
    """Capped one-step risk ``min(1, ln|u| - mean_a ln|u M_a|)``.

    Equals 1 whenever some letter annihilates ``u``; depends only on the
    direction of ``u``.
    """
    n = norm1(u)
    if n == 0:
        raise ZeroVector("risk is undefined at the zero vector")
    norms = step_norms(f, u)
    if any(x == 0 for x in norms):
        return 1.0
    if f.mode == "exact" and all(x == n for x in norms):
        return 0.0
    # logs of exact ratios keep the value scale invariant in exact mode
    gap = -sum(exact_log(x / n) for x in norms) / f.k
    return min(1.0, gap)


def is_non_betting_step(f: MatrixFamily, u) -> bool:
    """True iff ``delta_risk(u) == 0``, i.e. every letter preserves the norm.

    For superfair families Jensen's gap vanishes exactly when all
    ``|u M_a|`` equal ``|u|``; this avoids logarithms altogether.
    """
    n = norm1(u)
    return all(f.is_close(x, n) for x in step_norms(f, u))


class RiskSum(NamedTuple):
    value: float
    dead: bool  # some strict prefix product was the zero vector


def cumulative_risk(f: MatrixFamily, v, w) -> RiskSum:
    """``Gamma^v(w)``: sum of ``delta_risk(v M_w')`` over strict prefixes ``w'``.

    Stops at the first prefix whose product is zero and flags it.
    """
    if norm1(v) == 0:
        raise ZeroVector("cumulative risk needs a non-zero start vector")
    total = 0.0
    u = v
    for a in f.letters(w):
        if norm1(u) == 0:
            return RiskSum(total, True)
        total += delta_risk(f, u)
        u = vec_mat(u, f.matrices[a])
    return RiskSum(total, False)


def stationary_log_increment(f: MatrixFamily, u) -> float:
    """Mean over letters of ``ln|u M_a| - ln|u|`` (``-inf`` if a letter kills u)."""
    n = norm1(u)
    vals = [exact_log(x) - exact_log(n) for x in step_norms(f, u)]
    return sum(vals) / f.k if all(math.isfinite(x) for x in vals) else -math.inf
