"""Scalars, non-negative vectors and matrices, elimination and a small exact LP.

Two scalar modes coexist:

* ``"exact"``: :class:`fractions.Fraction` everywhere, no rounding at all;
* ``"float"``: Python floats with a relative comparison tolerance
  ``EPS_CMP``.

Vectors are tuples of scalars, matrices are tuples of row tuples. Indices
are 0-based in code; anything user facing (JSON, DOT) converts to 1-based
with :func:`labels`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import DegenerateSelection, Malformed, NumericalFailure

Scalar = Union[Fraction, float]
Vector = tuple
Matrix = tuple
IndexSet = frozenset

EPS_CMP = 1e-9
EPS_RANK = 1e-10
MODES = ("exact", "float")


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise Malformed(f"unknown mode {mode!r}, expected 'exact' or 'float'")
    return mode


def is_exact(values: Iterable) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in values)


def parse_scalar(value, mode: str = "exact") -> Scalar:
    """Parse ``"5/4"``, ``"0.25"``, ints or floats into a scalar of ``mode``."""
    if isinstance(value, bool):
        raise Malformed(f"not a number: {value!r}")
    try:
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ValueError
            q = Fraction(repr(value))
        elif isinstance(value, (int, Fraction)):
            q = Fraction(value)
        elif isinstance(value, str):
            q = Fraction(value.strip())
        else:
            raise ValueError
    except (ValueError, ZeroDivisionError):
        raise Malformed(f"not a number: {value!r}") from None
    return float(q) if mode == "float" else q


def convert(x: Scalar, mode: str) -> Scalar:
    if mode == "float":
        return float(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def format_scalar(x: Scalar) -> str:
    if isinstance(x, (int, Fraction)):
        return str(Fraction(x))
    return repr(float(x))


def exact_log(x: Scalar) -> float:
    """Natural log that never rounds a huge or tiny rational to 0 first."""
    if x < 0:
        raise ValueError("log of a negative number")
    if x == 0:
        return -math.inf
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


def labels(indices: Iterable[int]) -> list[int]:
    """0-based index set -> sorted 1-based list for display."""
    return [i + 1 for i in sorted(indices)]


# -- vectors -----------------------------------------------------------------

def zeros(m: int, mode: str = "exact") -> Vector:
    z = Fraction(0) if mode == "exact" else 0.0
    return (z,) * m


def unit(i: int, m: int, mode: str = "exact") -> Vector:
    v = list(zeros(m, mode))
    v[i] = Fraction(1) if mode == "exact" else 1.0
    return tuple(v)


def indicator(E: Iterable[int], m: int, mode: str = "exact") -> Vector:
    v = list(zeros(m, mode))
    for i in E:
        v[i] = Fraction(1) if mode == "exact" else 1.0
    return tuple(v)


def norm1(v: Sequence[Scalar]) -> Scalar:
    """Sum of the entries; equals the l1 norm for non-negative vectors."""
    total = Fraction(0) if is_exact(v) else 0.0
    for x in v:
        total += x
    return total


def support(v: Sequence[Scalar], eps: float = EPS_CMP) -> IndexSet:
    """Indices of positive entries.

    Float vectors use a relative threshold: ``v[i] > eps * norm1(v)``.
    """
    if is_exact(v):
        return frozenset(i for i, x in enumerate(v) if x > 0)
    thr = eps * sum(abs(x) for x in v)
    return frozenset(i for i, x in enumerate(v) if x > thr)


def normalize(v: Sequence[Scalar]) -> Vector:
    n = norm1(v)
    if n == 0:
        raise NumericalFailure("cannot normalize the zero vector")
    return tuple(x / n for x in v)


def dot(u: Sequence[Scalar], v: Sequence[Scalar]) -> Scalar:
    total = Fraction(0) if is_exact(u) and is_exact(v) else 0.0
    for a, b in zip(u, v):
        if a and b:
            total += a * b
    return total


def add(u, v) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def sub(u, v) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def scale(c, v) -> Vector:
    return tuple(c * x for x in v)


# -- matrices ----------------------------------------------------------------

def identity(m: int, mode: str = "exact") -> Matrix:
    return tuple(unit(i, m, mode) for i in range(m))


def vec_mat(v: Sequence[Scalar], M: Matrix) -> Vector:
    """Row vector times matrix."""
    k = len(M[0]) if M else 0
    out = list(zeros(k, "exact" if is_exact(v) else "float"))
    for vi, row in zip(v, M):
        if vi:
            for j, mij in enumerate(row):
                if mij:
                    out[j] += vi * mij
    return tuple(out)


def mat_vec(M: Matrix, u: Sequence[Scalar]) -> Vector:
    """Matrix times column vector."""
    return tuple(dot(row, u) for row in M)


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    return tuple(vec_mat(row, B) for row in A)


def transpose(M: Matrix) -> Matrix:
    return tuple(zip(*M))


def submatrix(M: Matrix, rowset: Iterable[int], colset: Iterable[int]) -> Matrix:
    rows, cols = sorted(set(rowset)), sorted(set(colset))
    if not rows or not cols:
        raise DegenerateSelection("row and column selections must be non-empty")
    n, k = len(M), len(M[0])
    if rows[0] < 0 or rows[-1] >= n or cols[0] < 0 or cols[-1] >= k:
        raise DegenerateSelection("selection out of range")
    return tuple(tuple(M[i][j] for j in cols) for i in rows)


def is_nonnegative(M: Matrix) -> bool:
    return all(x >= 0 for row in M for x in row)


# -- elimination -------------------------------------------------------------

def rref(rows: Sequence[Sequence[Scalar]], eps: float = EPS_RANK):
    """Reduced row echelon form.

    Returns ``(basis_rows, pivot_columns)``. Exact inputs are eliminated
    exactly; float inputs use partial pivoting and treat entries below
    ``eps * max|entry|`` as zero.
    """
    rows = [list(r) for r in rows]
    if not rows:
        return [], []
    ncols = len(rows[0])
    exact = all(is_exact(r) for r in rows)
    if exact:
        rows = [[Fraction(x) for x in r] for r in rows]
        thr = 0
    else:
        rows = [[float(x) for x in r] for r in rows]
        big = max((abs(x) for r in rows for x in r), default=0.0)
        thr = eps * big
    pivots = []
    r = 0
    for c in range(ncols):
        if r == len(rows):
            break
        if exact:
            p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        else:
            p = max(range(r, len(rows)), key=lambda i: abs(rows[i][c]))
            if abs(rows[p][c]) <= thr:
                p = None
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][c]
        rows[r] = [x / piv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
                if not exact:
                    rows[i][c] = 0.0
        pivots.append(c)
        r += 1
    return [tuple(row) for row in rows[:r]], pivots


def row_space_basis(vectors: Sequence[Sequence[Scalar]], eps: float = EPS_RANK) -> list:
    """A basis (in reduced echelon form) of the span of ``vectors``."""
    basis, _ = rref(vectors, eps)
    return basis


def rank(vectors, eps: float = EPS_RANK) -> int:
    return len(row_space_basis(vectors, eps))


def nullspace(rows: Sequence[Sequence[Scalar]], ncols: int, eps: float = EPS_RANK) -> list:
    """Basis of ``{x : A x = 0}`` for ``A`` given by its rows."""
    R, piv = rref(rows, eps) if rows else ([], [])
    exact = all(is_exact(r) for r in rows)
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    out = []
    for f in (j for j in range(ncols) if j not in piv):
        x = [zero] * ncols
        x[f] = one
        for row, p in zip(R, piv):
            x[p] = -row[f]
        out.append(tuple(x))
    return out


def solve_square(A: Sequence[Sequence[Scalar]], b: Sequence[Scalar]) -> Vector:
    """Solve ``A x = b`` for a non-singular square ``A``."""
    n = len(A)
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    R, piv = rref(aug)
    if piv != list(range(n)):
        raise NumericalFailure("singular system")
    return tuple(row[n] for row in R)


# -- linear programming ------------------------------------------------------

def _simplex_max(c, A, b, exact: bool, tol: float = 1e-12):
    """Maximise ``c.y`` s.t. ``A y <= b``, ``y >= 0`` with ``b >= 0``.

    Dense tableau, Bland's rule (no cycling). The origin is feasible so no
    phase one is needed.
    """
    nrows, n = len(A), len(c)
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    width = n + nrows
    T = []
    for i in range(nrows):
        slack = [zero] * nrows
        slack[i] = one
        T.append(list(A[i]) + slack + [b[i]])
    # objective row holds reduced costs c_j - z_j and -z in the last column
    obj = list(c) + [zero] * nrows + [zero]
    basis = [n + i for i in range(nrows)]
    eps = 0 if exact else tol
    for _ in range(100_000):
        enter = next((j for j in range(width) if obj[j] > eps), None)
        if enter is None:
            break
        leave, best = None, None
        for i in range(nrows):
            a = T[i][enter]
            if a > eps:
                key = (T[i][-1] / a, basis[i])
                if best is None or key < best:
                    best, leave = key, i
        if leave is None:
            raise NumericalFailure("unbounded LP (box constraints violated)")
        prow = T[leave]
        piv = prow[enter]
        prow = [x / piv for x in prow]
        T[leave] = prow
        for i in range(nrows):
            if i != leave:
                f = T[i][enter]
                if f:
                    T[i] = [x - f * y for x, y in zip(T[i], prow)]
        f = obj[enter]
        obj = [x - f * y for x, y in zip(obj, prow)]
        basis[leave] = enter
    else:
        raise NumericalFailure("simplex iteration limit reached")
    y = [zero] * n
    for i, bv in enumerate(basis):
        if bv < n:
            y[bv] = T[i][-1]
    return y


def lp_max(objective, cap, orth_basis, eps: float = EPS_RANK):
    """Maximise ``objective . s`` over ``0 <= s <= cap`` with ``s . b = 0``.

    The equality constraints are eliminated through the reduced echelon
    form of ``orth_basis`` so every remaining constraint has a
    non-negative right-hand side.

    Returns
    -------
    (value, s)
    """
    m = len(cap)
    exact = is_exact(cap) and is_exact(objective) and all(is_exact(b) for b in orth_basis)
    mode = "exact" if exact else "float"
    cap = [convert(x, mode) for x in cap]
    objective = [convert(x, mode) for x in objective]
    basis = [[convert(x, mode) for x in b] for b in orth_basis]
    R, piv = rref(basis, eps) if basis else ([], [])
    free = [j for j in range(m) if j not in piv]
    zero = Fraction(0) if exact else 0.0
    if not free:
        return zero, zeros(m, mode)
    A, b = [], []
    for k, j in enumerate(free):
        row = [zero] * len(free)
        row[k] = Fraction(1) if exact else 1.0
        A.append(row)
        b.append(cap[j])
    for row, p in zip(R, piv):
        coeffs = [row[j] for j in free]
        if any(coeffs):
            A.append([-x for x in coeffs])
            b.append(cap[p])
            A.append(list(coeffs))
            b.append(zero)
    c = [objective[j] - sum((objective[p] * row[j] for row, p in zip(R, piv)), zero) for j in free]
    scale_ = max([1.0] + [abs(float(x)) for r in A for x in r] + [abs(float(x)) for x in b])
    y = _simplex_max(c, A, b, exact, tol=1e-12 * scale_)
    s = [zero] * m
    for k, j in enumerate(free):
        s[j] = y[k]
    for row, p in zip(R, piv):
        s[p] = -sum((row[j] * s[j] for j in free), zero)
    if not exact:
        s = [min(max(x, 0.0), cj) for x, cj in zip(s, cap)]
    value = sum((o * x for o, x in zip(objective, s)), zero)
    return value, tuple(s)


def lp_max_capped(cap, nullspace_basis) -> Scalar:
    """``max sum(s)`` over ``0 <= s <= cap`` orthogonal to every basis vector."""
    ones = [1] * len(cap) if is_exact(cap) else [1.0] * len(cap)
    value, _ = lp_max(ones, cap, nullspace_basis)
    return value
