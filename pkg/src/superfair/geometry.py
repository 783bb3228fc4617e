"""Hilbert projective distance and the Birkhoff contraction coefficient."""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import NotPositive, SupportMismatch, ZeroVector
from .numerics import EPS_CMP, exact_log, is_exact, support


def _max_ratio(num, den, idx):
    return max(num[i] / den[i] for i in idx)


def hilbert_distance(u, v, eps: float = EPS_CMP) -> float:
    """Hilbert projective distance between two non-negative vectors.

    ``d_H(u, v) = ln max_i u_i/v_i + ln max_i v_i/u_i`` over the common
    support. Ratios are formed exactly for rational input; only the final
    logarithm is a float.

    Raises
    ------
    ZeroVector
        if either argument is the zero vector.
    SupportMismatch
        if the supports differ.
    """
    su, sv = support(u, eps), support(v, eps)
    if not su or not sv:
        raise ZeroVector("d_H is undefined for the zero vector")
    if su != sv:
        raise SupportMismatch(f"supports differ: {sorted(su)} vs {sorted(sv)}")
    if is_exact(u) and is_exact(v):
        u = [Fraction(x) for x in u]
        v = [Fraction(x) for x in v]
        d = exact_log(_max_ratio(u, v, su)) + exact_log(_max_ratio(v, u, su))
    else:
        u = [float(x) for x in u]
        v = [float(x) for x in v]
        d = math.log(_max_ratio(u, v, su)) + math.log(_max_ratio(v, u, su))
    return max(d, 0.0)


def projective_diameter_ratio(M):
    """Largest cross ratio ``M[i][k] M[j][l] / (M[j][k] M[i][l])``."""
    rows = range(len(M))
    cols = range(len(M[0]))
    best = None
    for i in rows:
        for j in rows:
            if j <= i:
                continue
            ratios = [M[i][k] / M[j][k] for k in cols]
            r = max(ratios) / min(ratios)
            if best is None or r > best:
                best = r
    return best if best is not None else 1


def birkhoff_tau(M) -> float:
    """Birkhoff contraction coefficient ``tanh(Delta/4)`` of a positive matrix.

    ``Delta`` is the projective diameter of the image cone, i.e. the log of
    the largest cross ratio ``r``; for rational input ``r`` is exact and
    only ``ln r`` is rounded.
    """
    if any(x <= 0 for row in M for x in row):
        raise NotPositive("Birkhoff coefficient needs a strictly positive matrix")
    r = projective_diameter_ratio(M)
    if r == 1:
        return 0.0
    return math.tanh(exact_log(r) / 4)
