"""Evolution of ``v M_{X[1..n]}`` along a symbol stream, and rate fits.

Exact families are evolved exactly (rational growth makes this practical
only for modest ``n``). Float families are evolved as a unit direction
plus a running log-norm, so neither underflow nor overflow occurs.

When Live is requested in float mode the vector is kept as two parts,
``v = s + r``: ``s`` lies in the non-betting cone and only its norm is
needed (vectors of the cone keep their norm under every letter), ``r``
carries everything else. Every few steps the LP moves the frozen part of
``r`` into ``s``. The reported live is ``|r|``, which bounds ``Live(v)``
from above by sublinearity and does not suffer the cancellation of
``|v| - max|s|`` when ``Live(v)`` is far below ``|v|``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .classify import BettingSubspace, betting_subspace, live
from .errors import Malformed, NoSignal, SequenceTooShort, ZeroVector
from .family import MatrixFamily
from .geometry import hilbert_distance
from .numerics import exact_log, format_scalar, labels, lp_max, norm1, support, vec_mat

FLOOR = 1e-12


@dataclass(frozen=True)
class TrajectoryRecord:
    n: int
    norm: float | Fraction
    log_norm: float
    support: frozenset
    live: float | Fraction | None = None
    log_live: float | None = None
    dh_to_x: float | None = None
    dead: bool = False

    def row(self) -> dict:
        def fmt(v):
            return "" if v is None else format_scalar(v)

        return {
            "n": self.n,
            "norm": fmt(self.norm),
            "log_norm": repr(self.log_norm),
            "support": " ".join(str(i) for i in labels(self.support)),
            "live": fmt(self.live),
            "dh_to_x": fmt(self.dh_to_x),
            "dead": int(self.dead),
        }


CSV_FIELDS = ("n", "norm", "log_norm", "support", "live", "dh_to_x", "dead")


def write_csv(records: Iterable[TrajectoryRecord], fh) -> None:
    w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow(r.row())


def to_csv(records) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


def _dh(x, u, eps) -> float | None:
    if x is None:
        return None
    if support(x, eps) != support(u, eps):
        return None
    return hilbert_distance(x, u, eps)


def _symbols(f: MatrixFamily, src, n: int):
    it = src.iter_indices() if hasattr(src, "iter_indices") else (f.letter(a) for a in src)
    got = 0
    for a in it:
        if got == n:
            return
        yield a
        got += 1
    if got < n:
        raise SequenceTooShort(f"sequence ended after {got} symbols, {n} needed")


def evolve(
    f: MatrixFamily,
    v,
    src,
    n: int,
    live_diag: bool = False,
    live_every: int = 1,
    x=None,
    V: BettingSubspace | None = None,
    split_every: int = 10,
) -> list:
    """Per-step records for ``v M_{X[1..k]}``, ``k = 0..n``.

    Live is evaluated at steps divisible by ``live_every`` when
    ``live_diag`` is set; ``dh_to_x`` whenever ``x`` is given and the
    supports agree.
    """
    v = f.vector(v)
    if norm1(v) == 0:
        raise ZeroVector("the starting vector must be non-zero")
    if live_diag and V is None:
        V = betting_subspace(f)
    if f.mode == "exact":
        return _evolve_exact(f, v, src, n, live_diag, live_every, x, V)
    if live_diag:
        return _evolve_split(f, v, src, n, live_every, x, V, split_every)
    return _evolve_float(f, v, src, n, x)


def _evolve_exact(f, v, src, n, live_diag, live_every, x, V):
    recs = []

    def record(k, u):
        s = norm1(u)
        if s == 0:
            recs.append(TrajectoryRecord(k, s, -math.inf, frozenset(), 0 if live_diag else None,
                                         -math.inf if live_diag else None, None, True))
            return
        lv = llv = None
        if live_diag and k % live_every == 0:
            lv = live(f, V, u)
            llv = exact_log(lv)
        recs.append(TrajectoryRecord(k, s, exact_log(s), support(u), lv, llv, _dh(x, u, f.eps), False))

    record(0, v)
    for k, a in enumerate(_symbols(f, src, n), start=1):
        if not recs[-1].dead:
            v = vec_mat(v, f.matrices[a])
        record(k, v)
    return recs


def _evolve_float(f, v, src, n, x):
    mats = f.arrays
    d = np.array(v, dtype=float)
    s = d.sum()
    d /= s
    ell = math.log(s)
    xf = None if x is None else tuple(float(t) for t in x)
    recs = []

    def record(k, dead):
        if dead:
            recs.append(TrajectoryRecord(k, 0.0, -math.inf, frozenset(), None, None, None, True))
            return
        u = tuple(d)
        recs.append(TrajectoryRecord(k, math.exp(ell), ell, support(u, f.eps), None, None,
                                     _dh(xf, u, f.eps), False))

    dead = False
    record(0, dead)
    for k, a in enumerate(_symbols(f, src, n), start=1):
        if not dead:
            d = d @ mats[a]
            s = d.sum()
            if s <= 0:
                dead = True
            else:
                d /= s
                ell += math.log(s)
        record(k, dead)
    return recs


def _evolve_split(f, v, src, n, live_every, x, V, split_every):
    mats = f.arrays
    basis = [[float(t) for t in b] for b in V.basis]
    ones = [1.0] * f.dim
    sigma = 0.0
    ds = np.zeros(f.dim)  # direction of the frozen part, for supports and d_H
    r = np.array(v, dtype=float)
    ell = math.log(r.sum())
    r /= r.sum()
    r_alive = True
    xf = None if x is None else tuple(float(t) for t in x)
    recs = []

    def resplit():
        nonlocal sigma, ds, r, ell, r_alive
        if not r_alive:
            return
        _, sstar = lp_max(ones, tuple(r), basis)
        sstar = np.minimum(np.maximum(np.array(sstar, dtype=float), 0.0), r)
        frozen = sstar.sum()
        if frozen <= 0:
            return
        mass = math.exp(ell) * frozen
        if sigma + mass > 0:
            ds = (sigma * ds + mass * sstar / frozen) / (sigma + mass)
        sigma += mass
        rest = r - sstar
        left = rest.sum()
        if left <= FLOOR * r.sum():
            r_alive = False
            return
        r = rest / left
        ell += math.log(left)

    def record(k, sample):
        live_v = log_live = None
        if sample:
            resplit()
            log_live = ell if r_alive else -math.inf
            live_v = math.exp(log_live)
        if sigma == 0 and not r_alive:
            recs.append(TrajectoryRecord(k, 0.0, -math.inf, frozenset(), live_v, log_live, None, True))
            return
        if r_alive:
            hi = max(math.log(sigma) if sigma > 0 else -math.inf, ell)
            ws = sigma * math.exp(-hi) if sigma > 0 else 0.0
            wr = math.exp(ell - hi)
            log_norm = hi + math.log(ws + wr)
            u = tuple((ws * ds + wr * r) / (ws + wr))
        else:
            log_norm = math.log(sigma)
            u = tuple(ds)
        recs.append(TrajectoryRecord(k, math.exp(log_norm), log_norm, support(u, f.eps),
                                     live_v, log_live, _dh(xf, u, f.eps), False))

    record(0, True)
    for k, a in enumerate(_symbols(f, src, n), start=1):
        M = mats[a]
        if sigma > 0:
            t = ds @ M
            ts = t.sum()
            ds = t / ts if ts > 0 else ds
        if r_alive:
            r = r @ M
            s = r.sum()
            if s <= 0:
                r_alive = False
            else:
                r /= s
                ell += math.log(s)
        sample = k % live_every == 0
        if not sample and k % split_every == 0:
            resplit()
        record(k, sample)
    return recs


# -- rate fitting ------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    limit: float
    beta: float | None  # None when the fit is not trustworthy
    slope_beta: float | None  # raw fitted value, whatever the confidence
    r_squared: float | None
    window: tuple
    points: int
    flag: str  # "ok" | "low_confidence" | "no_decay"

    def to_dict(self) -> dict:
        return {
            "limit": self.limit,
            "beta": self.beta,
            "raw_beta": self.slope_beta,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "points": self.points,
            "flag": self.flag,
        }


def _series(records, target: str):
    ns, vals, logs = [], [], []
    for r in records:
        if target == "norm":
            val, lg = r.norm, r.log_norm
        elif target == "live":
            val, lg = r.live, r.log_live
        elif target == "dh_to_x":
            val = r.dh_to_x
            lg = None if val is None else (math.log(val) if val > 0 else -math.inf)
        else:
            raise Malformed(f"unknown fit target {target!r}")
        if val is None:
            continue
        ns.append(r.n)
        vals.append(float(val))
        logs.append(lg if lg is not None else (math.log(val) if val > 0 else -math.inf))
    return np.array(ns, dtype=float), np.array(vals), np.array(logs, dtype=float)


def rate_fit(records, target: str = "norm", limit: float | None = None, min_r2: float = 0.9) -> RateFit:
    """Fit ``|y_n - limit| ~ C e^{-beta n}`` over the records after a 20% burn-in.

    ``limit`` defaults to the mean of the last tenth of the window; pass
    ``limit=0`` to fit the log field directly (no underflow). Residuals at
    the float round-off floor carry no signal and are dropped.
    """
    ns, vals, logs = _series(records, target)
    if len(ns) < 20:
        raise NoSignal(f"need at least 20 {target} samples, got {len(ns)}")
    start = int(len(ns) * 0.2)
    ns, vals, logs = ns[start:], vals[start:], logs[start:]
    if not np.isfinite(logs).any():
        raise NoSignal(f"{target} is zero or dead throughout the fit window")
    window = (int(ns[0]), int(ns[-1]))
    if limit is None:
        tail = vals[-max(1, len(vals) // 10):]
        lim = float(np.mean(tail))
        resid = np.abs(vals - lim)
        floor = FLOOR * max(abs(lim), float(np.max(np.abs(vals))))
        keep = resid > floor
        y = np.log(np.where(keep, resid, 1.0))
    else:
        lim = float(limit)
        if lim == 0:
            keep = np.isfinite(logs)
            y = np.where(keep, logs, 0.0)
        else:
            resid = np.abs(vals - lim)
            keep = resid > FLOOR * max(abs(lim), float(np.max(np.abs(vals))))
            y = np.log(np.where(keep, resid, 1.0))
    xs, ys = ns[keep], y[keep]
    if len(xs) < 3 or np.ptp(xs) == 0:
        return RateFit(lim, None, None, None, window, int(len(xs)), "no_decay")
    slope, icpt = np.polyfit(xs, ys, 1)
    pred = slope * xs + icpt
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    beta = -float(slope)
    ok = r2 >= min_r2
    return RateFit(lim, beta if ok else None, beta, r2, window, int(len(xs)), "ok" if ok else "low_confidence")
