"""Fixed direction, betting subspace, Live, and the Case 0/1/2 decision.

Everything decision-relevant runs in exact rationals when the family is
exact. The one place where exactness can fail is the fixed direction
``x``: its coordinates are algebraic, and rational only when the Perron
root of the reduced matrix is. The Case 2 test therefore has a second,
always exact, certificate: a non-negative vector orthogonal to the
betting subspace whose support is all of ``F`` exists iff ``x`` itself is
orthogonal (the cone is invariant under every ``M_a`` and the iterates of
such a vector converge to ``x``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Any

import numpy as np

from .errors import (
    DegenerateLiveCone,
    InternalContradiction,
    NotPseudoMixing,
    NotSuperfair,
    StarViolated,
)
from .family import (
    FairnessVerdict,
    MatrixFamily,
    apply_word,
    delta_risk,
    format_word,
    validate,
    word_matrix,
)
from .geometry import hilbert_distance
from .numerics import (
    dot,
    format_scalar,
    identity,
    indicator,
    labels,
    lp_max,
    lp_max_capped,
    mat_mul,
    mat_vec,
    norm1,
    normalize,
    nullspace,
    row_space_basis,
    submatrix,
    vec_mat,
    zeros,
)
from .support import (
    BsccStructure,
    act_mask,
    bits,
    bscc_structure,
    build_support_automaton,
    is_pseudo_mixing,
    pseudo_mixing_word,
    reachability_graph,
    star_check,
    to_mask,
)

ORTH_TOL = 1e-9
POWER_TOL = 1e-12
POWER_MAX_ITER = 1_000_000


# -- exact Perron root -------------------------------------------------------

def char_poly(A) -> list:
    """Coefficients ``c[0..n]`` of ``det(t I - A)`` (Faddeev-LeVerrier), exact."""
    n = len(A)
    c = [Fraction(0)] * (n + 1)
    c[n] = Fraction(1)
    M = tuple(tuple(Fraction(0) for _ in range(n)) for _ in range(n))
    I = identity(n, "exact")
    for k in range(1, n + 1):
        AM = mat_mul(A, M)
        M = tuple(tuple(AM[i][j] + c[n - k + 1] * I[i][j] for j in range(n)) for i in range(n))
        AM = mat_mul(A, M)
        c[n - k] = -sum(AM[i][i] for i in range(n)) / k
    return c


def _integer_poly(c: list) -> list:
    L = lcm(*(x.denominator for x in c))
    return [int(x * L) for x in c]


def _peval(P: list, t: Fraction) -> Fraction:
    acc = Fraction(0)
    for coef in reversed(P):
        acc = acc * t + coef
    return acc


def rational_perron_root(A) -> Fraction | None:
    """The dominant eigenvalue of a positive rational matrix if it is rational.

    Any rational root ``p/q`` of the integer characteristic polynomial has
    ``q`` dividing its leading coefficient ``L``; two such rationals differ
    by at least ``1/L^2``. Bisecting an exact sign-change bracket below that
    width isolates the only candidate, which is then tested exactly.
    """
    P = _integer_poly(char_poly(A))
    L = abs(P[-1])
    ev = np.linalg.eigvals(np.array([[float(x) for x in row] for row in A]))
    r = float(max(ev.real))
    others = [abs(r - e.real) for e in ev if abs(e - r) > 1e-12 * max(1.0, abs(r))]
    gap = min(others) if others else 1.0
    delta = min(1e-6 * max(1.0, abs(r)), gap / 4)
    lo, hi = Fraction(r - delta), Fraction(r + delta)
    for t in (Fraction(r).limit_denominator(L), lo, hi):
        if _peval(P, t) == 0:
            return t
    s_lo, s_hi = _peval(P, lo) > 0, _peval(P, hi) > 0
    if s_lo == s_hi:
        return None
    target = Fraction(1, L * L)
    while hi - lo >= target:
        mid = (lo + hi) / 2
        v = _peval(P, mid)
        if v == 0:
            return mid
        if (v > 0) == s_lo:
            lo = mid
        else:
            hi = mid
    cand = ((lo + hi) / 2).limit_denominator(L)
    return cand if _peval(P, cand) == 0 else None


# -- fixed direction ---------------------------------------------------------

@dataclass(frozen=True)
class FixedDirection:
    x: tuple
    residual: float
    iterations: int
    exact: bool
    eigenvalue: Any
    E_prime: tuple  # 0-based indices whose singleton is sent onto F

    def to_dict(self) -> dict:
        return {
            "x": [format_scalar(v) for v in self.x],
            "residual": self.residual,
            "iterations": self.iterations,
            "exact": self.exact,
            "eigenvalue": format_scalar(self.eigenvalue),
            "E_prime": labels(self.E_prime),
        }


def _power_iteration(f: MatrixFamily, F: list, Mw) -> tuple:
    Mf = np.array([[float(x) for x in row] for row in Mw])
    v = np.zeros(f.dim)
    v[F] = 1.0 / len(F)
    d = math.inf
    for it in range(1, POWER_MAX_ITER + 1):
        u = v @ Mf
        u /= u.sum()
        d = hilbert_distance(tuple(u), tuple(v), f.eps)
        v = u
        if d < POWER_TOL:
            break
    lam = float((v @ Mf).sum())
    return tuple(float(t) for t in v), d, it, lam


def fixed_direction(f: MatrixFamily, F, w, force_float: bool = False) -> FixedDirection:
    """The unit vector with support ``F`` fixed (projectively) by ``M_w``.

    Exact path: left Perron vector of the positive block ``M_w[E' x E']``
    pushed through the rows of ``M_w``. Falls back on float power iteration
    when the family is float or the Perron root is irrational.
    """
    F = sorted(F)
    if not is_pseudo_mixing(f, w, F):
        raise NotPseudoMixing(f"word {format_word(f, w)!r} does not pseudo-mix {labels(F)}")
    Fm = to_mask(F)
    Ep = tuple(i for i in F if act_mask(f, 1 << i, w) == Fm)
    Mw = word_matrix(f, w)
    if f.mode == "exact" and not force_float:
        Mp = submatrix(Mw, Ep, Ep)
        lam = rational_perron_root(Mp)
        if lam is not None:
            n = len(Ep)
            shifted = [[Mp[j][i] - (lam if i == j else 0) for j in range(n)] for i in range(n)]
            ns = nullspace(shifted, n)
            if len(ns) == 1:
                y = ns[0]
                if sum(y) < 0:
                    y = tuple(-t for t in y)
                if all(t > 0 for t in y):
                    acc = zeros(f.dim)
                    for yi, i in zip(y, Ep):
                        acc = tuple(a + yi * b for a, b in zip(acc, Mw[i]))
                    x = normalize(acc)
                    xw = vec_mat(x, Mw)
                    if xw != tuple(lam * t for t in x):
                        raise InternalContradiction("exact fixed direction fails x M_w = lambda x")
                    return FixedDirection(x, 0.0, 0, True, lam, Ep)
    x, d, it, lam = _power_iteration(f, F, Mw)
    return FixedDirection(x, d, it, False, lam, Ep)


# -- betting subspace --------------------------------------------------------

@dataclass(frozen=True)
class Generator:
    depth: int
    letter: str  # the ``a`` of 1_a
    word: tuple  # z in M_z 1_a
    vector: tuple


@dataclass(frozen=True)
class BettingSubspace:
    basis: tuple
    per_letter_dims: dict
    per_letter_depth_dims: dict  # a -> dims of S_a^0, S_a^1, ... until stable
    generators: tuple  # every candidate M_z 1_a examined, by depth
    dim_m: int

    @property
    def dim(self) -> int:
        return len(self.basis)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "basis": [[format_scalar(x) for x in b] for b in self.basis],
            "per_letter_dims": dict(self.per_letter_dims),
            "per_letter_depth_dims": {a: list(d) for a, d in self.per_letter_depth_dims.items()},
        }


def bet_vector(f: MatrixFamily, a) -> tuple:
    """``1_a = (I - M_a) 1``: per-index loss of capital when betting on ``a``."""
    M = f.matrix(a)
    one = f.one()
    return tuple(one - norm1(row) for row in M)


def _is_zero(v, exact: bool) -> bool:
    return all(x == 0 for x in v) if exact else max(abs(x) for x in v) <= 1e-14


def betting_subspace(f: MatrixFamily) -> BettingSubspace:
    """``V = sum_a span{M_z 1_a : |z| <= m-1}`` by layered span closure.

    Layer ``d+1`` only needs ``M_b u`` for the vectors ``u`` that were new at
    layer ``d``; the closure stops as soon as a layer adds nothing.
    """
    exact = f.mode == "exact"
    gens: list = []
    per_dims, depth_dims = {}, {}
    all_vectors: list = []
    for a in f.alphabet:
        seed = bet_vector(f, a)
        gens.append(Generator(0, a, (), seed))
        span: list = []
        new = []
        if not _is_zero(seed, exact):
            span, new = [seed], [((), seed)]
        dims = [len(row_space_basis(span)) if span else 0]
        depth = 0
        while new:
            depth += 1
            fresh = []
            for z, u in new:
                for bi, b in enumerate(f.alphabet):
                    g = mat_vec(f.matrices[bi], u)
                    gens.append(Generator(depth, a, (b,) + z, g))
                    if _is_zero(g, exact):
                        continue
                    if len(row_space_basis(span + [g])) > len(row_space_basis(span)):
                        span.append(g)
                        fresh.append(((b,) + z, g))
            new = fresh
            dims.append(len(row_space_basis(span)) if span else 0)
        per_dims[a] = dims[-1]
        depth_dims[a] = tuple(dims)
        all_vectors.extend(span)
    basis = tuple(row_space_basis(all_vectors)) if all_vectors else ()
    return BettingSubspace(basis, per_dims, depth_dims, tuple(gens), f.dim)


def orthogonal_to(x, V: BettingSubspace, tol: float = ORTH_TOL) -> bool:
    exact = all(isinstance(t, Fraction) for t in x) and all(
        isinstance(t, Fraction) for b in V.basis for t in b
    )
    for b in V.basis:
        s = dot(x, b)
        if exact:
            if s != 0:
                return False
        elif abs(float(s)) >= tol * sum(abs(float(t)) for t in b):
            return False
    return True


def full_support_in_cone(F, V: BettingSubspace) -> tuple:
    """Exact test: is there ``s >= 0``, ``s`` orthogonal to ``V``, with ``supp(s) = F``?

    One LP per index: maximise ``s_i`` over ``0 <= s <= 1_F``. Returns the
    verdict and a witness vector (sum of the per-index optima).
    """
    cap = indicator(F, V.dim_m)
    acc = zeros(V.dim_m)
    for i in sorted(F):
        obj = [Fraction(1) if j == i else Fraction(0) for j in range(V.dim_m)]
        val, s = lp_max(obj, cap, list(V.basis))
        if val <= 0:
            return False, None
        acc = tuple(p + q for p, q in zip(acc, s))
    return True, acc


# -- Live --------------------------------------------------------------------

def live(f: MatrixFamily, V: BettingSubspace, v) -> Any:
    """Capital not locked in the non-betting cone: ``|v| - max{|s| : s in S, s <= v}``."""
    if all(t == 0 for t in v):
        return f.zero() if all(isinstance(t, Fraction) for t in v) else 0.0
    if all(isinstance(t, Fraction) for t in v):
        basis = list(V.basis)
    else:
        basis = [[float(t) for t in b] for b in V.basis]
    val = norm1(v) - lp_max_capped(v, basis)
    if not isinstance(val, Fraction):
        val = min(max(val, 0.0), float(norm1(v)))
    return val


def live_split(V: BettingSubspace, v) -> tuple:
    """``(live, s*)`` where ``s*`` is an optimal frozen part of ``v``."""
    basis = list(V.basis) if all(isinstance(t, Fraction) for t in v) else [
        [float(t) for t in b] for b in V.basis
    ]
    ones = [1] * len(v) if all(isinstance(t, Fraction) for t in v) else [1.0] * len(v)
    val, s = lp_max(ones, v, basis)
    return norm1(v) - val, s


# -- classification ----------------------------------------------------------

@dataclass
class Classification:
    case: str  # "0" | "1" | "2"
    verdict: FairnessVerdict
    F: tuple | None = None
    pseudo_mixing_word: tuple | None = None
    fixed: FixedDirection | None = None
    subspace: BettingSubspace | None = None
    witness: tuple | None = None
    delta_at_witness: float | None = None
    certificates: dict = field(default_factory=dict)
    bscc: BsccStructure | None = None
    family: MatrixFamily | None = None

    def to_dict(self) -> dict:
        f = self.family
        out = {
            "case": self.case,
            "fairness": self.verdict.kind,
            "F": labels(self.F) if self.F is not None else None,
            "pseudo_mixing_word": None,
            "pseudo_mixing_length": None,
            "x": None,
            "witness": None,
            "delta_at_witness": self.delta_at_witness,
            "certificates": dict(self.certificates),
        }
        if self.pseudo_mixing_word is not None:
            out["pseudo_mixing_word"] = format_word(f, self.pseudo_mixing_word)
            out["pseudo_mixing_length"] = len(self.pseudo_mixing_word)
        if self.fixed is not None:
            out["x"] = [format_scalar(t) for t in self.fixed.x]
            out["fixed_direction"] = self.fixed.to_dict()
        if self.witness is not None:
            out["witness"] = format_word(f, self.witness)
        if self.subspace is not None:
            out["betting_subspace"] = self.subspace.to_dict()
        if self.bscc is not None:
            out["support"] = self.bscc.to_dict()
        return out


def find_witness(f: MatrixFamily, x, V: BettingSubspace):
    """Shortest ``z`` with ``x M_z 1_a != 0`` for some ``a`` (so ``Delta(x.z) > 0``)."""
    exact = all(isinstance(t, Fraction) for t in x)
    for g in V.generators:
        vec = g.vector
        if not exact:
            vec = [float(t) for t in vec]
            nb = sum(abs(t) for t in vec)
            if nb == 0 or abs(dot(x, vec)) < ORTH_TOL * nb:
                continue
        elif dot(x, vec) == 0:
            continue
        return g.word
    return None


def classify_star(f: MatrixFamily, check_star: bool = True) -> Classification:
    """Decide Case 0, 1 or 2 for a superfair family whose reachability graph
    is strongly connected."""
    verdict = validate(f)
    if not verdict.superfair:
        raise NotSuperfair(
            "family is not superfair at indices "
            + str([i + 1 for i, _ in verdict.witnesses])
        )
    if check_star and not star_check(reachability_graph(f)):
        raise StarViolated("reachability graph is not strongly connected; use the general analysis")
    exact = f.mode == "exact"
    aut = build_support_automaton(f)
    bs = bscc_structure(aut)
    certs = {"mode": f.mode, "support_states": len(aut.states)}
    if bs.only_null:
        certs["rigorous"] = exact
        return Classification("0", verdict, certificates=certs, bscc=bs, family=f)
    F = bits(bs.minimal_member)
    w = pseudo_mixing_word(f, F, bs, aut)
    fd = fixed_direction(f, F, w)
    V = betting_subspace(f)
    certs["x_exact"] = fd.exact
    if fd.exact:
        case2 = orthogonal_to(fd.x, V)
        certs["orthogonality"] = "exact"
    else:
        case2 = orthogonal_to(fd.x, V)
        certs["orthogonality"] = "float"
    if exact:
        cone, _ = full_support_in_cone(F, V)
        certs["cone_certificate"] = cone
        if cone != case2:
            if fd.exact:
                raise InternalContradiction("orthogonality of x and the cone certificate disagree")
            # the exact certificate is authoritative when x is only approximate
            case2 = cone
    certs["rigorous"] = exact
    c = Classification("2" if case2 else "1", verdict, tuple(F), w, fd, V, certificates=certs, bscc=bs, family=f)
    if not case2:
        z = find_witness(f, fd.x, V)
        if z is not None:
            c.witness = z
            u = apply_word(f if fd.exact else f.to_mode("float"), fd.x, z)
            c.delta_at_witness = delta_risk(f if fd.exact else f.to_mode("float"), u)
    return c


# -- contraction probe -------------------------------------------------------

@dataclass(frozen=True)
class ProbeResult:
    N: int
    trials: int
    seed: int
    alpha_hat: float
    fraction_contracting: float
    median_factor: float

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "trials": self.trials,
            "seed": self.seed,
            "alpha_hat": self.alpha_hat if math.isfinite(self.alpha_hat) else "inf",
            "fraction_contracting": self.fraction_contracting,
            "median_factor": self.median_factor,
        }


def _trial_streams(seed: int, trials: int) -> list:
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(trials)]


def live_contraction_probe(
    f: MatrixFamily,
    N: int,
    trials: int,
    seed: int = 0,
    V: BettingSubspace | None = None,
    slack: float = 1e-9,
) -> ProbeResult:
    """Empirical contraction of Live over random words of length ``N``.

    For each sampled ``z`` the factor is ``max_i Live(e_i M_z) / Live(e_i)``
    over basis vectors with positive Live. Each trial owns its own random
    stream split from ``seed``, so the result does not depend on order.
    """
    V = V or betting_subspace(f)
    m = f.dim
    base = [live(f, V, tuple(f.one() if j == i else f.zero() for j in range(m))) for i in range(m)]
    active = [i for i in range(m) if base[i] > 0]
    if not active:
        raise DegenerateLiveCone("every basis vector has zero Live; the family never bets")
    Vf = BettingSubspace(
        tuple(tuple(float(t) for t in b) for b in V.basis), V.per_letter_dims,
        V.per_letter_depth_dims, (), m,
    )
    mats = f.arrays
    log_factors = []
    for rng in _trial_streams(seed, trials):
        z = rng.integers(0, f.k, size=N)
        worst = -math.inf
        for i in active:
            u = np.zeros(m)
            u[i] = 1.0
            logscale = 0.0
            for a in z:
                u = u @ mats[a]
                s = u.sum()
                if s <= 0:
                    break
                u /= s
                logscale += math.log(s)
            else:
                lv = live(f, Vf, tuple(float(t) for t in u))
                if lv > 0:
                    worst = max(worst, logscale + math.log(lv) - math.log(float(base[i])))
        log_factors.append(worst)
    arr = np.array(log_factors)
    frac = float(np.mean(arr <= math.log1p(slack)))
    med = float(np.median(arr))
    alpha = math.inf if med == -math.inf else -med / N
    return ProbeResult(N, trials, seed, alpha, frac, math.exp(med) if med > -math.inf else 0.0)


# -- general case ------------------------------------------------------------

@dataclass
class GeneralReport:
    condensation: tuple
    components: list  # dicts per SCC
    leakage_edges: list
    mixed: bool
    strict_never_case2: bool
    star: bool
    probe: ProbeResult | None = None
    probe_error: str | None = None
    classification: Classification | None = None

    def to_dict(self) -> dict:
        out = {
            "case": "general",
            "star": self.star,
            "condensation": [labels(c) for c in self.condensation],
            "components": self.components,
            "leakage_edges": [[i + 1, j + 1] for i, j in self.leakage_edges],
            "mixed": self.mixed,
            "strict_component_never_case2": self.strict_never_case2,
            "probe": self.probe.to_dict() if self.probe else None,
        }
        if self.probe_error:
            out["probe_error"] = self.probe_error
        if self.classification is not None:
            out["single_component"] = self.classification.to_dict()
        return out


def classify_general(
    f: MatrixFamily,
    probe_N: int = 100,
    probe_trials: int = 1000,
    seed: int = 0,
    probe: bool = True,
) -> GeneralReport:
    """Per-component analysis over the reachability condensation.

    Components appear in topological order, sources first. Each restricted
    subfamily is strongly connected, so it gets its own Case verdict.
    """
    verdict = validate(f)
    if not verdict.superfair:
        raise NotSuperfair("family is not superfair")
    g = reachability_graph(f)
    comps = []
    cases = set()
    consistent = True
    for K in g.condensation:
        sub = f.restrict(K)
        sv = validate(sub)
        c = classify_star(sub, check_star=False)
        cases.add(c.case)
        if sv.kind == "SuperfairStrict" and c.case == "2":
            consistent = False
        comps.append({
            "indices": labels(K),
            "fairness": sv.kind,
            "case": c.case,
            "classification": c.to_dict(),
        })
    star = star_check(g)
    report = GeneralReport(
        g.condensation, comps, g.cross_edges(), {"1", "2"} <= cases, consistent, star
    )
    if star:
        report.classification = classify_star(f)
    if probe:
        try:
            report.probe = live_contraction_probe(f, probe_N, probe_trials, seed)
        except DegenerateLiveCone as exc:
            report.probe_error = str(exc)
    return report
