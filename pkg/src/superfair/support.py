"""Support dynamics: how words act on subsets of ``[1..m]``.

Subsets are stored as int bitmasks (bit ``i`` set iff index ``i`` is in
the set). The automaton is explored from the singletons only, so it stays
small even though it lives inside ``2^m``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from .errors import InternalContradiction, NotInBscc, NumericalFailure
from .family import MatrixFamily
from .numerics import labels, solve_square

PM_SEARCH_BUDGET = 200_000


# -- bitmask helpers ---------------------------------------------------------

def to_mask(E: Iterable[int]) -> int:
    mask = 0
    for i in E:
        mask |= 1 << i
    return mask


def to_set(mask: int) -> frozenset:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def bits(mask: int) -> list:
    return sorted(to_set(mask))


def step_mask(f: MatrixFamily, mask: int, a: int) -> int:
    """``E . a`` for a letter index ``a``."""
    rows = f.row_masks[a]
    out, i = 0, 0
    while mask:
        if mask & 1:
            out |= rows[i]
        mask >>= 1
        i += 1
    return out


def act_mask(f: MatrixFamily, mask: int, w) -> int:
    for a in f.letters(w):
        mask = step_mask(f, mask, a)
    return mask


def act_set(f: MatrixFamily, E: Iterable[int], w) -> frozenset:
    """Support action ``E . w = supp(1_E M_w)`` (0-based indices)."""
    return to_set(act_mask(f, to_mask(E), w))


def format_set(mask: int) -> str:
    return "{" + ",".join(str(i) for i in labels(to_set(mask))) + "}"


# -- strongly connected components -------------------------------------------

def tarjan_scc(nodes: list, succ: Callable) -> list:
    """SCCs of a graph, iteratively. Output order is reverse topological
    (every SCC appears before any SCC that can reach it)."""
    index, low, on_stack = {}, {}, set()
    stack, out = [], []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for u in it:
                if u not in index:
                    index[u] = low[u] = counter
                    counter += 1
                    stack.append(u)
                    on_stack.add(u)
                    work.append((u, iter(succ(u))))
                    advanced = True
                    break
                if u in on_stack:
                    low[v] = min(low[v], index[u])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    u = stack.pop()
                    on_stack.discard(u)
                    comp.append(u)
                    if u == v:
                        break
                out.append(sorted(comp))
    return out


# -- the support automaton ---------------------------------------------------

@dataclass(frozen=True)
class SupportAutomaton:
    family: MatrixFamily
    states: tuple  # bitmasks, ascending
    transitions: dict  # (mask, letter index) -> mask

    @property
    def contains_null(self) -> bool:
        return 0 in self.states

    def step(self, mask: int, a: int) -> int:
        return self.transitions[(mask, a)]

    def successors(self, mask: int) -> list:
        return [self.transitions[(mask, a)] for a in range(self.family.k)]

    def run(self, mask: int, w) -> int:
        for a in self.family.letters(w):
            mask = self.transitions[(mask, a)]
        return mask


def build_support_automaton(f: MatrixFamily) -> SupportAutomaton:
    """Breadth-first closure of the singletons under every letter."""
    seen = {1 << i for i in range(f.dim)}
    queue = deque(sorted(seen))
    trans = {}
    while queue:
        E = queue.popleft()
        for a in range(f.k):
            T = step_mask(f, E, a)
            trans[(E, a)] = T
            if T not in seen:
                seen.add(T)
                queue.append(T)
    return SupportAutomaton(f, tuple(sorted(seen)), trans)


@dataclass(frozen=True)
class BsccStructure:
    sccs: tuple  # tuples of masks, reverse topological order
    bsccs: tuple
    null_bscc_present: bool
    nonnull_bscc: tuple | None
    minimal_member: int | None

    @property
    def only_null(self) -> bool:
        return self.nonnull_bscc is None

    def in_bscc(self, mask: int) -> bool:
        return any(mask in b for b in self.bsccs)

    def to_dict(self) -> dict:
        return {
            "sccs": [[labels(to_set(E)) for E in c] for c in self.sccs],
            "bsccs": [[labels(to_set(E)) for E in c] for c in self.bsccs],
            "null_bscc_present": self.null_bscc_present,
            "only_null_bscc": self.only_null,
            "nonnull_bscc": None if self.nonnull_bscc is None
            else [labels(to_set(E)) for E in self.nonnull_bscc],
            "F": None if self.minimal_member is None else labels(to_set(self.minimal_member)),
        }


def bscc_structure(aut: SupportAutomaton, strict: bool = True) -> BsccStructure:
    """SCC decomposition plus the BSCC data the classifier needs.

    With ``strict`` (the default, used when the reachability graph is
    strongly connected) more than one non-null BSCC is a contradiction.
    """
    comps = tarjan_scc(list(aut.states), aut.successors)
    where = {E: k for k, c in enumerate(comps) for E in c}
    bottoms = [
        tuple(c) for k, c in enumerate(comps)
        if all(where[T] == k for E in c for T in aut.successors(E))
    ]
    null_present = (0,) in bottoms
    nonnull = [b for b in bottoms if b != (0,)]
    if strict and len(nonnull) > 1:
        raise InternalContradiction(
            "found several non-null BSCCs although the reachability graph is strongly connected"
        )
    F = None
    if nonnull:
        members = [E for b in nonnull for E in b]
        minimal = [E for E in members if not any(D != E and D & E == D for D in members)]
        F = min(minimal)
    main = None
    if nonnull:
        main = next(b for b in nonnull if F in b)
    return BsccStructure(tuple(tuple(c) for c in comps), tuple(bottoms), null_present, main, F)


def _shortest_path(aut: SupportAutomaton, start: int, goal: Callable) -> tuple:
    """Letter indices of a shortest path from ``start`` to a state satisfying ``goal``."""
    if goal(start):
        return ()
    prev = {start: None}
    queue = deque([start])
    while queue:
        E = queue.popleft()
        for a in range(aut.family.k):
            T = aut.step(E, a)
            if T in prev:
                continue
            prev[T] = (E, a)
            if goal(T):
                path = []
                while prev[T] is not None:
                    T, b = prev[T]
                    path.append(b)
                return tuple(reversed(path))
            queue.append(T)
    raise InternalContradiction("target unreachable in the support automaton")


def _word(f: MatrixFamily, letters) -> tuple:
    return tuple(f.alphabet[a] for a in letters)


def synchronizing_word(aut: SupportAutomaton, bs: BsccStructure | None = None) -> tuple:
    """A word sending every state of the automaton into some BSCC.

    States are handled in ascending bitmask order; each one is pushed into
    a BSCC by the shortest extension of the word built so far. BSCCs are
    closed, so earlier states stay inside.
    """
    bs = bs or bscc_structure(aut, strict=False)
    letters: list = []
    for E in aut.states:
        cur = aut.run(E, _word(aut.family, letters))
        letters.extend(_shortest_path(aut, cur, bs.in_bscc))
    return _word(aut.family, letters)


def is_pseudo_mixing(f: MatrixFamily, w, E: Iterable[int]) -> bool:
    """``E . w = E`` and every singleton of ``E`` goes to ``E`` or to the empty set."""
    mask = to_mask(E)
    if mask == 0 or act_mask(f, mask, w) != mask:
        return False
    return all(act_mask(f, 1 << i, w) in (0, mask) for i in to_set(mask))


def short_pseudo_mixing_word(f: MatrixFamily, E: int, max_len: int, budget: int = PM_SEARCH_BUDGET):
    """Shortest pseudo-mixing word for ``E`` up to ``max_len``, or None.

    Breadth-first over the tuple of singleton images; the image of ``E``
    is their union, so the tuple is the full state of the search.
    """
    idx = bits(E)
    start = tuple(1 << i for i in idx)

    def done(images):
        return all(T in (0, E) for T in images) and any(T == E for T in images)

    if done(start):
        return ()
    prev = {start: None}
    frontier = [start]
    for _ in range(max_len):
        nxt = []
        for state in frontier:
            for a in range(f.k):
                T = tuple(step_mask(f, S, a) for S in state)
                if T in prev:
                    continue
                prev[T] = (state, a)
                if done(T):
                    path = []
                    while prev[T] is not None:
                        T, b = prev[T]
                        path.append(b)
                    return _word(f, reversed(path))
                nxt.append(T)
                if len(prev) > budget:
                    return None
        frontier = nxt
        if not frontier:
            break
    return None


def constructive_pseudo_mixing_word(aut: SupportAutomaton, bs: BsccStructure, E: int) -> tuple:
    """``u y v`` with ``y`` a synchronizing word returning ``F`` to itself,
    ``E . u = F`` and ``F . v = E``."""
    f = aut.family
    F = bs.minimal_member
    x = synchronizing_word(aut, bs)
    ext = _shortest_path(aut, aut.run(F, x), lambda T: T == F)
    y = x + _word(f, ext)
    u = _word(f, _shortest_path(aut, E, lambda T: T == F))
    v = _word(f, _shortest_path(aut, F, lambda T: T == E))
    return u + y + v


def pseudo_mixing_word(
    f: MatrixFamily,
    E: Iterable[int],
    bs: BsccStructure | None = None,
    aut: SupportAutomaton | None = None,
    max_len: int | None = None,
) -> tuple:
    """A word that pseudo-mixes ``E``, a member of the non-null BSCC.

    Tries a bounded shortest-word search first (default length ``2m``) and
    falls back on the ``u y v`` construction, which always works but can be
    long.
    """
    aut = aut or build_support_automaton(f)
    bs = bs or bscc_structure(aut)
    mask = to_mask(E)
    if bs.nonnull_bscc is None or mask not in bs.nonnull_bscc:
        raise NotInBscc(f"{format_set(mask)} is not in the non-null BSCC")
    w = short_pseudo_mixing_word(f, mask, 2 * f.dim if max_len is None else max_len)
    if w is None:
        w = constructive_pseudo_mixing_word(aut, bs, mask)
    if not is_pseudo_mixing(f, w, to_set(mask)):
        raise InternalContradiction("constructed word does not pseudo-mix")
    return w


def stationary_distribution(aut: SupportAutomaton, bscc: Iterable[int]) -> dict:
    """Stationary law of the uniform-letter chain restricted to a BSCC.

    Transition probabilities are letter counts over ``|A|``, so the solve is
    always exact.
    """
    states = sorted(bscc)
    pos = {E: i for i, E in enumerate(states)}
    n, k = len(states), aut.family.k
    P = [[Fraction(0)] * n for _ in range(n)]
    for E in states:
        for T in aut.successors(E):
            if T not in pos:
                raise NotInBscc(f"{format_set(T)} leaves the given set, not a BSCC")
            P[pos[E]][pos[T]] += Fraction(1, k)
    # pi (P - I) = 0 with the last equation replaced by sum(pi) = 1
    A = [[P[j][i] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    A[-1] = [Fraction(1)] * n
    b = [Fraction(0)] * (n - 1) + [Fraction(1)]
    pi = solve_square(A, b)
    if any(p <= 0 for p in pi):
        raise NumericalFailure("stationary distribution is not positive; set is not strongly connected")
    return {E: p for E, p in zip(states, pi)}


# -- reachability graph on indices -------------------------------------------

@dataclass(frozen=True)
class ReachabilityGraph:
    m: int
    edges: frozenset  # (i, j) pairs
    condensation: tuple  # SCCs (sorted index tuples), topological order, sources first

    def successors(self, i: int) -> list:
        return sorted(j for (s, j) in self.edges if s == i)

    def component_of(self) -> dict:
        return {i: k for k, c in enumerate(self.condensation) for i in c}

    def cross_edges(self) -> list:
        comp = self.component_of()
        return sorted((i, j) for (i, j) in self.edges if comp[i] != comp[j])


def reachability_graph(f: MatrixFamily) -> ReachabilityGraph:
    """Edge ``i -> j`` iff some ``M_a(i, j) > 0`` (thresholded in float mode)."""
    edges = set()
    for rows in f.row_masks:
        for i, mask in enumerate(rows):
            for j in to_set(mask):
                edges.add((i, j))
    succ = {i: sorted(j for (s, j) in edges if s == i) for i in range(f.dim)}
    comps = tarjan_scc(list(range(f.dim)), lambda i: succ[i])
    comps.reverse()
    return ReachabilityGraph(f.dim, frozenset(edges), tuple(tuple(c) for c in comps))


def star_check(g: ReachabilityGraph) -> bool:
    """Every position can be made positive by some word iff the graph is
    strongly connected."""
    return len(g.condensation) == 1


# -- DOT export --------------------------------------------------------------

def _quote(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def support_dot(aut: SupportAutomaton, bs: BsccStructure) -> str:
    f = aut.family
    bottom = {E for b in bs.bsccs for E in b}
    out = ["digraph support {", "  rankdir=LR;", "  node [shape=circle];"]
    for E in aut.states:
        attrs = [f"label={_quote(format_set(E))}"]
        if E in bottom:
            attrs.append("shape=doublecircle")
        if E == 0:
            attrs.append("style=filled")
            attrs.append("fillcolor=lightgray")
        out.append(f"  s{E} [{', '.join(attrs)}];")
    for E in aut.states:
        grouped: dict = {}
        for a in range(f.k):
            grouped.setdefault(aut.step(E, a), []).append(f.alphabet[a])
        for T, syms in grouped.items():
            out.append(f"  s{E} -> s{T} [label={_quote(','.join(syms))}];")
    out.append("}")
    return "\n".join(out) + "\n"


def reachability_dot(g: ReachabilityGraph) -> str:
    out = ["digraph reachability {"]
    for k, comp in enumerate(g.condensation):
        out.append(f"  subgraph cluster_{k} {{")
        out.append(f"    label={_quote('C' + str(k + 1))};")
        for i in comp:
            out.append(f"    i{i + 1} [label={_quote(str(i + 1))}];")
        out.append("  }")
    for i, j in sorted(g.edges):
        out.append(f"  i{i + 1} -> i{j + 1};")
    out.append("}")
    return "\n".join(out) + "\n"
