"""Graphic-matroid rank and membership in the forest polytope.

A nonnegative x lies in the convex hull of forest indicators iff
sum_{e in S} x_e <= r(S) for every edge set S, with r(S) = |V| - c(S).
It is enough to check, for every vertex set U, that the x-mass on edges
inside U is at most |U| - 1: a violated rank constraint is already violated
on one connected piece of the induced subgraph.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .checks import ensure
from .graphs import Graph, GraphError, check_subset, component_count, is_forest
from .spectral import LaplacianSystem, edge_resistances

EXACT_VERTEX_CAP = 20
COMBINATION_EDGE_CAP = 7


def rank(G: Graph, S: Sequence[int] = ()) -> int:
    """|V| minus the number of components of (V, S), isolated vertices included."""
    return G.n - component_count(G, S)


class RankOracle:
    def __init__(self, G: Graph):
        self.graph = G

    def __call__(self, S: Sequence[int]) -> int:
        return rank(self.graph, S)

    def submodular_on(self, A: Sequence[int], B: Sequence[int]) -> bool:
        A, B = set(A), set(B)
        return self(A) + self(B) >= self(A | B) + self(A & B)


@dataclass(frozen=True)
class MembershipVerdict:
    member: bool
    method: str  # "exact" or "heuristic"
    subsets_checked: int
    violated_set: tuple[int, ...] | None = None
    lhs: float | Fraction | None = None
    bound: int | None = None

    @property
    def slack(self):
        return None if self.violated_set is None else self.bound - self.lhs

    def as_dict(self) -> dict:
        return {
            "member": self.member, "method": self.method, "subsets_checked": self.subsets_checked,
            "violated_set": self.violated_set, "lhs": self.lhs, "bound": self.bound, "slack": self.slack,
        }


def _validate_point(G: Graph, x) -> list | np.ndarray:
    if len(x) != G.m:
        raise ValueError(f"expected {G.m} coordinates, got {len(x)}")
    exact = any(isinstance(v, (Fraction, int)) and not isinstance(v, bool) for v in x) and \
        all(isinstance(v, (Fraction, int)) for v in x)
    xs = [Fraction(v) for v in x] if exact else np.asarray(x, dtype=float)
    neg = [e for e in range(G.m) if xs[e] < 0]
    if neg:
        raise ValueError(f"negative coordinates at edges {neg}")
    return xs


def _inside_mass(G: Graph, x, U: Sequence[int]):
    Us = set(U)
    return sum((x[e] for e, (a, b) in enumerate(G.edges) if a in Us and b in Us), 0 * x[0] if G.m else 0)


def _shrink_to_component(G: Graph, x, U: Sequence[int], tol: float):
    """Return a connected piece of G[U] whose own constraint is violated."""
    Us = set(U)
    inside = [e for e, (a, b) in enumerate(G.edges) if a in Us and b in Us]
    seen: set[int] = set()
    for s in sorted(Us):
        if s in seen:
            continue
        comp, stack = {s}, [s]
        while stack:
            v = stack.pop()
            for e in G.incident[v]:
                if e in inside:
                    w = G.other(e, v)
                    if w not in comp:
                        comp.add(w)
                        stack.append(w)
        seen |= comp
        lhs = _inside_mass(G, x, comp)
        if lhs > len(comp) - 1 + tol:
            return tuple(sorted(comp)), lhs, len(comp) - 1
    return tuple(sorted(Us)), _inside_mass(G, x, Us), len(Us) - component_count_induced(G, Us)


def component_count_induced(G: Graph, U) -> int:
    Us = set(U)
    inside = [e for e, (a, b) in enumerate(G.edges) if a in Us and b in Us]
    return component_count(G, inside) - (G.n - len(Us))


def _subset_masses(G: Graph, x: np.ndarray) -> np.ndarray:
    """mass[U] = sum of x over edges with both ends in U, for every bitmask U."""
    n = G.n
    W = np.zeros((n, n))
    for e, (a, b) in enumerate(G.edges):
        W[a, b] += x[e]
        W[b, a] += x[e]
    mass = np.zeros(1 << n)
    for v in range(1, n):
        # c[U'] = sum_{w in U'} W[v, w] over subsets U' of {0..v-1}
        c = np.zeros(1 << v)
        for w in range(v):
            c[1 << w: 1 << (w + 1)] = c[: 1 << w] + W[v, w]
        mass[1 << v: 1 << (v + 1)] = mass[: 1 << v] + c
    return mass


def _popcounts(n: int) -> np.ndarray:
    pc = np.zeros(1 << n, dtype=np.int64)
    for v in range(n):
        pc[1 << v: 1 << (v + 1)] = pc[: 1 << v] + 1
    return pc


def membership(G: Graph, x, tol: float = 1e-12, fuzz_samples: int = 20000, seed: int = 0) -> MembershipVerdict:
    """Decide whether x is in the forest polytope of G.

    Exact for |V| <= 20 (every vertex subset).  Larger hosts get a
    randomised search over connected vertex sets, labelled heuristic: it can
    find violations but cannot certify membership.
    """
    xs = _validate_point(G, x)
    exact_arith = not isinstance(xs, np.ndarray)
    if exact_arith:
        tol = 0
    if G.m == 0:
        return MembershipVerdict(True, "exact", 1)
    if G.n <= EXACT_VERTEX_CAP and not exact_arith:
        mass = _subset_masses(G, xs)
        excess = mass - (_popcounts(G.n) - 1)
        excess[0] = 0.0
        worst = int(np.argmax(excess))
        if excess[worst] > tol:
            U = [v for v in range(G.n) if (worst >> v) & 1]
            Uc, lhs, bound = _shrink_to_component(G, xs, U, tol)
            return MembershipVerdict(False, "exact", 1 << G.n, Uc, float(lhs), int(bound))
        return MembershipVerdict(True, "exact", 1 << G.n)
    if G.n <= EXACT_VERTEX_CAP:
        count = 0
        for k in range(2, G.n + 1):
            for U in itertools.combinations(range(G.n), k):
                count += 1
                lhs = _inside_mass(G, xs, U)
                if lhs > k - 1:
                    Uc, lhs, bound = _shrink_to_component(G, xs, U, 0)
                    return MembershipVerdict(False, "exact", count, Uc, lhs, bound)
        return MembershipVerdict(True, "exact", count)
    return _fuzz_membership(G, xs, tol, fuzz_samples, seed)


def _fuzz_membership(G: Graph, x, tol: float, samples: int, seed: int) -> MembershipVerdict:
    rng = np.random.default_rng(seed)
    checked = 0
    for _ in range(samples):
        start = int(rng.integers(G.n))
        size = int(rng.integers(2, G.n + 1))
        U, frontier = {start}, [start]
        while frontier and len(U) < size:
            v = frontier.pop(int(rng.integers(len(frontier))))
            for w in G.neighbors[v]:
                if w not in U and len(U) < size:
                    U.add(w)
                    frontier.append(w)
        checked += 1
        lhs = _inside_mass(G, x, U)
        if lhs > len(U) - 1 + tol:
            Uc, lhs, bound = _shrink_to_component(G, x, U, tol)
            return MembershipVerdict(False, "heuristic", checked, Uc, lhs, bound)
    return MembershipVerdict(True, "heuristic", checked)


# --------------------------------------------------------------- exact LP


def forests(G: Graph) -> list[tuple[int, ...]]:
    return [S for k in range(G.n) for S in itertools.combinations(range(G.m), k) if is_forest(G, S)]


def exact_feasible(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    """A nonnegative y with A y = b, or None, by phase-one simplex over the rationals.

    Bland's rule prevents cycling.  Any returned point is checked exactly.
    """
    rows, cols = len(A), len(A[0]) if A else 0
    A = [[Fraction(v) for v in r] for r in A]
    b = [Fraction(v) for v in b]
    for i in range(rows):
        if b[i] < 0:
            A[i] = [-v for v in A[i]]
            b[i] = -b[i]
    # tableau with one artificial per row; columns cols..cols+rows-1 are artificial
    T = [A[i] + [Fraction(int(i == j)) for j in range(rows)] + [b[i]] for i in range(rows)]
    basis = [cols + i for i in range(rows)]
    width = cols + rows
    cost = [Fraction(0)] * cols + [Fraction(1)] * rows + [Fraction(0)]
    red = cost[:]
    for i in range(rows):
        red = [r - t for r, t in zip(red, T[i])]
    while True:
        enter = next((j for j in range(width) if red[j] < 0), None)
        if enter is None:
            break
        best, leave = None, None
        for i in range(rows):
            if T[i][enter] > 0:
                ratio = T[i][-1] / T[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # unbounded cannot happen in phase one
            raise ArithmeticError("phase-one simplex unbounded")
        piv = T[leave][enter]
        T[leave] = [v / piv for v in T[leave]]
        for i in range(rows):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [a - f * c for a, c in zip(T[i], T[leave])]
        f = red[enter]
        red = [a - f * c for a, c in zip(red, T[leave])]
        basis[leave] = enter
    if -red[-1] != 0:
        return None
    y = [Fraction(0)] * cols
    for i, j in enumerate(basis):
        if j < cols:
            y[j] = T[i][-1]
        elif T[i][-1] != 0:
            return None
    ensure(all(sum(A[i][j] * y[j] for j in range(cols)) == b[i] for i in range(rows)) and min(y, default=0) >= 0,
           "phase-one simplex returned an infeasible point")
    return y


def convex_combination_oracle(G: Graph, x: Sequence) -> bool:
    """Exact feasibility of x = sum lambda_F 1_F over forests F, lambda >= 0, sum lambda = 1.

    The empty forest is one of the F.  Rational arithmetic, for graphs with
    at most 7 edges.
    """
    if G.m > COMBINATION_EDGE_CAP:
        raise ValueError(f"convex_combination_oracle needs m <= {COMBINATION_EDGE_CAP}")
    xs = [Fraction(v) for v in x]
    if len(xs) != G.m:
        raise ValueError(f"expected {G.m} coordinates")
    Fs = forests(G)
    A = [[Fraction(int(e in F)) for F in Fs] for e in range(G.m)] + [[Fraction(1)] * len(Fs)]
    return exact_feasible(A, xs + [Fraction(1)]) is not None


# ---------------------------------------------------------- regular hosts


def alpha_vector(G: Graph, sys: LaplacianSystem | None = None) -> np.ndarray:
    """alpha_e = reff(e) - 2/(d+1) on a simple connected d-regular graph."""
    d = G.require_simple_regular()
    sys = sys or LaplacianSystem(G)
    return edge_resistances(sys) - 2 / (d + 1)


@dataclass(frozen=True)
class AlphaCheck:
    graph: str
    n: int
    d: int
    min_alpha: float
    alpha: MembershipVerdict
    resistance: MembershipVerdict
    alpha_total: float
    alpha_total_closed: float

    @property
    def passed(self) -> bool:
        return self.min_alpha >= -1e-12 and self.alpha.member and self.resistance.member


def alpha_membership_check(G: Graph, tol: float = 1e-10) -> AlphaCheck:
    """Membership of alpha (and of the resistance vector that dominates it) in the forest polytope."""
    d = G.require_simple_regular()
    if d < 3:
        raise GraphError("alpha_membership_check needs d >= 3")
    sys = LaplacianSystem(G)
    r = edge_resistances(sys)
    a = r - 2 / (d + 1)
    ensure(a.min() >= -tol, f"negative alpha on {G!r}: {a.min()}")
    a = np.maximum(a, 0.0)
    va = membership(G, a, tol=tol)
    vr = membership(G, r, tol=tol)
    ensure(va.member, f"alpha not in forest polytope of {G!r}: {va}")
    ensure(vr.member, f"resistances not in forest polytope of {G!r}: {vr}")
    return AlphaCheck(G.name or repr(G), G.n, d, float(a.min()), va, vr,
                      float(a.sum()), (G.n - d - 1) / (d + 1))


def foster_alpha_total(G: Graph, tol: float = 1e-9) -> float:
    d = G.require_simple_regular()
    total = float(alpha_vector(G).sum())
    closed = (G.n - d - 1) / (d + 1)
    ensure(abs(total - closed) <= tol, f"sum alpha = {total}, expected {closed}")
    return total


# ----------------------------------------------------------------- forests


@dataclass(frozen=True)
class ForestDegreeCheck:
    edges: int
    components: int
    sum_sq_degree: int
    bound: int
    excess_sum: int

    @property
    def holds(self) -> bool:
        return self.sum_sq_degree <= self.bound and self.excess_sum == self.edges - self.components


def forest_degree_inequality(G: Graph, F: Sequence[int], d: int) -> ForestDegreeCheck:
    """sum_x deg(x;F)^2 <= (d+2)|F| for a forest with max degree <= d, and
    sum over touched vertices of (deg - 1) = |F| - (number of nontrivial trees)."""
    F = check_subset(G, F)
    if not is_forest(G, F):
        raise GraphError("F is not a forest")
    deg = np.zeros(G.n, dtype=np.int64)
    for e in F:
        a, b = G.edges[e]
        deg[a] += 1
        deg[b] += 1
    if deg.max(initial=0) > d:
        raise ValueError(f"forest degree {deg.max()} exceeds cap {d}")
    touched = deg > 0
    c = component_count(G, F) - int((~touched).sum())
    res = ForestDegreeCheck(len(F), c, int((deg**2).sum()), (d + 2) * len(F), int((deg[touched] - 1).sum()))
    ensure(res.holds, f"forest degree inequality fails: {res}")
    return res


def random_forest(G: Graph, rng: np.random.Generator) -> tuple[int, ...]:
    """Greedy acyclic subset of a random edge order, keeping each edge with a random rate."""
    p = rng.random()
    parent = list(range(G.n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    out = []
    for e in rng.permutation(G.m):
        if rng.random() >= p:
            continue
        a, b = (find(v) for v in G.edges[e])
        if a != b:
            parent[a] = b
            out.append(int(e))
    return tuple(sorted(out))
