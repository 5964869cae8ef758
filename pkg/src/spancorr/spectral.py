"""Laplacian solves: effective resistance, transfer currents, UST edge and pair laws.

Every quantity goes through a grounded reduced Laplacian (last vertex
grounded) with a Cholesky factorisation; the pseudoinverse is never formed.
The grounded Green's matrix ``G`` (zero row/column at the ground) gives

    reff(u, v)        = G[u,u] + G[v,v] - 2 G[u,v]
    Y((a,b), (c,d))   = G[c,a] - G[c,b] - G[d,a] + G[d,b]

since adding a constant to every potential does not change differences.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .checks import ensure
from .graphs import Graph, GraphError, check_subset, is_connected

log = logging.getLogger(__name__)

EXACT_TREE_COUNT_MAX_N = 64


class DisconnectedGraphError(GraphError):
    pass


def laplacian(G: Graph) -> np.ndarray:
    """L = D - A with A counting parallel edges."""
    A = G.adjacency()
    return np.diag(A.sum(axis=1)) - A


class LaplacianSystem:
    """Factorised grounded Laplacian of a connected graph.

    Immutable after construction; solves allocate their own output arrays,
    so one instance can be shared by concurrent readers.
    """

    def __init__(self, G: Graph, tol: float = 1e-11):
        if G.n < 2 or not is_connected(G):
            raise DisconnectedGraphError(f"{G!r} is not a connected graph on >= 2 vertices")
        self.graph = G
        self.tol = tol
        self.ground = G.n - 1
        self._L = laplacian(G)
        self._factor = cho_factor(self._L[:-1, :-1], lower=True, check_finite=False)

    @property
    def n(self) -> int:
        return self.graph.n

    def potentials(self, b: np.ndarray) -> np.ndarray:
        """Solve ``L x = b`` for ``b`` summing to zero, with ``x[ground] = 0``."""
        b = np.asarray(b, dtype=float)
        scale = max(1.0, float(np.abs(b).max(initial=0.0)))
        if abs(b.sum()) > 1e-9 * scale:
            raise ValueError("right-hand side must be orthogonal to the constant vector")
        x = np.zeros(b.shape)
        x[:-1] = cho_solve(self._factor, b[:-1], check_finite=False)
        resid = np.linalg.norm(self._L @ x - b)
        ensure(resid <= self.tol * max(np.linalg.norm(b), 1.0) * self.n,
               f"Laplacian solve residual {resid:.3e} too large")
        return x

    @cached_property
    def green(self) -> np.ndarray:
        """Grounded Green's matrix: inverse of the reduced Laplacian, zero-padded."""
        Gm = np.zeros((self.n, self.n))
        Gm[:-1, :-1] = cho_solve(self._factor, np.eye(self.n - 1), check_finite=False)
        return Gm

    @lru_cache(maxsize=None)
    def edge_potential(self, e: int) -> np.ndarray:
        """Potentials for a unit current injected at edge e's first endpoint and removed at its second."""
        a, b = self.graph.edges[e]
        rhs = np.zeros(self.n)
        rhs[a] += 1.0
        rhs[b] -= 1.0
        return self.potentials(rhs)

    @cached_property
    def incidence(self) -> np.ndarray:
        """Oriented incidence matrix, edge ``(u, v)`` oriented u -> v."""
        B = np.zeros((self.graph.m, self.n))
        idx = np.arange(self.graph.m)
        B[idx, self.graph.endpoints[:, 0]] = 1.0
        B[idx, self.graph.endpoints[:, 1]] = -1.0
        return B

    @cached_property
    def transfer_matrix(self) -> np.ndarray:
        """Y[e, f] for all edges, each oriented as stored."""
        B = self.incidence
        return B @ self.green @ B.T

    def resistance_matrix(self) -> np.ndarray:
        g = self.green
        d = np.diag(g)
        return d[:, None] + d[None, :] - 2.0 * g


def _check_vertex(sys: LaplacianSystem, *vs: int) -> None:
    for v in vs:
        if not 0 <= v < sys.n:
            raise GraphError(f"vertex {v} is not valid for {sys.graph!r}")


def effective_resistance(sys: LaplacianSystem, u: int, v: int) -> float:
    _check_vertex(sys, u, v)
    if u == v:
        raise ValueError("effective resistance needs two distinct vertices")
    rhs = np.zeros(sys.n)
    rhs[u], rhs[v] = 1.0, -1.0
    x = sys.potentials(rhs)
    return float(x[u] - x[v])


def edge_resistances(sys: LaplacianSystem) -> np.ndarray:
    """reff between the endpoints of every edge (parallel edges repeat the value)."""
    g = sys.green
    u, v = sys.graph.endpoints[:, 0], sys.graph.endpoints[:, 1]
    return g[u, u] + g[v, v] - 2.0 * g[u, v]


def edge_probability_ust(sys: LaplacianSystem, e: int) -> float:
    """P[e in UST] = reff between the endpoints of e (unit conductance per edge).

    For a bundle of k parallel edges the bundle as a whole is used with
    probability k * reff, shared equally among its members.
    """
    check_subset(sys.graph, [e])
    a, b = sys.graph.edges[e]
    return effective_resistance(sys, a, b)


def transfer_current(sys: LaplacianSystem, e: int, f: int) -> float:
    """Current through f (oriented as stored) when a unit current is driven along e."""
    check_subset(sys.graph, [e, f] if e != f else [e])
    c, d = sys.graph.edges[f]
    x = sys.edge_potential(e)
    return float(x[c] - x[d])


def multi_edge_probability(sys: LaplacianSystem, edges) -> float:
    """P[all given edges in UST] as the determinant of the transfer-current matrix."""
    ids = list(edges)
    if len(set(ids)) != len(ids):
        raise ValueError("edges must be distinct")
    if not ids:
        return 1.0
    Y = np.array([[transfer_current(sys, e, f) for f in ids] for e in ids])
    return float(np.linalg.det(Y))


def pair_probability_ust(sys: LaplacianSystem, e: int, f: int) -> float:
    if e == f:
        raise ValueError("pair probability needs two distinct edges")
    Yee = transfer_current(sys, e, e)
    Yff = transfer_current(sys, f, f)
    Yef = transfer_current(sys, e, f)
    Yfe = transfer_current(sys, f, e)
    return Yee * Yff - Yef * Yfe


def pair_probability_matrix(sys: LaplacianSystem) -> np.ndarray:
    """P[e, f in UST] for all ordered pairs; the diagonal holds P[e in UST]."""
    Y = sys.transfer_matrix
    d = np.diag(Y)
    P = d[:, None] * d[None, :] - Y * Y.T
    np.fill_diagonal(P, d)
    return P


@dataclass(frozen=True)
class WedgeResistances:
    r1: float
    r2: float
    t: float
    d: int

    @property
    def a(self) -> float:
        return 2.0 / (self.d + 1)

    @property
    def alpha(self) -> float:
        return self.r1 - self.a

    @property
    def beta(self) -> float:
        return self.r2 - self.a

    @property
    def gamma(self) -> float:
        return self.t - self.a

    @property
    def K(self) -> float:
        """Transfer current between the two wedge edges, both oriented away from the centre."""
        return (self.r1 + self.r2 - self.t) / 2.0

    @property
    def pair_probability(self) -> float:
        return self.r1 * self.r2 - self.K**2


def wedge_resistances(sys: LaplacianSystem, x: int, y: int, z: int, d: int) -> WedgeResistances:
    _check_vertex(sys, x, y, z)
    nb = sys.graph.neighbors[x]
    if y == z or y not in nb or z not in nb:
        raise GraphError(f"({y}, {z}) are not two distinct neighbours of {x}")
    g = sys.green

    def reff(u, v):
        return float(g[u, u] + g[v, v] - 2.0 * g[u, v])

    return WedgeResistances(reff(x, y), reff(x, z), reff(y, z), d)


def foster_sum(sys: LaplacianSystem) -> float:
    """Sum of reff over edges, once per parallel edge; equals n - 1."""
    return float(edge_resistances(sys).sum())


# ---------------------------------------------------------------- tree counts


def _bareiss_det(M: list[list[int]]) -> int:
    """Fraction-free Gaussian elimination over the integers."""
    M = [row[:] for row in M]
    k = len(M)
    if k == 0:
        return 1
    sign, prev = 1, 1
    for i in range(k - 1):
        if M[i][i] == 0:
            swap = next((r for r in range(i + 1, k) if M[r][i] != 0), None)
            if swap is None:
                return 0
            M[i], M[swap] = M[swap], M[i]
            sign = -sign
        piv = M[i][i]
        for r in range(i + 1, k):
            Mr, Mi = M[r], M[i]
            f = Mr[i]
            for c in range(i + 1, k):
                Mr[c] = (Mr[c] * piv - f * Mi[c]) // prev
        prev = piv
    return sign * M[k - 1][k - 1]


def tree_count(G: Graph | LaplacianSystem) -> int:
    """Exact number of spanning trees (matrix-tree theorem, integer elimination).

    Returns 0 (with a warning) for a disconnected graph.  Exact counting is
    limited to ``n <= 64``; use :func:`log_tree_count` beyond that.
    """
    G = G.graph if isinstance(G, LaplacianSystem) else G
    if G.n > EXACT_TREE_COUNT_MAX_N:
        raise ValueError(f"exact tree count limited to n <= {EXACT_TREE_COUNT_MAX_N}; use log_tree_count")
    if G.n <= 1:
        return 1
    if not is_connected(G):
        log.warning("tree_count: %r is disconnected, returning 0", G)
        return 0
    L = laplacian(G).astype(np.int64)[:-1, :-1]
    return _bareiss_det(L.tolist())


@dataclass(frozen=True)
class LogTreeCount:
    log_value: float
    abs_error: float
    exact: bool = False


def log_tree_count(G: Graph | LaplacianSystem) -> LogTreeCount:
    """Natural log of the spanning-tree count from a floating log-determinant (approximate)."""
    G = G.graph if isinstance(G, LaplacianSystem) else G
    sign, logdet = np.linalg.slogdet(laplacian(G)[:-1, :-1])
    if sign <= 0:
        return LogTreeCount(-math.inf, 0.0)
    err = 1e3 * np.finfo(float).eps * G.n * max(1.0, abs(logdet))
    return LogTreeCount(float(logdet), float(err))


# ---------------------------------------------------------- resistance buckets


@dataclass(frozen=True)
class ResistanceBuckets:
    d: int
    n: int
    M: int
    counts: tuple[int, ...]
    bounds: tuple[float, ...]

    @property
    def holds(self) -> bool:
        return all(c <= b for c, b in zip(self.counts[1:], self.bounds[1:]))


def _floor_log3(d: int) -> int:
    M = 0
    while 3 ** (M + 1) <= d:
        M += 1
    return M


def resistance_buckets(sys: LaplacianSystem, d: int, check: bool = True) -> ResistanceBuckets:
    """Partition edges by resistance: E_0 = (0, 3/d], E_i = (3^i/d, 3^{i+1}/d], last capped at 1."""
    if d < 3:
        raise ValueError("resistance buckets need d >= 3")
    if sys.graph.regular_degree() != d:
        raise GraphError(f"{sys.graph!r} is not {d}-regular")
    r = edge_resistances(sys)
    M = _floor_log3(d)
    upper = [3.0 ** (i + 1) / d for i in range(M)] + [1.0]
    counts = [0] * (M + 1)
    for val in r:
        i = 0
        while i < M and val > upper[i] * (1 + 1e-12):
            i += 1
        counts[i] += 1
    n = sys.n
    bounds = (math.inf,) + tuple(n / (3**i - 2) for i in range(1, M + 1))
    out = ResistanceBuckets(d, n, M, tuple(counts), bounds)
    if check:
        ensure(out.holds, f"resistance bucket bound violated: {out}")
    return out


def resistance_csv(sys: LaplacianSystem) -> str:
    """CSV dump ``edge_id,u,v,reff``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["edge_id", "u", "v", "reff"])
    for e, ((u, v), r) in enumerate(zip(sys.graph.edges, edge_resistances(sys))):
        w.writerow([e, u, v, format(float(r), ".17g")])
    return buf.getvalue()


def complement_pinv_action(n: int, deleted: list[tuple[int, int]], x: np.ndarray) -> np.ndarray:
    """L_G^+ x for G = K_n minus a max-degree-2 edge set H, x orthogonal to 1.

    Uses (1/n)(I - L_H/n)^{-1} x, solved directly.
    """
    H = Graph(n, tuple(deleted))
    if H.m and H.degrees.max() > 2:
        raise GraphError("deleted subgraph must have maximum degree <= 2")
    A = np.eye(n) - laplacian(H) / n
    return np.linalg.solve(A, x) / n
