"""Uniform spanning trees: sampling, degree second moments and the wedge expectations.

Exact quantities come from :mod:`spancorr.spectral`; the sampler is Wilson's
loop-erased random walk, used only as a Monte Carlo cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from . import mc
from .checks import ensure
from .graphs import (
    Graph,
    GraphError,
    complete_bipartite,
    complete_graph,
    cycle_graph,
    is_connected,
    petersen,
    random_regular,
    sharpness_block,
    sharpness_graph,
)
from .spectral import LaplacianSystem, edge_resistances, pair_probability_matrix

# ------------------------------------------------------------------ sampling


def _csr(G: Graph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    indptr = np.zeros(G.n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(G.degrees)
    nbr = np.empty(2 * G.m, dtype=np.int64)
    eid = np.empty(2 * G.m, dtype=np.int64)
    fill = indptr[:-1].copy()
    for e, (u, v) in enumerate(G.edges):
        nbr[fill[u]], eid[fill[u]] = v, e
        fill[u] += 1
        nbr[fill[v]], eid[fill[v]] = u, e
        fill[v] += 1
    return indptr, nbr, eid


@njit(cache=True, nogil=True)
def _wilson_batch(indptr, nbr, eid, n, n_samples, seed, out):
    np.random.seed(seed)
    in_tree = np.empty(n, dtype=np.bool_)
    nxt = np.empty(n, dtype=np.int64)
    for s in range(n_samples):
        in_tree[:] = False
        in_tree[0] = True
        c = 0
        for i in range(1, n):
            u = i
            while not in_tree[u]:
                k = indptr[u] + np.random.randint(0, indptr[u + 1] - indptr[u])
                nxt[u] = k
                u = nbr[k]
            u = i
            while not in_tree[u]:
                in_tree[u] = True
                k = nxt[u]
                out[s, c] = eid[k]
                c += 1
                u = nbr[k]


def sample_ust_batch(G: Graph, n_samples: int, seed: int) -> np.ndarray:
    """``(n_samples, n-1)`` array of edge ids, one uniform spanning tree per row."""
    if G.n < 1 or not is_connected(G):
        raise GraphError(f"{G!r} is not connected")
    out = np.empty((n_samples, max(G.n - 1, 0)), dtype=np.int64)
    if G.n > 1:
        indptr, nbr, eid = _csr(G)
        _wilson_batch(indptr, nbr, eid, G.n, n_samples, seed, out)
    return out


def sample_ust(G: Graph, seed: int) -> tuple[int, ...]:
    """One uniform spanning tree (sorted edge ids); deterministic given ``seed``."""
    return tuple(sorted(int(e) for e in sample_ust_batch(G, 1, seed)[0]))


def tree_degrees(G: Graph, trees: np.ndarray) -> np.ndarray:
    """Vertex degrees of each sampled tree, shape ``(n_samples, n)``."""
    trees = np.atleast_2d(trees)
    deg = np.zeros((trees.shape[0], G.n), dtype=np.int64)
    if trees.shape[1] == 0:
        return deg
    rows = np.repeat(np.arange(trees.shape[0]), trees.shape[1])
    ends = G.endpoints[trees.ravel()]
    np.add.at(deg, (rows, ends[:, 0]), 1)
    np.add.at(deg, (rows, ends[:, 1]), 1)
    return deg


def mc_mean_sq_degree(G: Graph, n_samples: int, seed: int, threads: int = 1) -> mc.EstimatorReport:
    """Monte Carlo estimate of E[deg(X)^2] for uniform X, from Wilson samples."""

    def chunk(size, ss):
        trees = sample_ust_batch(G, size, mc.int_seed(ss))
        deg = tree_degrees(G, trees)
        return mc.Moments.of((deg**2).mean(axis=1))

    parts = mc.run_chunks(chunk, n_samples, seed, threads)
    return mc.EstimatorReport.from_moments("ust_mean_sq_degree", mc.Moments.combine(parts), seed)


# ------------------------------------------------------ pair-sum identities


@dataclass(frozen=True)
class IdentityResiduals:
    adjacent: float
    nonadjacent: float
    sum_sq_degree: float
    source: str

    def ok(self, tol: float = 1e-10) -> bool:
        return abs(self.adjacent) <= tol and abs(self.nonadjacent) <= tol


def _adjacency_masks(G: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Boolean ``(m, m)`` masks of ordered distinct adjacent / non-adjacent edge pairs."""
    ends = G.endpoints
    share = (
        (ends[:, 0][:, None] == ends[:, 0][None, :])
        | (ends[:, 0][:, None] == ends[:, 1][None, :])
        | (ends[:, 1][:, None] == ends[:, 0][None, :])
        | (ends[:, 1][:, None] == ends[:, 1][None, :])
    )
    np.fill_diagonal(share, False)
    non = ~share
    np.fill_diagonal(non, False)
    return share, non


def second_moment_identity_check(
    G: Graph,
    trees: Sequence[Iterable[int]] | None = None,
    weights: Sequence[float] | None = None,
) -> IdentityResiduals:
    """Residuals of the adjacent / non-adjacent pair-sum identities.

    With ``trees`` (samples or an enumerated list; ``weights`` default to
    uniform) both sides come from that measure.  Without, the UST measure is
    used exactly: pair probabilities from transfer currents, and the vertex
    second moments from Kirchhoff plus per-vertex pair sums.
    """
    n = G.n
    adj, non = _adjacency_masks(G)
    if trees is not None:
        trees = [tuple(t) for t in trees]
        w = np.full(len(trees), 1.0 / len(trees)) if weights is None else np.asarray(weights, float)
        ind = np.zeros((len(trees), G.m))
        for i, t in enumerate(trees):
            ind[i, list(t)] = 1.0
        P = (ind * w[:, None]).T @ ind
        deg = tree_degrees(G, np.array(trees, dtype=np.int64).reshape(len(trees), -1))
        sum_sq = float(w @ (deg**2).sum(axis=1))
        source = "measure"
    else:
        sys = LaplacianSystem(G)
        P = pair_probability_matrix(sys)
        diag = np.diag(P).copy()
        sum_sq = 0.0
        for v in range(n):
            inc = list(G.incident[v])
            block = P[np.ix_(inc, inc)]
            sum_sq += diag[inc].sum() + block.sum() - np.trace(block)
        source = "exact"
    lhs_adj = float(P[adj].sum())
    lhs_non = float(P[non].sum())
    return IdentityResiduals(
        adjacent=lhs_adj - (sum_sq - 2 * (n - 1)),
        nonadjacent=lhs_non - (n * (n - 1) - sum_sq),
        sum_sq_degree=sum_sq,
        source=source,
    )


# ------------------------------------------------------------ K_n closed forms


@dataclass(frozen=True)
class KnMoments:
    n: int
    p0: Fraction
    p1: Fraction
    p2: Fraction
    mean_sq_degree: Fraction


def kn_ust_moments(n: int) -> KnMoments:
    """p0, p1, p2 and E[deg^2] for the UST of K_n, as exact rationals."""
    if n < 4:
        raise ValueError("kn_ust_moments needs n >= 4")
    mean_sq = 5 - Fraction(11, n) + Fraction(6, n * n)
    total = n * mean_sq
    p1 = (total - 2 * (n - 1)) / (n * (n - 1) * (n - 2))
    p2 = 4 * (n * (n - 1) - total) / (n * (n - 1) * (n - 2) * (n - 3))
    return KnMoments(n, Fraction(2, n), p1, p2, mean_sq)


def knn_threshold(n: int) -> float:
    """Second-moment threshold for non-adjacent pair negative correlation on K_{n,n}."""
    if n < 2:
        raise ValueError("knn_threshold needs n >= 2")
    return 5 - 13 / (2 * n) + 3 / n**2 - 1 / (2 * n**3)


def upper_bound(d: int) -> float:
    """6 - (d+7)/(d+1)^2 - 2/(d(d+1)), the regular-graph bound for d >= 3."""
    if d < 3:
        raise ValueError("upper_bound needs d >= 3")
    return 6 - (d + 7) / (d + 1) ** 2 - 2 / (d * (d + 1))


# ----------------------------------------------------------- exact moments


def _vertex_wedge_sums(sys: LaplacianSystem) -> np.ndarray:
    """For each vertex, the sum over ordered distinct neighbour pairs (y, z) of
    r1*r2 - K^2 (simple graphs)."""
    G = sys.graph
    g = sys.green
    diag = np.diag(g)
    out = np.zeros(G.n)
    for x in range(G.n):
        nb = np.array(G.neighbors[x], dtype=np.int64)
        if len(nb) < 2:
            continue
        r = diag[x] + diag[nb] - 2 * g[x, nb]
        t = diag[nb][:, None] + diag[nb][None, :] - 2 * g[np.ix_(nb, nb)]
        K = (r[:, None] + r[None, :] - t) / 2
        P = r[:, None] * r[None, :] - K * K
        out[x] = P.sum() - np.trace(P)
    return out


def vertex_second_moments(sys: LaplacianSystem) -> np.ndarray:
    """E[deg(v)^2] for every vertex of a simple graph, from wedge resistances."""
    G = sys.graph
    if not G.is_simple:
        raise GraphError("vertex_second_moments needs a simple graph")
    first = np.zeros(G.n)
    np.add.at(first, G.endpoints.ravel(), np.repeat(edge_resistances(sys), 2))
    return first + _vertex_wedge_sums(sys)


def _direct_vertex_second_moments(sys: LaplacianSystem) -> np.ndarray:
    """Same quantity via the full transfer-current matrix (independent route)."""
    G = sys.graph
    P = pair_probability_matrix(sys)
    out = np.zeros(G.n)
    for v in range(G.n):
        inc = list(G.incident[v])
        out[v] = P[np.ix_(inc, inc)].sum()
    return out


@dataclass
class SecondMomentReport:
    graph: str
    n: int
    d: int
    mean_sq_degree: float
    p1_adjacent: float
    per_vertex: np.ndarray = field(repr=False)
    direct_mean_sq_degree: float
    upper_bound_value: float | None

    def as_dict(self) -> dict:
        return {
            "graph": self.graph,
            "n": self.n,
            "d": self.d,
            "mean_sq_degree": self.mean_sq_degree,
            "p1": self.p1_adjacent,
            "upper_bound": self.upper_bound_value,
            "residuals": {"direct_minus_wedge": self.direct_mean_sq_degree - self.mean_sq_degree},
        }


def exact_mean_sq_degree(G: Graph, sys: LaplacianSystem | None = None, direct: bool = True) -> SecondMomentReport:
    """Exact E[deg(X)^2] on a simple connected regular graph.

    p1 is the average of the wedge pair probability r1*r2 - K^2 over ordered
    wedges; the result 2 - 2/n + d(d-1)p1 is checked against the per-vertex
    sum from the transfer-current matrix when ``direct`` is set.
    """
    d = G.require_simple_regular()
    sys = sys or LaplacianSystem(G)
    n = G.n
    wedge = _vertex_wedge_sums(sys)
    n_wedges = n * d * (d - 1)
    p1 = float(wedge.sum() / n_wedges) if n_wedges else 0.0
    value = 2 - 2 / n + d * (d - 1) * p1
    per_vertex = vertex_second_moments(sys)
    if direct:
        direct_val = float(_direct_vertex_second_moments(sys).mean())
        ensure(abs(direct_val - value) <= 1e-9 * max(1.0, value),
               f"{G!r}: wedge route {value!r} != transfer-current route {direct_val!r}")
    else:
        direct_val = float(per_vertex.mean())
    return SecondMomentReport(
        graph=G.name or repr(G),
        n=n,
        d=d,
        mean_sq_degree=value,
        p1_adjacent=p1,
        per_vertex=per_vertex,
        direct_mean_sq_degree=direct_val,
        upper_bound_value=upper_bound(d) if d >= 3 else None,
    )


def wedge_law_p1(G: Graph, sys: LaplacianSystem | None = None) -> float:
    """p1 weighted by a two-step simple random walk from a uniform start, conditioned on X2 != X0."""
    d = G.require_simple_regular()
    sys = sys or LaplacianSystem(G)
    n = G.n
    step = 1.0 / (n * d * d)
    wedge = _vertex_wedge_sums(sys)
    return float(wedge.sum() * step / (1 - 1 / d))


# ------------------------------------------------------- wedge expectations


@dataclass(frozen=True)
class WedgeExpectationReport:
    n: int
    d: int
    E_alpha: float
    E_gamma: float
    E_K: float
    E_alphabeta: float
    E_alpha_closed: float
    E_gamma_closed: float
    E_alphabeta_bound: float


def wedge_expectations(G: Graph, sys: LaplacianSystem | None = None, tol: float = 1e-9) -> WedgeExpectationReport:
    """Average alpha, gamma, K and alpha*beta over uniform ordered wedges, with the closed forms."""
    d = G.require_simple_regular()
    if d < 3:
        raise ValueError("wedge_expectations needs d >= 3")
    sys = sys or LaplacianSystem(G)
    n = G.n
    a = 2 / (d + 1)
    g = sys.green
    diag = np.diag(g)
    s_alpha = s_gamma = s_K = s_ab = 0.0
    for x in range(n):
        nb = np.array(G.neighbors[x], dtype=np.int64)
        r = diag[x] + diag[nb] - 2 * g[x, nb]
        t = diag[nb][:, None] + diag[nb][None, :] - 2 * g[np.ix_(nb, nb)]
        off = ~np.eye(d, dtype=bool)
        al = r - a
        s_alpha += al.sum() * (d - 1)
        s_gamma += (t - a)[off].sum()
        s_K += ((r[:, None] + r[None, :] - t) / 2)[off].sum()
        s_ab += (np.outer(al, al))[off].sum()
    W = n * d * (d - 1)
    rep = WedgeExpectationReport(
        n=n,
        d=d,
        E_alpha=s_alpha / W,
        E_gamma=s_gamma / W,
        E_K=s_K / W,
        E_alphabeta=s_ab / W,
        E_alpha_closed=2 * (n - d - 1) / (n * d * (d + 1)),
        E_gamma_closed=4 * (n - d - 1) / (n * (d - 1) * (d + 1)),
        E_alphabeta_bound=(d + 2) * (n - d - 1) / (n * d * d * (d + 1)),
    )
    ensure(abs(rep.E_alpha - rep.E_alpha_closed) <= tol, f"E[alpha] mismatch on {G!r}: {rep}")
    ensure(abs(rep.E_gamma - rep.E_gamma_closed) <= tol, f"E[gamma] mismatch on {G!r}: {rep}")
    ensure(rep.E_alphabeta <= rep.E_alphabeta_bound + tol, f"E[alpha beta] bound fails on {G!r}: {rep}")
    return rep


# ------------------------------------------------------------ constant audit


@dataclass(frozen=True)
class ConstantAudit:
    graph: str
    n: int
    d: int
    sum_reff_sq: float
    reff_sq_bound: float
    sum_sq_degree: float
    sum_sq_bound: float

    @property
    def holds(self) -> bool:
        return self.sum_reff_sq <= self.reff_sq_bound and self.sum_sq_degree <= self.sum_sq_bound


def resistance_constant_check(corpus: Iterable[Graph]) -> list[ConstantAudit]:
    """Check sum reff^2 <= 45|V|/d and sum_x E[deg^2] <= 92|V| on each graph."""
    rows = []
    for G in corpus:
        d = G.require_simple_regular()
        sys = LaplacianSystem(G)
        r = edge_resistances(sys)
        rep = exact_mean_sq_degree(G, sys, direct=False)
        rows.append(ConstantAudit(
            graph=G.name or repr(G),
            n=G.n,
            d=d,
            sum_reff_sq=float((r**2).sum()),
            reff_sq_bound=45 * G.n / d,
            sum_sq_degree=rep.mean_sq_degree * G.n,
            sum_sq_bound=92.0 * G.n,
        ))
    return rows


# --------------------------------------------------------- sharpness family


@dataclass(frozen=True)
class SharpnessRow:
    d: int
    q: int
    n: int
    block_mean_sq_degree: float
    port_mean_degree: float
    mean_sq_degree: float
    upper_bound: float

    @property
    def gap(self) -> float:
        return 6.0 - self.mean_sq_degree


def sharpness_row(d: int) -> SharpnessRow:
    """Exact E[deg^2] on the d-th sharpness graph from one block.

    The UST of the full graph is the product of independent block USTs plus
    all bridges, so the centre contributes d^2 and each block contributes its
    own second-moment sum plus the port's extra bridge: 2 E[deg o] + 1.
    """
    block, port = sharpness_block(d)
    q = block.n
    sys = LaplacianSystem(block)
    per_vertex = vertex_second_moments(sys)
    r = edge_resistances(sys)
    port_deg = float(sum(r[e] for e in block.incident[port]))
    block_total = float(per_vertex.sum()) + 2 * port_deg + 1
    n = 1 + d * q
    value = (d * d + d * block_total) / n
    return SharpnessRow(d, q, n, float(per_vertex.sum()) / q, port_deg, value, upper_bound(d))


def sharpness_sweep(d_list: Iterable[int]) -> list[SharpnessRow]:
    return [sharpness_row(d) for d in d_list]


def sharpness_full_graph(d: int) -> SecondMomentReport:
    """Cross-check route: solve the whole (1 + d(d+2))-vertex graph."""
    return exact_mean_sq_degree(sharpness_graph(d))


# ------------------------------------------------------------------ corpus


def regular_corpus(seed: int = 0, max_random_n: int = 200, sharpness_max_d: int = 13) -> list[Graph]:
    """Simple connected regular graphs used by the bound checks.

    Cycles are included; the closed-form bound applies only for d >= 3, and
    for d = 2 the trivial bound d^2 = 4 is the relevant one.
    """
    out: list[Graph] = []
    out += [complete_graph(n) for n in (4, 5, 6, 8, 12, 20, 30)]
    out += [complete_bipartite(n) for n in (3, 4, 6, 10)]
    out.append(petersen())
    out += [cycle_graph(n) for n in (3, 5, 8, 13)]
    for i, (n, d) in enumerate([(12, 3), (20, 4), (30, 4), (40, 5), (60, 3), (60, 6), (100, 3),
                                (100, 8), (150, 4), (200, 3), (200, 6), (200, 10)]):
        if n <= max_random_n:
            out.append(random_regular(n, d, seed + i))
    out += [sharpness_graph(d) for d in range(5, sharpness_max_d + 1, 2)]
    return out
