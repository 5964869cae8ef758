"""Minimum spanning trees under i.i.d. continuous weights.

The MST law depends only on the rank order of the weights, so the exact
oracle works over orderings and never sees a tie.  Two exact routes exist:
a literal enumeration of all m! orderings (numba, partitioned by the first
edge), and a Markov chain over forests that Kruskal passes through, where
the next accepted edge is uniform among edges joining distinct components.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from . import mc
from .graphs import Graph, GraphError, complete_graph, is_connected, lps_gadget
from .ust import _adjacency_masks

log = logging.getLogger(__name__)

ORACLE_CAP = 12
STRATIFIED_CAP = 16


class TieError(ValueError):
    """Two edges carry the same weight."""


class OracleCapExceeded(ValueError):
    """The graph has too many edges for the requested exact route."""


# ----------------------------------------------------------- deterministic MST


def check_weights(G: Graph, w: Sequence[float]) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (G.m,):
        raise ValueError(f"expected {G.m} weights, got shape {w.shape}")
    s = np.sort(w)
    if np.any(s[1:] == s[:-1]):
        raise TieError("weights must be pairwise distinct")
    return w


class _DSU:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> bool:
        a, b = self.find(a), self.find(b)
        if a == b:
            return False
        if self.rank[a] < self.rank[b]:
            a, b = b, a
        self.parent[b] = a
        if self.rank[a] == self.rank[b]:
            self.rank[a] += 1
        return True


def kruskal(G: Graph, w: Sequence[float]) -> tuple[int, ...]:
    w = check_weights(G, w)
    dsu = _DSU(G.n)
    out = []
    for e in np.argsort(w, kind="stable"):
        u, v = G.edges[e]
        if dsu.union(u, v):
            out.append(int(e))
            if len(out) == G.n - 1:
                break
    if len(out) != G.n - 1:
        raise GraphError(f"{G!r} is not connected")
    return tuple(sorted(out))


def prim(G: Graph, w: Sequence[float]) -> tuple[int, ...]:
    w = check_weights(G, w)
    seen = [False] * G.n
    seen[0] = True
    heap = [(w[e], e, G.other(e, 0)) for e in G.incident[0]]
    heapq.heapify(heap)
    out = []
    while heap and len(out) < G.n - 1:
        _, e, v = heapq.heappop(heap)
        if seen[v]:
            continue
        seen[v] = True
        out.append(e)
        for f in G.incident[v]:
            x = G.other(f, v)
            if not seen[x]:
                heapq.heappush(heap, (w[f], f, x))
    if len(out) != G.n - 1:
        raise GraphError(f"{G!r} is not connected")
    return tuple(sorted(out))


def mst_of(G: Graph, w: Sequence[float]) -> tuple[int, ...]:
    """The unique minimum spanning tree (sorted edge ids); Kruskal and Prim must agree."""
    a = kruskal(G, w)
    b = prim(G, w)
    if a != b:
        raise AssertionError(f"Kruskal {a} and Prim {b} disagree")
    return a


# ------------------------------------------------------------ exact oracle


@dataclass
class OrderingOracleResult:
    graph: str
    n: int
    m: int
    method: str
    exact: bool
    orderings_evaluated: int
    p_edge: list[Fraction]
    tree_law: dict[tuple[int, ...], Fraction] = field(repr=False)
    sum_sq_degree: Fraction
    p1: Fraction | None
    p2: Fraction | None
    pairs: dict[tuple[int, int], Fraction]
    edges: tuple[tuple[int, int], ...] = field(default=(), repr=False)

    @property
    def mean_sq_degree(self) -> Fraction:
        return self.sum_sq_degree / self.n

    def pair(self, e: int, f: int) -> Fraction:
        if e == f:
            return self.p_edge[e]
        return sum((p for t, p in self.tree_law.items() if e in t and f in t), Fraction(0))

    def as_dict(self) -> dict:
        return {
            "graph": self.graph,
            "n": self.n,
            "m": self.m,
            "method": self.method,
            "exact": self.exact,
            "orderings_evaluated": self.orderings_evaluated,
            "p_edge": self.p_edge,
            "sum_sq_degree": self.sum_sq_degree,
            "mean_sq_degree": self.mean_sq_degree,
            "p1": self.p1,
            "p2": self.p2,
            "pairs": {f"{e},{f}": p for (e, f), p in self.pairs.items()},
        }


def _tree_law_forest_dp(G: Graph) -> dict[tuple[int, ...], Fraction]:
    """Exact MST law by pushing probability through the forests Kruskal visits."""
    ends = G.edges
    layer: dict[frozenset, Fraction] = {frozenset(): Fraction(1)}
    for _ in range(G.n - 1):
        nxt: dict[frozenset, Fraction] = {}
        for F, p in layer.items():
            dsu = _DSU(G.n)
            for e in F:
                dsu.union(*ends[e])
            live = [e for e in range(G.m) if dsu.find(ends[e][0]) != dsu.find(ends[e][1])]
            if not live:
                raise GraphError(f"{G!r} is not connected")
            step = p / len(live)
            for e in live:
                key = F | {e}
                nxt[key] = nxt.get(key, Fraction(0)) + step
        layer = nxt
    return {tuple(sorted(F)): p for F, p in layer.items()}


@njit(cache=True, nogil=True)
def _enumerate_from(first, u, v, n, m, counts):
    rest = np.empty(m - 1, dtype=np.int64)
    k = 0
    for e in range(m):
        if e != first:
            rest[k] = e
            k += 1
    parent = np.empty(n, dtype=np.int64)
    c = np.zeros(m - 1, dtype=np.int64)
    i = 0
    total = 0
    while True:
        # Kruskal on order [first] + rest
        for x in range(n):
            parent[x] = x
        mask = 0
        acc = 0
        for j in range(m):
            e = first if j == 0 else rest[j - 1]
            a = u[e]
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            b = v[e]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a != b:
                parent[a] = b
                mask |= 1 << e
                acc += 1
                if acc == n - 1:
                    break
        counts[mask] += 1
        total += 1
        # next permutation of rest (Heap's algorithm, iterative)
        while i < m - 1:
            if c[i] < i:
                if i % 2 == 0:
                    t = rest[0]
                    rest[0] = rest[i]
                    rest[i] = t
                else:
                    t = rest[c[i]]
                    rest[c[i]] = rest[i]
                    rest[i] = t
                c[i] += 1
                i = 0
                break
            c[i] = 0
            i += 1
        else:
            return total


def _tree_law_permutations(G: Graph, threads: int = 1) -> dict[tuple[int, ...], Fraction]:
    """Exact MST law by running Kruskal on every one of the m! orderings."""
    if not is_connected(G):
        raise GraphError(f"{G!r} is not connected")
    u = G.endpoints[:, 0].copy()
    v = G.endpoints[:, 1].copy()

    def part(first):
        counts = np.zeros(1 << G.m, dtype=np.int64)
        done = _enumerate_from(first, u, v, G.n, G.m, counts)
        assert done == math.factorial(G.m - 1)
        return counts

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(part, range(G.m)))
    else:
        parts = [part(f) for f in range(G.m)]
    counts = np.sum(parts, axis=0)
    total = math.factorial(G.m)
    assert int(counts.sum()) == total
    law = {}
    for mask in np.flatnonzero(counts):
        tree = tuple(e for e in range(G.m) if (int(mask) >> e) & 1)
        law[tree] = Fraction(int(counts[mask]), total)
    return law


def _is_complete_host(G: Graph) -> bool:
    return G.is_simple and G.m == G.n * (G.n - 1) // 2


def canonical_pairs(G: Graph) -> dict[str, tuple[int, int]]:
    """The lexicographically first adjacent and non-adjacent edge pairs, where they exist."""
    adj, non = _adjacency_masks(G)
    out = {}
    for name, mask in (("adjacent", adj), ("non-adjacent", non)):
        idx = np.argwhere(np.triu(mask))
        if len(idx):
            out[name] = (int(idx[0][0]), int(idx[0][1]))
    return out


def _summarize(G: Graph, law: dict, method: str, exact: bool, evaluated: int,
               pairs: Iterable[tuple[int, int]] | None) -> OrderingOracleResult:
    n, m = G.n, G.m
    p_edge = [Fraction(0)] * m
    pair_tab: dict[tuple[int, int], Fraction] = {}
    sum_sq = Fraction(0)
    adj_total = Fraction(0)
    for tree, p in law.items():
        deg = [0] * n
        for e in tree:
            p_edge[e] += p
            a, b = G.edges[e]
            deg[a] += 1
            deg[b] += 1
        sum_sq += p * sum(d * d for d in deg)
        adj_total += p * sum(d * (d - 1) for d in deg)
    adj, non = _adjacency_masks(G)
    n_adj, n_non = int(adj.sum()), int(non.sum())
    # ordered pairs of distinct tree edges: (n-1)(n-2) per tree
    non_total = (n - 1) * (n - 2) - adj_total
    # parallel edges share both endpoints and never coexist in a tree, but
    # they do count as adjacent pairs of the host
    p1 = adj_total / n_adj if n_adj else None
    p2 = non_total / n_non if n_non else None
    if pairs is None:
        pairs = list(canonical_pairs(G).values())
    res = OrderingOracleResult(
        graph=G.name or repr(G), n=n, m=m, method=method, exact=exact,
        orderings_evaluated=evaluated, p_edge=p_edge, tree_law=law,
        sum_sq_degree=sum_sq, p1=p1, p2=p2, pairs={}, edges=tuple(G.edges),
    )
    for e, f in pairs:
        pair_tab[(e, f)] = res.pair(e, f)
    res.pairs = pair_tab
    if exact:
        _check_oracle(G, res)
    return res


def _check_oracle(G: Graph, res: OrderingOracleResult) -> None:
    n = G.n
    if sum(res.p_edge) != n - 1:
        raise AssertionError(f"edge probabilities sum to {sum(res.p_edge)}, not {n - 1}")
    if sum(res.tree_law.values()) != 1:
        raise AssertionError("tree law does not sum to 1")
    if _is_complete_host(G) and n >= 4:
        cor = complete_host_identities(res)
        bad = [k for k, ok in cor.items() if not ok]
        if bad:
            raise AssertionError(f"complete-host identities fail: {bad}")


def complete_host_identities(res: OrderingOracleResult) -> dict[str, bool]:
    """Exact identities on K_n linking p0, p1, p2 and the degree second moment."""
    n = res.n
    S = res.sum_sq_degree
    mean = S / n
    p0 = Fraction(2, n)
    p1 = (S - 2 * (n - 1)) / (n * (n - 1) * (n - 2))
    p2 = 4 * (n * (n - 1) - S) / (n * (n - 1) * (n - 2) * (n - 3))
    out = {
        "p0_uniform": all(p == p0 for p in res.p_edge),
        "p1_identity": res.p1 == p1,
        "p2_identity": res.p2 == p2,
        "adjacent_threshold_equivalence":
            (res.p1 <= p0 * p0) == (mean <= 6 - Fraction(14, n) + Fraction(8, n * n)),
        "nonadjacent_threshold_equivalence":
            (res.p2 <= p0 * p0) == (mean >= 5 - Fraction(11, n) + Fraction(6, n * n)),
    }
    for (e, f), p in res.pairs.items():
        shared = set(res.edges[e]) & set(res.edges[f])
        out[f"pair_{e}_{f}_symmetric"] = p == (res.p1 if shared else res.p2)
    return out


def exact_ordering_oracle(
    G: Graph,
    pairs: Iterable[tuple[int, int]] | None = None,
    method: str = "forest-dp",
    threads: int = 1,
) -> OrderingOracleResult:
    """Exact MST statistics over all m! weight orderings, as rationals.

    ``method`` is "forest-dp" (default, fast) or "permutations" (literal
    enumeration).  Both are exact and give identical results.
    """
    if G.m > ORACLE_CAP:
        raise OracleCapExceeded(f"m = {G.m} exceeds the exact-oracle cap of {ORACLE_CAP}")
    if method == "forest-dp":
        if not is_connected(G):
            raise GraphError(f"{G!r} is not connected")
        law = _tree_law_forest_dp(G)
    elif method == "permutations":
        law = _tree_law_permutations(G, threads)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _summarize(G, law, method, True, math.factorial(G.m), pairs)


def stratified_ordering_estimate(
    G: Graph,
    n_per_stratum: int,
    seed: int,
    pairs: Iterable[tuple[int, int]] | None = None,
) -> OrderingOracleResult:
    """Approximate oracle for 13 <= m <= 16: random orderings stratified by first edge.

    Each of the m strata (which edge comes first) has probability 1/m and
    receives ``n_per_stratum`` orderings.  The output is labelled approximate.
    """
    if G.m > STRATIFIED_CAP:
        raise OracleCapExceeded(f"m = {G.m} exceeds the stratified cap of {STRATIFIED_CAP}")
    rng = np.random.default_rng(seed)
    law: dict[tuple[int, ...], Fraction] = {}
    weight = Fraction(1, G.m * n_per_stratum)
    ranks = np.arange(G.m, dtype=float)
    for first in range(G.m):
        others = np.array([e for e in range(G.m) if e != first])
        for _ in range(n_per_stratum):
            order = np.concatenate(([first], rng.permutation(others)))
            w = np.empty(G.m)
            w[order] = ranks
            t = kruskal(G, w)
            law[t] = law.get(t, Fraction(0)) + weight
    return _summarize(G, law, "stratified", False, G.m * n_per_stratum, pairs)


# ------------------------------------------------------------- Monte Carlo


@njit(cache=True, nogil=True)
def _mst_batch(u, v, n, n_samples, seed, watch, edge_counts, sq_mean, adj_count, watch_ind):
    np.random.seed(seed)
    m = u.shape[0]
    parent = np.empty(n, dtype=np.int64)
    rank = np.empty(n, dtype=np.int64)
    deg = np.empty(n, dtype=np.int64)
    in_tree = np.zeros(m, dtype=np.bool_)
    redraws = 0
    for s in range(n_samples):
        w = np.random.random(m)
        order = np.argsort(w)
        while True:
            tie = -1
            for j in range(1, m):
                if w[order[j]] == w[order[j - 1]]:
                    tie = order[j]
                    break
            if tie < 0:
                break
            w[tie] = np.random.random()
            order = np.argsort(w)
            redraws += 1
        for x in range(n):
            parent[x] = x
            rank[x] = 0
            deg[x] = 0
        in_tree[:] = False
        acc = 0
        for j in range(m):
            e = order[j]
            a = u[e]
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            b = v[e]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a == b:
                continue
            if rank[a] < rank[b]:
                a, b = b, a
            parent[b] = a
            if rank[a] == rank[b]:
                rank[a] += 1
            in_tree[e] = True
            edge_counts[e] += 1
            deg[u[e]] += 1
            deg[v[e]] += 1
            acc += 1
            if acc == n - 1:
                break
        sq = 0
        ad = 0
        for x in range(n):
            sq += deg[x] * deg[x]
            ad += deg[x] * (deg[x] - 1)
        sq_mean[s] = sq / n
        adj_count[s] = ad
        for k in range(watch.shape[0]):
            watch_ind[s, k] = in_tree[watch[k]]
    return redraws


@dataclass
class MstMonteCarlo:
    graph: str
    n: int
    m: int
    n_samples: int
    seed: int
    p_edge: np.ndarray
    p_edge_se: np.ndarray
    mean_sq_degree: mc.EstimatorReport
    p1: mc.EstimatorReport | None
    p2: mc.EstimatorReport | None
    watched: dict[int, mc.EstimatorReport]
    pairs: dict[tuple[int, int], dict]
    tie_redraws: int

    def as_dict(self) -> dict:
        return {
            "graph": self.graph,
            "n": self.n,
            "m": self.m,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "p0_mean": float(self.p_edge.mean()),
            "p_edge": self.p_edge,
            "p_edge_se": self.p_edge_se,
            "mean_sq_degree": self.mean_sq_degree.as_dict(),
            "p1": self.p1.as_dict() if self.p1 else None,
            "p2": self.p2.as_dict() if self.p2 else None,
            "edges": {str(e): r.as_dict() for e, r in self.watched.items()},
            "pairs": {f"{e},{f}": rec for (e, f), rec in self.pairs.items()},
            "tie_redraws": self.tie_redraws,
        }


def mc_mst_moments(
    G: Graph,
    n_samples: int,
    seed: int,
    threads: int = 1,
    pairs: Iterable[tuple[int, int]] | None = None,
    level: float = 0.95,
) -> MstMonteCarlo:
    """Monte Carlo MST statistics from i.i.d. uniform weights, deterministic given ``seed``."""
    if not is_connected(G):
        raise GraphError(f"{G!r} is not connected")
    pairs = list(canonical_pairs(G).values()) if pairs is None else [tuple(p) for p in pairs]
    watch = np.array(sorted({e for p in pairs for e in p}), dtype=np.int64)
    slot = {int(e): k for k, e in enumerate(watch)}
    u = G.endpoints[:, 0].copy()
    v = G.endpoints[:, 1].copy()
    adj, non = _adjacency_masks(G)
    n_adj, n_non = int(adj.sum()), int(non.sum())
    n = G.n

    def chunk(size, ss):
        counts = np.zeros(G.m, dtype=np.int64)
        sq = np.empty(size)
        ad = np.empty(size, dtype=np.int64)
        ind = np.zeros((size, len(watch)), dtype=np.bool_)
        red = _mst_batch(u, v, n, size, mc.int_seed(ss), watch, counts, sq, ad, ind)
        parts = {"sq": mc.Moments.of(sq)}
        if n_adj:
            parts["p1"] = mc.Moments.of(ad / n_adj)
        if n_non:
            parts["p2"] = mc.Moments.of(((n - 1) * (n - 2) - ad) / n_non)
        return counts, parts, ind, red

    res = mc.run_chunks(chunk, n_samples, seed, threads)
    counts = np.sum([r[0] for r in res], axis=0)
    ind = np.concatenate([r[2] for r in res]).astype(float)
    redraws = sum(r[3] for r in res)
    if redraws:
        log.info("mc_mst_moments: %d weight ties redrawn", redraws)
    comb = {k: mc.Moments.combine([r[1][k] for r in res]) for k in res[0][1]}
    p = counts / n_samples
    rep = lambda name, key: mc.EstimatorReport.from_moments(name, comb[key], seed, level) if key in comb else None
    watched = {int(e): mc.EstimatorReport.from_samples(f"p_edge[{e}]", ind[:, k], seed, level)
               for k, e in enumerate(watch)}
    pair_recs = {}
    for e, f in pairs:
        ie, jf = ind[:, slot[e]], ind[:, slot[f]]
        pair_recs[(e, f)] = _margin_record(ie, jf, seed, level)
    return MstMonteCarlo(
        graph=G.name or repr(G), n=n, m=G.m, n_samples=n_samples, seed=seed,
        p_edge=p, p_edge_se=np.sqrt(p * (1 - p) / max(n_samples - 1, 1)),
        mean_sq_degree=rep("mst_mean_sq_degree", "sq"),
        p1=rep("p1", "p1"), p2=rep("p2", "p2"),
        watched=watched, pairs=pair_recs, tie_redraws=int(redraws),
    )


def _margin_record(ie: np.ndarray, jf: np.ndarray, seed: int, level: float) -> dict:
    """P[e,f] - P[e]P[f] with a delta-method confidence interval."""
    both = ie * jf
    pe, pf, pp = ie.mean(), jf.mean(), both.mean()
    influence = both - pf * ie - pe * jf
    r = mc.EstimatorReport.from_samples("margin", influence, seed, level)
    margin = pp - pe * pf
    half = (r.ci_high - r.ci_low) / 2
    return {
        "p_pair": float(pp), "p_e": float(pe), "p_f": float(pf),
        "margin": float(margin), "standard_error": r.standard_error,
        "ci": [float(margin - half), float(margin + half)], "level": level,
    }


# ----------------------------------------------------------------- verdicts


def pnc_verdict(
    G: Graph,
    pair: str | tuple[int, int] = "non-adjacent",
    method: str = "exact",
    n_samples: int = 10**6,
    seed: int = 0,
    threads: int = 1,
) -> dict:
    """Sign and size of P[e,f] - P[e]P[f] for one pair of edges.

    Exact verdicts are rational.  Monte Carlo verdicts carry a confidence
    interval and only say "consistent" or "inconclusive"; a strict claim is
    never made from sampling.
    """
    if isinstance(pair, str):
        cp = canonical_pairs(G)
        if pair not in cp:
            raise ValueError(f"{G!r} has no {pair} pair")
        e, f = cp[pair]
        pair_class = pair
    else:
        e, f = pair
        adj, _ = _adjacency_masks(G)
        pair_class = "adjacent" if adj[e, f] else "non-adjacent"
    rec = {"graph": G.name or repr(G), "pair": [e, f], "pair_class": pair_class, "method": method}
    if method == "exact":
        res = exact_ordering_oracle(G, [(e, f)], threads=threads)
        pp, pe, pf = res.pairs[(e, f)], res.p_edge[e], res.p_edge[f]
        margin = pp - pe * pf
        rec.update(p_pair=pp, p_e=pe, p_f=pf, margin=margin, exact=True,
                   orderings=res.orderings_evaluated,
                   verdict="p-NC holds" if margin <= 0 else "p-NC VIOLATED")
        if _is_complete_host(G) and G.n >= 4:
            rec["threshold"] = _threshold_record(G.n, res.mean_sq_degree, pair_class)
    elif method == "mc":
        r = mc_mst_moments(G, n_samples, seed, threads, pairs=[(e, f)])
        pr = r.pairs[(e, f)]
        lo, hi = pr["ci"]
        rec.update(pr, exact=False, n_samples=n_samples, seed=seed,
                   verdict="consistent with p-NC" if hi <= 0 else
                   ("consistent with positive correlation" if lo > 0 else "inconclusive"))
        if _is_complete_host(G) and G.n >= 4:
            rec["threshold"] = _threshold_record(G.n, r.mean_sq_degree.estimate, pair_class)
    else:
        raise ValueError(f"unknown method {method!r}")
    return rec


def _threshold_record(n: int, mean_sq, pair_class: str) -> dict:
    if pair_class == "adjacent":
        t = 6 - Fraction(14, n) + Fraction(8, n * n)
        return {"rule": "p-NC iff mean_sq_degree <= threshold", "threshold": t,
                "mean_sq_degree": mean_sq, "p_nc": mean_sq <= t}
    t = 5 - Fraction(11, n) + Fraction(6, n * n)
    return {"rule": "p-NC iff mean_sq_degree >= threshold", "threshold": t,
            "mean_sq_degree": mean_sq, "p_nc": mean_sq >= t}


# ------------------------------------------------- LPS gadget and explorations


@dataclass(frozen=True)
class LpsCertificate:
    e: int
    f: int
    p_pair: Fraction
    p_e: Fraction
    p_f: Fraction

    @property
    def margin(self) -> Fraction:
        return self.p_pair - self.p_e * self.p_f

    @property
    def positively_correlated(self) -> bool:
        return self.margin > 0


def lps_certificate(method: str = "forest-dp", threads: int = 1) -> LpsCertificate:
    """Exact MST pair law on the two-bundle gadget for one edge from each bundle."""
    G, (b1, b2) = lps_gadget()
    e, f = b1[0], b2[0]
    res = exact_ordering_oracle(G, [(e, f)], method=method, threads=threads)
    return LpsCertificate(e, f, res.pairs[(e, f)], res.p_edge[e], res.p_edge[f])


def mst_trend(ns: Iterable[int], n_samples: int, seed: int, threads: int = 1) -> list[dict]:
    """Mean squared MST degree on K_n against n.  Exploratory data only."""
    rows = []
    for n in ns:
        r = mc_mst_moments(complete_graph(n), n_samples, seed, threads)
        d = r.mean_sq_degree
        rows.append({"n": n, "mean_sq_degree": d.estimate, "standard_error": d.standard_error,
                     "ci_low": d.ci_low, "ci_high": d.ci_high, "n_samples": n_samples})
    return rows


def pair_ratio_scan(graphs: Iterable[Graph]) -> list[dict]:
    """Largest P[e,f] / (P[e]P[f]) over edge pairs, per graph, from the exact oracle.  Exploratory."""
    rows = []
    for G in graphs:
        res = exact_ordering_oracle(G)
        best = (Fraction(0), None)
        for e, f in itertools.combinations(range(G.m), 2):
            denom = res.p_edge[e] * res.p_edge[f]
            if denom == 0:
                continue
            ratio = res.pair(e, f) / denom
            if ratio > best[0]:
                best = (ratio, (e, f))
        rows.append({"graph": G.name or repr(G), "n": G.n, "m": G.m,
                     "max_ratio": best[0], "pair": best[1]})
    return rows
