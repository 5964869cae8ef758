"""Finite multigraphs, the generators used throughout the package, and structural queries.

Vertices are ``0..n-1`` and edges are ``0..m-1``; an edge id is its index in
``Graph.edges``.  Parallel edges are allowed, self-loops are not.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import networkx as nx
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

log = logging.getLogger(__name__)


class GraphError(ValueError):
    """Invalid graph, invalid ids, or a generator precondition violation."""


class RetryCapExceeded(RuntimeError):
    """The configuration model did not produce a simple connected graph in time."""


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise GraphError("negative vertex count")
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        for i, (u, v) in enumerate(edges):
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge {i} = ({u}, {v}) has an endpoint outside [0, {self.n})")
            if u == v:
                raise GraphError(f"edge {i} is a self-loop at {u}")
        object.__setattr__(self, "edges", edges)

    @property
    def m(self) -> int:
        return len(self.edges)

    def __repr__(self):
        label = self.name or "Graph"
        return f"<{label}: n={self.n}, m={self.m}>"

    @cached_property
    def endpoints(self) -> np.ndarray:
        """``(m, 2)`` integer array of edge endpoints."""
        return np.array(self.edges, dtype=np.int64).reshape(-1, 2)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        if self.m:
            np.add.at(deg, self.endpoints.ravel(), 1)
        return deg

    @cached_property
    def incident(self) -> tuple[tuple[int, ...], ...]:
        """Edge ids incident to each vertex."""
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for i, (u, v) in enumerate(self.edges):
            inc[u].append(i)
            inc[v].append(i)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Distinct neighbours of each vertex, ascending."""
        return tuple(
            tuple(sorted({self.other(e, v) for e in self.incident[v]})) for v in range(self.n)
        )

    @cached_property
    def multiplicity(self) -> dict[tuple[int, int], int]:
        """Number of parallel edges per unordered vertex pair ``(min, max)``."""
        mult: dict[tuple[int, int], int] = {}
        for u, v in self.edges:
            key = (u, v) if u < v else (v, u)
            mult[key] = mult.get(key, 0) + 1
        return mult

    @property
    def is_simple(self) -> bool:
        return all(k == 1 for k in self.multiplicity.values())

    def other(self, e: int, v: int) -> int:
        u, w = self.edges[e]
        if v == u:
            return w
        if v == w:
            return u
        raise GraphError(f"vertex {v} is not an endpoint of edge {e}")

    def edge_between(self, u: int, v: int) -> int:
        """Lowest edge id joining ``u`` and ``v``."""
        for e in self.incident[u]:
            if self.other(e, u) == v:
                return e
        raise GraphError(f"no edge between {u} and {v}")

    def adjacency(self) -> np.ndarray:
        """Dense adjacency matrix counting parallel edges."""
        A = np.zeros((self.n, self.n))
        if self.m:
            np.add.at(A, (self.endpoints[:, 0], self.endpoints[:, 1]), 1.0)
            np.add.at(A, (self.endpoints[:, 1], self.endpoints[:, 0]), 1.0)
        return A

    def regular_degree(self) -> int | None:
        """The common degree if the graph is regular, else ``None``."""
        if self.n == 0:
            return None
        d = int(self.degrees[0])
        return d if np.all(self.degrees == d) else None

    def require_simple_regular(self) -> int:
        d = self.regular_degree()
        if d is None or not self.is_simple or not is_connected(self):
            raise GraphError(f"{self!r} is not a simple connected regular graph")
        return d


# --------------------------------------------------------------------- subsets


def check_subset(G: Graph, S: Iterable[int]) -> tuple[int, ...]:
    ids = tuple(sorted(int(e) for e in S))
    for e in ids:
        if not 0 <= e < G.m:
            raise GraphError(f"edge id {e} is not valid for {G!r}")
    if len(set(ids)) != len(ids):
        raise GraphError("edge subset contains duplicate ids")
    return ids


def component_count(G: Graph, S: Iterable[int] | None = None) -> int:
    """Components of ``(V, S)``; isolated vertices count. ``S=None`` means all edges."""
    ids = range(G.m) if S is None else check_subset(G, S)
    ids = list(ids)
    if G.n == 0:
        return 0
    if not ids:
        return G.n
    uv = G.endpoints[ids]
    adj = coo_matrix((np.ones(len(ids)), (uv[:, 0], uv[:, 1])), shape=(G.n, G.n))
    return int(connected_components(adj, directed=False)[0])


def is_connected(G: Graph, S: Iterable[int] | None = None) -> bool:
    return component_count(G, S) == 1


def is_forest(G: Graph, S: Iterable[int]) -> bool:
    ids = check_subset(G, S)
    return G.n - component_count(G, ids) == len(ids)


def degree(G: Graph, v: int, S: Iterable[int] | None = None) -> int:
    if not 0 <= v < G.n:
        raise GraphError(f"vertex {v} is not valid for {G!r}")
    if S is None:
        return int(G.degrees[v])
    return sum(1 for e in check_subset(G, S) if v in G.edges[e])


def bridges(G: Graph) -> frozenset[int]:
    """Edge ids whose removal disconnects their component.

    Parallel edges are never bridges; the DFS skips only the edge id it
    arrived by, not every edge to the parent.
    """
    disc = [-1] * G.n
    low = [0] * G.n
    out: set[int] = set()
    timer = 0
    for root in range(G.n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, -1, iter(G.incident[root]))]
        while stack:
            v, via, it = stack[-1]
            advanced = False
            for e in it:
                if e == via:
                    continue
                w = G.other(e, v)
                if disc[w] == -1:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, e, iter(G.incident[w])))
                    advanced = True
                    break
                low[v] = min(low[v], disc[w])
            if advanced:
                continue
            stack.pop()
            if stack:
                parent = stack[-1][0]
                low[parent] = min(low[parent], low[v])
                if low[v] > disc[parent]:
                    out.add(via)
    return frozenset(out)


# ------------------------------------------------------------------ generators


def complete_graph(n: int) -> Graph:
    if n < 1:
        raise GraphError("complete_graph needs n >= 1")
    return Graph(n, tuple(combinations(range(n), 2)), name=f"K{n}")


def complete_bipartite(n: int) -> Graph:
    """K_{n,n}: left side ``0..n-1``, right side ``n..2n-1``."""
    if n < 1:
        raise GraphError("complete_bipartite needs n >= 1")
    return Graph(2 * n, tuple((i, n + j) for i in range(n) for j in range(n)), name=f"K{n},{n}")


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError("cycle_graph needs n >= 3")
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)), name=f"C{n}")


def path_graph(n: int) -> Graph:
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)), name=f"P{n}")


def petersen() -> Graph:
    return from_networkx(nx.petersen_graph(), name="Petersen")


def from_networkx(H: nx.Graph, name: str = "") -> Graph:
    nodes = sorted(H.nodes())
    index = {v: i for i, v in enumerate(nodes)}
    return Graph(len(nodes), tuple((index[u], index[v]) for u, v in H.edges()), name=name)


def lps_gadget() -> tuple[Graph, tuple[tuple[int, ...], tuple[int, ...]]]:
    """K4 with the non-adjacent pairs {0,1} and {2,3} each tripled.

    Returns the graph and the two bundles of parallel edge ids.
    """
    edges = [(0, 1)] * 3 + [(2, 3)] * 3 + [(0, 2), (0, 3), (1, 2), (1, 3)]
    return Graph(4, tuple(edges), name="LPS"), ((0, 1, 2), (3, 4, 5))


def _check_odd(d: int) -> None:
    if d < 5 or d % 2 == 0:
        raise GraphError(f"sharpness constructions need odd d >= 5, got {d}")


def sharpness_block(d: int) -> tuple[Graph, int]:
    """The one-port block on q = d+2 vertices; returns ``(block, port)``.

    Port o = 0, a = 1, b = 2.  The matching on the remaining vertices pairs
    them in ascending order: (3,4), (5,6), ...
    """
    _check_odd(d)
    q = d + 2
    deleted = {(0, 1), (0, 2)} | {(i, i + 1) for i in range(3, q, 2)}
    edges = tuple(e for e in combinations(range(q), 2) if e not in deleted)
    G = Graph(q, edges, name=f"B{d}")
    deg = G.degrees
    assert deg[0] == d - 1 and np.all(deg[1:] == d), "block degree sequence"
    assert is_connected(G)
    return G, 0


@dataclass(frozen=True)
class SharpnessLayout:
    d: int
    q: int
    center: int
    ports: tuple[int, ...]
    bridge_edges: tuple[int, ...]

    def block_vertices(self, i: int) -> range:
        start = 1 + i * self.q
        return range(start, start + self.q)


def sharpness_layout(d: int) -> SharpnessLayout:
    _check_odd(d)
    q = d + 2
    block, _ = sharpness_block(d)
    ports = tuple(1 + i * q for i in range(d))
    first_bridge = d * block.m
    return SharpnessLayout(d, q, 0, ports, tuple(range(first_bridge, first_bridge + d)))


def sharpness_graph(d: int) -> Graph:
    """d copies of the block hung off a centre vertex 0 by bridges.

    Block i occupies vertices ``1+i*q .. (i+1)*q``; its port is the first of
    these.  Block edges come first (block by block), then the d bridges.
    """
    layout = sharpness_layout(d)
    block, port = sharpness_block(d)
    edges: list[tuple[int, int]] = []
    for i in range(d):
        off = 1 + i * layout.q
        edges.extend((u + off, v + off) for u, v in block.edges)
    edges.extend((layout.center, p + port) for p in layout.ports)
    G = Graph(1 + d * layout.q, tuple(edges), name=f"G{d}")
    assert G.regular_degree() == d and G.is_simple and is_connected(G)
    return G


def random_regular(n: int, d: int, seed: int | None = 0, max_tries: int | None = None) -> Graph:
    """Simple connected d-regular graph.

    For d <= 4 a uniform stub pairing is redrawn until it is simple and
    connected (exactly uniform).  Larger d, where simple pairings are rare,
    uses networkx's pairing-with-repair generator and only rejects
    disconnected draws.  After ``10*n*d`` rejected draws ``RetryCapExceeded``
    is raised.
    """
    if n * d % 2 or not 0 < d < n:
        raise GraphError(f"no simple {d}-regular graph on {n} vertices")
    cap = 10 * n * d if max_tries is None else max_tries
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), d)
    for attempt in range(1, cap + 1):
        if d <= 4:
            pairs = rng.permutation(stubs).reshape(-1, 2)
            pairs.sort(axis=1)
            if np.any(pairs[:, 0] == pairs[:, 1]):
                continue
            if len(np.unique(pairs[:, 0] * n + pairs[:, 1])) != len(pairs):
                continue
        else:
            H = nx.random_regular_graph(d, n, seed=int(rng.integers(2**32)))
            pairs = np.sort(np.array(H.edges(), dtype=np.int64), axis=1)
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        G = Graph(n, tuple(map(tuple, pairs[order].tolist())), name=f"RR({n},{d},{seed})")
        if is_connected(G):
            log.debug("random_regular(%d, %d, %s): accepted attempt %d", n, d, seed, attempt)
            return G
    raise RetryCapExceeded(f"random_regular({n}, {d}, seed={seed}): {cap} draws rejected")


def random_connected_multigraph(n: int, m: int, rng: np.random.Generator) -> Graph:
    """Random spanning tree plus ``m-n+1`` extra (possibly parallel) edges."""
    if m < n - 1:
        raise GraphError("need m >= n-1 for a connected graph")
    edges = [(int(rng.integers(0, v)), v) for v in range(1, n)]
    while len(edges) < m:
        u, v = rng.choice(n, size=2, replace=False)
        edges.append((int(min(u, v)), int(max(u, v))))
    perm = rng.permutation(n)
    return Graph(n, tuple((int(perm[u]), int(perm[v])) for u, v in edges), name=f"rand({n},{m})")


# --------------------------------------------------------------- serialization


def to_text(G: Graph) -> str:
    lines = [f"{G.n} {G.m}"] + [f"{u} {v}" for u, v in G.edges]
    return "\n".join(lines) + "\n"


def from_text(text: str, name: str = "") -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise GraphError("graph file must start with a header line 'n m'")
    n, m = map(int, rows[0])
    if len(rows) - 1 != m:
        raise GraphError(f"header announces {m} edges, found {len(rows) - 1}")
    edges = []
    for r in rows[1:]:
        if len(r) != 2:
            raise GraphError(f"bad edge line: {' '.join(r)!r}")
        edges.append((int(r[0]), int(r[1])))
    return Graph(n, tuple(edges), name=name)


def read_graph(path: str | Path) -> Graph:
    path = Path(path)
    return from_text(path.read_text(), name=path.stem)


def write_graph(G: Graph, path: str | Path) -> None:
    Path(path).write_text(to_text(G))


def parse_graph_spec(spec: str) -> Graph:
    """Build a graph from the mini-language used by the CLI.

    ``complete:n``, ``bipartite:n``, ``cycle:n``, ``regular:n:d:seed``,
    ``sharpness:d``, ``petersen``, ``lps``, ``file:path``.
    """
    kind, _, rest = spec.partition(":")
    args = rest.split(":") if rest else []
    try:
        if kind == "complete" and len(args) == 1:
            return complete_graph(int(args[0]))
        if kind == "bipartite" and len(args) == 1:
            return complete_bipartite(int(args[0]))
        if kind == "cycle" and len(args) == 1:
            return cycle_graph(int(args[0]))
        if kind == "regular" and len(args) in (2, 3):
            seed = int(args[2]) if len(args) == 3 else 0
            return random_regular(int(args[0]), int(args[1]), seed)
        if kind == "sharpness" and len(args) == 1:
            return sharpness_graph(int(args[0]))
        if kind == "petersen" and not args:
            return petersen()
        if kind == "lps" and not args:
            return lps_gadget()[0]
        if kind == "file" and rest:
            return read_graph(rest)
    except ValueError as exc:
        if isinstance(exc, GraphError):
            raise
        raise GraphError(f"bad graph spec {spec!r}: {exc}") from exc
    raise GraphError(f"unknown graph spec {spec!r}")


def handshake_ok(G: Graph) -> bool:
    return int(G.degrees.sum()) == 2 * G.m


def subgraph_components(G: Graph, removed: Sequence[int]) -> list[list[int]]:
    """Vertex sets of the components after deleting the edges ``removed``."""
    keep = [e for e in range(G.m) if e not in set(removed)]
    if not keep:
        return [[v] for v in range(G.n)]
    uv = G.endpoints[keep]
    adj = coo_matrix((np.ones(len(keep)), (uv[:, 0], uv[:, 1])), shape=(G.n, G.n))
    k, labels = connected_components(adj, directed=False)
    comps: list[list[int]] = [[] for _ in range(k)]
    for v, c in enumerate(labels):
        comps[c].append(v)
    return comps


def spanning_trees(G: Graph) -> list[tuple[int, ...]]:
    """All spanning trees by brute-force subset enumeration (small graphs only)."""
    if G.n <= 1:
        return [()]
    if G.m > 24:
        raise GraphError(f"brute-force tree enumeration refused for m = {G.m}")
    out = []
    for S in combinations(range(G.m), G.n - 1):
        parent = list(range(G.n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for e in S:
            u, v = G.edges[e]
            ru, rv = find(u), find(v)
            if ru == rv:
                break
            parent[ru] = rv
        else:
            out.append(S)
    return out
