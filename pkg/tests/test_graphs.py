import numpy as np
import pytest

from spancorr.graphs import (
    Graph,
    GraphError,
    RetryCapExceeded,
    bridges,
    complete_bipartite,
    complete_graph,
    component_count,
    cycle_graph,
    from_text,
    is_connected,
    is_forest,
    lps_gadget,
    parse_graph_spec,
    path_graph,
    petersen,
    random_regular,
    sharpness_block,
    sharpness_graph,
    sharpness_layout,
    spanning_trees,
    to_text,
)


def test_self_loop_rejected():
    with pytest.raises(GraphError):
        Graph(3, ((0, 0),))


def test_vertex_out_of_range():
    with pytest.raises(GraphError):
        Graph(2, ((0, 2),))


def test_complete_graph_counts():
    G = complete_graph(6)
    assert G.m == 15 and G.regular_degree() == 5 and G.is_simple


def test_bipartite_is_regular():
    G = complete_bipartite(4)
    assert G.n == 8 and G.m == 16 and G.regular_degree() == 4


def test_petersen_shape():
    G = petersen()
    assert (G.n, G.m, G.regular_degree()) == (10, 15, 3)


def test_lps_gadget_bundles():
    G, (b1, b2) = lps_gadget()
    assert G.n == 4 and G.m == 10
    assert len({G.edges[e] for e in b1}) == 1 and len({G.edges[e] for e in b2}) == 1
    assert not G.is_simple


def test_components_and_forest():
    G = cycle_graph(5)
    assert component_count(G, []) == 5
    assert component_count(G) == 1
    assert is_forest(G, [0, 1, 2, 3])
    assert not is_forest(G, range(5))


def test_bridges_path_and_cycle():
    assert bridges(path_graph(5)) == frozenset(range(4))
    assert bridges(cycle_graph(5)) == frozenset()


def test_bridges_ignore_parallel_edges():
    G = Graph(3, ((0, 1), (0, 1), (1, 2)))
    assert bridges(G) == frozenset({2})


@pytest.mark.parametrize("d", [5, 7, 9])
def test_sharpness_graph_layout(d):
    G = sharpness_graph(d)
    lay = sharpness_layout(d)
    assert G.n == 1 + d * (d + 2)
    assert G.regular_degree() == d and G.is_simple
    assert bridges(G) == frozenset(lay.bridge_edges)
    block, port = sharpness_block(d)
    assert block.degrees[port] == d - 1 and is_connected(block)


def test_sharpness_needs_odd_d():
    with pytest.raises(GraphError):
        sharpness_graph(6)


@pytest.mark.parametrize("n,d", [(12, 3), (20, 4), (30, 6), (50, 10)])
def test_random_regular(n, d):
    G = random_regular(n, d, seed=1)
    assert G.regular_degree() == d and G.is_simple and is_connected(G)


def test_random_regular_deterministic():
    assert random_regular(20, 3, 5).edges == random_regular(20, 3, 5).edges


def test_random_regular_impossible():
    with pytest.raises(GraphError):
        random_regular(5, 3)


def test_random_regular_cap():
    with pytest.raises(RetryCapExceeded):
        random_regular(40, 5, seed=0, max_tries=0)


def test_text_round_trip():
    G = petersen()
    H = from_text(to_text(G))
    assert H.n == G.n and H.edges == G.edges


def test_text_comments():
    H = from_text("# triangle\n3 3\n0 1\n1 2\n2 0\n")
    assert H.m == 3


@pytest.mark.parametrize("spec,n,m", [("complete:5", 5, 10), ("bipartite:3", 6, 9), ("cycle:7", 7, 7),
                                      ("petersen", 10, 15), ("lps", 4, 10), ("sharpness:5", 36, 90),
                                      ("regular:20:3:4", 20, 30)])
def test_graph_spec(spec, n, m):
    G = parse_graph_spec(spec)
    assert (G.n, G.m) == (n, m)


def test_graph_spec_file(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text(to_text(cycle_graph(4)))
    assert parse_graph_spec(f"file:{p}").m == 4


@pytest.mark.parametrize("spec", ["complete", "wheel:5", "complete:x", "regular:5:3"])
def test_graph_spec_errors(spec):
    with pytest.raises(GraphError):
        parse_graph_spec(spec)


def test_spanning_tree_enumeration_counts():
    # Cayley n^(n-2), and n for cycles
    assert len(spanning_trees(complete_graph(5))) == 125
    assert len(spanning_trees(cycle_graph(6))) == 6
    # gadget trees: both bundles + one cross edge, one bundle + two cross edges, or the 4-cycle's trees
    assert len(spanning_trees(lps_gadget()[0])) == 9 * 4 + 2 * 3 * 4 + 4


def test_lps_tree_count_matches_kirchhoff():
    from spancorr.spectral import tree_count
    G = lps_gadget()[0]
    assert tree_count(G) == len(spanning_trees(G))
