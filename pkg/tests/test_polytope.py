import itertools
from fractions import Fraction

import numpy as np
import pytest

from spancorr import polytope
from spancorr.checks import IdentityViolation
from spancorr.graphs import (
    Graph,
    GraphError,
    complete_graph,
    cycle_graph,
    path_graph,
    petersen,
    random_connected_multigraph,
    random_regular,
)


# ------------------------------------------------------------------- rank


def test_rank_examples():
    G = cycle_graph(4)
    assert polytope.rank(G) == 0
    assert polytope.rank(G, [0, 1, 2, 3]) == 3
    assert polytope.rank(G, [0, 2]) == 2
    assert polytope.rank(complete_graph(5), range(10)) == 4


def test_rank_parallel_edges():
    G = Graph(2, ((0, 1), (0, 1)))
    assert polytope.rank(G, [0, 1]) == 1


def test_rank_submodular_exhaustive_k4():
    G = complete_graph(4)
    r = polytope.RankOracle(G)
    subsets = [S for k in range(7) for S in itertools.combinations(range(6), k)]
    rng = np.random.default_rng(0)
    for _ in range(2000):
        A = subsets[rng.integers(len(subsets))]
        B = subsets[rng.integers(len(subsets))]
        assert r.submodular_on(A, B)


# ------------------------------------------------------------- membership


def test_triangle_all_ones_violates():
    v = polytope.membership(cycle_graph(3), [1.0, 1.0, 1.0])
    assert not v.member and v.method == "exact"
    assert set(v.violated_set) == {0, 1, 2}
    assert v.lhs == pytest.approx(3) and v.bound == 2 and v.slack == pytest.approx(-1)


def test_triangle_two_thirds_on_boundary():
    assert polytope.membership(cycle_graph(3), [Fraction(2, 3)] * 3).member
    assert not polytope.membership(cycle_graph(3), [Fraction(2, 3)] * 2 + [Fraction(3, 4)]).member


def test_forest_indicator_is_member():
    G = petersen()
    F = polytope.random_forest(G, np.random.default_rng(1))
    x = np.zeros(G.m)
    x[list(F)] = 1
    assert polytope.membership(G, x).member


def test_negative_coordinate_rejected():
    with pytest.raises(ValueError):
        polytope.membership(cycle_graph(3), [0.5, -0.1, 0.2])


@pytest.mark.parametrize("seed", range(8))
def test_membership_matches_convex_combination(seed):
    rng = np.random.default_rng(seed)
    G = random_connected_multigraph(4, int(rng.integers(3, 8)), rng)
    for _ in range(6):
        x = [Fraction(int(rng.integers(0, 7)), 6) for _ in range(G.m)]
        assert polytope.membership(G, x).member == polytope.convex_combination_oracle(G, x)


def test_convex_combination_cap():
    with pytest.raises(ValueError):
        polytope.convex_combination_oracle(complete_graph(5), [0] * 10)


def test_exact_feasible_simple():
    one = Fraction(1)
    y = polytope.exact_feasible([[one, one]], [Fraction(1, 2)])
    assert y is not None and sum(y) == Fraction(1, 2) and min(y) >= 0
    assert polytope.exact_feasible([[one, one]], [Fraction(-1)]) is None


def test_fuzzer_finds_dense_violation():
    G = complete_graph(24)
    x = np.full(G.m, 0.2)
    # a vertex set U with |U| >= 12 carries 0.1 |U| (|U| - 1) > |U| - 1
    v = polytope.membership(G, x)
    assert not v.member and v.method == "heuristic"


# ----------------------------------------------------------- regular hosts


@pytest.mark.parametrize("G", [petersen(), random_regular(12, 3, 0), complete_graph(8)])
def test_alpha_membership(G):
    c = polytope.alpha_membership_check(G)
    assert c.passed
    assert c.alpha_total == pytest.approx(c.alpha_total_closed, abs=1e-9)


def test_alpha_needs_d3():
    with pytest.raises(GraphError):
        polytope.alpha_membership_check(cycle_graph(8))


def test_foster_alpha_totals():
    assert polytope.foster_alpha_total(petersen()) == pytest.approx(1.5, abs=1e-10)
    assert polytope.foster_alpha_total(random_regular(30, 4, 2)) == pytest.approx(5, abs=1e-10)


# ----------------------------------------------------------------- forests


def test_forest_inequality_single_edge():
    c = polytope.forest_degree_inequality(path_graph(2), [0], 3)
    assert (c.sum_sq_degree, c.bound, c.components, c.excess_sum) == (2, 5, 1, 0)


def test_forest_inequality_star_is_tight():
    d = 5
    G = Graph(d + 1, tuple((0, i) for i in range(1, d + 1)))
    c = polytope.forest_degree_inequality(G, range(d), d)
    assert c.sum_sq_degree == d * d + d == c.bound - d


def test_forest_inequality_rejects_cycle_and_degree():
    with pytest.raises(GraphError):
        polytope.forest_degree_inequality(cycle_graph(3), [0, 1, 2], 3)
    G = Graph(5, tuple((0, i) for i in range(1, 5)))
    with pytest.raises(ValueError):
        polytope.forest_degree_inequality(G, range(4), 3)


def test_forest_inequality_random_forests():
    G = random_regular(40, 5, 3)
    rng = np.random.default_rng(9)
    for _ in range(300):
        F = polytope.random_forest(G, rng)
        assert polytope.forest_degree_inequality(G, F, 5).holds


def test_ensure_raises_identity_violation():
    from spancorr.checks import ensure
    with pytest.raises(IdentityViolation):
        ensure(False, "boom")
