from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from spancorr.graphs import (
    GraphError,
    complete_bipartite,
    complete_graph,
    cycle_graph,
    path_graph,
    petersen,
    random_regular,
    sharpness_graph,
    spanning_trees,
)
from spancorr.spectral import LaplacianSystem, pair_probability_matrix
from spancorr import ust


# ---------------------------------------------------------------- sampler


def test_sampler_on_a_tree_returns_it():
    G = path_graph(6)
    assert ust.sample_ust(G, 3) == tuple(range(5))


def test_sampler_deterministic():
    G = petersen()
    assert ust.sample_ust(G, 42) == ust.sample_ust(G, 42)


def test_sampler_four_cycle_uniform():
    G = cycle_graph(4)
    trees = ust.sample_ust_batch(G, 40000, 5)
    counts = Counter(tuple(sorted(t)) for t in trees.tolist())
    assert len(counts) == 4
    p, n = 0.25, 40000
    sd = (p * (1 - p) / n) ** 0.5
    for c in counts.values():
        assert abs(c / n - p) <= 3 * sd


def test_sampler_k4_edge_frequency():
    G = complete_graph(4)
    trees = ust.sample_ust_batch(G, 100000, 9)
    freq = np.bincount(trees.ravel(), minlength=G.m) / 100000
    sd = (0.25 / 100000) ** 0.5
    assert np.all(np.abs(freq - 0.5) <= 3 * sd)


def test_sampler_multigraph_bundle_share():
    # a 3-edge bundle in parallel with a path of length 2: bundle used with prob 3 * reff
    from spancorr.graphs import Graph
    G = Graph(3, ((0, 1), (0, 1), (0, 1), (1, 2), (2, 0)))
    trees = spanning_trees(G)
    exact = sum(any(e in t for e in (0, 1, 2)) for t in trees) / len(trees)
    s = ust.sample_ust_batch(G, 50000, 1)
    got = np.isin(s, [0, 1, 2]).any(axis=1).mean()
    assert abs(got - exact) <= 4 * (exact * (1 - exact) / 50000) ** 0.5


def test_sampler_rejects_disconnected():
    from spancorr.graphs import Graph
    with pytest.raises(GraphError):
        ust.sample_ust(Graph(4, ((0, 1), (2, 3))), 0)


def test_mc_matches_exact_petersen():
    r = ust.mc_mean_sq_degree(petersen(), 100000, 3, threads=2)
    assert r.within(ust.exact_mean_sq_degree(petersen()).mean_sq_degree, 4)


# --------------------------------------------------------------- identities


@pytest.mark.parametrize("G", [complete_graph(4), complete_graph(5), petersen(), cycle_graph(7)])
def test_identity_exact(G):
    r = ust.second_moment_identity_check(G)
    assert r.ok(1e-10)


def test_identity_on_tree_input():
    G = path_graph(5)
    r = ust.second_moment_identity_check(G, trees=[tuple(range(4))])
    assert r.adjacent == 0 and r.nonadjacent == 0


def test_identity_on_enumerated_measure_equals_exact():
    G = complete_bipartite(3)
    r1 = ust.second_moment_identity_check(G)
    r2 = ust.second_moment_identity_check(G, trees=spanning_trees(G))
    assert r2.ok(1e-10)
    assert r1.sum_sq_degree == pytest.approx(r2.sum_sq_degree, abs=1e-10)


# ------------------------------------------------------------- closed forms


def test_kn_moments_k4():
    k = ust.kn_ust_moments(4)
    assert k.mean_sq_degree == Fraction(21, 8)
    assert k.p0 == Fraction(1, 2) and k.p2 == Fraction(1, 4)
    assert k.p1 == Fraction(3, 16)


def test_kn_moments_k5_p1_matches_transfer_currents():
    # the transfer-current value on K5 is 3/25
    k = ust.kn_ust_moments(5)
    sys = LaplacianSystem(complete_graph(5))
    assert k.p1 == Fraction(3, 25)
    assert float(k.p1) == pytest.approx(pair_probability_matrix(sys)[0, 1], abs=1e-12)


def test_kn_moments_limit_and_p2():
    for n in (6, 20, 200):
        k = ust.kn_ust_moments(n)
        assert k.p2 == k.p0**2
    assert float(ust.kn_ust_moments(10**6).mean_sq_degree) == pytest.approx(5, abs=2e-5)


def test_kn_moments_small_n():
    with pytest.raises(ValueError):
        ust.kn_ust_moments(3)


def test_upper_bound_values():
    assert ust.upper_bound(3) == pytest.approx(6 - 10 / 16 - 2 / 12)
    assert ust.upper_bound(9) == pytest.approx(6 - 16 / 100 - 2 / 90)
    assert ust.upper_bound(10**6) == pytest.approx(6, abs=1e-5)
    with pytest.raises(ValueError):
        ust.upper_bound(2)


def test_knn_threshold_values():
    assert ust.knn_threshold(2) == pytest.approx(2.4375)
    assert ust.knn_threshold(3) == pytest.approx(5 - 13 / 6 + 1 / 3 - 1 / 54)
    assert ust.knn_threshold(10**6) == pytest.approx(5, abs=1e-5)


# ------------------------------------------------------------ exact moments


@pytest.mark.parametrize("n", [4, 5, 9, 20])
def test_exact_kn(n):
    r = ust.exact_mean_sq_degree(complete_graph(n))
    assert r.mean_sq_degree == pytest.approx(5 - 11 / n + 6 / n**2, abs=1e-10)


@pytest.mark.parametrize("n", [3, 5, 8])
def test_exact_cycle_against_enumeration(n):
    G = cycle_graph(n)
    trees = spanning_trees(G)
    brute = np.mean([sum(d * d for d in np.bincount(G.endpoints[list(t)].ravel(), minlength=n)) / n
                     for t in trees])
    r = ust.exact_mean_sq_degree(G)
    assert r.mean_sq_degree == pytest.approx(brute, abs=1e-12)
    assert r.mean_sq_degree == pytest.approx(4 - 6 / n, abs=1e-12)


def test_exact_petersen_frozen():
    G = petersen()
    trees = spanning_trees(G)
    assert len(trees) == 2000
    brute = np.mean([(np.bincount(G.endpoints[list(t)].ravel(), minlength=10) ** 2).mean() for t in trees])
    assert brute == pytest.approx(3.72, abs=1e-12)
    r = ust.exact_mean_sq_degree(G)
    assert r.mean_sq_degree == pytest.approx(3.72, abs=1e-12)
    assert r.mean_sq_degree < ust.upper_bound(3)


def test_exact_rejects_irregular():
    with pytest.raises(GraphError):
        ust.exact_mean_sq_degree(path_graph(4))


def test_wedge_law_equals_p1():
    G = random_regular(24, 4, 3)
    r = ust.exact_mean_sq_degree(G)
    assert ust.wedge_law_p1(G) == pytest.approx(r.p1_adjacent, abs=1e-12)


def test_report_identity():
    G = random_regular(30, 5, 1)
    r = ust.exact_mean_sq_degree(G)
    assert r.mean_sq_degree == pytest.approx(2 - 2 / r.n + r.d * (r.d - 1) * r.p1_adjacent, abs=1e-12)
    assert r.per_vertex.mean() == pytest.approx(r.mean_sq_degree, abs=1e-10)


# ------------------------------------------------------- wedge expectations


def test_wedge_expectations_kn_vanish():
    r = ust.wedge_expectations(complete_graph(8))
    assert r.E_alpha == pytest.approx(0, abs=1e-12) and r.E_gamma == pytest.approx(0, abs=1e-12)


def test_wedge_expectations_petersen():
    r = ust.wedge_expectations(petersen())
    assert r.E_alpha == pytest.approx(0.1, abs=1e-12)
    assert r.E_alphabeta <= 1 / 12


def test_wedge_expectations_rr30():
    r = ust.wedge_expectations(random_regular(30, 4, 7))
    assert r.E_alpha == pytest.approx(1 / 12, abs=1e-12)


def test_wedge_expectations_needs_d3():
    with pytest.raises(ValueError):
        ust.wedge_expectations(cycle_graph(6))


# -------------------------------------------------------------- constants


def test_constant_audit():
    rows = ust.resistance_constant_check([complete_graph(20), sharpness_graph(7), random_regular(60, 6, 1)])
    assert all(r.holds for r in rows)
    assert rows[0].sum_reff_sq == pytest.approx(1.9, abs=1e-12)


# -------------------------------------------------------------- sharpness


def test_sharpness_factorization_matches_full_graph():
    for d in (5, 7):
        assert ust.sharpness_row(d).mean_sq_degree == pytest.approx(
            ust.sharpness_full_graph(d).mean_sq_degree, abs=1e-10)


def test_sharpness_frozen_m5():
    # derived via the full 36-vertex graph, cross-checked by the block route
    assert ust.sharpness_row(5).mean_sq_degree == pytest.approx(4.685449735449736, abs=1e-12)


def test_sharpness_center_degree_is_d():
    d = 5
    G = sharpness_graph(d)
    trees = ust.sample_ust_batch(G, 200, 4)
    deg = ust.tree_degrees(G, trees)
    assert np.all(deg[:, 0] == d)


def test_sharpness_block_average_near_five():
    for r in ust.sharpness_sweep([5, 11, 21, 41]):
        assert abs(r.block_mean_sq_degree - 5) <= 30 / r.q
        assert r.mean_sq_degree < r.upper_bound


def test_ust_pnc_on_corpus():
    for G in (petersen(), complete_bipartite(4), random_regular(16, 3, 2)):
        P = pair_probability_matrix(LaplacianSystem(G))
        p = np.diag(P)
        off = P - np.outer(p, p)
        np.fill_diagonal(off, 0)
        assert off.max() <= 1e-12
