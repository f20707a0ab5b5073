import numpy as np
import pytest
from hypothesis import given, strategies as st

from extremefactor.clique import (
    IndependenceGraph, aggregate_log_ratios, build_independence_graph, choose_solver,
    greedy_coloring_bound, max_clique, max_clique_branch_and_bound, max_clique_bron_kerbosch,
    max_clique_brute_force, run_clique_benchmark,
)
from extremefactor.extremal_stats import min_sum_product
from oracles import brute_force_max_clique, random_graph

SOLVERS = [max_clique_bron_kerbosch, max_clique_branch_and_bound, max_clique_brute_force]
SHARED_CHI = np.array([[1, 0.6, 0.8], [0.6, 1, 0.8], [0.8, 0.8, 1]])


def graph(adj) -> IndependenceGraph:
    return IndependenceGraph(np.asarray(adj, dtype=bool))


class TestBuildGraph:
    def test_identity_chi_is_complete(self):
        g = build_independence_graph(np.eye(5), 0.1)
        assert g.n_edges == 10

    def test_all_ones_is_edgeless(self):
        assert build_independence_graph(np.ones((4, 4)), 0.5).n_edges == 0

    def test_single_edge(self):
        g = build_independence_graph(SHARED_CHI, 0.65)
        assert g.n_edges == 1 and g.adjacency[0, 1] and g.adjacency[1, 0]

    def test_threshold_is_inclusive(self):
        g = build_independence_graph(SHARED_CHI, 0.6)
        assert g.adjacency[0, 1]

    def test_no_self_loops_symmetric(self):
        chi = np.random.default_rng(0).random((8, 8))
        chi = (chi + chi.T) / 2
        g = build_independence_graph(chi, 0.5)
        assert not g.adjacency.diagonal().any()
        assert (g.adjacency == g.adjacency.T).all()

    def test_delta_range(self):
        with pytest.raises(ValueError):
            build_independence_graph(np.eye(2), 1.5)


@pytest.mark.parametrize("solve", SOLVERS)
class TestSolvers:
    def test_triangle(self, solve):
        r = solve(graph(np.ones((3, 3)) - np.eye(3)))
        assert r.vertices == (0, 1, 2) and r.size == 3

    def test_edgeless_picks_vertex_zero(self, solve):
        r = solve(graph(np.zeros((5, 5))))
        assert r.vertices == (0,)

    def test_complete_graph(self, solve):
        r = solve(graph(np.ones((7, 7))))
        assert r.vertices == tuple(range(7))

    def test_five_cycle(self, solve):
        g = IndependenceGraph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])
        r = solve(g)
        assert r.size == 2 and r.vertices == (0, 1)

    def test_lexicographic_tie_break(self, solve):
        # two triangles {2,3,4} and {0,5,6}: the smaller sorted tuple wins
        g = IndependenceGraph.from_edges(7, [(2, 3), (3, 4), (2, 4), (0, 5), (5, 6), (0, 6)])
        assert solve(g).vertices == (0, 5, 6)

    def test_reports_metadata(self, solve):
        r = solve(graph(random_graph(10, 0.5, np.random.default_rng(1))))
        assert r.elapsed >= 0 and r.nodes_explored >= 1
        assert r.solver in ("bron_kerbosch", "branch_and_bound", "brute_force")


@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("seed", range(6))
def test_matches_subset_oracle(p, seed):
    rng = np.random.default_rng([seed, int(p * 10)])
    d = int(rng.integers(1, 15))
    adj = random_graph(d, p, rng)
    expected = brute_force_max_clique(adj)
    g = graph(adj)
    for solve in SOLVERS:
        r = solve(g)
        assert r.vertices == expected, solve.__name__
        assert g.is_clique(r.vertices)


@given(st.integers(1, 14), st.floats(0.05, 0.95), st.integers(0, 2**32 - 1))
def test_coloring_bound_never_below_clique(d, p, seed):
    adj = random_graph(d, p, np.random.default_rng(seed))
    g = graph(adj)
    omega = len(brute_force_max_clique(adj))
    assert greedy_coloring_bound(g.neighbors, (1 << d) - 1) >= omega


@given(st.integers(2, 14), st.integers(0, 2**32 - 1))
def test_adding_edges_never_shrinks_clique(d, seed):
    rng = np.random.default_rng(seed)
    g = graph(random_graph(d, 0.3, rng))
    sizes = [max_clique_branch_and_bound(g).size]
    for _ in range(6):
        i, j = rng.choice(d, size=2, replace=False)
        g = g.with_edge(int(i), int(j))
        bk, bnb = max_clique_bron_kerbosch(g), max_clique_branch_and_bound(g)
        assert bk.vertices == bnb.vertices
        sizes.append(bnb.size)
    assert sizes == sorted(sizes)


class TestAuto:
    def test_dense_graph_uses_branch_and_bound(self):
        assert choose_solver(graph(np.ones((6, 6)))) == "branch_and_bound"

    def test_sparse_graph_uses_bron_kerbosch(self):
        assert choose_solver(graph(np.zeros((6, 6)))) == "bron_kerbosch"

    def test_aliases(self):
        g = graph(np.ones((4, 4)))
        assert max_clique(g, "bk").solver == "bron_kerbosch"
        assert max_clique(g, "bnb").solver == "branch_and_bound"
        with pytest.raises(ValueError):
            max_clique(g, "milp")


class TestBenchmark:
    def test_smoke(self):
        recs = run_clique_benchmark([30], [2], 1, seed=3)
        assert len(recs) == 1
        r = recs[0]
        assert r.sizes_agree and r.t_bk > 0 and r.t_bnb > 0
        # 20 pure rows with disjoint supports form a clique at threshold 0
        assert r.clique_size >= 20

    def test_deterministic_graphs(self):
        a = run_clique_benchmark([30], [3, 5], 2, seed=11)
        b = run_clique_benchmark([30], [3, 5], 2, seed=11)
        assert [(r.d, r.s, r.rep, r.clique_size) for r in a] == [(r.d, r.s, r.rep, r.clique_size) for r in b]

    def test_graph_is_threshold_zero_of_min_sum_product(self):
        from extremefactor.clique import benchmark_graph
        from extremefactor.simulate import generate_loading

        rng1, rng2 = np.random.default_rng(5), np.random.default_rng(5)
        g = benchmark_graph(25, 3, rng1)
        A = generate_loading(25, 20, support_sizes=[3], rng=rng2)
        assert np.all((A[20:] > 0).sum(axis=1) == 3)
        expected = min_sum_product(A).values <= 0
        np.fill_diagonal(expected, False)
        assert (g.adjacency == expected).all()

    def test_aggregate(self):
        recs = run_clique_benchmark([30], [2, 6], 3, seed=0)
        agg = aggregate_log_ratios(recs)
        assert [(a["d"], a["s"], a["reps"]) for a in agg] == [(30, 2, 3), (30, 6, 3)]
        for a in agg:
            rs = [r for r in recs if r.s == a["s"]]
            assert a["mean_log_ratio"] == pytest.approx(np.mean([np.log(r.t_bk / r.t_bnb) for r in rs]))

    def test_reps_validated(self):
        with pytest.raises(ValueError):
            run_clique_benchmark([30], [2], 0)
