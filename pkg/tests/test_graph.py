import numpy as np
import pytest

from spreaddetect.graph import (
    all_pairs_distances,
    binary_tree,
    cycle,
    erdos_renyi,
    from_edge_list,
    from_spec,
    grid,
    identifiability_number,
    min_identifiability_number,
    read_edge_list,
    write_edge_list,
)

from .oracles import (
    floyd_warshall,
    misaligned_node_count,
    naive_identifiability_number,
    random_connected_graph,
)


class TestFromEdgeList:
    def test_minimal_connected_path(self):
        g = from_edge_list(3, [(1, 2), (2, 3)])
        assert g.p == 3
        assert g.edges == frozenset({(1, 2), (2, 3)})

    def test_disconnected_names_unreachable_node(self):
        with pytest.raises(ValueError, match="node 3"):
            from_edge_list(3, [(1, 2)])

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="self-loop"):
            from_edge_list(2, [(1, 1)])

    def test_out_of_range_label_rejected(self):
        with pytest.raises(ValueError, match="outside"):
            from_edge_list(3, [(1, 2), (2, 4)])

    def test_reversed_and_duplicate_edges_normalized(self):
        g = from_edge_list(3, [(2, 1), (1, 2), (3, 2)])
        assert g.edges == frozenset({(1, 2), (2, 3)})


class TestGenerators:
    def test_cycle_six_edges(self):
        g = cycle(6)
        assert g.edges == frozenset({(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 6)})

    def test_cycle_too_small(self):
        with pytest.raises(ValueError):
            cycle(2)

    def test_wrapped_grid_is_four_regular(self):
        g = grid(2, 3)
        assert g.p == 9
        degree = {node: 0 for node in range(1, 10)}
        for u, v in g.edges:
            degree[u] += 1
            degree[v] += 1
        assert all(deg == 4 for deg in degree.values())

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            grid(0, 3)
        with pytest.raises(ValueError):
            grid(2, 2)  # wrapped axes need a proper cycle

    def test_unwrapped_grid_corner_degree(self):
        g = grid(2, 3, wrapped=False)
        degree = {node: 0 for node in range(1, 10)}
        for u, v in g.edges:
            degree[u] += 1
            degree[v] += 1
        assert degree[1] == 2  # corner of a 3x3 lattice

    def test_binary_tree_level_filling(self):
        g = binary_tree(7)
        assert g.edges == frozenset({(1, 2), (1, 3), (2, 4), (2, 5), (3, 6), (3, 7)})

    def test_erdos_renyi_deterministic(self):
        g1 = erdos_renyi(20, 0.3, seed=7)
        g2 = erdos_renyi(20, 0.3, seed=7)
        assert g1.edges == g2.edges
        assert g1.p == 20

    def test_erdos_renyi_gives_up(self):
        with pytest.raises(ValueError, match="connected"):
            erdos_renyi(30, 0.001, seed=3, max_retries=3)

    def test_from_spec_families(self):
        assert from_spec("cycle:5").p == 5
        assert from_spec("grid:2x3").p == 9
        assert from_spec("tree:7").p == 7
        assert from_spec("er:10:0.5:1").p == 10
        with pytest.raises(ValueError):
            from_spec("blob:3")
        with pytest.raises(ValueError):
            from_spec("cycle")


class TestEdgeListFiles:
    def test_round_trip(self, tmp_path):
        g = cycle(5)
        path = tmp_path / "g.txt"
        write_edge_list(g, path)
        assert read_edge_list(path).edges == g.edges

    def test_comments_and_errors(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("# a comment\np 3\n1 2\n2 3\n")
        assert read_edge_list(path).p == 3
        bad = tmp_path / "bad.txt"
        bad.write_text("3\n1 2\n")
        with pytest.raises(ValueError, match="header"):
            read_edge_list(bad)


class TestDistances:
    def test_cycle_six_hops(self):
        d = all_pairs_distances(cycle(6))
        assert d[0, 3] == 3  # antipodal
        assert d[0, 5] == 1  # wrap-around edge

    def test_torus_distance_adds_per_axis(self):
        d = all_pairs_distances(grid(2, 3))
        # label 1 is coordinate (0, 0); label 5 is (1, 1)
        assert d[0, 4] == 2

    def test_matches_floyd_warshall_on_random_graphs(self):
        rng = np.random.default_rng(2024)
        for _ in range(20):
            g = random_connected_graph(rng, p_max=50)
            assert np.array_equal(all_pairs_distances(g), floyd_warshall(g))

    def test_invariants_on_er_graph(self):
        g = erdos_renyi(25, 0.2, seed=11)
        d = all_pairs_distances(g)
        assert np.array_equal(d, d.T)
        assert np.all(np.diag(d) == 0)
        off = ~np.eye(25, dtype=bool)
        assert np.all(d[off] >= 1)
        # d[j,k] == 1 exactly on the edge set
        ones = {(j + 1, k + 1) for j, k in zip(*np.nonzero(d == 1)) if j < k}
        assert ones == set(g.edges)
        # triangle inequality
        assert np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :])


class TestIdentifiabilityNumber:
    def test_matches_naive_double_loop(self):
        d = all_pairs_distances(cycle(8))
        got = identifiability_number(d, 0.25, z_star=20, j_star=4, n=40)
        assert got == naive_identifiability_number(d, 0.25, 20, 4, 40)
        assert got == 4  # frozen from the oracle

    def test_zero_at_and_above_one(self):
        for g in (cycle(6), binary_tree(7)):
            d = all_pairs_distances(g)
            assert identifiability_number(d, 1.0, 5, 1, 12) == 0
            assert identifiability_number(d, 1.5, 5, 1, 12) == 0

    @pytest.mark.parametrize("p", [8, 16, 32])
    def test_cycle_lower_bound(self, p):
        # n*tau >= 2p with z* = n/2 and n = 4p
        n = 4 * p
        d = all_pairs_distances(cycle(p))
        assert identifiability_number(d, 0.25, n // 2, 1, n) >= p / 8

    def test_non_increasing_in_c1(self):
        d = all_pairs_distances(cycle(10))
        values = [identifiability_number(d, c1, 10, 3, 30) for c1 in (0.1, 0.25, 0.5, 0.75, 0.9)]
        assert values == sorted(values, reverse=True)

    def test_truth_pair_exclusion_matters(self):
        # at the true pair every node satisfies the inequality trivially
        d = all_pairs_distances(cycle(8))
        assert misaligned_node_count(d, 0.25, 20, 4, t=20, k=4) == 8
        assert identifiability_number(d, 0.25, 20, 4, 40) < 8

    def test_validation(self):
        d = all_pairs_distances(cycle(6))
        with pytest.raises(ValueError):
            identifiability_number(d, -0.5, 5, 1, 12)
        with pytest.raises(ValueError):
            identifiability_number(d, 0.25, 12, 1, 12)
        with pytest.raises(ValueError):
            identifiability_number(d, 0.25, 5, 7, 12)

    def test_min_over_truth_no_larger_than_fixed_truth(self):
        d = all_pairs_distances(cycle(12))
        n = 48
        fixed = identifiability_number(d, 0.25, n // 2, 1, n)
        assert min_identifiability_number(d, 0.25, n) <= fixed


def test_distance_matrix_is_cached_and_read_only():
    g = cycle(6)
    d1 = all_pairs_distances(g)
    assert all_pairs_distances(g) is d1
    with pytest.raises(ValueError):
        d1[0, 0] = 5
