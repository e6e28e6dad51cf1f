"""
test_stats.py

Triangle counting against brute force, graph statistics, low-degree
subgraphs and triangle recovery from embeddings.
"""

import itertools

import numpy as np
import pytest

from irdpg.graphgen import SparseGraph, sample_graph, sample_latents
from irdpg.kernels import make_model
from irdpg.stats import (
    count_triangles,
    graph_stats,
    low_degree_subgraph,
    low_degree_triangle_curve,
    triangle_recovery_curve,
)


def complete(n: int, offset: int = 0, total: int = 0) -> SparseGraph:
    pairs = list(itertools.combinations(range(offset, offset + n), 2))
    rows, cols = zip(*pairs) if pairs else ((), ())
    return SparseGraph.from_edges(max(total, offset + n), np.array(rows), np.array(cols))


def random_graph(n: int, p: float, seed: int) -> SparseGraph:
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < p, k=1)
    rows, cols = np.nonzero(upper)
    return SparseGraph.from_edges(n, rows, cols)


def brute_force_triangles(g: SparseGraph) -> int:
    a = g.adjacency.toarray().astype(bool)
    np.fill_diagonal(a, False)
    n = a.shape[0]
    total = 0
    for i in range(n):
        for j in range(i + 1, n):
            if a[i, j]:
                total += int(np.count_nonzero(a[i, j + 1:] & a[j, j + 1:]))
    return total


def union(*graphs: SparseGraph) -> SparseGraph:
    n = sum(g.n for g in graphs)
    rows, cols, offset = [], [], 0
    for g in graphs:
        r, c = g.upper_edges()
        rows.append(r + offset)
        cols.append(c + offset)
        offset += g.n
    return SparseGraph.from_edges(n, np.concatenate(rows), np.concatenate(cols))


# --------------------------
# Triangles
# --------------------------

@pytest.mark.parametrize("graph, expected", [
    (complete(3), 1),
    (complete(4), 4),
    (SparseGraph.from_edges(6, [0] * 5, [1, 2, 3, 4, 5]), 0),
    (SparseGraph.from_edges(5, [], []), 0),
])
def test_small_triangle_counts(graph, expected):
    assert count_triangles(graph) == expected


def test_triangle_count_matches_brute_force_on_random_graphs():
    rng = np.random.default_rng(2024)
    for trial in range(200):
        n = int(rng.integers(3, 201))
        p = float(rng.uniform(0.01, 0.3))
        g = random_graph(n, p, seed=trial)
        assert count_triangles(g) == brute_force_triangles(g), f"trial {trial}: n={n}, p={p:.3f}"


def test_triangle_count_ignores_self_loops():
    g = SparseGraph.from_edges(3, [0, 1, 2, 0, 1], [1, 2, 0, 0, 1], allows_self_loops=True)
    assert count_triangles(g) == 1
    assert graph_stats(g).clustering_coefficient == pytest.approx(1.0)


def test_parallel_triangle_count_is_identical():
    g = random_graph(4500, 0.004, seed=1)
    assert count_triangles(g, threads=4) == count_triangles(g, threads=1)


# --------------------------
# Statistics
# --------------------------

def test_stats_of_triangle_and_path():
    tri = graph_stats(complete(3))
    assert tri.clustering_coefficient == pytest.approx(1.0)
    assert tri.triangle_density == pytest.approx(1.0 / 3.0)
    assert tri.connected_triple_count == 3
    assert tri.degree_histogram == [0, 0, 3]

    path = graph_stats(SparseGraph.from_edges(3, [0, 1], [1, 2]))
    assert path.clustering_coefficient == 0.0
    assert path.connected_triple_count == 1
    assert path.max_degree == 2

    empty = graph_stats(SparseGraph.from_edges(4, [], []))
    assert empty.clustering_coefficient == 0.0 and empty.avg_degree == 0.0


def test_clustering_invariant_under_relabeling():
    g = random_graph(80, 0.15, seed=5)
    perm = np.random.default_rng(0).permutation(g.n)
    rows, cols = g.upper_edges()
    relabeled = SparseGraph.from_edges(g.n, perm[rows], perm[cols])
    assert graph_stats(relabeled).clustering_coefficient == pytest.approx(graph_stats(g).clustering_coefficient)
    assert count_triangles(relabeled) == count_triangles(g)


def test_as_row_excludes_histogram():
    row = graph_stats(complete(4)).as_row()
    assert "degree_histogram" not in row
    assert row["triangle_count"] == 4


@pytest.mark.slow
def test_circle_example_clustering_coefficient():
    latent, kernel = make_model("Ex2", 2000)
    values = []
    for seed in range(20):
        g = sample_graph(sample_latents(latent, 2000, seed), kernel, seed=seed)
        values.append(graph_stats(g).clustering_coefficient)
    assert 0.48 <= float(np.mean(values)) <= 0.58


# --------------------------
# Low-degree subgraphs
# --------------------------

def test_low_degree_subgraph_edge_cases():
    g = union(complete(4), complete(3))
    assert low_degree_subgraph(g, 10).edge_count == g.edge_count
    assert low_degree_subgraph(g, 0).edge_count == 0
    sub = low_degree_subgraph(g, 2)
    assert sub.ids().tolist() == [4, 5, 6]
    assert count_triangles(sub) == 1
    with pytest.raises(ValueError):
        low_degree_subgraph(g, -1)


def test_low_degree_node_sets_shrink_with_cap():
    g = random_graph(150, 0.08, seed=9)
    previous = None
    for c in range(25, -1, -1):
        ids = set(low_degree_subgraph(g, c).ids().tolist())
        if previous is not None:
            assert ids <= previous
        previous = ids


def test_peeling_keeps_nodes_freed_by_removed_hubs():
    # Hub 0 joins 1..4; node 1 also joins 5 and 6.
    g = SparseGraph.from_edges(7, [0, 0, 0, 0, 1, 1], [1, 2, 3, 4, 5, 6])
    assert low_degree_subgraph(g, 2).edge_count == 0
    peeled = low_degree_subgraph(g, 2, peel=True)
    assert peeled.ids().tolist() == [1, 2, 3, 4, 5, 6]
    assert peeled.edge_count == 2


def test_low_degree_curve_normalisations():
    g = union(complete(4), complete(3))
    curve = low_degree_triangle_curve(g, [2, 3])
    assert curve[0] == {"cap": 2, "nodes": 3, "triangles": 1, "delta_subgraph_n": pytest.approx(1 / 3),
                        "delta_full_n": pytest.approx(1 / 7)}
    assert curve[1]["triangles"] == 5
    assert curve[1]["delta_subgraph_n"] == pytest.approx(5 / 7)


# --------------------------
# Triangle recovery
# --------------------------

def test_complete_graph_recovered_exactly_with_signed_product():
    rows = triangle_recovery_curve(complete(5), [5], resamples=3, seed=0, indefinite=True)
    assert rows[0]["recovery_pct"] == pytest.approx(100.0)
    assert rows[0]["source_triangles"] == 10


def test_recovery_is_deterministic():
    latent, kernel = make_model("Square2D", 300, "3")
    g = sample_graph(sample_latents(latent, 300, 0), kernel, seed=0)
    first = triangle_recovery_curve(g, [2, 4], resamples=2, seed=1)
    second = triangle_recovery_curve(g, [2, 4], resamples=2, seed=1)
    assert first == second
    assert [row["d"] for row in first] == [2, 4]


def test_recovery_needs_triangles():
    star = SparseGraph.from_edges(6, [0] * 5, [1, 2, 3, 4, 5])
    with pytest.raises(ValueError, match="no triangles"):
        triangle_recovery_curve(star, [1], resamples=1, seed=0)


def test_recovery_only_resamples_adjacency_embeddings():
    with pytest.raises(ValueError, match="lse"):
        triangle_recovery_curve(complete(5), [2], resamples=1, seed=0, kind="lse")
