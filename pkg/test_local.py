"""
test_local.py

Common-neighbor neighborhoods, core extraction, core-periphery slices and
latent-ball cores.
"""

import itertools
import math

import numpy as np
import pytest

from irdpg.graphgen import SparseGraph, sample_latents
from irdpg.kernels import make_model
from irdpg.local import common_neighbor_neighborhood, extract_core, extract_cp_slice, latent_ball_core


def clique_edges(nodes):
    pairs = list(itertools.combinations(nodes, 2))
    return [p[0] for p in pairs], [p[1] for p in pairs]


def two_bridged_cliques() -> SparseGraph:
    r1, c1 = clique_edges(range(4))
    r2, c2 = clique_edges(range(4, 8))
    return SparseGraph.from_edges(8, r1 + r2 + [3], c1 + c2 + [4])


# --------------------------
# Neighborhoods
# --------------------------

def test_complete_graph_neighborhood_breaks_ties_by_id():
    rows, cols = clique_edges(range(5))
    g = SparseGraph.from_edges(5, rows, cols)
    hood = common_neighbor_neighborhood(g, 0, 3)
    assert hood.core_ids == [0, 1, 2]
    assert hood.scores == [4, 3, 3]
    assert hood.k == 3


def test_neighborhood_stays_inside_query_clique():
    hood = common_neighbor_neighborhood(two_bridged_cliques(), 0, 4)
    assert hood.core_ids == [0, 1, 2, 3]
    hood = common_neighbor_neighborhood(two_bridged_cliques(), 6, 4)
    assert hood.core_ids == [6, 4, 5, 7]


def test_neighborhood_matches_brute_force():
    rng = np.random.default_rng(12)
    for trial in range(20):
        upper = np.triu(rng.random((12, 12)) < 0.35, k=1)
        rows, cols = np.nonzero(upper)
        g = SparseGraph.from_edges(12, rows, cols)
        neighbors = [set(g.adjacency[v].indices.tolist()) for v in range(12)]
        query = int(np.argmax([len(s) for s in neighbors]))
        if not neighbors[query]:
            continue
        others = sorted((v for v in range(12) if v != query),
                        key=lambda v: (-len(neighbors[query] & neighbors[v]), v))
        hood = common_neighbor_neighborhood(g, query, 6)
        assert hood.core_ids == [query] + others[:5], f"trial {trial}"
        assert hood.scores[1:] == [len(neighbors[query] & neighbors[v]) for v in others[:5]]


def test_neighborhood_errors():
    g = SparseGraph.from_edges(4, [0, 1], [1, 2])
    with pytest.raises(ValueError, match="isolated"):
        common_neighbor_neighborhood(g, 3, 2)
    with pytest.raises(ValueError):
        common_neighbor_neighborhood(g, 4, 2)
    with pytest.raises(ValueError):
        common_neighbor_neighborhood(g, 0, 0)
    with pytest.raises(ValueError):
        common_neighbor_neighborhood(g, 0, 5)


def test_neighborhood_of_size_one_is_the_query():
    hood = common_neighbor_neighborhood(two_bridged_cliques(), 2, 1)
    assert hood.core_ids == [2] and hood.scores == [3]


# --------------------------
# Cores and slices
# --------------------------

def test_extract_core_keeps_order_and_edges():
    g = two_bridged_cliques()
    core = extract_core(g, [4, 3, 0])
    assert core.ids().tolist() == [4, 3, 0]
    assert core.edge_count == 2


@pytest.mark.parametrize("ids", [[0, 8], [-1], [1, 1]])
def test_extract_core_rejects_bad_ids(ids):
    with pytest.raises(ValueError):
        extract_core(two_bridged_cliques(), ids)


def test_slice_rows_are_full_adjacency_rows():
    g = two_bridged_cliques()
    ids = [3, 0, 5]
    cp = extract_cp_slice(g, ids)
    assert (cp.rows, cp.cols) == (3, 8)
    np.testing.assert_array_equal(np.asarray(cp.matrix.sum(axis=1)).ravel(), g.degrees()[ids])
    core = extract_core(g, ids)
    np.testing.assert_array_equal(cp.matrix[:, cp.core_columns].toarray(), core.adjacency.toarray())
    assert cp.row_map.tolist() == ids
    assert cp.col_map.tolist() == list(range(8))


def test_slice_of_subgraph_maps_to_parent_ids():
    g = two_bridged_cliques().induced(np.array([7, 6, 5, 4, 3]))
    cp = extract_cp_slice(g, [0, 4])
    assert cp.row_map.tolist() == [7, 3]
    assert cp.col_map.tolist() == [7, 6, 5, 4, 3]


# --------------------------
# Latent balls
# --------------------------

def test_latent_ball_extremes():
    latent, _ = make_model("Ex2", 2000)
    latents = sample_latents(latent, 300, seed=2)
    assert latent_ball_core(latents, 0, math.pi * latent.scale + 1e-9).size == 300
    assert latent_ball_core(latents, 17, 0.0).tolist() == [17]
    with pytest.raises(ValueError):
        latent_ball_core(latents, 0, -0.1)


def test_circle_ball_holds_binomial_share():
    latent, _ = make_model("Ex2", 2000)
    n = 2000
    latents = sample_latents(latent, n, seed=3)
    radius = math.pi * latent.scale / 8.0
    count = latent_ball_core(latents, 0, radius).size - 1
    # Arc of length 2 * radius out of circumference 2 pi r: an eighth of the others.
    mean, sd = (n - 1) / 8.0, math.sqrt((n - 1) * (1 / 8) * (7 / 8))
    assert abs(count - mean) < 5 * sd


def test_ball_around_point():
    latent, _ = make_model("Ex1", 4000)
    latents = sample_latents(latent, 500, seed=4)
    inside = latent_ball_core(latents, np.array([0.0]), 1.0)
    expected = np.flatnonzero(np.abs(latents.positions[:, 0]) <= 1.0)
    np.testing.assert_array_equal(inside, expected)
