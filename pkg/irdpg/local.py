"""
irdpg/local.py

Local views of a graph: common-neighbor neighborhoods, core subgraphs and
core-periphery slices, plus latent-ball cores for simulated graphs.
"""

from __future__ import annotations
import logging
from typing import List, Sequence, Union

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict

from irdpg.graphgen import LatentSample, SparseGraph

logger = logging.getLogger(__name__)


class Neighborhood(BaseModel):
    model_config = ConfigDict(frozen=True)

    query: int
    core_ids: List[int]
    scores: List[int]

    @property
    def k(self) -> int:
        return len(self.core_ids)


class CorePeripherySlice(BaseModel):
    """
    Rows of A for the core nodes against every node: an m x n sparse matrix.

    `core_columns[i]` is the column holding core node i, so
    matrix[:, core_columns] is the core adjacency.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: sp.csr_matrix
    row_map: np.ndarray
    col_map: np.ndarray
    core_columns: np.ndarray

    @property
    def rows(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def cols(self) -> int:
        return int(self.matrix.shape[1])


def _check_ids(g: SparseGraph, ids) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.int64).ravel()
    if ids.size and (ids.min() < 0 or ids.max() >= g.n):
        raise ValueError(f"core ids must lie in [0, {g.n})")
    if np.unique(ids).size != ids.size:
        raise ValueError("core ids must be distinct")
    return ids


def common_neighbor_neighborhood(g: SparseGraph, query: int, k: int) -> Neighborhood:
    """
    The k nodes sharing the most neighbors with `query`, query first.

    A candidate's score is |N(query) ∩ N(v)|, neither endpoint counting as its own
    common neighbor. Ties go to the smaller node id. The query scores deg(query).

    Raises:
        ValueError: invalid query or k, or an isolated query node.
    """
    if not 0 <= query < g.n:
        raise ValueError(f"query {query} outside [0, {g.n})")
    if not 1 <= k <= g.n:
        raise ValueError(f"k must lie in [1, {g.n}], got {k}")
    a = g.adjacency.astype(np.int64).tocsr()
    if g.allows_self_loops:
        a = a - sp.diags(a.diagonal())
    column = a[:, query]
    degree = int(column.sum())
    if degree == 0:
        raise ValueError(f"query node {query} is isolated; no common-neighbor signal")
    counts = np.asarray((a @ column).todense()).ravel()
    counts[query] = -1
    candidates = np.lexsort((np.arange(g.n), -counts))
    chosen = [c for c in candidates if c != query][:k - 1]
    return Neighborhood(
        query=int(query),
        core_ids=[int(query)] + [int(c) for c in chosen],
        scores=[degree] + [int(counts[c]) for c in chosen],
    )


def extract_core(g: SparseGraph, core_ids: Sequence[int]) -> SparseGraph:
    """Induced subgraph on core_ids, relabelled in the given order."""
    return g.induced(_check_ids(g, core_ids))


def extract_cp_slice(g: SparseGraph, core_ids: Sequence[int]) -> CorePeripherySlice:
    """Full adjacency rows of the core nodes."""
    ids = _check_ids(g, core_ids)
    matrix = g.adjacency[ids].tocsr()
    matrix.sort_indices()
    return CorePeripherySlice(matrix=matrix, row_map=g.ids()[ids], col_map=g.ids(), core_columns=ids)


def latent_ball_core(latents: LatentSample, center: Union[int, np.ndarray], radius: float) -> np.ndarray:
    """
    Nodes whose latent position lies within `radius` of the center.

    `center` is a node index or a latent point. Distances are geodesic on the circle
    and sphere, Euclidean on flat domains.
    """
    if radius < 0:
        raise ValueError(f"radius must be non-negative, got {radius}")
    node = np.ndim(center) == 0
    point = latents.positions[int(center)] if node else np.asarray(center, dtype=float)
    dist = latents.model.distances(latents.positions, point)
    if node:
        # arccos loses precision near 1; the center is at distance 0 by definition.
        dist[int(center)] = 0.0
    return np.flatnonzero(dist <= radius)
