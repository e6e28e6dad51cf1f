"""
irdpg

Infinite-dimensional random dot product graphs: kernel models, graph
generation, graph statistics, spectral and local embedding, and oracles.
"""

from irdpg.graphgen import LatentSample, SparseGraph, sample_graph, sample_graph_from_embedding, sample_latents
from irdpg.kernels import KernelModel, LatentModel, make_model
from irdpg.spectral import Embedding, ase, lse, slice_svd
from irdpg.stats import GraphStats, count_triangles, graph_stats

__version__ = "0.3.0"

__all__ = [
    "Embedding",
    "GraphStats",
    "KernelModel",
    "LatentModel",
    "LatentSample",
    "SparseGraph",
    "ase",
    "count_triangles",
    "graph_stats",
    "lse",
    "make_model",
    "sample_graph",
    "sample_graph_from_embedding",
    "sample_latents",
    "slice_svd",
]
