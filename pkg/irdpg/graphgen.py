"""
irdpg/graphgen.py

Samples latent positions from G_n, draws conditionally independent Bernoulli
edges with probability f(X_i, X_j), and resamples graphs from embeddings.
"""

from __future__ import annotations
import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.stats import truncnorm

from irdpg.kernels import KernelModel, LatentModel

logger = logging.getLogger(__name__)

# Rows per generation block. Fixed so output does not depend on thread count.
BLOCK_ROWS = 256
RANGE_TOL = 1e-12


# -------------------------------------------------------
# Domain types
# -------------------------------------------------------

class LatentSample(BaseModel):
    """n i.i.d. latent positions (ambient coordinates) drawn from a LatentModel."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    positions: np.ndarray
    seed: int
    model: LatentModel

    @property
    def n(self) -> int:
        return int(self.positions.shape[0])


class SparseGraph(BaseModel):
    """
    Undirected graph held as a symmetric CSR adjacency with unit entries.

    `node_ids` maps each row back to an id in a parent graph or input file
    (identity when the graph was generated directly).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    adjacency: sp.csr_matrix
    allows_self_loops: bool = False
    node_ids: Optional[np.ndarray] = None
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self) -> "SparseGraph":
        a = self.adjacency
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"adjacency must be square, got {a.shape}")
        if not self.allows_self_loops and a.diagonal().any():
            raise ValueError("self-loops present in a graph that does not allow them")
        return self

    @property
    def n(self) -> int:
        return int(self.adjacency.shape[0])

    @property
    def self_loop_count(self) -> int:
        return int(np.count_nonzero(self.adjacency.diagonal()))

    @property
    def edge_count(self) -> int:
        """Undirected edges, self-loops counted once."""
        return int((self.adjacency.nnz + self.self_loop_count) // 2)

    def degrees(self, include_loops: bool = False) -> np.ndarray:
        deg = np.diff(self.adjacency.indptr).astype(np.int64)
        if not include_loops and self.allows_self_loops:
            deg = deg - (self.adjacency.diagonal() != 0)
        return deg

    def ids(self) -> np.ndarray:
        return np.arange(self.n) if self.node_ids is None else self.node_ids

    def fingerprint(self) -> str:
        """sha256 over the canonical CSR arrays."""
        a = self.adjacency
        digest = hashlib.sha256()
        digest.update(np.int64(self.n).tobytes())
        digest.update(a.indptr.astype(np.int64).tobytes())
        digest.update(a.indices.astype(np.int64).tobytes())
        return digest.hexdigest()[:16]

    @classmethod
    def from_edges(cls, n: int, rows: np.ndarray, cols: np.ndarray, allows_self_loops: bool = False,
                   node_ids: Optional[np.ndarray] = None, metadata: Optional[Dict[str, Any]] = None) -> "SparseGraph":
        """Build from an edge list; each unordered pair may appear in either or both orientations."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if not allows_self_loops:
            keep = rows != cols
            rows, cols = rows[keep], cols[keep]
        both_r = np.concatenate([rows, cols])
        both_c = np.concatenate([cols, rows])
        a = sp.coo_matrix((np.ones(both_r.size, dtype=np.int8), (both_r, both_c)), shape=(n, n)).tocsr()
        a.sum_duplicates()
        a.data[:] = 1
        a.sort_indices()
        return cls(adjacency=a, allows_self_loops=allows_self_loops, node_ids=node_ids, metadata=metadata or {})

    def upper_edges(self) -> Tuple[np.ndarray, np.ndarray]:
        """Each undirected edge once, as (i, j) with i <= j, sorted."""
        upper = sp.triu(self.adjacency, k=0, format="coo")
        order = np.lexsort((upper.col, upper.row))
        return upper.row[order].astype(np.int64), upper.col[order].astype(np.int64)

    def induced(self, ids: np.ndarray) -> "SparseGraph":
        """Induced subgraph on `ids` (in the given order), relabelled 0..len(ids)-1."""
        ids = np.asarray(ids, dtype=np.int64)
        sub = self.adjacency[ids][:, ids].tocsr()
        sub.sort_indices()
        parent = self.ids()
        return SparseGraph(adjacency=sub, allows_self_loops=self.allows_self_loops,
                           node_ids=parent[ids], metadata=dict(self.metadata))


# -------------------------------------------------------
# Latent sampling
# -------------------------------------------------------

def child_seed(seed: int, *keys: int) -> int:
    """Deterministic 32-bit child seed for (seed, keys...)."""
    return int(np.random.SeedSequence([int(seed), *[int(k) for k in keys]]).generate_state(1)[0])


def sample_latents(model: LatentModel, n: int, seed: int) -> LatentSample:
    """
    Draw n i.i.d. latent positions.

    Truncated Gaussians use the inverse-CDF transform of uniform draws, the circle a
    uniform angle, the sphere normalised Gaussians and boxes uniform coordinates.

    Raises:
        ValueError: if n < 1.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    rng = np.random.default_rng(seed)
    kind = model.domain_kind
    if kind == "interval_symmetric":
        if model.distribution == "truncated_gaussian":
            bound = model.truncation / model.scale
            x = truncnorm.ppf(rng.random(n), -bound, bound, scale=model.scale)
        elif model.distribution == "gaussian":
            x = rng.normal(0.0, model.scale, n)
        else:
            x = rng.uniform(-model.scale, model.scale, n)
        positions = x.reshape(-1, 1)
    elif kind == "interval_positive":
        positions = rng.uniform(0.0, model.scale, n).reshape(-1, 1)
    elif kind == "circle":
        theta = rng.uniform(0.0, 2.0 * math.pi, n)
        positions = model.scale * np.column_stack([np.cos(theta), np.sin(theta)])
    elif kind == "square":
        positions = rng.uniform(-model.scale, model.scale, (n, 2))
    else:
        g = rng.normal(size=(n, 3))
        positions = model.scale * g / np.linalg.norm(g, axis=1, keepdims=True)
    return LatentSample(positions=positions, seed=seed, model=model)


# -------------------------------------------------------
# Bernoulli edge sampling
# -------------------------------------------------------

def _sample_blocks(n: int, probability_rows: Callable[[int, int], np.ndarray], self_loops: bool, seed: int,
                   threads: int, check_range: bool) -> Tuple[np.ndarray, np.ndarray]:
    """Draw upper-triangle edges block by block; block b uses RNG stream (seed, b)."""
    starts = list(range(0, n, BLOCK_ROWS))

    def _block(b: int) -> Tuple[np.ndarray, np.ndarray]:
        lo = starts[b]
        hi = min(lo + BLOCK_ROWS, n)
        probs = probability_rows(lo, hi)
        if check_range:
            bad = np.argwhere((probs < -RANGE_TOL) | (probs > 1.0 + RANGE_TOL))
            if bad.size:
                i, j = bad[0]
                raise ValueError(f"Kernel value {probs[i, j]!r} outside [0, 1] at pair ({lo + i}, {j})")
        rng = np.random.default_rng([seed, b])
        draws = rng.random(probs.shape) < probs
        offset = 0 if self_loops else 1
        mask = np.triu(np.ones((hi - lo, n), dtype=bool), k=lo + offset)
        r, c = np.nonzero(draws & mask)
        return r + lo, c

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_block, range(len(starts))))
    else:
        parts = [_block(b) for b in range(len(starts))]
    rows = np.concatenate([p[0] for p in parts]) if parts else np.empty(0, dtype=np.int64)
    cols = np.concatenate([p[1] for p in parts]) if parts else np.empty(0, dtype=np.int64)
    return rows, cols


def sample_graph(latents: LatentSample, kernel: KernelModel, self_loops: bool = False, seed: int = 0,
                 threads: int = 1) -> SparseGraph:
    """
    Draw A_ij ~ Bernoulli(f(X_i, X_j)) independently for i < j (i <= j with self_loops).

    Output is identical for any `threads` value given the same seed.

    Raises:
        ValueError: a kernel value outside [0, 1], naming the offending pair.
    """
    x = latents.positions
    n = latents.n
    logger.info("Sampling %s graph on n=%d nodes (seed=%d, threads=%d)", kernel.kind, n, seed, threads)
    rows, cols = _sample_blocks(n, lambda lo, hi: kernel.gram(x[lo:hi], x), self_loops, seed, threads,
                                check_range=True)
    metadata = {"model": latents.model.example_id or latents.model.domain_kind, "kernel": kernel.kind,
                "seed": seed, "latent_seed": latents.seed, "n": n}
    return SparseGraph.from_edges(n, rows, cols, allows_self_loops=self_loops, metadata=metadata)


def sample_graph_from_embedding(embedding, pairing: Literal["symmetric", "left-right"] = "symmetric",
                                seed: int = 0, self_loops: bool = False, indefinite: bool = False,
                                right: Optional[Any] = None, core_columns: Optional[np.ndarray] = None,
                                threads: int = 1) -> SparseGraph:
    """
    Resample a graph with p_ij = clamp(<x_i, x_j>, 0, 1).

    Args:
        embedding: Embedding whose rows are the node positions.
        pairing: "symmetric" uses one embedding for both sides. "left-right" pairs the
            left factor of a slice SVD with the right factor restricted to `core_columns`
            (the columns of the core nodes), symmetrised by averaging.
        seed: RNG seed.
        self_loops: draw diagonal entries too.
        indefinite: weight the inner product by the embedding's eigenvalue signature.
        right: right-factor Embedding (left-right pairing only).
        core_columns: slice column index of each left row (left-right pairing only).
    """
    left = np.asarray(embedding.rows, dtype=float)
    if not np.isfinite(left).all():
        raise ValueError("embedding rows must be finite")
    weights = np.ones(left.shape[1])
    if indefinite and embedding.signature is not None:
        weights = np.asarray(embedding.signature, dtype=float)

    if pairing == "symmetric":
        partner = left
    elif pairing == "left-right":
        if right is None or core_columns is None:
            raise ValueError("left-right pairing requires the right factor and the core columns")
        partner = np.asarray(right.rows, dtype=float)[np.asarray(core_columns, dtype=np.int64)]
        if partner.shape != left.shape:
            raise ValueError(f"left factor {left.shape} and core right rows {partner.shape} differ in shape")
    else:
        raise ValueError(f"Unknown pairing '{pairing}'")

    n = left.shape[0]

    def _probs(lo: int, hi: int) -> np.ndarray:
        p = (left[lo:hi] * weights) @ partner.T
        if pairing == "left-right":
            p = 0.5 * (p + (partner[lo:hi] * weights) @ left.T)
        return np.clip(p, 0.0, 1.0)

    rows, cols = _sample_blocks(n, _probs, self_loops, seed, threads, check_range=False)
    return SparseGraph.from_edges(n, rows, cols, allows_self_loops=self_loops,
                                  metadata={"resampled_from": embedding.kind, "seed": seed, "n": n})


def expected_edge_count(probabilities: np.ndarray) -> float:
    """Sum over i < j of the clamped probability matrix."""
    p = np.clip(np.asarray(probabilities, dtype=float), 0.0, 1.0)
    return float(np.triu(p, k=1).sum())


# -------------------------------------------------------
# SNAP edge lists
# -------------------------------------------------------

def write_snap(graph: SparseGraph, path: str, header: Optional[Dict[str, Any]] = None) -> None:
    """
    Write a whitespace-separated edge list with a `#` header (model, seed, n, edges).

    Edges use row indices 0..n-1. A graph carrying parent ids (a core or an
    ingested file) also gets a `# node_ids:` line so `read_snap` restores them.
    """
    info = {**graph.metadata, **(header or {})}
    rows, cols = graph.upper_edges()
    with open(path, "w", encoding="utf-8") as f:
        for key in sorted(info):
            f.write(f"# {key}: {info[key]}\n")
        f.write(f"# nodes: {graph.n} edges: {graph.edge_count}\n")
        if graph.node_ids is not None:
            f.write("# node_ids: " + " ".join(str(int(v)) for v in graph.node_ids) + "\n")
        for i, j in zip(rows, cols):
            f.write(f"{i}\t{j}\n")
    logger.info("Wrote %d edges to %s", graph.edge_count, path)


def read_snap(path: str) -> SparseGraph:
    """Load an edge list written by `write_snap`, keeping the declared node count and node ids."""
    header: Dict[str, str] = {}
    pairs: List[Tuple[int, int]] = []
    try:
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    body = line.lstrip("#").strip()
                    if body.startswith("nodes:"):
                        header["nodes"] = body.split()[1]
                    elif ":" in body:
                        key, value = body.split(":", 1)
                        header[key.strip()] = value.strip()
                    continue
                parts = line.split()
                if len(parts) != 2 or not all(p.isdigit() for p in parts):
                    raise ValueError(f"{path}:{lineno}: expected two node ids, got '{line}'")
                pairs.append((int(parts[0]), int(parts[1])))
    except FileNotFoundError:
        raise FileNotFoundError(f"Edge list not found: {path}")
    edges = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    n = int(edges.max()) + 1 if edges.size else 0
    if "nodes" in header:
        n = max(n, int(header["nodes"]))
    node_ids = None
    if "node_ids" in header:
        node_ids = np.array(header["node_ids"].split(), dtype=np.int64)
        if node_ids.size != n:
            raise ValueError(f"{path}: {node_ids.size} node ids for {n} nodes")
    loops = bool(edges.size and (edges[:, 0] == edges[:, 1]).any())
    metadata = {k: v for k, v in header.items() if k not in ("nodes", "node_ids")}
    return SparseGraph.from_edges(n, edges[:, 0], edges[:, 1], allows_self_loops=loops, node_ids=node_ids,
                                  metadata=metadata)
