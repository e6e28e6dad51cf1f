"""
irdpg/spectral.py

Adjacency and Laplacian spectral embedding, rectangular (slice) SVD embedding,
scree extraction and orthogonal Procrustes alignment.
"""

from __future__ import annotations
import logging
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.sparse.linalg import ArpackNoConvergence, eigsh, svds

from irdpg.graphgen import SparseGraph

logger = logging.getLogger(__name__)

SOLVER_TOL = 1e-10
SOLVER_MAX_RESTARTS = 1000
# Below this size, or when d is close to n, dense LAPACK replaces ARPACK.
DENSE_CUTOFF = 16

MatrixLike = Union[sp.spmatrix, np.ndarray]


class EigensolverError(RuntimeError):
    """Iterative eigensolver stopped before convergence."""

    def __init__(self, message: str, residuals: Optional[np.ndarray] = None):
        super().__init__(message)
        self.residuals = residuals


class Embedding(BaseModel):
    """
    n x d node positions with the eigen/singular values that produced them.

    `signature` holds sign(lambda_k) for eigen-embeddings. `node_ids` maps rows to the
    source graph's node indices when rows were dropped (LSE) or come from a slice.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    rows: np.ndarray
    values: np.ndarray
    kind: Literal["ASE", "LSE", "SliceLeft", "SliceRight"]
    source_hash: str = ""
    signature: Optional[np.ndarray] = None
    node_ids: Optional[np.ndarray] = None
    dropped: List[int] = []

    @model_validator(mode="after")
    def _check(self) -> "Embedding":
        n, d = self.rows.shape
        if d > n:
            raise ValueError(f"embedding dimension {d} exceeds row count {n}")
        if not np.isfinite(self.rows).all():
            raise ValueError("embedding rows must be finite")
        return self

    @property
    def n(self) -> int:
        return int(self.rows.shape[0])

    @property
    def d(self) -> int:
        return int(self.rows.shape[1])


class Scree(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    m: int

    def ratio(self, k: int) -> float:
        """s_k / s_{k+1} (1-based); inf when s_{k+1} is zero."""
        low = self.values[k]
        return float(self.values[k - 1] / low) if low > 0 else float("inf")


class ProcrustesResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    embedding: Embedding
    rotation: np.ndarray
    residual: float


# -------------------------------------------------------
# Helpers
# -------------------------------------------------------

def _as_float_matrix(matrix: MatrixLike) -> MatrixLike:
    if sp.issparse(matrix):
        return matrix.astype(np.float64).tocsr()
    return np.asarray(matrix, dtype=np.float64)


def _dense(matrix: MatrixLike) -> np.ndarray:
    return matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)


def _fix_signs(vectors: np.ndarray, partner: Optional[np.ndarray] = None) -> None:
    """Make each column's largest-magnitude entry positive (in place, partner flipped alike)."""
    if vectors.size == 0:
        return
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    vectors *= signs
    if partner is not None:
        partner *= signs


def _start_vector(size: int) -> np.ndarray:
    return np.random.default_rng(0).uniform(0.5, 1.5, size)


def _residual_norms(matrix: MatrixLike, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    if vectors is None or np.size(vectors) == 0:
        return np.empty(0)
    return np.linalg.norm(matrix @ vectors - vectors * values, axis=0)


def top_eigenpairs(matrix: MatrixLike, d: int, tol: float = SOLVER_TOL,
                   max_restarts: int = SOLVER_MAX_RESTARTS) -> Tuple[np.ndarray, np.ndarray]:
    """
    The d eigenpairs of largest magnitude of a symmetric matrix, sorted by |lambda| descending.

    Raises:
        ValueError: if d is outside [1, n].
        EigensolverError: ARPACK did not converge; carries residual norms.
    """
    matrix = _as_float_matrix(matrix)
    n = matrix.shape[0]
    if not 1 <= d <= n:
        raise ValueError(f"d must lie in [1, {n}], got {d}")
    if n < DENSE_CUTOFF or d >= n - 1:
        values, vectors = scipy.linalg.eigh(_dense(matrix))
    else:
        try:
            values, vectors = eigsh(matrix, k=d, which="LM", tol=tol, maxiter=max_restarts,
                                    v0=_start_vector(n))
        except ArpackNoConvergence as e:
            residuals = _residual_norms(matrix, e.eigenvalues, e.eigenvectors)
            raise EigensolverError(
                f"eigsh did not converge for d={d} on n={n} after {max_restarts} restarts; "
                f"residual norms {residuals.tolist()}", residuals)
    order = np.argsort(-np.abs(values), kind="stable")[:d]
    values, vectors = values[order], np.array(vectors[:, order])
    _fix_signs(vectors)
    return values, vectors


def top_singular_triplets(matrix: MatrixLike, d: int, tol: float = SOLVER_TOL,
                          max_restarts: int = SOLVER_MAX_RESTARTS) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(U_d, s_d, V_d) of a rectangular matrix, singular values descending."""
    matrix = _as_float_matrix(matrix)
    small = min(matrix.shape)
    if not 1 <= d <= small:
        raise ValueError(f"d must lie in [1, {small}], got {d}")
    if small < DENSE_CUTOFF or d >= small - 1:
        u, s, vt = np.linalg.svd(_dense(matrix), full_matrices=False)
    else:
        try:
            u, s, vt = svds(matrix, k=d, tol=tol, maxiter=max_restarts, v0=_start_vector(small))
        except ArpackNoConvergence as e:
            raise EigensolverError(f"svds did not converge for d={d} on shape {matrix.shape}: {e}")
    order = np.argsort(-s, kind="stable")[:d]
    u, s, v = np.array(u[:, order]), s[order], np.array(vt[order].T)
    _fix_signs(u, v)
    return u, s, v


# -------------------------------------------------------
# Embeddings
# -------------------------------------------------------

def _eigen_embedding(matrix: MatrixLike, d: int, kind: str, source_hash: str, tol: float,
                     max_restarts: int) -> Embedding:
    values, vectors = top_eigenpairs(matrix, d, tol=tol, max_restarts=max_restarts)
    rows = vectors * np.sqrt(np.abs(values))
    negatives = int((values < 0).sum())
    if negatives:
        logger.info("%s at d=%d uses %d negative eigenvalue(s)", kind, d, negatives)
    return Embedding(rows=rows, values=values, kind=kind, source_hash=source_hash, signature=np.sign(values))


def ase(g: Union[SparseGraph, MatrixLike], d: int, tol: float = SOLVER_TOL,
        max_restarts: int = SOLVER_MAX_RESTARTS) -> Embedding:
    """
    Adjacency spectral embedding: rows of U_d |Lambda_d|^{1/2} for the d eigenvalues
    of largest magnitude. Accepts a SparseGraph or any symmetric matrix.
    """
    if isinstance(g, SparseGraph):
        logger.info("ASE at d=%d on n=%d", d, g.n)
        return _eigen_embedding(g.adjacency, d, "ASE", g.fingerprint(), tol, max_restarts)
    return _eigen_embedding(g, d, "ASE", "", tol, max_restarts)


def lse(g: SparseGraph, d: int, tol: float = SOLVER_TOL, max_restarts: int = SOLVER_MAX_RESTARTS) -> Embedding:
    """
    Laplacian spectral embedding: ASE of D^{-1/2} A D^{-1/2}.

    Isolated nodes are dropped with a warning; `node_ids` of the result lists the
    surviving rows of g and `dropped` the removed ones.

    Raises:
        ValueError: every node is isolated.
    """
    deg = np.asarray(g.adjacency.sum(axis=1)).ravel().astype(float)
    kept = np.flatnonzero(deg > 0)
    if kept.size == 0:
        raise ValueError("Laplacian embedding undefined: every node is isolated")
    dropped = np.flatnonzero(deg == 0)
    a = g.adjacency.astype(np.float64).tocsr()
    if dropped.size:
        logger.warning("LSE dropped %d isolated node(s)", dropped.size)
        a = a[kept][:, kept]
    scale = sp.diags(1.0 / np.sqrt(deg[kept]))
    laplacian = (scale @ a @ scale).tocsr()
    emb = _eigen_embedding(laplacian, d, "LSE", g.fingerprint(), tol, max_restarts)
    return emb.model_copy(update={"node_ids": kept, "dropped": dropped.tolist()})


def slice_svd(matrix: MatrixLike, d: int, tol: float = SOLVER_TOL,
              max_restarts: int = SOLVER_MAX_RESTARTS, source_hash: str = "") -> Tuple[Embedding, Embedding]:
    """Left rows U_d S_d^{1/2} and right rows V_d S_d^{1/2} of a rectangular matrix."""
    u, s, v = top_singular_triplets(matrix, d, tol=tol, max_restarts=max_restarts)
    root = np.sqrt(s)
    left = Embedding(rows=u * root, values=s, kind="SliceLeft", source_hash=source_hash)
    right = Embedding(rows=v * root, values=s, kind="SliceRight", source_hash=source_hash)
    return left, right


def scree(matrix: Union[SparseGraph, MatrixLike], m: int, tol: float = SOLVER_TOL,
          max_restarts: int = SOLVER_MAX_RESTARTS) -> Scree:
    """Top-m singular values, descending."""
    if isinstance(matrix, SparseGraph):
        matrix = matrix.adjacency
    small = min(matrix.shape)
    if not 1 <= m <= small:
        raise ValueError(f"m must lie in [1, {small}], got {m}")
    _, s, _ = top_singular_triplets(matrix, m, tol=tol, max_restarts=max_restarts)
    return Scree(values=np.clip(s, 0.0, None), m=m)


def procrustes_align(source: Embedding, target: np.ndarray) -> ProcrustesResult:
    """
    Rotate (or reflect) `source` onto `target` by the orthogonal W minimising
    ||source W - target||_F. No centring or scaling is applied.
    """
    target = np.asarray(target, dtype=float)
    if source.rows.shape != target.shape:
        raise ValueError(f"Procrustes needs equal shapes, got {source.rows.shape} and {target.shape}")
    rotation, _ = scipy.linalg.orthogonal_procrustes(source.rows, target)
    aligned = source.rows @ rotation
    residual = float(np.linalg.norm(aligned - target))
    return ProcrustesResult(embedding=source.model_copy(update={"rows": aligned}), rotation=rotation,
                            residual=residual)


# -------------------------------------------------------
# Noise-free recovery checks
# -------------------------------------------------------

def numerical_rank(matrix: MatrixLike, rtol: float = 1e-8) -> int:
    """Number of singular values above rtol * s_max."""
    s = np.linalg.svd(_dense(_as_float_matrix(matrix)), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int((s > rtol * s[0]).sum())


def linear_map_residual(source: np.ndarray, target: np.ndarray) -> Tuple[float, np.ndarray]:
    """Least-squares W with source W ≈ target; returns (||source W - target||_F, W)."""
    source = np.asarray(source, dtype=float)
    target = np.asarray(target, dtype=float)
    if source.shape[0] != target.shape[0]:
        raise ValueError(f"row counts differ: {source.shape[0]} vs {target.shape[0]}")
    w, *_ = np.linalg.lstsq(source, target, rcond=None)
    return float(np.linalg.norm(source @ w - target)), w
