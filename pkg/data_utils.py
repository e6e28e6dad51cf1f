"""
data_utils.py

File I/O for graphs and experiment artifacts: edge-list ingestion, long-format
CSV output, embeddings with sidecar metadata, sparse slices and run manifests.

All CSV files are UTF-8 with a header row and `.` decimals. Floats are written
with a fixed format so that identical runs produce byte-identical files.
"""

from __future__ import annotations
import json
import logging
import os
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd
from scipy.sparse.csgraph import connected_components

from irdpg.graphgen import SparseGraph
from irdpg.local import CorePeripherySlice
from irdpg.spectral import Embedding

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


# --------------------------
# Edge lists
# --------------------------

def _is_int(token: str) -> bool:
    return token.lstrip("-").isdigit()


def ingest_edge_list(path: str, fmt: str = "snap_tsv") -> SparseGraph:
    """
    Read an undirected edge list into a simple graph.

    Args:
        path (str): edge-list file. Lines starting with '#' or '%' are comments.
        fmt (str): "snap_tsv" (whitespace-separated) or "csv" (comma-separated,
            an optional header row is skipped).

    Returns:
        SparseGraph: nodes re-indexed 0..n-1 in increasing original id;
        `node_ids` holds the original ids. Metadata records dropped
        self-loops, dropped duplicates and the largest connected component size.

    Raises:
        FileNotFoundError: If the file is missing.
        ValueError: On a malformed line (with its line number) or an empty file.
    """
    if fmt not in ("snap_tsv", "csv"):
        raise ValueError(f"Unknown edge-list format '{fmt}'")
    if not os.path.exists(path):
        raise FileNotFoundError(f"Edge list not found: {path}")

    sources: List[int] = []
    targets: List[int] = []
    seen_data = False
    with open(path, mode="r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line[0] in "#%":
                continue
            parts = [p.strip() for p in line.split(",")] if fmt == "csv" else line.split()
            if fmt == "csv" and not seen_data and len(parts) >= 2 and not any(_is_int(p) for p in parts[:2]):
                seen_data = True
                continue
            seen_data = True
            if len(parts) < 2 or not _is_int(parts[0]) or not _is_int(parts[1]):
                raise ValueError(f"{path}:{lineno}: malformed edge line '{line}'")
            u, v = int(parts[0]), int(parts[1])
            if u < 0 or v < 0:
                raise ValueError(f"{path}:{lineno}: node ids must be non-negative, got '{line}'")
            sources.append(u)
            targets.append(v)

    if not sources:
        raise ValueError(f"Edge list {path} contains no edges")

    src = np.asarray(sources, dtype=np.int64)
    dst = np.asarray(targets, dtype=np.int64)
    original_ids, inverse = np.unique(np.concatenate([src, dst]), return_inverse=True)
    rows, cols = inverse[:src.size], inverse[src.size:]

    loops = rows == cols
    rows, cols = rows[~loops], cols[~loops]
    lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
    unique_pairs = np.unique(np.column_stack([lo, hi]), axis=0) if lo.size else np.empty((0, 2), dtype=np.int64)
    duplicates = int(lo.size - unique_pairs.shape[0])

    graph = SparseGraph.from_edges(original_ids.size, unique_pairs[:, 0], unique_pairs[:, 1],
                                   node_ids=original_ids)
    _, labels = connected_components(graph.adjacency, directed=False)
    largest = int(np.bincount(labels).max())
    metadata = {
        "source": os.path.basename(path),
        "self_loops_dropped": int(loops.sum()),
        "duplicates_dropped": duplicates,
        "largest_component": largest,
        "n": graph.n,
    }
    if metadata["self_loops_dropped"]:
        logger.warning("Dropped %d self-loop line(s) from %s", metadata["self_loops_dropped"], path)
    if duplicates:
        logger.warning("Dropped %d duplicate edge(s) from %s", duplicates, path)
    logger.info("Ingested %s: %d nodes, %d edges, largest component %d", path, graph.n, graph.edge_count, largest)
    return graph.model_copy(update={"metadata": metadata})


def write_node_map(graph: SparseGraph, path: str) -> None:
    """CSV of (node, original_id) for a re-indexed graph."""
    write_csv(pd.DataFrame({"node": np.arange(graph.n), "original_id": graph.ids()}), path)


# --------------------------
# CSV artifacts
# --------------------------

def write_csv(rows: Union[pd.DataFrame, Iterable[Dict[str, Any]]], path: str,
              columns: Optional[List[str]] = None) -> str:
    """Write rows (dicts or a DataFrame) as CSV with the fixed float format."""
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows), columns=columns)
    _ensure_parent(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")
    return path


def read_csv(path: str) -> pd.DataFrame:
    if not os.path.exists(path):
        raise FileNotFoundError(f"CSV file not found: {path}")
    return pd.read_csv(path)


def long_format(x_name: str, x_values: Iterable[Any], series: Dict[str, Iterable[float]]) -> pd.DataFrame:
    """Plot-ready (x, series, value) rows from named columns sharing one x axis."""
    x_values = list(x_values)
    frames = [pd.DataFrame({x_name: x_values, "series": name, "value": list(values)})
              for name, values in series.items()]
    return pd.concat(frames, ignore_index=True)


# --------------------------
# Embeddings and slices
# --------------------------

def write_embedding(embedding: Embedding, path: str, seed: Optional[int] = None) -> str:
    """Embedding rows as CSV (node + coordinates) plus `<path>.meta.json`."""
    ids = embedding.node_ids if embedding.node_ids is not None else np.arange(embedding.n)
    frame = pd.DataFrame(embedding.rows, columns=[f"x{k + 1}" for k in range(embedding.d)])
    frame.insert(0, "node", ids)
    write_csv(frame, path)
    meta = {
        "kind": embedding.kind,
        "d": embedding.d,
        "values": [float(v) for v in embedding.values],
        "signature": None if embedding.signature is None else [int(s) for s in embedding.signature],
        "dropped": embedding.dropped,
        "seed": seed,
        "source_hash": embedding.source_hash,
    }
    write_json(meta, path + ".meta.json")
    return path


def read_embedding(path: str) -> Embedding:
    frame = read_csv(path)
    meta_path = path + ".meta.json"
    if not os.path.exists(meta_path):
        raise FileNotFoundError(f"Embedding metadata not found: {meta_path}")
    with open(meta_path, mode="r", encoding="utf-8") as f:
        meta = json.load(f)
    signature = meta.get("signature")
    return Embedding(
        rows=frame.drop(columns=["node"]).to_numpy(dtype=float),
        values=np.asarray(meta["values"], dtype=float),
        kind=meta["kind"],
        source_hash=meta.get("source_hash", ""),
        signature=None if signature is None else np.asarray(signature, dtype=float),
        node_ids=frame["node"].to_numpy(),
        dropped=meta.get("dropped", []),
    )


def write_slice(cp_slice: CorePeripherySlice, path: str) -> str:
    """Coordinate-list text: '# rows cols nnz' header, then 'row col' per entry in original ids."""
    coo = cp_slice.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    _ensure_parent(path)
    with open(path, mode="w", encoding="utf-8") as f:
        f.write(f"# rows: {cp_slice.rows} cols: {cp_slice.cols} nnz: {coo.nnz}\n")
        for r, c in zip(cp_slice.row_map[coo.row[order]], cp_slice.col_map[coo.col[order]]):
            f.write(f"{r} {c}\n")
    return path


# --------------------------
# Manifests
# --------------------------

def write_json(payload: Dict[str, Any], path: str) -> str:
    _ensure_parent(path)
    with open(path, mode="w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=str)
        f.write("\n")
    return path


def package_versions() -> Dict[str, str]:
    import platform
    import pydantic
    import scipy

    import irdpg

    return {
        "python": platform.python_version(),
        "irdpg": irdpg.__version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "pydantic": pydantic.VERSION,
    }


def load_manifest(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Manifest not found: {path}")
    with open(path, mode="r", encoding="utf-8") as f:
        return json.load(f)
