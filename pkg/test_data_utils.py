"""
test_data_utils.py

Edge-list ingestion, CSV artifacts, embedding files and slice files.
"""

import json

import numpy as np
import pandas as pd
import pytest

from data_utils import (
    ingest_edge_list,
    long_format,
    read_embedding,
    write_csv,
    write_embedding,
    write_node_map,
    write_slice,
)
from irdpg.graphgen import SparseGraph
from irdpg.local import extract_cp_slice
from irdpg.spectral import ase


def write_text(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# --------------------------
# Ingestion
# --------------------------

def test_ingest_triangle_with_sparse_ids(tmp_path):
    path = write_text(tmp_path, "tri.txt", "# a comment\n10\t20\n20 30\n\n30\t10\n")
    g = ingest_edge_list(path)
    assert g.n == 3 and g.edge_count == 3
    assert g.ids().tolist() == [10, 20, 30]
    assert g.metadata["largest_component"] == 3
    assert g.metadata["source"] == "tri.txt"


def test_ingest_drops_loops_and_duplicates(tmp_path):
    path = write_text(tmp_path, "dup.txt", "0 1\n1 0\n0 1\n2 2\n1 2\n")
    g = ingest_edge_list(path)
    assert g.edge_count == 2
    assert g.self_loop_count == 0
    assert g.metadata["self_loops_dropped"] == 1
    assert g.metadata["duplicates_dropped"] == 2


def test_ingest_csv_with_header(tmp_path):
    path = write_text(tmp_path, "edges.csv", "source,target\n1,2\n3,4\n")
    g = ingest_edge_list(path, fmt="csv")
    assert g.n == 4 and g.edge_count == 2
    assert g.metadata["largest_component"] == 2


@pytest.mark.parametrize("text, match", [
    ("0 1\n1\n", ":2:"),
    ("0 1\n1 b\n", ":2:"),
    ("0 -3\n", ":1:"),
    ("# nothing\n", "no edges"),
])
def test_ingest_errors(tmp_path, text, match):
    with pytest.raises(ValueError, match=match):
        ingest_edge_list(write_text(tmp_path, "bad.txt", text))


def test_ingest_missing_file_and_unknown_format(tmp_path):
    with pytest.raises(FileNotFoundError):
        ingest_edge_list(str(tmp_path / "absent.txt"))
    with pytest.raises(ValueError):
        ingest_edge_list(write_text(tmp_path, "g.txt", "0 1\n"), fmt="gml")


def test_node_map(tmp_path):
    g = ingest_edge_list(write_text(tmp_path, "g.txt", "7 3\n"))
    path = str(tmp_path / "map.csv")
    write_node_map(g, path)
    assert pd.read_csv(path).to_dict("records") == [{"node": 0, "original_id": 3}, {"node": 1, "original_id": 7}]


# --------------------------
# CSV and embeddings
# --------------------------

def test_write_csv_is_deterministic(tmp_path):
    rows = [{"x": 1, "value": 1 / 3}, {"x": 2, "value": 2 / 3}]
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "sub" / "b.csv")
    write_csv(rows, a)
    write_csv(rows, b)
    with open(a, "rb") as fa, open(b, "rb") as fb:
        assert fa.read() == fb.read()
    assert open(a).read().splitlines()[1] == "1,0.3333333333"


def test_long_format():
    frame = long_format("d", [1, 2], {"ase": [0.1, 0.2], "lse": [0.3, 0.4]})
    assert list(frame.columns) == ["d", "series", "value"]
    assert frame["series"].tolist() == ["ase", "ase", "lse", "lse"]


def test_embedding_round_trip_keeps_metadata(tmp_path):
    g = SparseGraph.from_edges(4, [0, 1, 2, 0], [1, 2, 3, 2])
    emb = ase(g, 2)
    path = str(tmp_path / "emb.csv")
    write_embedding(emb, path, seed=5)
    meta = json.loads(open(path + ".meta.json").read())
    assert meta["seed"] == 5 and meta["kind"] == "ASE" and meta["d"] == 2
    loaded = read_embedding(path)
    np.testing.assert_allclose(loaded.rows, emb.rows, rtol=1e-9, atol=1e-12)
    assert loaded.source_hash == emb.source_hash
    np.testing.assert_array_equal(loaded.signature, emb.signature)


# --------------------------
# Slices
# --------------------------

def test_slice_file_uses_original_ids(tmp_path):
    g = SparseGraph.from_edges(4, [0, 0, 1], [1, 2, 3], node_ids=np.array([10, 11, 12, 13]))
    cp = extract_cp_slice(g, [0, 1])
    path = str(tmp_path / "slice.txt")
    write_slice(cp, path)
    lines = open(path).read().splitlines()
    assert lines[0] == "# rows: 2 cols: 4 nnz: 4"
    assert lines[1:] == ["10 11", "10 12", "11 10", "11 13"]
