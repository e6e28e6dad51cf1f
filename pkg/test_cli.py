"""
test_cli.py

The irdpg command line end to end on small inputs.
"""

import os

import pandas as pd
import pytest

from cli import main
from irdpg.config import Settings
from irdpg.graphgen import read_snap


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in Settings.model_fields:
        monkeypatch.delenv(f"IRDPG_{name.upper()}", raising=False)


@pytest.fixture
def two_triangles(tmp_path):
    path = tmp_path / "edges.txt"
    path.write_text("# toy graph\n1 2\n2 3\n3 1\n3 4\n4 5\n5 6\n6 4\n6 6\n")
    return str(path)


def test_generate_writes_graph_and_latents(tmp_path):
    out = str(tmp_path / "out")
    assert main(["generate", "--example", "Ex2", "--n", "200", "--seed", "3", "--out-dir", out]) == 0
    g = read_snap(os.path.join(out, "Ex2_n200_seed3.txt"))
    assert g.n == 200
    latents = pd.read_csv(os.path.join(out, "Ex2_n200_seed3_latents.csv"))
    assert list(latents.columns) == ["node", "z1", "z2"]
    assert len(latents) == 200


def test_stats_and_low_degree_curve(tmp_path, two_triangles):
    out = str(tmp_path / "out")
    assert main(["stats", "--edge-list", two_triangles, "--out-dir", out, "--caps", "2,3"]) == 0
    stats = pd.read_csv(os.path.join(out, "stats.csv")).iloc[0]
    assert stats["triangle_count"] == 2
    assert stats["edge_count"] == 7
    curve = pd.read_csv(os.path.join(out, "low_degree_curve.csv"))
    assert set(curve["series"]) == {"nodes", "triangles", "delta_subgraph_n", "delta_full_n"}


def test_embed_and_local(tmp_path, two_triangles):
    out = str(tmp_path / "out")
    assert main(["embed", "--edge-list", two_triangles, "--out-dir", out, "--d", "2", "--scree"]) == 0
    assert os.path.exists(os.path.join(out, "embedding_ase_d2.csv.meta.json"))
    assert len(pd.read_csv(os.path.join(out, "scree.csv"))) == 5

    assert main(["local", "--edge-list", two_triangles, "--out-dir", out, "--query", "1", "--query-original",
                 "--k", "3"]) == 0
    hood = pd.read_csv(os.path.join(out, "neighborhood_q0_k3.csv"))
    assert hood["node"].tolist() == [1, 2, 3]
    core = read_snap(os.path.join(out, "core_q0_k3.txt"))
    assert core.n == 3 and core.edge_count == 3
    assert core.ids().tolist() == [1, 2, 3]


def test_ingest_reports_cleaning(tmp_path, two_triangles):
    out = str(tmp_path / "out")
    assert main(["ingest", "--edge-list", two_triangles, "--out-dir", out]) == 0
    g = read_snap(os.path.join(out, "edges_simple.txt"))
    assert g.edge_count == 7
    mapping = pd.read_csv(os.path.join(out, "edges_node_map.csv"))
    assert mapping["original_id"].tolist() == [1, 2, 3, 4, 5, 6]


def test_oracle_closed_form_and_rate_fit(tmp_path):
    out = str(tmp_path / "out")
    assert main(["oracle", "--example", "Ex1", "--n", "4000", "--method", "closed_form", "--out-dir", out]) == 0
    row = pd.read_csv(os.path.join(out, "oracle_rho.csv")).iloc[0]
    assert row["value"] == pytest.approx(1.0 / 3.0)

    assert main(["oracle", "--rate-family", "gaussian_untruncated", "--quantity", "rho", "--method", "closed_form",
                 "--out-dir", out]) == 0
    assert bool(pd.read_csv(os.path.join(out, "rate_fit.csv")).iloc[0]["passed"])
    assert main(["oracle", "--rate-family", "gaussian_untruncated", "--quantity", "rho", "--method", "closed_form",
                 "--claimed-slope", "-3", "--out-dir", out]) == 1


def test_errors_map_to_exit_codes(tmp_path):
    out = str(tmp_path / "out")
    assert main(["stats", "--out-dir", out]) == 1
    assert main(["stats", "--edge-list", str(tmp_path / "absent.txt"), "--out-dir", out]) == 1
    assert main(["generate", "--n", "2", "--out-dir", out]) == 2
    assert main(["experiment", "fig9", "--out-dir", out]) == 2
    assert main(["oracle", "--quantity", "rho", "--method", "nystrom", "--out-dir", out]) == 1
