"""
experiments/manifold_figure.py

Manifold figure: for each example, the truncated feature-map image of the latent
domain, Procrustes-aligned ASE points of a sampled graph, and the histogram of
intrinsic latent coordinates.
"""

from __future__ import annotations
import logging
from typing import Any, Dict

import numpy as np
import pandas as pd

from data_utils import write_csv
from experiments.base_experiment import BaseExperiment
from irdpg.graphgen import sample_graph, sample_latents
from irdpg.kernels import (FeatureMap, KernelModel, LatentModel, circle_feature_map, exact_path_length,
                           latent_path_length, make_model, nystrom_features, path_length)
from irdpg.spectral import ase, procrustes_align

logger = logging.getLogger(__name__)

EXAMPLES = ("Ex1", "Ex2", "Logistic")
CURVE_POINTS = 201
HISTOGRAM_BINS = 30


def latent_polyline(latent: LatentModel, points: int = CURVE_POINTS) -> np.ndarray:
    """A fine polyline traversing a 1-D latent domain end to end."""
    lo, hi = latent.bounds
    t = np.linspace(lo, hi, points)
    if latent.domain_kind == "circle":
        return latent.scale * np.column_stack([np.cos(t), np.sin(t)])
    return t.reshape(-1, 1)


def feature_map_for(latent: LatentModel, kernel: KernelModel, trunc_k: int, grid_size: int) -> FeatureMap:
    if kernel.kind == "circle_heat":
        return circle_feature_map(latent.scale, trunc_k if trunc_k % 2 else trunc_k + 1)
    return nystrom_features(latent, kernel, grid_size, trunc_k)


class ManifoldFigure(BaseExperiment):
    name = "fig1_manifold"

    def _one_example(self, example: str) -> Dict[str, Any]:
        s = self.settings
        n = s.n
        latent, kernel = make_model(example, n)
        fmap = self.stage(f"{example}/feature_map", feature_map_for, latent, kernel, s.trunc_k, s.grid_size)
        polyline = latent_polyline(latent)
        curve = fmap.coordinates(polyline)

        latents = sample_latents(latent, n, s.seed)
        graph = self.stage(f"{example}/generate", sample_graph, latents, kernel, seed=s.seed, threads=s.threads)
        d = fmap.trunc_dim
        emb = self.stage(f"{example}/embed", ase, graph, d, tol=s.solver_tol, max_restarts=s.solver_max_restarts)
        target = fmap.coordinates(latents.positions)
        aligned = procrustes_align(emb, target)

        coords = latent.intrinsic_coordinates(latents.positions)
        counts, edges = np.histogram(coords, bins=HISTOGRAM_BINS, range=latent.bounds)

        length = latent_path_length(polyline)
        return {
            "curve": pd.DataFrame({"example": example, "t": np.arange(curve.shape[0]),
                                   **{f"c{k + 1}": curve[:, k] for k in range(d)}}),
            "points": pd.DataFrame({"example": example, "node": np.arange(n),
                                    **{f"x{k + 1}": aligned.embedding.rows[:, k] for k in range(d)},
                                    **{f"target{k + 1}": target[:, k] for k in range(d)}}),
            "histogram": pd.DataFrame({"example": example, "bin_left": edges[:-1], "bin_right": edges[1:],
                                       "count": counts}),
            "summary": {
                "procrustes_residual": aligned.residual,
                "relative_residual": aligned.residual / max(np.linalg.norm(aligned.embedding.rows), 1e-300),
                "truncated_length_ratio": path_length(fmap, polyline) / length,
                "exact_length_ratio": exact_path_length(kernel, polyline) / length,
                "feature_residual": fmap.residual,
                "edges": graph.edge_count,
            },
        }

    def run(self, out_dir: str) -> Dict[str, Any]:
        results = {example: self._one_example(example) for example in EXAMPLES}
        curves = self.output_path(out_dir, "fig1_manifold_curves.csv")
        points = self.output_path(out_dir, "fig1_manifold_points.csv")
        hists = self.output_path(out_dir, "fig1_manifold_histograms.csv")
        write_csv(pd.concat([r["curve"] for r in results.values()], ignore_index=True), curves)
        write_csv(pd.concat([r["points"] for r in results.values()], ignore_index=True), points)
        write_csv(pd.concat([r["histogram"] for r in results.values()], ignore_index=True), hists)
        summary = {example: r["summary"] for example, r in results.items()}
        logger.info("fig1_manifold done: %s", {k: round(v["relative_residual"], 4) for k, v in summary.items()})
        return {"artifacts": [curves, points, hists], "summary": summary}
