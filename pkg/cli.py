"""
cli.py

Command-line entry point. Subcommands:

    generate    sample a graph from a named example model and write a SNAP edge list
    stats       graph statistics of an edge list (and the low-degree triangle curve)
    embed       adjacency or Laplacian spectral embedding, plus an optional scree
    local       common-neighbour core and core-periphery slice around a query node
    oracle      theoretical reference values and log-log rate fits
    experiment  run experiment drivers and write CSV artifacts plus a manifest
    ingest      clean a raw edge list into a simple graph with a node re-index map

Settings come from defaults, IRDPG_* environment variables, a --config file and
flags, in increasing priority.
"""

from __future__ import annotations
import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

import pandas as pd
from colorama import Fore, Style
from colorama import init as colorama_init

from data_utils import (ingest_edge_list, long_format, write_csv, write_embedding, write_json, write_node_map,
                        write_slice)
from irdpg.config import Settings, load_settings
from irdpg.graphgen import SparseGraph, sample_graph, sample_latents, write_snap
from irdpg.kernels import EXAMPLE_IDS, make_model
from irdpg.local import common_neighbor_neighborhood, extract_core, extract_cp_slice
from irdpg.oracles import (FAMILIES, cross_check_sum_lambda_cubed, evaluate_quantity, expected_degree,
                           hausdorff_gap, rate_fit, truncation_correction)
from irdpg.spectral import ase, lse, scree
from irdpg.stats import graph_stats, low_degree_triangle_curve

logger = logging.getLogger(__name__)

ORACLE_QUANTITIES = ("rho", "delta_per_n2", "sum_lambda_cubed", "expected_degree", "hausdorff",
                     "cross_check", "truncation_correction")


def _passed(label: str, ok: bool, detail: str = "") -> None:
    color = Fore.GREEN if ok else Fore.RED
    status = "PASSED" if ok else "FAILED"
    print(f"{label}: {color}{status}{Style.RESET_ALL}" + (f"  {detail}" if detail else ""))


def _load_graph(settings: Settings, fmt: str) -> SparseGraph:
    if not settings.edge_list:
        raise ValueError("an edge list is required (--edge-list or EDGE_LIST)")
    return ingest_edge_list(settings.edge_list, fmt=fmt)


def _out(settings: Settings, filename: str) -> str:
    os.makedirs(settings.out_dir, exist_ok=True)
    return os.path.join(settings.out_dir, filename)


# --------------------------
# Subcommands
# --------------------------

def cmd_generate(settings: Settings, args: argparse.Namespace) -> int:
    latent, kernel = make_model(settings.example, settings.n, settings.scale_rule)
    latents = sample_latents(latent, settings.n, settings.seed)
    g = sample_graph(latents, kernel, self_loops=args.self_loops, seed=settings.seed, threads=settings.threads)
    stem = f"{settings.example}_n{settings.n}_seed{settings.seed}"
    graph_path = _out(settings, f"{stem}.txt")
    write_snap(g, graph_path, header={"example": settings.example, "scale": latent.scale})
    positions = pd.DataFrame(latents.positions.reshape(latents.n, -1))
    positions.columns = [f"z{k + 1}" for k in range(positions.shape[1])]
    positions.insert(0, "node", range(latents.n))
    write_csv(positions, _out(settings, f"{stem}_latents.csv"))
    print(f"Wrote {graph_path}: {g.n} nodes, {g.edge_count} edges (fingerprint {g.fingerprint()})")
    return 0


def cmd_stats(settings: Settings, args: argparse.Namespace) -> int:
    g = _load_graph(settings, args.format)
    st = graph_stats(g, threads=settings.threads)
    path = write_csv([st.as_row()], _out(settings, "stats.csv"))
    print(f"Wrote {path}: n={st.n} edges={st.edge_count} triangles={st.triangle_count} "
          f"clustering={st.clustering_coefficient:.4f}")
    if args.caps:
        curve = low_degree_triangle_curve(g, args.caps, peel=args.peel)
        frame = long_format("cap", [row["cap"] for row in curve], {
            key: [row[key] for row in curve] for key in ("nodes", "triangles", "delta_subgraph_n", "delta_full_n")
        })
        print(f"Wrote {write_csv(frame, _out(settings, 'low_degree_curve.csv'))}")
    return 0


def cmd_embed(settings: Settings, args: argparse.Namespace) -> int:
    g = _load_graph(settings, args.format)
    embed = ase if args.kind == "ase" else lse
    embedding = embed(g, args.d, tol=settings.solver_tol, max_restarts=settings.solver_max_restarts)
    path = write_embedding(embedding, _out(settings, f"embedding_{args.kind}_d{args.d}.csv"), seed=settings.seed)
    print(f"Wrote {path}: {embedding.n} rows, d={embedding.d}, dropped {len(embedding.dropped)} isolated node(s)")
    if args.scree:
        m = min(settings.scree_m, g.n - 1)
        values = scree(g, m, tol=settings.solver_tol, max_restarts=settings.solver_max_restarts).values
        frame = long_format("index", range(1, len(values) + 1), {"singular_value": values})
        print(f"Wrote {write_csv(frame, _out(settings, 'scree.csv'))}")
    return 0


def cmd_local(settings: Settings, args: argparse.Namespace) -> int:
    g = _load_graph(settings, args.format)
    query = args.query
    if args.query_original:
        matches = [i for i, v in enumerate(g.ids()) if int(v) == query]
        if not matches:
            raise ValueError(f"node id {query} not found in {settings.edge_list}")
        query = matches[0]
    hood = common_neighbor_neighborhood(g, query, min(settings.k, g.n))
    core = extract_core(g, hood.core_ids)
    cp = extract_cp_slice(g, hood.core_ids)
    core_path = args.core_out or _out(settings, f"core_q{query}_k{hood.k}.txt")
    slice_path = args.slice_out or _out(settings, f"slice_q{query}_k{hood.k}.txt")
    write_snap(core, core_path, header={"query": int(g.ids()[query]), "k": hood.k})
    write_slice(cp, slice_path)
    write_csv(pd.DataFrame({"node": g.ids()[hood.core_ids], "score": hood.scores}),
              _out(settings, f"neighborhood_q{query}_k{hood.k}.csv"))
    print(f"Core of {hood.k} nodes around {query}: {core.edge_count} edges; slice {cp.rows}x{cp.cols}, "
          f"{cp.matrix.nnz} nonzeros")
    return 0


def _oracle_rows(settings: Settings, args: argparse.Namespace) -> List[Dict[str, Any]]:
    latent, kernel = make_model(settings.example, settings.n, settings.scale_rule)
    mc = {"samples": args.samples, "seed": settings.seed, "threads": settings.threads}
    quad = {"grid": settings.grid_size, "seed": settings.seed, "threads": settings.threads}
    if args.quantity == "hausdorff":
        reports = [hausdorff_gap(sample_latents(latent, settings.n, seed)) for seed in settings.seeds]
        return [{**r.as_row(), "seed": s, "scaled": r.details["scaled"]} for r, s in zip(reports, settings.seeds)]
    if args.quantity == "cross_check":
        check = cross_check_sum_lambda_cubed(latent, kernel, grid_size=settings.grid_size, **mc)
        for pair, ok in check["agreement"].items():
            _passed(f"sum_lambda_cubed {pair}", ok)
        return [report.as_row() for report in check["reports"].values()]
    if args.quantity == "truncation_correction":
        if settings.example != "Ex1":
            raise ValueError("truncation_correction applies to the truncated Gaussian example Ex1")
        return [truncation_correction(latent.scale, grid=settings.grid_size)]
    if args.quantity == "expected_degree":
        kwargs = mc if args.method == "monte_carlo" else quad if args.method == "quadrature" else {}
        return [expected_degree(latent, kernel, settings.n, method=args.method, **kwargs).as_row()]

    if args.method == "nystrom" and args.quantity != "sum_lambda_cubed":
        raise ValueError(f"the nystrom method only computes sum_lambda_cubed, not {args.quantity}")
    if args.method == "monte_carlo":
        kwargs = mc
    elif args.method == "quadrature" and args.quantity == "sum_lambda_cubed":
        kwargs = {"seed": settings.seed, "threads": settings.threads}
    elif args.method == "quadrature":
        kwargs = dict(quad, n=settings.n) if args.quantity == "delta_per_n2" else quad
    elif args.method == "nystrom":
        kwargs = {"grid_size": settings.grid_size}
    else:
        kwargs = {"seed": settings.seed, "threads": settings.threads} if args.quantity == "rho" else {}
    report = evaluate_quantity(latent, kernel, args.quantity, args.method, **kwargs)
    row = report.as_row()
    if "delta_n" in report.details:
        row["delta_n"] = report.details["delta_n"]
    return [row]


def cmd_oracle(settings: Settings, args: argparse.Namespace) -> int:
    if args.rate_family:
        quadrature_grid = args.method == "quadrature" and args.quantity != "sum_lambda_cubed"
        kwargs = {"grid": settings.grid_size} if quadrature_grid else {}
        fit = rate_fit(args.rate_family, args.grid, args.quantity, args.claimed_slope, args.tolerance,
                       method=args.method, **kwargs)
        write_csv([{"family": args.rate_family, "quantity": args.quantity, "method": args.method,
                    "slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared,
                    "claimed_slope": fit.claimed_slope, "tolerance": fit.tolerance, "passed": fit.passed}],
                  _out(settings, "rate_fit.csv"))
        write_csv(pd.DataFrame({"x": fit.x_values, "y": fit.y_values, "residual": fit.residuals}),
                  _out(settings, "rate_fit_points.csv"))
        _passed(f"{args.rate_family} {args.quantity} slope", fit.passed,
                f"slope={fit.slope:.4f} claimed={fit.claimed_slope:+.2f}+-{fit.tolerance:.2f}")
        return 0 if fit.passed else 1
    rows = _oracle_rows(settings, args)
    path = write_csv(rows, _out(settings, f"oracle_{args.quantity}.csv"))
    print(f"Wrote {path} ({len(rows)} row(s))")
    return 0


def cmd_experiment(settings: Settings, args: argparse.Namespace) -> int:
    from experiment_runner import ExperimentRunner
    from experiments import EXPERIMENTS

    names = list(EXPERIMENTS) if "all" in args.names else args.names
    runner = ExperimentRunner(settings, names)
    try:
        manifest = runner.run(settings.out_dir)
        failed = False
    except RuntimeError as e:
        logger.error(f"Experiment run failed: {e}")
        manifest, failed = None, True
    for name, status in runner.get_progress().items():
        runtime = runner.runtimes.get(name, 0.0)
        _passed(name, status == "Complete", f"{runtime:.1f}s")
    if manifest is not None:
        print(f"Manifest written to {os.path.join(settings.out_dir, 'manifest.json')}")
    return 1 if failed else 0


def cmd_ingest(settings: Settings, args: argparse.Namespace) -> int:
    g = _load_graph(settings, args.format)
    stem = os.path.splitext(os.path.basename(settings.edge_list))[0]
    graph_path = _out(settings, f"{stem}_simple.txt")
    write_snap(g, graph_path, header={"source": g.metadata["source"]})
    write_node_map(g, _out(settings, f"{stem}_node_map.csv"))
    write_json(g.metadata, _out(settings, f"{stem}_ingest.json"))
    print(f"Ingested {g.metadata['source']}: {g.n} nodes, {g.edge_count} edges, "
          f"largest component {g.metadata['largest_component']} nodes, "
          f"{g.metadata['self_loops_dropped']} self-loop(s) and {g.metadata['duplicates_dropped']} duplicate(s) dropped")
    return 0


# --------------------------
# Parser
# --------------------------

def _int_list(value: str) -> List[int]:
    return [int(part) for part in value.replace(",", " ").split()]


def _float_list(value: str) -> List[float]:
    return [float(part) for part in value.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    """Argument parser; flag dests match Settings field names so they override config values."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat KEY=value config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--threads", type=int)
    common.add_argument("--log-level", dest="log_level")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--example", choices=EXAMPLE_IDS)
    model.add_argument("--n", type=int)
    model.add_argument("--scale-rule", dest="scale_rule", help="expression over n, e.g. 'n/20'")

    graph = argparse.ArgumentParser(add_help=False)
    graph.add_argument("--edge-list", dest="edge_list")
    graph.add_argument("--format", choices=("snap_tsv", "csv"), default="snap_tsv")

    parser = argparse.ArgumentParser(prog="irdpg", description="Infinite-dimensional random dot product graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common, model], help="sample a graph")
    p.add_argument("--self-loops", dest="self_loops", action="store_true")
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("stats", parents=[common, graph], help="graph statistics")
    p.add_argument("--caps", type=_int_list, help="degree caps for the low-degree triangle curve")
    p.add_argument("--peel", action="store_true", help="iterate the degree cap to a fixed point")
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("embed", parents=[common, graph], help="spectral embedding")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--kind", choices=("ase", "lse"), default="ase")
    p.add_argument("--scree", action="store_true", help="also write the top singular values")
    p.add_argument("--scree-m", dest="scree_m", type=int)
    p.set_defaults(handler=cmd_embed)

    p = sub.add_parser("local", parents=[common, graph], help="local core and core-periphery slice")
    p.add_argument("--query", type=int, required=True)
    p.add_argument("--query-original", dest="query_original", action="store_true",
                   help="interpret --query as an id from the input file")
    p.add_argument("--k", type=int)
    p.add_argument("--core-out", dest="core_out")
    p.add_argument("--slice-out", dest="slice_out")
    p.set_defaults(handler=cmd_local)

    p = sub.add_parser("oracle", parents=[common, model], help="theoretical reference values")
    p.add_argument("--quantity", choices=ORACLE_QUANTITIES, default="rho")
    p.add_argument("--method", choices=("closed_form", "quadrature", "monte_carlo", "nystrom"), default="quadrature")
    p.add_argument("--grid-size", dest="grid_size", type=int)
    p.add_argument("--samples", type=int, default=10 ** 6, help="Monte Carlo sample count")
    p.add_argument("--seeds", type=_int_list)
    p.add_argument("--rate-family", dest="rate_family", choices=sorted(FAMILIES))
    p.add_argument("--grid", type=_float_list, default=[2.0, 4.0, 8.0, 16.0, 32.0], help="rate-fit parameter grid")
    p.add_argument("--claimed-slope", dest="claimed_slope", type=float, default=-1.0)
    p.add_argument("--tolerance", type=float, default=0.05)
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("experiment", parents=[common], help="run experiment drivers")
    p.add_argument("names", nargs="+", help="experiment names or 'all'")
    p.add_argument("--full-scale", dest="full_scale", action="store_true", default=None)
    p.add_argument("--seeds", type=_int_list)
    p.add_argument("--dims", type=_int_list)
    p.add_argument("--resamples", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--queries", type=int)
    p.add_argument("--edge-list", dest="edge_list")
    p.add_argument("--timeout", type=float)
    p.set_defaults(handler=cmd_experiment)

    p = sub.add_parser("ingest", parents=[common, graph], help="clean a raw edge list")
    p.set_defaults(handler=cmd_ingest)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    colorama_init()
    args = build_parser().parse_args(argv)
    overrides = {name: getattr(args, name, None) for name in Settings.model_fields}
    try:
        settings = load_settings(args.config, overrides)
    except (ValueError, FileNotFoundError) as e:
        print(f"{Fore.RED}Invalid settings: {e}{Style.RESET_ALL}", file=sys.stderr)
        return 2

    logging.basicConfig(level=getattr(logging, settings.log_level),
                        format="%(asctime)s [%(levelname)s] %(message)s")
    if args.command == "experiment":
        from experiments import EXPERIMENTS

        unknown = [name for name in args.names if name != "all" and name not in EXPERIMENTS]
        if unknown:
            print(f"{Fore.RED}Unknown experiment(s) {unknown}; expected {sorted(EXPERIMENTS)} or 'all'"
                  f"{Style.RESET_ALL}", file=sys.stderr)
            return 2
    try:
        return args.handler(settings, args)
    except (ValueError, FileNotFoundError, RuntimeError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"{Fore.RED}{args.command} failed: {e}{Style.RESET_ALL}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
