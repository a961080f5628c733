"""
cli.py
======
Command-line entry point.  Subcommands::

    simulate     emit gene trees (Newick, one per line) + JSONL event log
    observe      contract or distort simulated gene trees
    reconstruct  run one reconstruction, emit topology + JSON report
    pipeline     end-to-end Monte-Carlo trials with success statistics
    diluted      debug the diluted-subtree DP on two given trees
    coupling     the impossibility sweep, emit CSV

Flags override a JSON config file (``--config``); the seed falls back to
the ``HGT_PHYLO_SEED`` environment variable.  Every run writes a
manifest sufficient to reproduce its outputs byte-for-byte, independent
of the worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

from . import __version__
from .diluted import QueryForest, RootedMatcher, UnrootedMatcher
from .experiments import RunConfig, make_observations, parallel_map, run_pipeline
from .hgt import event_log_lines, simulate_batch
from .impossibility import indistinguishability_sweep, sweep_to_csv
from .newick import parse, parse_species, parse_topology, serialize, serialize_topology
from .observe import contract, distort
from .reconstruct import (ReconstructionError, reconstruct_from_contractions,
                          reconstruct_from_distortions)
from .trees import random_phylogeny


def _add_model_flags(p):
    p.add_argument("--n", type=int, default=16, help="number of leaves")
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (fallback: HGT_PHYLO_SEED, then 0)")
    p.add_argument("--lambda-bar", type=float, default=0.05,
                   help="upper transfer rate")
    p.add_argument("--rho-lambda", type=float, default=1.0)
    p.add_argument("--tau-bar", type=float, default=1.0,
                   help="upper inter-speciation time")
    p.add_argument("--rho-tau", type=float, default=0.5)
    p.add_argument("--mu-bar", type=float, default=1.0,
                   help="upper substitution rate")
    p.add_argument("--rho-mu", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=None,
                   help="contraction/distortion threshold "
                        "(default from the theorem hypotheses)")
    p.add_argument("--genes", type=int, default=None,
                   help="gene count N (default ceil(50 log2 n))")
    p.add_argument("--d0", type=float, default=None,
                   help="short-distance threshold")
    p.add_argument("--policy", default="all",
                   help="contraction policy: all | none | random:p")
    p.add_argument("--pipeline", choices=("contraction", "distortion"),
                   default="contraction")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--threads", type=int, default=0,
                   help="worker processes (0 = all cores)")
    p.add_argument("--min-support", type=int, default=None)
    p.add_argument("--config", default=None, help="JSON config file; "
                   "explicit flags override its entries")


def _config_from_args(args, parser):
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    name_map = {
        "n": "n", "seed": "seed", "lambda_bar": "lambda_bar",
        "rho_lambda": "rho_lambda", "tau_bar": "tau_bar",
        "rho_tau": "rho_tau", "mu_bar": "mu_bar", "rho_mu": "rho_mu",
        "epsilon": "epsilon", "genes": "n_genes", "d0": "d0",
        "policy": "policy", "pipeline": "pipeline", "trials": "trials",
        "out": "out", "threads": "threads", "min_support": "min_support",
    }
    cfg = RunConfig()
    values = {}
    for arg_name, field in name_map.items():
        if field in base:
            values[field] = base[field]
        v = getattr(args, arg_name, None)
        if v is not None and v != parser.get_default(arg_name):
            values[field] = v
        elif field not in values and v is not None:
            values[field] = v
    if values.get("seed") is None:
        values["seed"] = int(os.environ.get("HGT_PHYLO_SEED", "0"))
    return RunConfig(**{**asdict(cfg), **values})


def _ensure_out(cfg):
    os.makedirs(cfg.out, exist_ok=True)
    return cfg.out


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)
    print(path)


def _manifest(cfg, command, extra=None):
    # threads and output directory do not influence results; keeping them
    # out makes manifests byte-identical across worker counts
    model_cfg = {k: v for k, v in asdict(cfg).items()
                 if k not in ("threads", "out")}
    doc = {"command": command, "config": model_cfg,
           "versions": {"hgt_phylo": __version__,
                        "python": ".".join(map(str, sys.version_info[:3]))}}
    if extra:
        doc.update(extra)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _warn(cfg):
    for w in cfg.warnings():
        print(f"warning: {w}", file=sys.stderr)


# ---------------------------------------------------------------------- #
# Subcommands                                                              #
# ---------------------------------------------------------------------- #


def cmd_simulate(cfg):
    cfg = cfg.resolved()
    _warn(cfg)
    out = _ensure_out(cfg)
    tree = random_phylogeny(cfg.n, cfg.box(), seed=(cfg.seed, 0, 0))
    samples = simulate_batch(tree, cfg.n_genes, seed=(cfg.seed, 0, 1))
    _write(os.path.join(out, "species.nwk"),
           serialize(tree, annotations=True) + "\n")
    _write(os.path.join(out, "genes.nwk"),
           "".join(serialize(s.tree) + "\n" for s in samples))
    _write(os.path.join(out, "events.jsonl"),
           "".join(line + "\n" for line in event_log_lines(samples)))
    _write(os.path.join(out, "manifest.json"), _manifest(cfg, "simulate"))
    return 0


def cmd_observe(cfg):
    cfg = cfg.resolved()
    _warn(cfg)
    out = _ensure_out(cfg)
    tree, samples, obs = make_observations(cfg, 0)
    if cfg.pipeline == "contraction":
        text = "".join(serialize_topology(o.topology) + "\n" for o in obs)
        _write(os.path.join(out, "contractions.nwk"), text)
    else:
        text = "".join(serialize(o.tree) + "\n" for o in obs)
        _write(os.path.join(out, "distortions.nwk"), text)
    _write(os.path.join(out, "manifest.json"), _manifest(cfg, "observe"))
    return 0


def cmd_reconstruct(cfg):
    cfg = cfg.resolved()
    _warn(cfg)
    out = _ensure_out(cfg)
    tree, samples, obs = make_observations(cfg, 0)
    status = 0
    try:
        if cfg.pipeline == "contraction":
            topo, report = reconstruct_from_contractions(
                obs, min_support=cfg.min_support, ground_truth=tree,
                collect_report=True)
            _write(os.path.join(out, "topology.nwk"),
                   serialize_topology(topo) + "\n")
        else:
            rtree, report = reconstruct_from_distortions(
                obs, min_support=cfg.min_support, ground_truth=tree,
                collect_report=True)
            _write(os.path.join(out, "topology.nwk"),
                   serialize(rtree, weights=False) + "\n")
    except ReconstructionError as err:
        report = err.report
        status = 1
    _write(os.path.join(out, "report.json"),
           json.dumps(report, sort_keys=True, indent=2) + "\n")
    _write(os.path.join(out, "manifest.json"), _manifest(cfg, "reconstruct"))
    return status


def cmd_pipeline(cfg):
    cfg = cfg.resolved()
    _warn(cfg)
    out = _ensure_out(cfg)
    summary = run_pipeline(cfg)
    _write(os.path.join(out, "report.json"),
           json.dumps(summary, sort_keys=True, indent=2) + "\n")
    _write(os.path.join(out, "manifest.json"), _manifest(cfg, "pipeline"))
    print(f"success rate: {summary['success_rate']:.3f} "
          f"({summary['n_correct']}/{summary['trials']})")
    return 0 if summary["n_correct"] else 1


def cmd_coupling(cfg, H_values, lambda_values):
    out = _ensure_out(cfg)
    rows = indistinguishability_sweep(
        H_values, lambda_values, cfg.trials, seed=cfg.seed,
        map_fn=lambda f, xs: parallel_map(f, xs, cfg.threads))
    _write(os.path.join(out, "sweep.csv"), sweep_to_csv(rows))
    _write(os.path.join(out, "manifest.json"), _manifest(
        cfg, "coupling", {"H_values": H_values,
                          "lambda_values": lambda_values}))
    return 0


def cmd_diluted(cfg, query_path, obs_path, unrooted):
    with open(query_path) as fh:
        query = parse(fh.read())
    with open(obs_path) as fh:
        obs_text = fh.read()
    forest = QueryForest()
    keys, root_key = forest.ingest_rooted(query)
    if unrooted:
        matcher = UnrootedMatcher(parse_topology(obs_text), forest)
    else:
        matcher = RootedMatcher(parse(obs_text), forest)
    table = {}
    for key in keys:
        table[key] = [{"root": m.root, "nodes": sorted(m.nodes),
                       "leaf_pick": m.leaf_pick}
                      for m in matcher.matches_of(key)]
    doc = {"query_leaves": forest.subtree_labels(root_key),
           "root_key": root_key,
           "f_table": {str(k): v for k, v in table.items()},
           "embedding": table[root_key][0] if table[root_key] else None}
    print(json.dumps(doc, sort_keys=True, indent=2))
    return 0 if table[root_key] else 1


# ---------------------------------------------------------------------- #


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="hgt-phylo",
        description="Gene-tree simulation under horizontal gene transfer "
                    "and species-tree reconstruction.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    for name, help_text in [
            ("simulate", "emit gene samples and event logs"),
            ("observe", "produce contractions or distortions"),
            ("reconstruct", "run one reconstruction"),
            ("pipeline", "end-to-end trials with success statistics")]:
        p = subs.add_parser(name, help=help_text)
        _add_model_flags(p)

    p = subs.add_parser("coupling", help="impossibility sweep")
    _add_model_flags(p)
    p.add_argument("--H", type=int, nargs="+", default=[6],
                   help="tree heights (divisible by 3)")
    p.add_argument("--lambda", dest="lambdas", type=float, nargs="+",
                   default=[8.0], help="transfer rates for the sweep")

    p = subs.add_parser("diluted", help="debug the diluted-subtree DP")
    _add_model_flags(p)
    p.add_argument("query", help="Newick file: rooted query tree")
    p.add_argument("observed", help="Newick file: observed gene tree")
    p.add_argument("--unrooted", action="store_true",
                   help="treat the observed tree as unrooted")

    args = parser.parse_args(argv)
    cfg = _config_from_args(args, parser)

    if args.command == "simulate":
        return cmd_simulate(cfg)
    if args.command == "observe":
        return cmd_observe(cfg)
    if args.command == "reconstruct":
        return cmd_reconstruct(cfg)
    if args.command == "pipeline":
        return cmd_pipeline(cfg)
    if args.command == "coupling":
        return cmd_coupling(cfg, args.H, args.lambdas)
    if args.command == "diluted":
        return cmd_diluted(cfg, args.query, args.observed, args.unrooted)
    parser.error(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
