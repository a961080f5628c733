"""
experiments.py
==============
Reproducible end-to-end experiment harness: one function per trial kind,
a process-pool ``parallel_map`` whose output is independent of worker
count, and the run configuration shared with the command line.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .hgt import simulate_batch
from .observe import contract, distort
from .reconstruct import (ReconstructionError, reconstruct_from_contractions,
                          reconstruct_from_distortions)
from .trees import BoundedRates, leafsomorphic, random_phylogeny


@dataclass
class RunConfig:
    """Knobs of one experiment run (CLI flags mirror these fields)."""

    n: int = 16
    seed: int = 0
    lambda_bar: float = 0.05
    rho_lambda: float = 1.0
    tau_bar: float = 1.0
    rho_tau: float = 0.5
    mu_bar: float = 1.0
    rho_mu: float = 0.5
    epsilon: float = None
    n_genes: int = None
    d0: float = None
    policy: str = "all"
    pipeline: str = "contraction"
    trials: int = 50
    threads: int = 0
    out: str = None
    min_support: int = None

    def box(self):
        return BoundedRates(self.lambda_bar, self.rho_lambda, self.tau_bar,
                            self.rho_tau, self.mu_bar, self.rho_mu)

    def resolved(self):
        """Fill derived defaults: N = ceil(50 log2 n), epsilon and d0 from
        the theorem hypotheses."""
        cfg = RunConfig(**asdict(self))
        box = cfg.box()
        if cfg.n_genes is None:
            cfg.n_genes = math.ceil(50 * math.log2(max(cfg.n, 2)))
        if cfg.epsilon is None:
            if cfg.pipeline == "contraction":
                cfg.epsilon = 0.5 * box.tau_lo * box.mu_lo
            else:
                cfg.epsilon = 0.1 * box.mu_bar * box.tau_lo
        if cfg.d0 is None:
            cfg.d0 = 2 if cfg.pipeline == "contraction" \
                else 3.0 * box.mu_bar * box.tau_bar
        return cfg

    def warnings(self):
        """Theorem-hypothesis violations worth flagging at load time."""
        out = []
        box = self.box()
        eps = self.epsilon
        if self.pipeline == "contraction":
            if eps is not None and not (0 <= eps < box.tau_lo * box.mu_lo):
                out.append("contraction pipeline wants epsilon < "
                           "rho_tau*tau_bar * rho_mu*mu_bar")
        else:
            if self.rho_mu != 1.0:
                out.append("distortion pipeline assumes a constant "
                           "substitution rate (rho_mu = 1)")
            if eps is not None and not (0 <= eps < box.mu_bar * box.tau_lo / 2):
                out.append("distortion pipeline wants epsilon < "
                           "mu * rho_tau*tau_bar / 2")
        if self.policy not in ("all", "none") \
                and not str(self.policy).startswith("random"):
            out.append(f"unknown contraction policy {self.policy!r}")
        return out


def parallel_map(fn, items, workers=0):
    """Order-preserving map, optionally over a process pool.

    ``workers <= 1`` runs serially; results are identical either way.
    """
    items = list(items)
    if workers == 0:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


# ---------------------------------------------------------------------- #
# Pipeline trials                                                          #
# ---------------------------------------------------------------------- #


def make_observations(cfg: RunConfig, trial):
    """Tree, gene samples and observations for one seeded trial."""
    box = cfg.box()
    tree = random_phylogeny(cfg.n, box, seed=(cfg.seed, trial, 0))
    samples = simulate_batch(tree, cfg.n_genes, seed=(cfg.seed, trial, 1))
    if cfg.pipeline == "contraction":
        policy = cfg.policy
        if isinstance(policy, str) and policy.startswith("random"):
            p = float(policy.split(":", 1)[1]) if ":" in policy else 0.5
            policy = ("random", p)
        obs = [contract(s.tree, cfg.epsilon, policy=policy,
                        seed=(cfg.seed, trial, 2, s.gene_index),
                        gene_index=s.gene_index) for s in samples]
    else:
        obs = [distort(s.tree, cfg.epsilon, seed=(cfg.seed, trial, 2,
                                                  s.gene_index),
                       gene_index=s.gene_index) for s in samples]
    return tree, samples, obs


def run_pipeline_trial(args):
    """One end-to-end trial; returns a picklable record."""
    cfg, trial = args
    cfg = cfg.resolved()
    tree, samples, obs = make_observations(cfg, trial)
    record = {
        "trial": trial,
        "n_events_mean": sum(len(s.events) for s in samples) / len(samples),
    }
    try:
        if cfg.pipeline == "contraction":
            topo, report = reconstruct_from_contractions(
                obs, min_support=cfg.min_support, ground_truth=tree,
                collect_report=True)
            record["correct"] = bool(report["correct"])
        else:
            out, report = reconstruct_from_distortions(
                obs, min_support=cfg.min_support, ground_truth=tree,
                collect_report=True)
            record["correct"] = bool(report["correct"])
        record["success"] = True
    except ReconstructionError as err:
        record["success"] = False
        record["correct"] = False
        record["failure"] = str(err)
    return record


def run_pipeline(cfg: RunConfig, map_fn=None):
    """All trials of one config; summary plus per-trial records."""
    cfg = cfg.resolved()
    if map_fn is None:
        map_fn = lambda f, xs: parallel_map(f, xs, cfg.threads)
    records = map_fn(run_pipeline_trial,
                     [(cfg, t) for t in range(cfg.trials)])
    records.sort(key=lambda r: r["trial"])
    n_ok = sum(r["correct"] for r in records)
    model_cfg = {k: v for k, v in asdict(cfg).items()
                 if k not in ("threads", "out")}
    summary = {
        "config": model_cfg,
        "trials": cfg.trials,
        "n_correct": n_ok,
        "success_rate": n_ok / cfg.trials,
        "mean_events": sum(r["n_events_mean"] for r in records) / len(records),
        "records": records,
    }
    return summary
