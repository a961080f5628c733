"""
impossibility.py
================
The lower-bound construction: two species phylogenies whose coupled HGT
processes emit identical gene trees with high probability once the
transfer rate is a large constant.

The pair is a complete binary tree of height H (unit edge times) and the
same tree with the first and third subtrees at level 2H/3 swapped.
Transfer rate is ``lambda_bar`` inside the two swapped subtrees and zero
elsewhere.  A run simulates the process on T, converts every event to a
topology-independent descriptor (recipient leaf set, donor leaf set,
root distance) and replays the descriptors on the swapped tree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hgt import HgtEvent, execute_hgt, sample_events
from .observe import contract
from .trees import Location, SpeciesPhylogeny


@dataclass(frozen=True)
class TransferDescriptor:
    """Topology-independent description of one transfer, replayable on
    any tree that carries the same subtrees at the same depth."""

    recipient_leafset: int  # bitmask over leaf labels
    donor_leafset: int
    root_distance: float


@dataclass
class LowerBoundPair:
    """The coupled construction: T, its swap T_bar, and the rate layout."""

    T: SpeciesPhylogeny
    T_bar: SpeciesPhylogeny
    H: int
    lambda_bar: float
    block1_root: int
    block3_root: int
    L1: frozenset
    L3: frozenset

    @property
    def n(self):
        return 2 ** self.H


@dataclass
class CoupledRun:
    """Outputs and diagnostics of one coupled simulation."""

    topo_T: object
    topo_T_bar: object
    identical: bool
    n_events: int
    n_in_moves: int
    n_self_donations: int
    cut1: bool
    cut3: bool


def _complete_binary(H):
    """Complete binary tree, leaves labeled 1..2^H left to right."""
    n = 2 ** H
    parent = [-1] * (2 * n - 1)
    children = [[] for _ in range(2 * n - 1)]
    level = list(range(n))  # leaf nodes 0..n-1
    nxt = n
    while len(level) > 1:
        merged = []
        for i in range(0, len(level), 2):
            a, b = level[i], level[i + 1]
            parent[a] = parent[b] = nxt
            children[nxt] = [a, b]
            merged.append(nxt)
            nxt += 1
        level = merged
    root = level[0]
    label = {v: v + 1 for v in range(n)}
    tau = [1.0] * (2 * n - 1)
    lam = [0.0] * (2 * n - 1)
    mu = [1.0] * (2 * n - 1)
    return SpeciesPhylogeny(parent, children, root, label, tau, lam, mu)


def build_pair(H, lambda_bar):
    """Construct the swap pair for height *H* (must be divisible by 3).

    The complete binary tree's own root already has degree 2, so it
    serves directly as the phylogeny root.  Transfer rate is *lambda_bar*
    on every edge strictly inside the first and third subtrees hanging at
    level ``2H/3`` and zero elsewhere; both trees share the layout.
    """
    if H < 3 or H % 3 != 0:
        raise ValueError("H must be >= 3 and divisible by 3")
    T = _complete_binary(H)
    level = 2 * H // 3
    dep = T.depths()
    block_roots = sorted(v for v in range(T.n_nodes) if dep[v] == level)
    block_roots.sort(key=lambda v: min(T.subtree_labels(v)))
    b1, b3 = block_roots[0], block_roots[2]
    for top in (b1, b3):
        for v in T.subtree_nodes(top):
            if v != top:
                T.lam[v] = lambda_bar
    L1 = frozenset(T.subtree_labels(b1))
    L3 = frozenset(T.subtree_labels(b3))
    swap = {}
    for a, b in zip(sorted(L1), sorted(L3)):
        swap[a] = b
        swap[b] = a
    T_bar = T.relabeled(swap)
    return LowerBoundPair(T, T_bar, H, lambda_bar, b1, b3, L1, L3)


# ---------------------------------------------------------------------- #
# Descriptors and replay                                                   #
# ---------------------------------------------------------------------- #


def _leafmasks(tree: SpeciesPhylogeny):
    mask = [0] * tree.n_nodes
    for v in tree.postorder():
        if not tree.children[v]:
            mask[v] = 1 << (tree.label[v] - 1)
        else:
            for c in tree.children[v]:
                mask[v] |= mask[c]
    return mask


def descriptors_from_events(tree: SpeciesPhylogeny, events):
    mask = _leafmasks(tree)
    out = []
    for ev in events:
        out.append(TransferDescriptor(mask[ev.recipient.edge],
                                      mask[ev.donor.edge], ev.time))
    return out


def replay_events(tree: SpeciesPhylogeny, descriptors):
    """Map descriptors back to concrete events on *tree*.

    An edge is identified by its below-leafset (unique within a tree), so
    the replay lands at the same root distance over the same leaf sets.
    Raises if a descriptor has no contemporaneous edge on *tree*.
    """
    mask = _leafmasks(tree)
    by_mask = {}
    for e in tree.edges():
        by_mask[mask[e]] = e
    events = []
    for d in descriptors:
        er = by_mask.get(d.recipient_leafset)
        ed = by_mask.get(d.donor_leafset)
        if er is None or ed is None:
            raise RuntimeError(f"descriptor not replayable: {d}")
        tr, br = tree.edge_span(er)
        td, bd = tree.edge_span(ed)
        if not (tr <= d.root_distance < br and td <= d.root_distance < bd):
            raise RuntimeError(f"descriptor not contemporaneous: {d}")
        events.append(HgtEvent(Location(er, d.root_distance - tr),
                               Location(ed, d.root_distance - td),
                               d.root_distance))
    return events


def _has_transfer_cut(tree: SpeciesPhylogeny, block_root, closed_edges):
    """Percolation check: closed = carries a recipient; the cut exists iff
    no open path connects the block root to one of its leaves."""
    stack = [block_root]
    while stack:
        v = stack.pop()
        if not tree.children[v]:
            return False
        for c in tree.children[v]:
            if c not in closed_edges:
                stack.append(c)
    return True


def coupled_run(pair: LowerBoundPair, seed=0, donor_policy="include-self"):
    """One coupled simulation; returns both contracted topologies plus
    in-move / transfer-cut diagnostics.

    The donor draw defaults to ``include-self`` (uniform over all
    contemporaneous branch-points), which makes the per-event in-move
    probability exactly ``2 / n^(2/3)``; a recipient drawing its own
    point is a no-op transfer and counts as an in-move.
    """
    events = sample_events(pair.T, seed=seed, donor_policy=donor_policy)
    mask = _leafmasks(pair.T)
    l13 = 0
    for l in sorted(pair.L1 | pair.L3):
        l13 |= 1 << (l - 1)
    n_in = sum(1 for ev in events
               if (mask[ev.donor.edge] & ~l13) == 0)
    n_self = sum(1 for ev in events if ev.is_self())
    closed = {ev.recipient.edge for ev in events if not ev.is_self()}
    cut1 = _has_transfer_cut(pair.T, pair.block1_root, closed)
    cut3 = _has_transfer_cut(pair.T, pair.block3_root, closed)

    gene_T = execute_hgt(pair.T, events)
    descriptors = descriptors_from_events(pair.T, events)
    gene_T_bar = execute_hgt(pair.T_bar, replay_events(pair.T_bar, descriptors))
    topo_T = contract(gene_T, 0.0, policy="all").topology
    topo_T_bar = contract(gene_T_bar, 0.0, policy="all").topology
    identical = topo_T.isomorphic(topo_T_bar)
    return CoupledRun(topo_T, topo_T_bar, identical, len(events), n_in,
                      n_self, cut1, cut3)


# ---------------------------------------------------------------------- #
# Sweep                                                                     #
# ---------------------------------------------------------------------- #


SWEEP_COLUMNS = ("H", "n", "lambda", "trials", "identical_rate",
                 "mean_in_moves", "cut1_rate", "cut3_rate")


def indistinguishability_sweep(H_values, lambda_values, trials, seed=0,
                               map_fn=map):
    """Identical-output rates over an (H, lambda) grid.

    Returns a list of row dicts with the columns of ``SWEEP_COLUMNS``;
    *map_fn* may be a parallel map, results are deterministic either way.
    """
    cells = [(H, lam) for H in H_values for lam in lambda_values]
    rows = []
    for (H, lam), stats in zip(cells, map_fn(
            _sweep_cell, [(H, lam, trials, seed) for H, lam in cells])):
        rows.append({"H": H, "n": 2 ** H, "lambda": lam, "trials": trials,
                     **stats})
    return rows


def _sweep_cell(args):
    H, lam, trials, seed = args
    pair = build_pair(H, lam)
    ident = in_moves = cut1 = cut3 = 0
    for t in range(trials):
        run = coupled_run(pair, seed=(seed, H, int(lam * 1000), t))
        ident += run.identical
        in_moves += run.n_in_moves
        cut1 += run.cut1
        cut3 += run.cut3
    return {"identical_rate": ident / trials,
            "mean_in_moves": in_moves / trials,
            "cut1_rate": cut1 / trials,
            "cut3_rate": cut3 / trials}


def sweep_to_csv(rows):
    lines = [",".join(SWEEP_COLUMNS)]
    for r in rows:
        lines.append(",".join(_csv_cell(r[c]) for c in SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"


def _csv_cell(x):
    if isinstance(x, float):
        return format(x, ".10g")
    return str(x)
