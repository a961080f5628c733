"""
hgt.py
======
Stochastic horizontal-gene-transfer simulation on a species phylogeny.

Recipient locations fall on each edge as a Poisson process with the
edge's transfer rate; the donor is drawn uniformly among the finite set
of branch-points contemporaneous with the recipient.  Events are executed
chronologically as subtree-prune-and-regraft moves that maintain the
(eta, zb, zf) edge-to-species-edge bookkeeping on the growing gene tree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .trees import GeneTree, Location, SpeciesPhylogeny, seed_tuple

DONOR_POLICIES = ("exclude-self", "include-self")


class HgtExecutionError(RuntimeError):
    """No gene-tree edge covers an event's time point (bookkeeping bug)."""

    def __init__(self, message, event):
        super().__init__(f"{message}: {event}")
        self.event = event


@dataclass(frozen=True)
class HgtEvent:
    """One transfer: prune at *recipient*, regraft at *donor*.

    Under the default donor policy the two locations never coincide; the
    ``include-self`` policy can draw the recipient's own branch-point, in
    which case the event is a no-op when executed.
    """

    recipient: Location
    donor: Location
    time: float

    def is_self(self):
        return (self.recipient.edge == self.donor.edge
                and self.recipient.offset == self.donor.offset)


@dataclass
class GeneSample:
    """One simulated gene: its events (chronological) and gene tree."""

    events: list
    tree: GeneTree
    gene_index: int
    seed: int


def gene_rng(seed, gene_index):
    """Independent deterministic substream for one gene."""
    return np.random.default_rng(
        np.random.SeedSequence(seed_tuple(seed, gene_index)))


# ---------------------------------------------------------------------- #
# Sampling                                                                 #
# ---------------------------------------------------------------------- #


def contemporaneous_points(tree: SpeciesPhylogeny, x: Location):
    """All branch-points at the root depth of *x*, including *x* itself.

    One point per edge whose time span covers that depth; a point exactly
    at a vertex belongs to the child-side edge (span ``[top, bottom)``).
    """
    t = tree.root_depth(x)
    out = []
    for e in tree.edges():
        top, bottom = tree.edge_span(e)
        if top <= t < bottom:
            out.append(Location(e, t - top))
    return out


def sample_events(tree: SpeciesPhylogeny, seed=0, rng=None,
                  donor_policy="exclude-self", diagnostics=None):
    """Draw the HGT events of one gene, sorted chronologically.

    Per edge ``e``, ``Poisson(lam[e] * tau[e])`` recipient locations are
    placed independently uniformly along the edge, so the total count is
    Poisson with the tree's total HGT weight.  Donors are uniform over the
    contemporaneous branch-points; the ``exclude-self`` policy (default)
    excludes the recipient's own point, ``include-self`` keeps it (such a
    draw executes as a no-op).  Deterministic given *seed*.
    """
    if donor_policy not in DONOR_POLICIES:
        raise ValueError(f"unknown donor policy {donor_policy!r}")
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(seed_tuple(seed)))
    edges = tree.edges()
    recips = []
    for e in edges:
        lam_e = tree.lam[e] * tree.tau[e]
        k = int(rng.poisson(lam_e)) if lam_e > 0 else 0
        if k:
            offs = rng.uniform(0.0, tree.tau[e], size=k)
            top, _ = tree.edge_span(e)
            for off in offs:
                recips.append((top + float(off), e, float(off)))
    recips.sort()

    # sweep over time levels maintaining the set of crossing edges
    spans = {e: tree.edge_span(e) for e in edges}
    ins = sorted(edges, key=lambda e: (spans[e][0], e))
    rem = sorted(edges, key=lambda e: (spans[e][1], e))
    act, pos = [], {}
    i = j = 0
    discarded = 0
    events = []
    for t, e_r, off_r in recips:
        while i < len(ins) and spans[ins[i]][0] <= t:
            pos[ins[i]] = len(act)
            act.append(ins[i])
            i += 1
        while j < len(rem) and spans[rem[j]][1] <= t:
            gone = rem[j]
            j += 1
            p = pos.pop(gone)
            last = act.pop()
            if last != gone:
                act[p] = last
                pos[last] = p
        if donor_policy == "exclude-self":
            if len(act) <= 1:
                discarded += 1
                continue
            idx = int(rng.integers(len(act) - 1))
            e_d = act[idx]
            if e_d == e_r:
                e_d = act[len(act) - 1]
        else:
            idx = int(rng.integers(len(act)))
            e_d = act[idx]
        # the only branch-point of e_r at this level is the recipient itself
        off_d = off_r if e_d == e_r else t - spans[e_d][0]
        events.append(HgtEvent(Location(e_r, off_r), Location(e_d, off_d), t))
    if diagnostics is not None:
        diagnostics["discarded"] = discarded
        diagnostics["n_events"] = len(events)
    return events


# ---------------------------------------------------------------------- #
# Execution                                                                #
# ---------------------------------------------------------------------- #


def _locate(windows_e, zb, zf, off, event):
    """Gene node whose window on this species edge contains *off*.

    A point shared by two abutting windows belongs to the lower one
    (``zb == off``), the child side of the split.
    """
    found = -1
    for g in windows_e:
        if zb[g] <= off <= zf[g]:
            if zb[g] == off:
                return g
            found = g
    if found < 0:
        raise HgtExecutionError("no gene edge covers event point", event)
    return found


def execute_hgt(tree: SpeciesPhylogeny, events, gene=0, mu=None):
    """Run the SPR moves of *events* (chronological) over a copy of the
    species tree and return the resulting ``GeneTree``.

    The gene tree starts as the species tree with ``eta = identity``,
    ``zb = 0``, ``zf = tau``.  Each event splits the donor's gene edge at
    the donor time and re-hangs the recipient's subtree under the new
    node; branch weights are set at the end from the surviving windows.
    """
    mu = list(mu) if mu is not None else list(tree.mu)
    n0 = tree.n_nodes
    parent = list(tree.parent)
    children = [list(c) for c in tree.children]
    eta = list(range(n0))
    zb = [0.0] * n0
    zf = [tree.tau[v] for v in range(n0)]
    windows = {e: [e] for e in tree.edges()}

    last_t = -np.inf
    for ev in events:
        if ev.time < last_t:
            raise HgtExecutionError("events out of chronological order", ev)
        last_t = ev.time
        if ev.is_self():
            continue
        gx = _locate(windows[ev.recipient.edge], zb, zf, ev.recipient.offset, ev)
        gy = _locate(windows[ev.donor.edge], zb, zf, ev.donor.offset, ev)
        if gx == gy:
            raise HgtExecutionError("recipient and donor on one gene edge", ev)
        # split the donor edge at the donor time
        v = len(parent)
        parent.append(parent[gy])
        children.append([gy])
        eta.append(ev.donor.edge)
        zb.append(zb[gy])
        zf.append(ev.donor.offset)
        children[parent[gy]][children[parent[gy]].index(gy)] = v
        parent[gy] = v
        zb[gy] = ev.donor.offset
        windows[ev.donor.edge].append(v)
        # re-hang the recipient subtree; material above the prune point on
        # the recipient edge is dropped (dangling stub at the old parent)
        u = parent[gx]
        children[u].remove(gx)
        parent[gx] = v
        children[v].append(gx)
        zb[gx] = ev.recipient.offset

    wt = [0.0] * len(parent)
    for v in range(len(parent)):
        if parent[v] >= 0:
            wt[v] = (zf[v] - zb[v]) * mu[eta[v]]
    return GeneTree(parent, children, tree.root, dict(tree.label), wt,
                    eta, zb, zf, tree)


def simulate_gene(tree: SpeciesPhylogeny, gene_index, seed,
                  donor_policy="exclude-self", mu_mode="tree", box=None):
    """One gene: sample events on a private substream, execute them."""
    rng = gene_rng(seed, gene_index)
    mu = None
    if mu_mode == "per-gene":
        if box is None:
            raise ValueError("per-gene substitution rates need a rates box")
        mu = rng.uniform(box.mu_lo, box.mu_bar, size=tree.n_nodes)
    events = sample_events(tree, rng=rng, donor_policy=donor_policy)
    gt = execute_hgt(tree, events, gene=gene_index, mu=mu)
    return GeneSample(events, gt, gene_index, seed)


def simulate_batch(tree: SpeciesPhylogeny, n_genes, seed=0,
                   donor_policy="exclude-self", mu_mode="tree", box=None):
    """*n_genes* independent gene samples; gene *i* uses the deterministic
    substream derived from ``(seed, i)``, so results do not depend on
    evaluation order."""
    if n_genes < 1:
        raise ValueError("need at least one gene")
    return [simulate_gene(tree, i, seed, donor_policy, mu_mode, box)
            for i in range(n_genes)]


# ---------------------------------------------------------------------- #
# Event-log serialization                                                  #
# ---------------------------------------------------------------------- #


def event_log_lines(samples):
    """JSON-lines sidecar log, one record per event."""
    lines = []
    for s in samples:
        for ev in s.events:
            lines.append(json.dumps({
                "gene_index": s.gene_index,
                "recipient_edge": ev.recipient.edge,
                "recipient_offset": ev.recipient.offset,
                "donor_edge": ev.donor.edge,
                "donor_offset": ev.donor.offset,
                "time": ev.time,
            }, sort_keys=True))
    return lines


def parse_event_log(lines):
    out = []
    for line in lines:
        if not line.strip():
            continue
        rec = json.loads(line)
        out.append((rec["gene_index"], HgtEvent(
            Location(rec["recipient_edge"], rec["recipient_offset"]),
            Location(rec["donor_edge"], rec["donor_offset"]),
            rec["time"])))
    return out
