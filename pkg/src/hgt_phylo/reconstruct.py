"""
reconstruct.py
==============
The two species-topology reconstruction algorithms.

* From contractions (graph distances): maintain a pruning -- a disjoint
  forest of full subtrees -- and repeatedly join the two trees whose
  roots sit at median graph distance exactly 2, re-estimating root-to-
  root distances through per-gene diluted-subtree embeddings; stop at
  2n-4 edges and connect the last two roots.
* From distortions (weighted distances, constant substitution rate):
  single-linkage-style clustering driven by median weighted distances,
  refreshed after every merge through diluted-subtree leaf picks.

Both are deterministic given their inputs: equal medians and equal
minimal distances break ties toward the smallest leaf labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diluted import (QueryForest, RootedMatcher, UnrootedMatcher,
                      subset_canonical_form)
from .lca import LcaIndex
from .observe import ContractedGeneTree, DistortedGeneTree
from .trees import RootedTree, SpeciesPhylogeny, TreeTopology, leafsomorphic


class ReconstructionError(RuntimeError):
    """Estimator breakdown; carries the partial run report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}


@dataclass(frozen=True)
class MedianEstimate:
    """A median distance estimate between two clusters/roots."""

    pair: tuple
    value: float
    support: int


@dataclass
class Truncation:
    """Forest of rooted cluster trees with disjoint leaf sets."""

    trees: list

    @property
    def clusters(self):
        return [t.leaf_labels() for t in self.trees]


@dataclass
class Pruning:
    """Disjoint forest of rooted subtrees (cherry-picking state)."""

    trees: list

    @property
    def n_edges(self):
        return sum(t.n_nodes - 1 for t in self.trees)

    @property
    def leafsets(self):
        return [t.leaf_labels() for t in self.trees]


def lower_median(values):
    s = sorted(values)
    if not s:
        raise ValueError("median of empty support")
    return s[(len(s) - 1) // 2]


def default_min_support(n_genes):
    """Trust floor for median estimates, capped by the gene count."""
    return min(n_genes, max(5, math.ceil(n_genes / 4)))


# ---------------------------------------------------------------------- #
# Median leaf distances                                                    #
# ---------------------------------------------------------------------- #


def _leaf_pairs(labels):
    n = len(labels)
    us, vs = [], []
    for i in range(n):
        for j in range(i + 1, n):
            us.append(i)
            vs.append(j)
    return np.asarray(us), np.asarray(vs)


def median_leaf_distances(observations):
    """Per-pair lower median of observed leaf distances.

    Returns an ``n x n`` symmetric matrix indexed by ``label - 1`` (graph
    distances for contractions, weighted distances for distortions).
    """
    if not observations:
        raise ValueError("need at least one observation")
    first = observations[0]
    labels = (first.topology.leaf_labels()
              if isinstance(first, ContractedGeneTree)
              else sorted(first.tree.label.values()))
    n = len(labels)
    iu, jv = _leaf_pairs(labels)
    rows = np.empty((len(observations), len(iu)))
    for g, obs in enumerate(observations):
        if isinstance(obs, ContractedGeneTree):
            topo = obs.topology
            if topo.leaf_labels() != labels:
                raise ValueError("observations disagree on the leaf set")
            rooted = topo.rooted_at(0)
            idx = LcaIndex(rooted.parent, rooted.children, rooted.root)
            nodes = np.asarray([topo.node_of_label(l) for l in labels])
            rows[g] = idx.dist_batch(nodes[iu], nodes[jv])
        else:
            tree = obs.tree
            if sorted(tree.label.values()) != labels:
                raise ValueError("observations disagree on the leaf set")
            idx = LcaIndex(tree.parent, tree.children, tree.root, tree.wt)
            nodes = np.asarray([tree.node_of_label(l) for l in labels])
            rows[g] = idx.wdist_batch(nodes[iu], nodes[jv])
    rows.sort(axis=0)
    med = rows[(len(observations) - 1) // 2]
    out = np.zeros((n, n))
    out[iu, jv] = med
    out[jv, iu] = med
    return out


# ---------------------------------------------------------------------- #
# Single-linkage truncation (leaf medians only)                            #
# ---------------------------------------------------------------------- #


def single_linkage_truncation(dhat, d0, epsilon):
    """Single-linkage clustering on a leaf median matrix, stopped once no
    inter-cluster minimum lies within ``d0 - epsilon``.

    Returns a :class:`Truncation` whose trees record the merge order.
    """
    dhat = np.asarray(dhat, dtype=float)
    n = dhat.shape[0]
    clusters = {i: ([i + 1], i + 1) for i in range(n)}  # id -> (labels, min)
    nested = {i: i + 1 for i in range(n)}
    dist = {}
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = dhat[i, j]
    nxt = n
    while len(clusters) > 1:
        best = None
        for (i, j), v in dist.items():
            key = (v, min(clusters[i][1], clusters[j][1]),
                   max(clusters[i][1], clusters[j][1]))
            if best is None or key < best[0]:
                best = (key, i, j)
        (v, _, _), i, j = best
        if v > d0 - epsilon:
            break
        li, lj = clusters.pop(i), clusters.pop(j)
        labels = li[0] + lj[0]
        clusters[nxt] = (labels, min(li[1], lj[1]))
        a, b = ((nested[i], nested[j]) if li[1] <= lj[1]
                else (nested[j], nested[i]))
        nested[nxt] = (a, b)
        for k in list(clusters):
            if k == nxt:
                continue
            d1 = dist.pop((min(i, k), max(i, k)))
            d2 = dist.pop((min(j, k), max(j, k)))
            dist[(min(nxt, k), max(nxt, k))] = min(d1, d2)
        nxt += 1
    trees = [RootedTree.from_nested(nested[k])
             for k in sorted(clusters, key=lambda k: clusters[k][1])]
    return Truncation(trees)


# ---------------------------------------------------------------------- #
# Initial pruning (cherries)                                               #
# ---------------------------------------------------------------------- #


def initial_pruning(dhat):
    """Cherries = leaf pairs at median graph distance exactly 2, plus the
    remaining singletons.  Raises if one leaf lands in two cherries."""
    dhat = np.asarray(dhat)
    n = dhat.shape[0]
    taken = {}
    cherries = []
    for i in range(n):
        for j in range(i + 1, n):
            if dhat[i, j] == 2:
                if i in taken or j in taken:
                    other = taken.get(i, taken.get(j))
                    raise ReconstructionError(
                        f"leaf in two claimed cherries: {i + 1} or {j + 1} "
                        f"also pairs with {other + 1}")
                taken[i] = j
                taken[j] = i
                cherries.append((i + 1, j + 1))
    trees = [RootedTree.from_nested(c) for c in cherries]
    trees += [RootedTree.from_nested(i + 1) for i in range(n)
              if i not in taken]
    trees.sort(key=lambda t: t.leaf_labels()[0])
    return Pruning(trees)


# ---------------------------------------------------------------------- #
# Reconstruction from contractions                                         #
# ---------------------------------------------------------------------- #


class _Cluster:
    __slots__ = ("cid", "key", "minlab", "nested", "n_edges", "anchor")

    def __init__(self, cid, key, minlab, nested, n_edges):
        self.cid = cid
        self.key = key
        self.minlab = minlab
        self.nested = nested
        self.n_edges = n_edges
        self.anchor = {}  # gene -> observed anchor node (root / leaf pick)


def _pair_key(a: _Cluster, b: _Cluster):
    return (min(a.minlab, b.minlab), max(a.minlab, b.minlab))


def reconstruct_from_contractions(observations, min_support=None,
                                  ground_truth=None, collect_report=False):
    """Species topology from epsilon-contractions (unrooted output).

    Joins two pruning trees whenever their roots sit at median graph
    distance 2 over the supporting genes, re-embedding the joined tree in
    every gene through the diluted-subtree DP.  Raises
    :class:`ReconstructionError` when no admissible pair remains before
    the pruning reaches ``2n - 4`` edges.
    """
    obs = list(observations)
    n_genes = len(obs)
    if min_support is None:
        min_support = default_min_support(n_genes)
    labels = obs[0].topology.leaf_labels()
    n = len(labels)
    dmat = median_leaf_distances(obs)

    forest = QueryForest()
    matchers = [UnrootedMatcher(o.topology, forest) for o in obs]

    clusters = {}
    for i, lab in enumerate(labels):
        c = _Cluster(i, forest.add_leaf(lab), lab, lab, 0)
        for g, m in enumerate(matchers):
            got = m.matches_of(c.key)
            if got:
                c.anchor[g] = got[0].root
        clusters[i] = c

    dhat = {}
    support = {}
    for i in range(n):
        for j in range(i + 1, n):
            dhat[(i, j)] = float(dmat[i, j])
            support[(i, j)] = n_genes

    report = {"pipeline": "contraction", "n": n, "n_genes": n_genes,
              "min_support": min_support, "merges": []}
    total_edges = 0
    nxt = n
    while total_edges < 2 * n - 4:
        best = None
        for (i, j), v in dhat.items():
            if v != 2 or support[(i, j)] < min_support:
                continue
            key = _pair_key(clusters[i], clusters[j])
            if best is None or key < best[0]:
                best = (key, i, j)
        if best is None:
            report["success"] = False
            report["failure"] = "no root pair at median graph distance 2"
            raise ReconstructionError(report["failure"], report)
        _, i, j = best
        a, b = clusters.pop(i), clusters.pop(j)
        dhat = {p: v for p, v in dhat.items() if i not in p and j not in p}
        support = {p: v for p, v in support.items()
                   if i not in p and j not in p}
        first, second = (a, b) if a.minlab <= b.minlab else (b, a)
        merged = _Cluster(nxt, forest.add_node([a.key, b.key]),
                          first.minlab, (first.nested, second.nested),
                          a.n_edges + b.n_edges + 2)
        for g, m in enumerate(matchers):
            got = m.matches_of(merged.key)
            if got:
                merged.anchor[g] = got[0].root
        entry = {"pair": [a.minlab, b.minlab], "dhat": 2,
                 "supports": {}}
        vals = {k: [] for k in clusters}
        for g, vg in merged.anchor.items():
            ks, us = [], []
            for k, other in clusters.items():
                ug = other.anchor.get(g)
                if ug is not None:
                    ks.append(k)
                    us.append(ug)
            if not ks:
                continue
            ds = matchers[g].lca.dist_batch(
                np.asarray(us), np.full(len(us), vg))
            for k, d in zip(ks, ds):
                vals[k].append(int(d))
        for k, other in clusters.items():
            pk = (min(k, nxt), max(k, nxt))
            dhat[pk] = lower_median(vals[k]) if vals[k] else math.inf
            support[pk] = len(vals[k])
            entry["supports"][str(other.minlab)] = len(vals[k])
        report["merges"].append(entry)
        clusters[nxt] = merged
        total_edges += 2
        nxt += 1

    rest = sorted(clusters.values(), key=lambda c: c.minlab)
    if len(rest) != 2:
        report["success"] = False
        report["failure"] = f"terminated with {len(rest)} trees"
        raise ReconstructionError(report["failure"], report)
    final = RootedTree.from_nested((rest[0].nested, rest[1].nested))
    topo = final.unroot()
    report["success"] = True
    if ground_truth is not None:
        truth = (ground_truth.unroot()
                 if isinstance(ground_truth, RootedTree) else ground_truth)
        report["correct"] = topo.isomorphic(truth)
    if collect_report:
        return topo, report
    return topo


# ---------------------------------------------------------------------- #
# Reconstruction from distortions                                          #
# ---------------------------------------------------------------------- #


def reconstruct_from_distortions(observations, min_support=None,
                                 stop_distance=None, ground_truth=None,
                                 collect_report=False):
    """Rooted species topology from epsilon-distortions.

    Repeatedly merges the two clusters at minimal median weighted
    distance; after each merge the new cluster tree is embedded in every
    gene through the diluted-subtree DP and inter-cluster estimates are
    refreshed from leaf picks of the embeddings.  With *stop_distance*
    set, stops once the minimal estimate exceeds it and returns the
    current forest as a :class:`Truncation`.
    """
    obs = list(observations)
    n_genes = len(obs)
    if min_support is None:
        min_support = default_min_support(n_genes)
    labels = sorted(obs[0].tree.label.values())
    n = len(labels)
    dmat = median_leaf_distances(obs)

    forest = QueryForest()
    matchers = [RootedMatcher(o.tree, forest) for o in obs]

    clusters = {}
    for i, lab in enumerate(labels):
        c = _Cluster(i, forest.add_leaf(lab), lab, lab, 0)
        for g, m in enumerate(matchers):
            got = m.matches_of(c.key)
            if got:
                c.anchor[g] = got[0].leaf_pick
        clusters[i] = c

    dhat, support = {}, {}
    for i in range(n):
        for j in range(i + 1, n):
            dhat[(i, j)] = float(dmat[i, j])
            support[(i, j)] = n_genes

    report = {"pipeline": "distortion", "n": n, "n_genes": n_genes,
              "min_support": min_support, "merges": []}
    nxt = n
    while len(clusters) > 1:
        best = None
        for (i, j), v in dhat.items():
            if support[(i, j)] < min_support:
                continue
            key = (v, *_pair_key(clusters[i], clusters[j]))
            if best is None or key < best[0]:
                best = (key, i, j)
        if best is None:
            pend = min(dhat, key=lambda p: dhat[p])
            report["success"] = False
            report["failure"] = (
                f"no supported pair (best support "
                f"{support[pend]} < {min_support})")
            raise ReconstructionError(report["failure"], report)
        (v, _, _), i, j = best
        if stop_distance is not None and v > stop_distance:
            trees = [forest.as_rooted_tree(c.key)
                     for c in sorted(clusters.values(),
                                     key=lambda c: c.minlab)]
            report["success"] = True
            trunc = Truncation(trees)
            return (trunc, report) if collect_report else trunc
        a, b = clusters.pop(i), clusters.pop(j)
        dhat = {p: d for p, d in dhat.items() if i not in p and j not in p}
        support = {p: s for p, s in support.items()
                   if i not in p and j not in p}
        first, second = (a, b) if a.minlab <= b.minlab else (b, a)
        merged = _Cluster(nxt, forest.add_node([a.key, b.key]),
                          first.minlab, (first.nested, second.nested), 0)
        for g, m in enumerate(matchers):
            got = m.matches_of(merged.key)
            if got:
                merged.anchor[g] = got[0].leaf_pick
        entry = {"pair": [a.minlab, b.minlab], "dhat": v, "supports": {}}
        vals = {k: [] for k in clusters}
        for g, pick in merged.anchor.items():
            t = matchers[g]
            vn = t.leaf_node[pick]
            ks, us = [], []
            for k, other in clusters.items():
                og = other.anchor.get(g)
                if og is not None:
                    ks.append(k)
                    us.append(t.leaf_node[og])
            if not ks:
                continue
            ds = t.lca.wdist_batch(np.asarray(us), np.full(len(us), vn))
            for k, d in zip(ks, ds):
                vals[k].append(float(d))
        for k, other in clusters.items():
            pk = (min(k, nxt), max(k, nxt))
            dhat[pk] = lower_median(vals[k]) if vals[k] else math.inf
            support[pk] = len(vals[k])
            entry["supports"][str(other.minlab)] = len(vals[k])
        report["merges"].append(entry)
        clusters[nxt] = merged
        nxt += 1

    last = next(iter(clusters.values()))
    tree = RootedTree.from_nested(last.nested)
    report["success"] = True
    if ground_truth is not None:
        report["correct"] = leafsomorphic(tree, ground_truth)
    if collect_report:
        return tree, report
    return tree


# ---------------------------------------------------------------------- #
# Validators (used by tests and the experiment harness)                    #
# ---------------------------------------------------------------------- #


def is_valid_truncation(trunc: Truncation, species: SpeciesPhylogeny,
                        d0, epsilon, mu):
    """Check the disjoint-forest, truncation and faithfulness conditions
    against a reference species tree (omega = mu * time metric)."""
    clusters = trunc.clusters
    flat = [l for c in clusters for l in c]
    if len(flat) != len(set(flat)):
        return False
    where = {}
    for ci, c in enumerate(clusters):
        for l in c:
            where[l] = ci
    labels = species.leaf_labels()
    if sorted(flat) != labels:
        return False
    for i, u in enumerate(labels):
        for v in labels[i + 1:]:
            w = mu * species.species_metric(u, v)
            same = where[u] == where[v]
            if w <= d0 - 2 * epsilon and not same:
                return False
            if w > d0 and same:
                return False
    # cluster MRCAs must be distinct from pairwise-union MRCAs
    mrcas = [species.mrca([species.node_of_label(l) for l in c])
             for c in clusters]
    for i in range(len(clusters)):
        for j in range(i + 1, len(clusters)):
            nodes = [species.node_of_label(l)
                     for l in clusters[i] + clusters[j]]
            m = species.mrca(nodes)
            if m == mrcas[i] or m == mrcas[j]:
                return False
    for tree, c in zip(trunc.trees, clusters):
        if not leafsomorphic(tree, species.restrict(c)):
            return False
    return True


def is_valid_pruning(pruning: Pruning, species: SpeciesPhylogeny,
                     expected_edges=None):
    """Disjointness and fullness of a pruning against the species tree."""
    leafsets = pruning.leafsets
    flat = [l for s in leafsets for l in s]
    if len(flat) != len(set(flat)):
        return False
    if expected_edges is not None and pruning.n_edges != expected_edges:
        return False
    topo = species.unroot()
    for tree, labs in zip(pruning.trees, leafsets):
        if len(labs) == 1:
            continue
        if not _is_full_subtree(tree, labs, topo):
            return False
    return True


def _is_full_subtree(tree, labs, topo: TreeTopology):
    want = set(labs)
    target = tree.canonical_form()
    for b in range(topo.n_nodes):
        for a in topo.adj[b]:
            rooted = topo.rooted_at(a)
            if rooted.parent[b] != a:
                continue
            side = rooted.subtree_labels(b)
            if set(side) == want:
                sub_nodes = set(rooted.subtree_nodes(b))
                if subset_canonical_form(rooted, sub_nodes, b) == target:
                    return True
    return False
