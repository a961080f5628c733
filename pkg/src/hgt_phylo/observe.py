"""
observe.py
==========
The two imperfect views of a gene tree that the reconstruction algorithms
consume:

* contraction -- unrooted, unweighted topology with dangling material
  removed, degree-2 paths fused, and a chosen subset of short internal
  edges (weight <= epsilon) collapsed;
* distortion -- rooted, weighted tree with the same cleanup whose leaf
  metric is perturbed by at most epsilon per pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .trees import (GeneTree, TreeTopology, WeightedRootedTree,
                    graph_distance, seed_tuple)


@dataclass
class ContractedGeneTree:
    """Unrooted unweighted observation of one gene.

    ``internal_weights`` records the pre-discard weights of the surviving
    internal edges (generation-side bookkeeping for tests; the observation
    proper is just the topology).
    """

    topology: TreeTopology
    gene_index: int = -1
    internal_weights: list = None


@dataclass
class DistortedGeneTree:
    """Rooted weighted observation of one gene."""

    tree: WeightedRootedTree
    gene_index: int = -1
    epsilon: float = 0.0


# ---------------------------------------------------------------------- #
# Cleanup                                                                  #
# ---------------------------------------------------------------------- #


def _cleanup_unrooted(gene: WeightedRootedTree):
    """Unroot, drop material off leaf-leaf paths, fuse degree-2 chains.

    Returns ``(adj, labels)`` where ``adj[v]`` lists ``(neighbor, weight)``
    pairs of the suppressed unrooted tree.
    """
    n = gene.n_nodes
    deg = [0] * n
    nbrs = [[] for _ in range(n)]
    for v in range(n):
        p = gene.parent[v]
        if p >= 0:
            nbrs[v].append((p, gene.wt[v]))
            nbrs[p].append((v, gene.wt[v]))
            deg[v] += 1
            deg[p] += 1
    alive = [True] * n
    stack = [v for v in range(n) if deg[v] <= 1 and v not in gene.label]
    while stack:
        v = stack.pop()
        if not alive[v]:
            continue
        alive[v] = False
        for u, _ in nbrs[v]:
            if alive[u]:
                deg[u] -= 1
                if deg[u] <= 1 and u not in gene.label:
                    stack.append(u)

    def live_deg(v):
        return sum(1 for u, _ in nbrs[v] if alive[u])

    keep = [v for v in range(n)
            if alive[v] and (v in gene.label or live_deg(v) != 2)]
    keepset = set(keep)
    remap = {v: i for i, v in enumerate(keep)}
    adj = [[] for _ in keep]
    labels = {remap[v]: gene.label[v] for v in keep if v in gene.label}
    seen = set()
    for v in keep:
        for u, w in nbrs[v]:
            if not alive[u]:
                continue
            total = w
            prev, cur = v, u
            while cur not in keepset:
                step = [(x, wx) for x, wx in nbrs[cur] if alive[x] and x != prev]
                if not step:
                    break
                prev, cur = cur, step[0][0]
                total += step[0][1]
            if cur in keepset and cur != v:
                key = (min(v, cur), max(v, cur))
                if key not in seen:
                    seen.add(key)
                    adj[remap[v]].append((remap[cur], total))
                    adj[remap[cur]].append((remap[v], total))
    for lst in adj:
        lst.sort()
    return adj, labels


def cleaned_rooted(gene: WeightedRootedTree):
    """Rooted cleanup: keep only leaf-leaf path material, re-root at the
    MRCA of the leaves, fuse non-root degree-2 chains (weights summed).

    The result has internal out-degree exactly 2 for gene trees produced
    by the HGT process.
    """
    n = gene.n_nodes
    nleaf = [0] * n
    for v in gene.postorder():
        if v in gene.label:
            nleaf[v] = 1
        else:
            nleaf[v] = sum(nleaf[c] for c in gene.children[v])
    total = nleaf[gene.root]
    top = gene.root
    while True:
        live = [c for c in gene.children[top] if nleaf[c] == total]
        if live and nleaf[live[0]] == total and top not in gene.label:
            top = live[0]
        else:
            break

    kept = {}
    parent, children, label, wt = [], [], {}, []

    def add(node, lab=None):
        i = len(parent)
        parent.append(-1)
        children.append([])
        wt.append(0.0)
        if lab is not None:
            label[i] = lab
        kept[node] = i
        return i

    add(top, gene.label.get(top))
    stack = [(c, top, gene.wt[c]) for c in gene.children[top] if nleaf[c] > 0]
    while stack:
        v, anc, acc = stack.pop()
        live = [c for c in gene.children[v] if nleaf[c] > 0]
        if v not in gene.label and len(live) == 1:
            stack.append((live[0], anc, acc + gene.wt[live[0]]))
            continue
        i = add(v, gene.label.get(v))
        parent[i] = kept[anc]
        children[kept[anc]].append(i)
        wt[i] = acc
        for c in live:
            stack.append((c, v, gene.wt[c]))
    return WeightedRootedTree(parent, children, kept[top], label, wt)


# ---------------------------------------------------------------------- #
# Contraction                                                              #
# ---------------------------------------------------------------------- #


def contract(gene: WeightedRootedTree, epsilon, policy="all", seed=0,
             gene_index=None):
    """Epsilon-contraction of a gene tree.

    After the unrooted cleanup, internal edges of weight <= *epsilon* are
    collapsed according to *policy*: ``"all"`` (default, the adversarially
    hardest deterministic choice), ``"none"``, or ``("random", p)`` which
    collapses each eligible edge independently with probability *p* using
    *seed*.  Pendant edges are never collapsed (leaves stay leaves).
    """
    adj, labels = _cleanup_unrooted(gene)
    m = len(adj)
    take = _contract_selector(policy, seed)

    uf = list(range(m))

    def find(x):
        while uf[x] != x:
            uf[x] = uf[uf[x]]
            x = uf[x]
        return x

    for v in range(m):
        for u, w in adj[v]:
            if u <= v:
                continue
            if v in labels or u in labels:
                continue
            if w <= epsilon and take(v, u):
                uf[find(u)] = find(v)

    comp = {}
    new_adj = []
    new_labels = {}
    internal_w = []
    for v in range(m):
        r = find(v)
        if r not in comp:
            comp[r] = len(new_adj)
            new_adj.append([])
    for v in range(m):
        c = comp[find(v)]
        if v in labels:
            new_labels[c] = labels[v]
        for u, w in adj[v]:
            cu = comp[find(u)]
            if cu != c and cu not in new_adj[c]:
                new_adj[c].append(cu)
                if v not in labels and u not in labels:
                    internal_w.append(w)
    for lst in new_adj:
        lst.sort()
    topo = TreeTopology(new_adj, new_labels)
    idx = gene_index if gene_index is not None else getattr(gene, "gene_index", -1)
    return ContractedGeneTree(topo, idx, internal_w)


def _contract_selector(policy, seed):
    if policy == "all":
        return lambda v, u: True
    if policy == "none":
        return lambda v, u: False
    if isinstance(policy, tuple) and policy and policy[0] == "random":
        p = float(policy[1])
        rng = np.random.default_rng(
            np.random.SeedSequence(seed_tuple(seed, 0xC0)))
        return lambda v, u: bool(rng.random() < p)
    raise ValueError(f"unknown contraction policy {policy!r}")


# ---------------------------------------------------------------------- #
# Distortion                                                               #
# ---------------------------------------------------------------------- #


def distort(gene: WeightedRootedTree, epsilon, seed=0, gene_index=None,
            perturb=None):
    """Epsilon-distortion of a gene tree.

    The rooted cleanup is followed by an independent uniform perturbation
    in ``[-epsilon/2, +epsilon/2]`` of every pendant edge weight (clamped
    positive).  Any leaf pair crosses exactly two pendant edges, so the
    leaf metric moves by at most *epsilon*.  A caller-supplied *perturb*
    hook ``(tree, rng) -> None`` replaces the default noise for
    adversarial stress tests; the hook owns the epsilon guarantee.
    """
    clean = cleaned_rooted(gene)
    rng = np.random.default_rng(
        np.random.SeedSequence(seed_tuple(seed, 0xD1)))
    if perturb is not None:
        perturb(clean, rng)
    elif epsilon > 0:
        for v in clean.label:
            delta = float(rng.uniform(-epsilon / 2.0, epsilon / 2.0))
            clean.wt[v] = max(clean.wt[v] + delta, 1e-12)
    idx = gene_index if gene_index is not None else -1
    return DistortedGeneTree(clean, idx, epsilon)


# ---------------------------------------------------------------------- #
# Distances                                                                #
# ---------------------------------------------------------------------- #


def observed_distance(obs, u, v):
    """Graph distance (contraction) or weighted distance (distortion)
    between two leaf labels."""
    if isinstance(obs, ContractedGeneTree):
        return graph_distance(obs.topology, u, v)
    if isinstance(obs, DistortedGeneTree):
        return obs.tree.leaf_distance(u, v)
    raise TypeError(f"not an observation: {type(obs).__name__}")
