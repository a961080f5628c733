"""
trees.py
========
Core tree data model shared by the whole package:

* ``SpeciesPhylogeny`` -- rooted ultrametric binary tree with per-edge
  inter-speciation times, transfer rates and substitution rates.
* ``RootedTree`` / ``WeightedRootedTree`` -- generic rooted leaf-labeled
  trees (cluster trees, cleaned gene trees, reconstruction outputs).
* ``TreeTopology`` -- unrooted unweighted leaf-labeled topologies
  (contractions, unrooted reconstruction outputs).
* ``Location`` -- a continuous point on a species-tree edge.

Conventions
-----------
Nodes are integers ``0..n_nodes-1``.  Every non-root node has exactly one
parent, so an *edge* is identified by its lower (leafward) endpoint; all
per-edge arrays (``tau``, ``lam``, ``mu``, weights) are indexed by that
node.  Leaf labels are integers ``1..n``.  Canonical child ordering (sort
children by the smallest leaf label in their subtree) makes serialization
and isomorphism checks byte-deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TOL = 1e-9  # absolute tolerance for time / weight comparisons


def seed_tuple(*parts):
    """Flatten nested seed parts into a tuple of ints for SeedSequence."""
    out = []
    stack = list(parts)
    while stack:
        p = stack.pop(0)
        if isinstance(p, (tuple, list)):
            stack = list(p) + stack
        elif p is None:
            out.append(0)
        else:
            out.append(int(p))
    return tuple(out)


# ====================================================================== #
# Generic rooted trees                                                    #
# ====================================================================== #


class RootedTree:
    """A rooted leaf-labeled tree stored as parent/children lists.

    Attributes
    ----------
    parent   : list[int]       parent node id; -1 for the root
    children : list[list[int]] child node ids, [] for leaves
    root     : int
    label    : dict[int, int]  leaf node -> leaf label
    """

    __slots__ = ("parent", "children", "root", "label", "_node_of_label")

    def __init__(self, parent, children, root, label):
        self.parent = parent
        self.children = children
        self.root = root
        self.label = label
        self._node_of_label = None

    # ---------------- construction helpers ---------------- #

    @classmethod
    def from_nested(cls, nested):
        """Build from nested tuples/lists; atoms are leaf labels.

        ``((1, 2), (3, 4))`` is the balanced 4-leaf shape.
        """
        parent, children, label = [], [], {}

        def build(spec):
            node = len(parent)
            parent.append(-1)
            children.append([])
            if isinstance(spec, (tuple, list)):
                for sub in spec:
                    c = build(sub)
                    parent[c] = node
                    children[node].append(c)
            else:
                label[node] = int(spec)
            return node

        root = build(nested)
        return cls(parent, children, root, label)

    def copy(self):
        return RootedTree(
            list(self.parent),
            [list(c) for c in self.children],
            self.root,
            dict(self.label),
        )

    # ---------------- basic queries ---------------- #

    @property
    def n_nodes(self):
        return len(self.parent)

    def is_leaf(self, v):
        return not self.children[v]

    def leaves(self):
        return [v for v in range(self.n_nodes) if not self.children[v]]

    def leaf_labels(self):
        return sorted(self.label.values())

    def node_of_label(self, lab):
        if self._node_of_label is None:
            self._node_of_label = {l: v for v, l in self.label.items()}
        return self._node_of_label[lab]

    def postorder(self):
        """Node ids, children before parents (iterative)."""
        order, stack = [], [self.root]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(self.children[v])
        order.reverse()
        return order

    def depths(self):
        dep = [0] * self.n_nodes
        stack = [self.root]
        while stack:
            v = stack.pop()
            for c in self.children[v]:
                dep[c] = dep[v] + 1
                stack.append(c)
        return dep

    def subtree_nodes(self, v):
        out, stack = [], [v]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(self.children[u])
        return out

    def subtree_labels(self, v):
        return sorted(self.label[u] for u in self.subtree_nodes(v) if u in self.label)

    def mrca(self, nodes):
        """Most recent common ancestor of a set of nodes."""
        nodes = list(nodes)
        dep = self.depths()
        cur = set(nodes)
        while len(cur) > 1:
            v = max(cur, key=lambda u: (dep[u], u))
            cur.discard(v)
            cur.add(self.parent[v])
        return cur.pop()

    # ---------------- structure transforms ---------------- #

    def restrict(self, labels):
        """Minimal rooted subtree spanning *labels*, rooted at their MRCA.

        Degree-2 vertices are kept; callers suppress explicitly.  Node ids
        are renumbered; returns a new RootedTree.
        """
        labels = set(labels)
        if not labels:
            raise ValueError("restrict: empty leaf subset")
        missing = labels - set(self.label.values())
        if missing:
            raise KeyError(f"restrict: labels not in tree: {sorted(missing)}")
        targets = [self.node_of_label(l) for l in labels]
        top = self.mrca(targets)
        # keep = union of paths from targets to top
        keep = set()
        for v in targets:
            u = v
            while True:
                if u in keep:
                    break
                keep.add(u)
                if u == top:
                    break
                u = self.parent[u]
        return self._induced(keep, top)

    def _induced(self, keep, top):
        remap = {}
        parent, children, label = [], [], {}
        order = [v for v in self.postorder() if v in keep]
        for v in order:
            remap[v] = len(parent)
            parent.append(-1)
            children.append([])
            if v in self.label:
                label[remap[v]] = self.label[v]
        for v in order:
            if v != top:
                p = self.parent[v]
                while p not in keep:
                    p = self.parent[p]
                parent[remap[v]] = remap[p]
                children[remap[p]].append(remap[v])
        return RootedTree(parent, children, remap[top], label)

    def suppressed(self):
        """Copy with maximal unary chains replaced by single edges.

        Path endpoints survive, so a unary root keeps its (single) edge to
        the first branching node -- the path-replacement rule of
        leaf-label-respecting isomorphism.
        """
        root = self.root
        parent, children, label = [], [], {}
        remap = {}

        def is_kept(v):
            return v == root or v in self.label or len(self.children[v]) >= 2

        for v in self.postorder():
            if not is_kept(v):
                continue
            remap[v] = len(parent)
            parent.append(-1)
            children.append([])
            if v in self.label:
                label[remap[v]] = self.label[v]
        # connect each kept node to its nearest kept ancestor
        for v in remap:
            if v == root:
                continue
            p = self.parent[v]
            while p not in remap:
                p = self.parent[p]
            parent[remap[v]] = remap[p]
            children[remap[p]].append(remap[v])
        return RootedTree(parent, children, remap[root], label)

    def canonical_form(self):
        """Nested-tuple canonical form after unary-path suppression.

        Children are ordered by their smallest descendant leaf label, so
        two rooted trees are leafsomorphic iff their forms are equal.
        """
        t = self.suppressed()
        form = {}
        minlab = {}
        for v in t.postorder():
            if not t.children[v]:
                form[v] = t.label.get(v)
                minlab[v] = t.label.get(v)
            else:
                kids = sorted(t.children[v], key=lambda c: minlab[c])
                form[v] = tuple(form[c] for c in kids)
                minlab[v] = minlab[kids[0]]
        return form[t.root]

    def unroot(self):
        """Unrooted topology: drop direction, suppress degree-2 vertices,
        remove material not on a path between two leaves."""
        return TreeTopology.from_rooted(self)


class WeightedRootedTree(RootedTree):
    """RootedTree with a weight on the edge above each node (root: 0.0)."""

    __slots__ = ("wt",)

    def __init__(self, parent, children, root, label, wt):
        super().__init__(parent, children, root, label)
        self.wt = wt

    def copy(self):
        return WeightedRootedTree(
            list(self.parent),
            [list(c) for c in self.children],
            self.root,
            dict(self.label),
            list(self.wt),
        )

    def weighted_depths(self):
        dep = [0.0] * self.n_nodes
        stack = [self.root]
        while stack:
            v = stack.pop()
            for c in self.children[v]:
                dep[c] = dep[v] + self.wt[c]
                stack.append(c)
        return dep

    def leaf_distance(self, a, b):
        """Weighted path length between leaf labels *a* and *b*."""
        u, v = self.node_of_label(a), self.node_of_label(b)
        dep = self.weighted_depths()
        idep = self.depths()
        while u != v:
            if idep[u] >= idep[v]:
                u = self.parent[u]
            else:
                v = self.parent[v]
        anc = u
        ua, va = self.node_of_label(a), self.node_of_label(b)
        return dep[ua] + dep[va] - 2.0 * dep[anc]


def leafsomorphic(a, b):
    """True iff two rooted leaf-labeled trees are equal after suppressing
    unary paths (leaf-label-respecting isomorphism)."""
    return a.canonical_form() == b.canonical_form()


class GeneTree(WeightedRootedTree):
    """Gene tree produced by the HGT process.

    Carries, for the edge above each node ``v``, the species edge it maps
    to (``eta[v]``) and the covered time window ``[zb[v], zf[v]]`` on that
    edge; the branch weight is ``wt[v] = (zf[v]-zb[v]) * mu[eta[v]]``.
    Internal nodes have out-degree 1 or 2 (donor splits and detached
    stubs create the unary ones).
    """

    __slots__ = ("eta", "zb", "zf", "species")

    def __init__(self, parent, children, root, label, wt, eta, zb, zf,
                 species):
        super().__init__(parent, children, root, label, wt)
        self.eta = eta
        self.zb = zb
        self.zf = zf
        self.species = species

    def copy(self):
        return GeneTree(
            list(self.parent), [list(c) for c in self.children], self.root,
            dict(self.label), list(self.wt), list(self.eta), list(self.zb),
            list(self.zf), self.species)

    def validate_gene(self, mu=None):
        """Violated gene-tree invariants (empty list iff valid).

        Unlabeled out-degree-0 vertices are allowed: they are the dangling
        stubs left above detached recipients, removed only by the
        observation cleanup.
        """
        problems = []
        mu = mu if mu is not None else self.species.mu
        for v in range(self.n_nodes):
            if self.parent[v] < 0:
                continue
            nkids = len(self.children[v])
            if v not in self.label and nkids > 2:
                problems.append(f"internal node {v} has out-degree {nkids}")
            if not (-TOL <= self.zb[v] <= self.zf[v] + TOL):
                problems.append(f"edge above {v} has inverted window")
            e = self.eta[v]
            if self.zf[v] > self.species.tau[e] + TOL:
                problems.append(f"edge above {v} overruns species edge {e}")
            w = (self.zf[v] - self.zb[v]) * mu[e]
            if abs(w - self.wt[v]) > TOL:
                problems.append(f"edge above {v} weight != window * mu")
        if sorted(self.label.values()) != self.species.leaf_labels():
            problems.append("leaf label set differs from species tree")
        return problems


# ====================================================================== #
# Unrooted topologies                                                     #
# ====================================================================== #


class TreeTopology:
    """Unrooted, unweighted leaf-labeled tree.

    Attributes
    ----------
    adj   : list[list[int]]   adjacency lists
    label : dict[int, int]    leaf node -> label
    """

    __slots__ = ("adj", "label", "_node_of_label")

    def __init__(self, adj, label):
        self.adj = adj
        self.label = label
        self._node_of_label = None

    @classmethod
    def from_rooted(cls, tree):
        """Unroot a RootedTree: keep only leaf-leaf path material and
        suppress all degree-2 vertices (the old root included)."""
        n = tree.n_nodes
        deg = [0] * n
        adj = [[] for _ in range(n)]
        for v in range(n):
            p = tree.parent[v]
            if p >= 0:
                adj[v].append(p)
                adj[p].append(v)
                deg[v] += 1
                deg[p] += 1
        # iteratively strip unlabeled degree-<=1 vertices (dangling stubs)
        alive = [True] * n
        stack = [v for v in range(n) if deg[v] <= 1 and v not in tree.label]
        while stack:
            v = stack.pop()
            if not alive[v]:
                continue
            alive[v] = False
            for u in adj[v]:
                if alive[u]:
                    deg[u] -= 1
                    if deg[u] <= 1 and u not in tree.label:
                        stack.append(u)
        return cls._rebuild(n, adj, alive, tree.label)

    @classmethod
    def _rebuild(cls, n, adj, alive, label):
        """Rebuild topology from an adjacency with dead vertices removed and
        unlabeled degree-2 vertices suppressed."""
        def live_deg(v):
            return sum(1 for u in adj[v] if alive[u])

        keep = [
            v for v in range(n)
            if alive[v] and (v in label or live_deg(v) != 2)
        ]
        keepset = set(keep)
        remap = {v: i for i, v in enumerate(keep)}
        new_adj = [[] for _ in keep]
        new_label = {remap[v]: label[v] for v in keep if v in label}
        seen_edges = set()
        for v in keep:
            for u in adj[v]:
                if not alive[u]:
                    continue
                # walk through suppressed degree-2 chain
                prev, cur = v, u
                while cur not in keepset:
                    nxts = [w for w in adj[cur] if alive[w] and w != prev]
                    if not nxts:
                        break
                    prev, cur = cur, nxts[0]
                if cur in keepset and cur != v:
                    key = (min(v, cur), max(v, cur))
                    if key not in seen_edges:
                        seen_edges.add(key)
                        new_adj[remap[v]].append(remap[cur])
                        new_adj[remap[cur]].append(remap[v])
        for lst in new_adj:
            lst.sort()
        return cls(new_adj, new_label)

    @property
    def n_nodes(self):
        return len(self.adj)

    def degree(self, v):
        return len(self.adj[v])

    def leaves(self):
        return sorted(self.label)

    def leaf_labels(self):
        return sorted(self.label.values())

    def node_of_label(self, lab):
        if self._node_of_label is None:
            self._node_of_label = {l: v for v, l in self.label.items()}
        return self._node_of_label[lab]

    def rooted_at(self, root):
        """View as a RootedTree rooted at vertex *root* (no suppression)."""
        parent = [-1] * self.n_nodes
        children = [[] for _ in range(self.n_nodes)]
        stack = [root]
        seen = {root}
        order = []
        while stack:
            v = stack.pop()
            order.append(v)
            for u in self.adj[v]:
                if u not in seen:
                    seen.add(u)
                    parent[u] = v
                    children[v].append(u)
                    stack.append(u)
        return RootedTree(parent, children, root, dict(self.label))

    def canonical_form(self):
        """Canonical form of the unrooted topology.

        Rooted at the neighbor of the smallest leaf; the smallest leaf stays
        as an ordinary child, so the form is rooting-independent.
        """
        if not self.label:
            raise ValueError("topology has no leaves")
        lmin = self.node_of_label(min(self.label.values()))
        if self.n_nodes == 1:
            return (self.label[lmin],)
        anchor = self.adj[lmin][0]
        return self.rooted_at(anchor).canonical_form()

    def isomorphic(self, other):
        return self.canonical_form() == other.canonical_form()


# ====================================================================== #
# Graph distance                                                          #
# ====================================================================== #


def graph_distance(tree, u, v, ignore_root=False):
    """Edge count of the u-v path; *u*, *v* are leaf labels.

    For rooted trees with a degree-2 root, ``ignore_root=True`` counts the
    two root edges of a path through the root as one.
    """
    if isinstance(tree, TreeTopology):
        a, b = tree.node_of_label(u), tree.node_of_label(v)
        return _topo_dist(tree, a, b)
    a, b = tree.node_of_label(u), tree.node_of_label(v)
    dep = tree.depths()
    x, y = a, b
    while x != y:
        if dep[x] >= dep[y]:
            x = tree.parent[x]
        else:
            y = tree.parent[y]
    d = dep[a] + dep[b] - 2 * dep[x]
    if ignore_root and x == tree.root and len(tree.children[tree.root]) == 2 \
            and a != tree.root and b != tree.root:
        d -= 1
    return d


def _topo_dist(topo, a, b):
    if a == b:
        return 0
    from collections import deque
    dist = {a: 0}
    q = deque([a])
    while q:
        x = q.popleft()
        for y in topo.adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                if y == b:
                    return dist[y]
                q.append(y)
    raise KeyError(f"no path between {a} and {b}")


# ====================================================================== #
# Species phylogeny                                                       #
# ====================================================================== #


@dataclass(frozen=True)
class Location:
    """A point on a species-tree edge.

    ``edge`` is the lower endpoint of the edge; ``offset`` is the time from
    the edge's upper (rootward) endpoint, in ``[0, tau(edge))``.
    """

    edge: int
    offset: float


@dataclass(frozen=True)
class BoundedRates:
    """Box constraints of the bounded-rates model."""

    lambda_bar: float = 0.05
    rho_lambda: float = 1.0
    tau_bar: float = 1.0
    rho_tau: float = 0.5
    mu_bar: float = 1.0
    rho_mu: float = 0.5

    @property
    def lambda_lo(self):
        return self.rho_lambda * self.lambda_bar

    @property
    def tau_lo(self):
        return self.rho_tau * self.tau_bar

    @property
    def mu_lo(self):
        return self.rho_mu * self.mu_bar

    def check(self):
        if not (0.0 <= self.rho_lambda <= 1.0):
            raise ValueError("rho_lambda must be in [0, 1]")
        if not (0.0 < self.rho_tau <= 1.0 and 0.0 < self.rho_mu <= 1.0):
            raise ValueError("rho_tau and rho_mu must be in (0, 1]")
        if self.lambda_bar < 0 or self.tau_bar <= 0 or self.mu_bar <= 0:
            raise ValueError("rate bounds must be positive")


class SpeciesPhylogeny(RootedTree):
    """Rooted ultrametric binary species phylogeny.

    Leaves are nodes ``0..n-1`` carrying labels ``1..n``.  Edges are keyed
    by their lower endpoint: ``tau[v]``, ``lam[v]`` and ``mu[v]`` describe
    the edge above node ``v`` (entries for the root are 0 and unused).
    """

    __slots__ = ("tau", "lam", "mu", "_depth_time")

    def __init__(self, parent, children, root, label, tau, lam, mu):
        super().__init__(parent, children, root, label)
        self.tau = tau
        self.lam = lam
        self.mu = mu
        self._depth_time = None

    def copy(self):
        return SpeciesPhylogeny(
            list(self.parent), [list(c) for c in self.children], self.root,
            dict(self.label), list(self.tau), list(self.lam), list(self.mu))

    @property
    def n_leaves(self):
        return len(self.label)

    def edges(self):
        """Edge ids (lower endpoints), sorted."""
        return [v for v in range(self.n_nodes) if v != self.root]

    def depth_time(self):
        """Time distance from the root to each node."""
        if self._depth_time is None:
            dep = [0.0] * self.n_nodes
            stack = [self.root]
            while stack:
                v = stack.pop()
                for c in self.children[v]:
                    dep[c] = dep[v] + self.tau[c]
                    stack.append(c)
            self._depth_time = dep
        return self._depth_time

    def edge_span(self, e):
        """(top_depth, bottom_depth) of edge *e* in time units."""
        dep = self.depth_time()
        return dep[e] - self.tau[e], dep[e]

    def root_depth(self, loc: Location):
        top, _ = self.edge_span(loc.edge)
        return top + loc.offset

    def total_hgt_weight(self):
        return float(sum(self.lam[e] * self.tau[e] for e in self.edges()))

    def species_metric(self, u, v):
        """Time-metric distance between leaf labels *u* and *v*."""
        a, b = self.node_of_label(u), self.node_of_label(v)
        dep = self.depth_time()
        idep = self.depths()
        x, y = a, b
        while x != y:
            if idep[x] >= idep[y]:
                x = self.parent[x]
            else:
                y = self.parent[y]
        return dep[a] + dep[b] - 2.0 * dep[x]

    # ---------------- validation ---------------- #

    def validate(self):
        """Return the list of violated invariants (empty iff valid)."""
        problems = []
        if len(self.children[self.root]) != 2:
            problems.append(
                f"root degree is {len(self.children[self.root])}, expected 2")
        for v in range(self.n_nodes):
            if v == self.root or v in self.label:
                continue
            deg = len(self.children[v]) + 1
            if deg != 3:
                problems.append(f"internal vertex {v} has degree {deg}")
        for v in self.label:
            if self.children[v]:
                problems.append(f"labeled vertex {v} is not a leaf")
        labs = sorted(self.label.values())
        if labs != list(range(1, len(labs) + 1)):
            problems.append("leaf labels are not 1..n")
        for e in self.edges():
            if not (self.tau[e] > 0):
                problems.append(f"edge above {e} has non-positive time")
            if self.lam[e] < 0:
                problems.append(f"edge above {e} has negative HGT rate")
            if not (self.mu[e] > 0):
                problems.append(f"edge above {e} has non-positive subst rate")
        dep = self.depth_time()
        leaf_depths = [dep[v] for v in sorted(self.label)]
        if leaf_depths:
            lo, hi = min(leaf_depths), max(leaf_depths)
            if hi - lo > TOL:
                problems.append(
                    f"not ultrametric: leaf depths span [{lo}, {hi}]")
        return problems

    def check_bounded_rates(self, box: BoundedRates):
        """Violations of the bounded-rates box constraints."""
        problems = []
        for e in self.edges():
            if not (box.lambda_lo - TOL <= self.lam[e] <= box.lambda_bar + TOL):
                problems.append(f"lambda out of box on edge {e}")
            if not (box.tau_lo - TOL <= self.tau[e] <= box.tau_bar + TOL):
                problems.append(f"tau out of box on edge {e}")
            if not (box.mu_lo - TOL <= self.mu[e] <= box.mu_bar + TOL):
                problems.append(f"mu out of box on edge {e}")
        return problems

    def relabeled(self, mapping):
        """Copy with leaf labels permuted by *mapping* (label -> label)."""
        out = self.copy()
        out.label = {v: mapping.get(l, l) for v, l in self.label.items()}
        out._node_of_label = None
        return out


def species_metric(tree: SpeciesPhylogeny, u, v):
    return tree.species_metric(u, v)


def validate(tree: SpeciesPhylogeny):
    return tree.validate()


def restrict(tree: RootedTree, labels):
    return tree.restrict(labels)


# ====================================================================== #
# Random bounded-rates phylogenies                                        #
# ====================================================================== #


def random_phylogeny(n, params: BoundedRates = BoundedRates(), seed=0,
                     max_retries=64):
    """Random bounded-rates ultrametric phylogeny on *n* leaves.

    Ultrametricity with every edge time in ``[rho_tau*tau_bar, tau_bar]``
    caps the ratio of root-to-leaf path lengths at ``1/rho_tau``, which
    rules out most unconstrained coalescent shapes once n grows.  The
    sampler therefore builds shape and times together, top down: an
    interval DP computes the feasible height range of a k-leaf subtree,
    the tree height is drawn from the root interval, and each node picks
    a uniformly random feasible leaf-count split and child edge times.
    Deterministic given *seed*.
    """
    if n < 2:
        raise ValueError("need n >= 2 leaves")
    params.check()
    rng = np.random.default_rng(np.random.SeedSequence(seed_tuple(seed)))
    t_lo, t_hi = params.tau_lo, params.tau_bar
    # feasible-height hull [A[k], B[k]] for a k-leaf ultrametric subtree
    # rooted at a node k=1 means the node is the leaf itself (height 0)
    A = [0.0] * (n + 1)
    B = [0.0] * (n + 1)
    for k in range(2, n + 1):
        A[k] = min(max(A[k1], A[k - k1]) for k1 in range(1, k // 2 + 1)) + t_lo
        B[k] = max(min(B[k1], B[k - k1]) for k1 in range(1, k // 2 + 1)) + t_hi
    if A[n] > B[n] + TOL:
        raise RuntimeError(
            f"no ultrametric shape on {n} leaves fits edge times in "
            f"[{t_lo}, {t_hi}]")

    last_err = None
    for _ in range(max_retries):
        try:
            tree = _build_feasible(n, A, B, t_lo, t_hi, params, rng)
        except _Infeasible as err:
            last_err = err
            continue
        return tree
    raise RuntimeError(f"no feasible split sequence: {last_err}")


class _Infeasible(Exception):
    pass


def _build_feasible(n, A, B, t_lo, t_hi, params, rng):
    h = float(rng.uniform(A[n], B[n]))
    parent, children, tau, leaves = [], [], [], []

    def build(k, height, par, edge_time):
        v = len(parent)
        parent.append(par)
        children.append([])
        tau.append(edge_time)
        if par >= 0:
            children[par].append(v)
        if k == 1:
            if abs(height) > TOL:
                raise _Infeasible(f"leaf not at leaf level: {height}")
            leaves.append(v)
            return v
        feas = [k1 for k1 in range(1, k)
                if max(A[k1], A[k - k1]) + t_lo <= height + TOL
                and height <= min(B[k1], B[k - k1]) + t_hi + TOL]
        if not feas:
            raise _Infeasible(f"no split for k={k} at height {height}")
        k1 = int(feas[int(rng.integers(len(feas)))])
        for ki in (k1, k - k1):
            lo = max(t_lo, height - B[ki])
            hi = min(t_hi, height - A[ki])
            if lo > hi + TOL:
                raise _Infeasible(f"edge box empty for k={ki}")
            e = float(rng.uniform(lo, max(lo, hi)))
            if ki == 1:
                e = height  # pendant edge reaches the leaf level exactly
                if not (t_lo - TOL <= e <= t_hi + TOL):
                    raise _Infeasible(f"pendant edge {e}")
            build(ki, height - e, v, e)
        return v

    root = build(n, h, -1, 0.0)
    n_nodes = len(parent)
    lam = [0.0] * n_nodes
    mu = [1.0] * n_nodes
    for v in range(n_nodes):
        if v != root:
            lam[v] = float(rng.uniform(params.lambda_lo, params.lambda_bar))
            mu[v] = float(rng.uniform(params.mu_lo, params.mu_bar))
    perm = [int(x) + 1 for x in rng.permutation(n)]
    label = {v: perm[i] for i, v in enumerate(leaves)}
    # leaf ids must come first for the 0..n-1 leaf convention; renumber
    remap = {}
    for i, v in enumerate(sorted(leaves, key=lambda v: label[v])):
        remap[v] = i
    for v in range(n_nodes):
        if v not in remap:
            remap[v] = len(remap)
    parent2 = [-1] * n_nodes
    children2 = [[] for _ in range(n_nodes)]
    tau2 = [0.0] * n_nodes
    lam2 = [0.0] * n_nodes
    mu2 = [1.0] * n_nodes
    label2 = {}
    for v in range(n_nodes):
        nv = remap[v]
        if parent[v] >= 0:
            parent2[nv] = remap[parent[v]]
        tau2[nv], lam2[nv], mu2[nv] = tau[v], lam[v], mu[v]
        if v in label:
            label2[nv] = label[v]
    for v in range(n_nodes):
        if parent2[v] >= 0:
            children2[parent2[v]].append(v)
    return SpeciesPhylogeny(parent2, children2, remap[root], label2,
                            tau2, lam2, mu2)
