"""
diluted.py
==========
Diluted-subtree combinatorics.

A diluted subtree of a rooted binary tree shares the root and, at every
node sitting at depth 0 mod 3 of the subtree, keeps all children, all
grandchildren, and all great-grandchildren except at most one.  The
dynamic program here locates, inside an observed gene tree, a real
subtree leafsomorphic to a diluted subtree of a query tree; it is the
engine both reconstruction algorithms call after every merge.

The DP state is computed lazily per query node and cached, so growing a
query forest one join at a time (the reconstruction loop) only ever pays
for the new root.  A brute-force oracle (exhaustive enumeration of
diluted subtrees and real subtrees) backs the DP in tests.
"""

from __future__ import annotations

from bisect import bisect_right as _bisect_right
from dataclasses import dataclass

import numpy as np

from .lca import LcaIndex
from .trees import RootedTree, TreeTopology

ORACLE_LEAF_CAP = 12


# ====================================================================== #
# Query forest                                                            #
# ====================================================================== #


class QueryForest:
    """Persistent forest of query trees.

    Nodes are append-only: a node's children never change after creation,
    so per-node match results stay valid as the forest grows by joins.
    """

    def __init__(self):
        self.children = []
        self.label = {}
        self.min_diluted = []  # per node: least leaf count of a diluted subtree
        self._balls = {}

    def add_leaf(self, label):
        key = len(self.children)
        self.children.append([])
        self.min_diluted.append(1)
        self.label[key] = label
        return key

    def add_node(self, child_keys):
        key = len(self.children)
        self.children.append(list(child_keys))
        kids = self.children[key]
        gc = [c for k in kids for c in self.children[k]]
        ggc = [c for k in gc for c in self.children[k]]
        shallow = sum(1 for k in kids if not self.children[k])
        shallow += sum(1 for k in gc if not self.children[k])
        md = shallow + sum(self.min_diluted[w] for w in ggc)
        if ggc:
            md -= max(self.min_diluted[w] for w in ggc)
        self.min_diluted.append(md)
        return key

    def is_leaf(self, key):
        return not self.children[key]

    def ingest_rooted(self, tree: RootedTree):
        """Add a whole rooted tree; returns (keys in postorder, root key)."""
        keymap = {}
        order = tree.postorder()
        for v in order:
            if tree.children[v]:
                keymap[v] = self.add_node([keymap[c] for c in tree.children[v]])
            else:
                keymap[v] = self.add_leaf(tree.label[v])
        return [keymap[v] for v in order], keymap[tree.root]

    def subtree_labels(self, key):
        out, stack = [], [key]
        while stack:
            v = stack.pop()
            if not self.children[v]:
                out.append(self.label[v])
            else:
                stack.extend(self.children[v])
        return sorted(out)

    def as_rooted_tree(self, key):
        parent, children, label = [], [], {}

        def build(k):
            v = len(parent)
            parent.append(-1)
            children.append([])
            if not self.children[k]:
                label[v] = self.label[k]
            for c in self.children[k]:
                cv = build(c)
                parent[cv] = v
                children[v].append(cv)
            return v

        root = build(key)
        return RootedTree(parent, children, root, label)

    # ------------------------------------------------------------------ #

    def ball(self, key):
        """Depth-3 ball description of *key* (cached)."""
        spec = self._balls.get(key)
        if spec is None:
            spec = _BallSpec(self, key)
            self._balls[key] = spec
        return spec


class _BallSpec:
    """Children / grandchildren / great-grandchildren view of one node,
    with the suppressed almost-ball structures used by the embedding DP."""

    __slots__ = ("key", "children", "shallow_labels", "ggc", "min_leaves",
                 "variants", "root_degree")

    def __init__(self, forest, key):
        self.key = key
        self.children = list(forest.children[key])
        gc = [c for k in self.children for c in forest.children[k]]
        self.ggc = [c for k in gc for c in forest.children[k]]
        labs = [forest.label[k] for k in self.children if forest.is_leaf(k)]
        labs += [forest.label[k] for k in gc if forest.is_leaf(k)]
        self.shallow_labels = sorted(labs)
        self.min_leaves = forest.min_diluted[key]
        drops = sorted(self.ggc) if self.ggc else [None]
        self.variants = [(w, _ball_struct(forest, key, w)) for w in drops]
        self.root_degree = len(self.variants[0][1][1])


def _ball_struct(forest, key, drop):
    """Suppressed ball-minus-*drop* as nested (payload, children) tuples.

    Leaf payloads: ``("lab", l)`` for a tree leaf at depth <= 2,
    ``("ggc", w)`` for a depth-3 cut point.
    """

    def rec(v, depth):
        if depth == 3:
            return ("ggc", v), ()
        if forest.is_leaf(v):
            return ("lab", forest.label[v]), ()
        kids = []
        for c in forest.children[v]:
            if depth == 2 and c == drop:
                continue
            kids.append(rec(c, depth + 1))
        if len(kids) == 1 and depth > 0:
            return kids[0]
        return None, tuple(kids)

    return rec(key, 0)


# ====================================================================== #
# Match records                                                           #
# ====================================================================== #


@dataclass
class Match:
    """One real subtree of the observed tree leafsomorphic to a diluted
    subtree of a query node.

    ``root`` is the observed node the subtree hangs from; ``nodes`` is the
    full observed-node set of the embedded subtree; ``leaf_pick`` is a
    canonical leaf label inside it.
    """

    root: int
    nodes: frozenset
    leaf_pick: int


def _match_structs(x, y, compat):
    """Leaf-label/ggc-respecting isomorphism between two suppressed
    structures; returns the list of (obs_node, ggc_key) leaf pairings or
    None.  Children are matched by backtracking bipartite assignment."""
    memo = {}

    def go(a, b):
        k = (id(a), id(b))
        if k in memo:
            return memo[k]
        (pa, ca), (pb, cb) = a, b
        res = None
        if not ca and not cb:
            res = compat(pa, pb)
        elif ca and cb and len(ca) == len(cb) and pa is None:
            used = [False] * len(cb)
            picks = []

            def assign(i):
                if i == len(ca):
                    return True
                for j in range(len(cb)):
                    if used[j]:
                        continue
                    sub = go(ca[i], cb[j])
                    if sub is not None:
                        used[j] = True
                        picks.append(sub)
                        if assign(i + 1):
                            return True
                        picks.pop()
                        used[j] = False
                return False

            if assign(0):
                res = [p for sub in picks for p in sub]
        memo[k] = res
        return res

    return go(x, y)


# ====================================================================== #
# Matchers                                                                #
# ====================================================================== #


class _MatcherBase:
    """Shared candidate filtering and step-3 verification logic."""

    def __init__(self, forest):
        self.forest = forest
        self.matches = {}

    def _path_union(self, anchors):
        """All vertices on paths between anchors (their Steiner tree).

        Any embedding root fans anchors out in two or more directions, so
        it lies on a path between two of them; restricting candidates to
        this set is lossless.
        """
        par, dep = self.par, self.dep
        top = anchors[0]
        for x in anchors[1:]:
            px, py = top, x
            while px != py:
                if dep[px] >= dep[py]:
                    px = par[px]
                else:
                    py = par[py]
            top = px
        marked = {top}
        for x in anchors:
            cur = x
            while cur not in marked:
                marked.add(cur)
                cur = par[cur]
        return marked

    def matches_of(self, key):
        got = self.matches.get(key)
        if got is None:
            got = self._compute(key)
            self.matches[key] = got
        return got

    def _label_mask(self, labels):
        m = 0
        for l in labels:
            b = self.bit.get(l)
            if b is None:
                return None
            m |= b
        return m

    def _verify(self, ball, b_node, inv, tnodes_builder):
        """Try every almost-ball variant at candidate root *b_node*."""
        for w_drop, struct in ball.variants:
            needed = [w for w in ball.ggc if w != w_drop]
            roots = []
            ok = True
            for w in needed:
                m = inv.get(w)
                if m is None:
                    ok = False
                    break
                roots.append(m.root)
            if not ok or len(set(roots)) != len(roots) or b_node in roots:
                continue
            built = tnodes_builder(roots)
            if built is None:
                continue
            tstruct, tnodes = built
            inv_roots = {}
            for w in needed:
                inv_roots.setdefault(inv[w].root, set()).add(w)

            def compat(pa, pb):
                if pa[0] == "lab" and pb[0] == "lab":
                    return [] if pa[1] == pb[1] else None
                if pa[0] == "obs" and pb[0] == "ggc":
                    if pb[1] in inv_roots.get(pa[1], ()):
                        return [(pa[1], pb[1])]
                return None

            pairs = _match_structs(tstruct, struct, compat)
            if pairs is None:
                continue
            nodes = set(tnodes)
            pick = min(ball.shallow_labels) if ball.shallow_labels else None
            best_w = None
            for o, w in pairs:
                nodes.update(inv[w].nodes)
                if pick is None and (best_w is None or w < best_w):
                    best_w = w
            if pick is None:
                pick = inv[best_w].leaf_pick
            return Match(b_node, frozenset(nodes), pick)
        return None


def _struct_from_marks(root, children_of, payload):
    """Suppressed (payload, children) structure of a marked Steiner tree.

    Returns None if a payload-carrying node is internal (such a tree can
    never match an almost ball, whose labeled nodes are all leaves)."""
    bad = []

    def rec(v, at_root):
        kids = children_of.get(v, ())
        pay = payload.get(v)
        if kids and pay is not None:
            bad.append(v)
            return None, ()
        if not kids:
            return pay, ()
        subs = [rec(c, False) for c in kids]
        if bad:
            return None, ()
        if len(subs) == 1 and not at_root:
            return subs[0]
        return None, tuple(subs)

    out = rec(root, True)
    return None if bad else out


class RootedMatcher(_MatcherBase):
    """Embedding DP against one rooted observed tree."""

    def __init__(self, obs: RootedTree, forest: QueryForest):
        super().__init__(forest)
        self.obs = obs
        self.lca = LcaIndex(obs.parent, obs.children, obs.root,
                            getattr(obs, "wt", None))
        self.leaf_node = {l: v for v, l in obs.label.items()}
        self.bit = {l: 1 << i for i, l in enumerate(sorted(self.leaf_node))}
        n = obs.n_nodes
        mask = [0] * n
        count = [0] * n
        for v in obs.postorder():
            if v in obs.label:
                mask[v] |= self.bit[obs.label[v]]
                count[v] += 1
            for c in obs.children[v]:
                mask[v] |= mask[c]
                count[v] += count[c]
        self.mask = mask
        self.count = count
        self.tin = self.lca.tin.tolist()
        self.tout = self.lca.tout.tolist()
        self.par = obs.parent
        self.dep = obs.depths()
        self.kids = obs.children
        self.kid_tins = [[self.tin[c] for c in obs.children[v]]
                         for v in range(n)]

    def _below(self, v, x):
        return self.tin[v] <= self.tin[x] and self.tout[x] <= self.tout[v]

    def _child_class(self, b, x):
        """The child of *b* whose subtree holds descendant *x*."""
        tins = self.kid_tins[b]
        i = _bisect_right(tins, self.tin[x]) - 1
        return self.kids[b][i]

    def _compute(self, key):
        forest = self.forest
        if forest.is_leaf(key):
            node = self.leaf_node.get(forest.label[key])
            if node is None:
                return []
            return [Match(node, frozenset((node,)), forest.label[key])]
        ball = forest.ball(key)
        need = self._label_mask(ball.shallow_labels)
        if need is None:
            return []
        child_matches = {w: self.matches_of(w) for w in ball.ggc}
        l_nodes = [self.leaf_node[l] for l in ball.shallow_labels]
        rc = ball.root_degree
        anchors = sorted(set(l_nodes)
                         | {m.root for w in ball.ggc
                            for m in child_matches[w]})
        if not anchors:
            return []
        out = []
        mask, count = self.mask, self.count
        for v in sorted(self._path_union(anchors)):
            if count[v] < ball.min_leaves or (mask[v] & need) != need:
                continue
            inv = {}
            misses = 0
            for w in ball.ggc:
                got = None
                for m in child_matches[w]:
                    if self._below(v, m.root):
                        got = m
                        break
                if got is None:
                    misses += 1
                    if misses > 1:
                        break
                else:
                    inv[w] = got
            if misses > 1:
                continue
            # anchors must fan out of v in rc (or rc+1, one droppable)
            # child directions; fewer can never match the ball root
            classes = set()
            bad = False
            for x in l_nodes:
                if x == v:
                    bad = True
                    break
                classes.add(self._child_class(v, x))
            if bad:
                continue
            for m in inv.values():
                if m.root == v:
                    continue
                classes.add(self._child_class(v, m.root))
            if not (rc <= len(classes) <= rc + 1):
                continue

            def build(roots, v=v):
                return self._steiner(v, roots, ball)

            m = self._verify(ball, v, inv, build)
            if m is not None:
                out.append(m)
        return out

    def _steiner(self, top, inv_roots, ball):
        targets = list(inv_roots)
        payload = {o: ("obs", o) for o in inv_roots}
        for l in ball.shallow_labels:
            o = self.leaf_node[l]
            if o in payload:
                return None
            payload[o] = ("lab", l)
            targets.append(o)
        marked = {top}
        children_of = {}
        parent = self.obs.parent
        for x in targets:
            path = []
            cur = x
            while cur not in marked:
                path.append(cur)
                cur = parent[cur]
                if cur < 0:
                    return None
            for node in path:
                marked.add(node)
            for node in path:
                children_of.setdefault(parent[node], []).append(node)
        struct = _struct_from_marks(top, children_of, payload)
        if struct is None:
            return None
        return struct, marked


class UnrootedMatcher(_MatcherBase):
    """Embedding DP against one unrooted observed topology.

    Candidate roots are scanned over directed edges ``(a -> b)``: the
    observed tree rooted just above *b* on the *a* side, which realizes
    the re-rooting loop of the unrooted identification procedure.
    """

    def __init__(self, topo: TreeTopology, forest: QueryForest):
        super().__init__(forest)
        self.topo = topo
        # root at an internal vertex so labeled nodes stay childless
        anchor = max(range(topo.n_nodes), key=lambda v: (topo.degree(v), -v))
        rooted = topo.rooted_at(anchor)
        self.rooted = rooted
        self.lca = LcaIndex(rooted.parent, rooted.children, rooted.root)
        self.leaf_node = {l: v for v, l in topo.label.items()}
        self.bit = {l: 1 << i for i, l in enumerate(sorted(self.leaf_node))}
        n = topo.n_nodes
        mask = [0] * n
        count = [0] * n
        for v in rooted.postorder():
            if v in rooted.label:
                mask[v] |= self.bit[rooted.label[v]]
                count[v] += 1
            for c in rooted.children[v]:
                mask[v] |= mask[c]
                count[v] += count[c]
        self.submask = mask
        self.subcount = count
        self.full_mask = mask[rooted.root]
        self.n_leaves = count[rooted.root]
        self.par = rooted.parent
        self.dep = rooted.depths()
        self.tin = self.lca.tin.tolist()
        self.tout = self.lca.tout.tolist()
        self.kids = rooted.children
        self.kid_tins = [[self.tin[c] for c in rooted.children[v]]
                         for v in range(n)]

    def _below(self, v, x):
        return self.tin[v] <= self.tin[x] and self.tout[x] <= self.tout[v]

    # side of direction (a -> b): the component of b with edge {a,b} cut
    def _side_mask_count(self, a, b):
        if self.par[b] == a:
            return self.submask[b], self.subcount[b]
        return (self.full_mask & ~self.submask[a],
                self.n_leaves - self.subcount[a])

    def _in_side(self, a, b, x):
        if self.par[b] == a:
            return self._below(b, x)
        return not self._below(a, x)

    def _class_of(self, a, b, x):
        """Direction class of *x* around *b*: a child of b, or -1 for the
        parent side.  *x* must lie in the (a -> b) side and differ from b."""
        if self._below(b, x):
            i = _bisect_right(self.kid_tins[b], self.tin[x]) - 1
            return self.kids[b][i]
        return -1

    def _compute(self, key):
        forest = self.forest
        if forest.is_leaf(key):
            node = self.leaf_node.get(forest.label[key])
            if node is None:
                return []
            return [Match(node, frozenset((node,)), forest.label[key])]
        ball = forest.ball(key)
        need = self._label_mask(ball.shallow_labels)
        if need is None:
            return []
        child_matches = {w: self.matches_of(w) for w in ball.ggc}
        l_nodes = [self.leaf_node[l] for l in ball.shallow_labels]
        rc = ball.root_degree
        anchors = sorted(set(l_nodes)
                         | {m.root for w in ball.ggc
                            for m in child_matches[w]})
        if not anchors:
            return []
        out = []
        adj = self.topo.adj
        cands = [(b, a) for b in sorted(self._path_union(anchors))
                 for a in adj[b]]
        for b, a in cands:
            covered = False
            for m in out:
                if m.root == b and a not in m.nodes:
                    covered = True
                    break
            if covered:
                continue
            smask, scount = self._side_mask_count(a, b)
            if scount < ball.min_leaves or (smask & need) != need:
                continue
            inv = {}
            misses = 0
            for w in ball.ggc:
                got = None
                for m in child_matches[w]:
                    if self._in_side(a, b, m.root) and a not in m.nodes:
                        got = m
                        break
                if got is None:
                    misses += 1
                    if misses > 1:
                        break
                else:
                    inv[w] = got
            if misses > 1:
                continue
            classes = set()
            bad = False
            for x in l_nodes:
                if x == b:
                    bad = True
                    break
                classes.add(self._class_of(a, b, x))
            if bad:
                continue
            for m in inv.values():
                if m.root != b:
                    classes.add(self._class_of(a, b, m.root))
            if not (rc <= len(classes) <= rc + 1):
                continue

            def build(roots, a=a, b=b):
                return self._steiner(a, b, roots, ball)

            m = self._verify(ball, b, inv, build)
            if m is not None:
                out.append(m)
        return out

    def _steiner(self, a, b, inv_roots, ball):
        targets = list(inv_roots)
        payload = {o: ("obs", o) for o in inv_roots}
        for l in ball.shallow_labels:
            o = self.leaf_node[l]
            if o in payload:
                return None
            payload[o] = ("lab", l)
            targets.append(o)
        # paths from b to each target in the globally rooted view
        parent = self.par
        dep = self.dep
        toward_b = {}
        marked = {b}
        for x in targets:
            if x in marked:
                continue
            # two-pointer climb to the x/b meeting point
            px, pb = x, b
            while px != pb:
                if dep[px] >= dep[pb]:
                    px = parent[px]
                else:
                    pb = parent[pb]
            anc = px
            cur = x
            up = []
            while cur != anc:
                up.append(cur)
                cur = parent[cur]
            cur = b
            down = [b]
            while cur != anc:
                cur = parent[cur]
                down.append(cur)
            # toward-b orientation: along `up`, toward b is the parent;
            # along `down`, toward b is the previous (deeper) node
            stop = False
            for node in up:
                if node in marked:
                    stop = True
                    break
                marked.add(node)
                toward_b[node] = parent[node]
            if not stop:
                for i in range(len(down) - 1, 0, -1):
                    node = down[i]
                    if node in marked and node != anc:
                        break
                    marked.add(node)
                    toward_b[node] = down[i - 1]
        children_of = {}
        for node, nxt in toward_b.items():
            children_of.setdefault(nxt, []).append(node)
        struct = _struct_from_marks(b, children_of, payload)
        if struct is None:
            return None
        return struct, marked


# ====================================================================== #
# Predicate and enumeration                                               #
# ====================================================================== #


def _as_node_set(t_prime, t: RootedTree):
    if isinstance(t_prime, (set, frozenset)):
        nodes = set(t_prime)
        if t.root not in nodes:
            raise ValueError("subtree does not contain the host root")
        for v in nodes:
            if v != t.root and t.parent[v] not in nodes:
                raise ValueError("subtree is not closed under parents")
        return nodes
    raise TypeError("t_prime must be a node set of the host tree")


def is_diluted_subtree(t_prime, t: RootedTree):
    """Diluted-subtree predicate.

    *t_prime* is a root-sharing subtree of *t* given as a node-id set
    (parent-closed, containing ``t.root``).  At every shared node whose
    depth is 0 mod 3, descendant counts one and two levels down must
    agree exactly between subtree and host, and three levels down they
    may differ by at most one.  Nodes shallower than a checkpoint satisfy
    the deeper conditions vacuously.
    """
    nodes = _as_node_set(t_prime, t)
    dep = t.depths()
    for u in nodes:
        if dep[u] % 3 != 0:
            continue
        kids = t.children[u]
        kids_in = [c for c in kids if c in nodes]
        if len(kids_in) != len(kids):
            return False
        gc = [c for k in kids for c in t.children[k]]
        gc_in = [c for c in gc if c in nodes]
        if len(gc_in) != len(gc):
            return False
        ggc = [c for k in gc for c in t.children[k]]
        ggc_in = [c for c in ggc if c in nodes]
        if len(ggc) - len(ggc_in) > 1:
            return False
    return True


def enumerate_diluted_subtrees(t: RootedTree, cap=200000):
    """All diluted subtrees of *t* as node-id frozensets (test oracle)."""
    if len(t.label) > ORACLE_LEAF_CAP:
        raise ValueError(
            f"enumeration capped at {ORACLE_LEAF_CAP} leaves")

    def rec(u):
        kids = t.children[u]
        gc = [c for k in kids for c in t.children[k]]
        ggc = [c for k in gc for c in t.children[k]]
        base = frozenset([u, *kids, *gc])
        if not ggc:
            return [base]
        out = []
        for drop in [None, *ggc]:
            kept = [w for w in ggc if w != drop]
            combos = [base]
            for w in kept:
                subs = rec(w)
                combos = [c | s for c in combos for s in subs]
                if len(combos) > cap:
                    raise RuntimeError("diluted enumeration exploded")
            out.extend(combos)
        return out

    seen = set()
    result = []
    for s in rec(t.root):
        if s not in seen:
            seen.add(s)
            result.append(s)
    return result


def enumerate_real_subtrees(t: RootedTree, root):
    """All real subtrees of *t* rooted exactly at *root* (node-id sets).

    A real subtree keeps, below every retained internal node, a nonempty
    subset of its children; its leaves are therefore leaves of *t*.
    """

    def rec(u):
        if not t.children[u]:
            return [frozenset((u,))]
        out = []
        kids = t.children[u]
        for pick in range(1, 1 << len(kids)):
            chosen = [kids[i] for i in range(len(kids)) if pick >> i & 1]
            combos = [frozenset((u,))]
            for c in chosen:
                subs = rec(c)
                combos = [x | s for x in combos for s in subs]
            out.extend(combos)
        return out

    return rec(root)


def subset_canonical_form(t: RootedTree, nodes, root):
    """Canonical suppressed form of the subtree induced by *nodes*."""
    kids = {v: [c for c in t.children[v] if c in nodes] for v in nodes}
    form, minlab = {}, {}

    def key(v):
        return minlab[v]

    order = []
    stack = [root]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(kids[v])
    for v in reversed(order):
        cs = kids[v]
        if not cs:
            form[v] = t.label.get(v)
            minlab[v] = t.label.get(v)
        elif len(cs) == 1 and v != root:
            form[v] = form[cs[0]]
            minlab[v] = minlab[cs[0]]
        else:
            srt = sorted(cs, key=key)
            form[v] = tuple(form[c] for c in srt)
            minlab[v] = minlab[srt[0]]
    return form[root]


# ====================================================================== #
# Public entry points                                                     #
# ====================================================================== #


def find_diluted_embedding(t: RootedTree, t_obs: RootedTree):
    """Real subtree of *t_obs* leafsomorphic to a diluted subtree of *t*.

    Returns a :class:`Match` (root node in *t_obs* plus the embedded node
    set) or None.  Polynomial-time dynamic program over both trees.
    """
    forest = QueryForest()
    _, root_key = forest.ingest_rooted(t)
    matcher = RootedMatcher(t_obs, forest)
    got = matcher.matches_of(root_key)
    return got[0] if got else None


def find_diluted_embedding_unrooted(t: RootedTree, t_obs: TreeTopology,
                                    candidate_root):
    """Unrooted variant anchored at *candidate_root*: re-roots *t_obs* at
    each neighbor of the candidate and accepts the first rooted success
    whose embedding hangs from the candidate."""
    forest = QueryForest()
    _, root_key = forest.ingest_rooted(t)
    matcher = UnrootedMatcher(t_obs, forest)
    for m in matcher.matches_of(root_key):
        if m.root == candidate_root:
            return m
    return None


def scan_diluted_embedding_unrooted(t: RootedTree, t_obs: TreeTopology):
    """Scanning variant: first embedding over all candidate roots in
    canonical vertex order."""
    forest = QueryForest()
    _, root_key = forest.ingest_rooted(t)
    matcher = UnrootedMatcher(t_obs, forest)
    got = matcher.matches_of(root_key)
    return got[0] if got else None


def brute_force_oracle(t: RootedTree, t_obs: RootedTree):
    """Exhaustive reference for :func:`find_diluted_embedding`.

    Enumerates every diluted subtree of *t* and every real subtree of
    *t_obs*, returning the first leafsomorphic pair as a Match.
    Exponential; capped at 12 leaves per side.
    """
    if len(t.label) > ORACLE_LEAF_CAP or len(t_obs.label) > ORACLE_LEAF_CAP:
        raise ValueError(f"oracle capped at {ORACLE_LEAF_CAP} leaves")
    targets = {subset_canonical_form(t, s, t.root)
               for s in enumerate_diluted_subtrees(t)}
    for v in range(t_obs.n_nodes):
        for s in enumerate_real_subtrees(t_obs, v):
            if subset_canonical_form(t_obs, s, v) in targets:
                labs = sorted(t_obs.label[u] for u in s if u in t_obs.label)
                return Match(v, s, labs[0])
    return None
