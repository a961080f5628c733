"""
lca.py
======
O(1) LCA and batched distance queries on a fixed rooted tree, via a
sparse-table RMQ over the Euler tour.  Query vectors go through numpy so
per-gene all-pairs leaf distance matrices stay cheap.
"""

from __future__ import annotations

import numpy as np


class LcaIndex:
    """LCA / distance index for one rooted tree.

    Parameters
    ----------
    parent, children, root : the tree structure (see ``trees.RootedTree``)
    edge_weight : optional per-node weight of the edge above each node;
        enables weighted distances alongside edge-count distances.
    """

    def __init__(self, parent, children, root, edge_weight=None):
        n = len(parent)
        self.root = root
        depth = np.zeros(n, dtype=np.int32)
        wdepth = np.zeros(n, dtype=np.float64)
        tin = np.zeros(n, dtype=np.int32)
        tout = np.zeros(n, dtype=np.int32)

        tour = np.empty(2 * n - 1 if n else 0, dtype=np.int32)
        tour_depth = np.empty_like(tour)
        first = np.zeros(n, dtype=np.int32)

        # iterative Euler tour
        pos = 0
        clock = 0
        stack = [(root, 0, iter(children[root]))]
        tin[root] = clock
        clock += 1
        tour[pos] = root
        tour_depth[pos] = 0
        first[root] = pos
        pos += 1
        while stack:
            v, d, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                tout[v] = clock
                clock += 1
                if stack:
                    u, du, _ = stack[-1]
                    tour[pos] = u
                    tour_depth[pos] = du
                    pos += 1
                continue
            depth[nxt] = d + 1
            if edge_weight is not None:
                wdepth[nxt] = wdepth[v] + edge_weight[nxt]
            tin[nxt] = clock
            clock += 1
            tour[pos] = nxt
            tour_depth[pos] = d + 1
            first[nxt] = pos
            pos += 1
            stack.append((nxt, d + 1, iter(children[nxt])))

        self.depth = depth
        self.wdepth = wdepth if edge_weight is not None else None
        self.tin = tin
        self.tout = tout
        self.first = first
        m = pos
        levels = max(1, m.bit_length())
        table = np.empty((levels, m), dtype=np.int32)
        table[0] = np.arange(m, dtype=np.int32)
        td = tour_depth[:m]
        for k in range(1, levels):
            span = 1 << k
            prev = table[k - 1]
            half = 1 << (k - 1)
            lo = prev[: m - span + 1]
            hi = prev[half: m - span + 1 + half]
            table[k, : m - span + 1] = np.where(td[lo] <= td[hi], lo, hi)
        self._table = table
        self._tour = tour[:m]
        self._tour_depth = td
        self._log = np.zeros(m + 1, dtype=np.int32)
        for i in range(2, m + 1):
            self._log[i] = self._log[i >> 1] + 1

    # ------------------------------------------------------------------ #

    def lca(self, u, v):
        return int(self.lca_batch(np.asarray([u]), np.asarray([v]))[0])

    def lca_batch(self, us, vs):
        l = self.first[us]
        r = self.first[vs]
        lo = np.minimum(l, r)
        hi = np.maximum(l, r)
        k = self._log[hi - lo + 1]
        a = self._table[k, lo]
        b = self._table[k, hi - (1 << k) + 1]
        idx = np.where(self._tour_depth[a] <= self._tour_depth[b], a, b)
        return self._tour[idx]

    def dist_batch(self, us, vs):
        """Edge-count distances for parallel arrays of node ids."""
        anc = self.lca_batch(us, vs)
        return self.depth[us] + self.depth[vs] - 2 * self.depth[anc]

    def wdist_batch(self, us, vs):
        anc = self.lca_batch(us, vs)
        return self.wdepth[us] + self.wdepth[vs] - 2.0 * self.wdepth[anc]

    def is_ancestor(self, a, v):
        """True iff *a* is an ancestor of (or equal to) *v*."""
        return self.tin[a] <= self.tin[v] and self.tout[v] <= self.tout[a]
