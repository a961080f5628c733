"""
newick.py
=========
Newick text I/O for every tree kind in the package.

Grammar (UTF-8, semicolon-terminated)::

    tree    := subtree ";"
    subtree := "(" subtree ("," subtree)* ")" [label] [":" number] [comment]
             | label [":" number] [comment]
    comment := "[" "&"? key "=" value ("," key "=" value)* "]"

Per-edge transfer and substitution rates ride in the bracket comment with
keys ``lambda`` and ``mu``, e.g. ``1:0.5[&lambda=0.05,mu=1.2]``.

Serialization is canonical: children ordered by smallest descendant leaf
label, shortest round-trip float formatting.  ``parse(serialize(t))``
reproduces ``t`` up to leafsomorphism with weights equal to 1e-9.
"""

from __future__ import annotations

from .trees import (RootedTree, SpeciesPhylogeny, TreeTopology,
                    WeightedRootedTree)


class NewickParseError(ValueError):
    """Malformed Newick text; carries the byte offset of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class _Node:
    __slots__ = ("children", "label", "length", "attrs")

    def __init__(self):
        self.children = []
        self.label = None
        self.length = None
        self.attrs = {}


_LABEL_CHARS = set("abcdefghijklmnopqrstuvwxyz"
                   "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.+-#")


def _parse_node(text, i):
    node = _Node()
    if i >= len(text):
        raise NewickParseError("unexpected end of input", i)
    if text[i] == "(":
        i += 1
        while True:
            child, i = _parse_node(text, i)
            node.children.append(child)
            if i >= len(text):
                raise NewickParseError("unbalanced parenthesis", i)
            if text[i] == ",":
                i += 1
                continue
            if text[i] == ")":
                i += 1
                break
            raise NewickParseError(f"unexpected character {text[i]!r}", i)
    # optional label
    j = i
    while j < len(text) and text[j] in _LABEL_CHARS:
        j += 1
    if j > i:
        node.label = text[i:j]
        i = j
    # optional branch length
    if i < len(text) and text[i] == ":":
        i += 1
        j = i
        while j < len(text) and (text[j].isdigit() or text[j] in ".eE+-"):
            j += 1
        try:
            node.length = float(text[i:j])
        except ValueError:
            raise NewickParseError("bad branch length", i) from None
        i = j
    # optional comment with key=value pairs
    if i < len(text) and text[i] == "[":
        end = text.find("]", i)
        if end < 0:
            raise NewickParseError("unterminated comment", i)
        body = text[i + 1:end]
        if body.startswith("&"):
            body = body[1:]
        for part in filter(None, body.split(",")):
            if "=" not in part:
                raise NewickParseError("comment entry is not key=value", i)
            k, v = part.split("=", 1)
            node.attrs[k.strip()] = v.strip()
        i = end + 1
    return node, i


def parse(text):
    """Parse one Newick tree into a ``WeightedRootedTree``.

    Leaf labels that look like integers become ints.  Missing branch
    lengths default to 0.  Edge ``lambda``/``mu`` annotations are returned
    alongside as ``(tree, lam, mu)`` via :func:`parse_annotated`; this
    plain entry point drops them.
    """
    tree, _, _ = parse_annotated(text)
    return tree


def parse_annotated(text):
    stripped = text.strip()
    root, i = _parse_node(stripped, 0)
    if i >= len(stripped) or stripped[i] != ";":
        raise NewickParseError("missing ';' terminator", i)
    if i != len(stripped) - 1:
        raise NewickParseError("trailing characters after ';'", i + 1)

    parent, children, label, wt = [], [], {}, []
    lam, mu = {}, {}

    def build(nd):
        v = len(parent)
        parent.append(-1)
        children.append([])
        wt.append(nd.length if nd.length is not None else 0.0)
        if "lambda" in nd.attrs:
            lam[v] = float(nd.attrs["lambda"])
        if "mu" in nd.attrs:
            mu[v] = float(nd.attrs["mu"])
        for ch in nd.children:
            c = build(ch)
            parent[c] = v
            children[v].append(c)
        if not nd.children and nd.label is not None:
            try:
                label[v] = int(nd.label)
            except ValueError:
                label[v] = nd.label
        return v

    rt = build(root)
    return WeightedRootedTree(parent, children, rt, label, wt), lam, mu


def parse_species(text):
    """Parse an annotated Newick string into a ``SpeciesPhylogeny``.

    Every edge needs a branch length (the inter-speciation time); missing
    ``lambda``/``mu`` annotations default to 0 and 1.
    """
    tree, lam, mu = parse_annotated(text)
    n_nodes = tree.n_nodes
    # renumber so leaves occupy 0..n-1 in label order, root last
    labels = sorted(tree.label.values())
    if labels != list(range(1, len(labels) + 1)):
        raise ValueError("species phylogeny needs integer labels 1..n")
    order = sorted(tree.label, key=lambda v: tree.label[v])
    internals = [v for v in tree.postorder() if tree.children[v]]
    remap = {v: i for i, v in enumerate(order)}
    for v in internals:
        remap[v] = len(remap)
    parent = [-1] * n_nodes
    children = [[] for _ in range(n_nodes)]
    tau = [0.0] * n_nodes
    lam2 = [0.0] * n_nodes
    mu2 = [1.0] * n_nodes
    label = {}
    for v in range(n_nodes):
        nv = remap[v]
        if tree.parent[v] >= 0:
            parent[nv] = remap[tree.parent[v]]
            children[remap[tree.parent[v]]].append(nv)
        if v in tree.label:
            label[nv] = tree.label[v]
        tau[nv] = tree.wt[v]
        lam2[nv] = lam.get(v, 0.0)
        mu2[nv] = mu.get(v, 1.0)
    root = remap[tree.root]
    return SpeciesPhylogeny(parent, children, root, label, tau, lam2, mu2)


def parse_topology(text):
    """Parse Newick text as an unrooted, unweighted topology."""
    return parse(text).unroot()


# ---------------------------------------------------------------------- #
# Serialization                                                           #
# ---------------------------------------------------------------------- #


def _fmt(x):
    return repr(float(x))


def serialize(tree, weights=True, annotations=False):
    """Canonical Newick string for a rooted tree.

    For a ``SpeciesPhylogeny`` with ``annotations=True`` each edge carries
    ``[&lambda=...,mu=...]``.
    """
    is_species = isinstance(tree, SpeciesPhylogeny)
    has_wt = isinstance(tree, WeightedRootedTree) or is_species

    # dangling stubs of raw gene trees have no label; sort them last
    far = float("inf")
    minlab = {}
    for v in tree.postorder():
        if not tree.children[v]:
            minlab[v] = (tree.label[v], 0) if v in tree.label else (far, v)
        else:
            minlab[v] = min(minlab[c] for c in tree.children[v])

    def render(v):
        parts = ""
        if tree.children[v]:
            kids = sorted(tree.children[v], key=lambda c: (minlab[c], c))
            parts = "(" + ",".join(render(c) for c in kids) + ")"
        else:
            parts = str(tree.label.get(v, ""))
        if v != tree.root and weights:
            if is_species:
                parts += ":" + _fmt(tree.tau[v])
            elif has_wt:
                parts += ":" + _fmt(tree.wt[v])
        if v != tree.root and is_species and annotations:
            parts += f"[&lambda={_fmt(tree.lam[v])},mu={_fmt(tree.mu[v])}]"
        return parts

    return render(tree.root) + ";"


def serialize_topology(topo: TreeTopology):
    """Canonical Newick for an unrooted topology (no branch lengths).

    Rendered rooted at the internal vertex adjacent to the smallest leaf,
    which is a rooting-independent canonical choice.
    """
    lmin = topo.node_of_label(min(topo.label.values()))
    if topo.n_nodes == 2:
        a, b = sorted(topo.label.values())
        return f"({a},{b});"
    anchor = topo.adj[lmin][0]
    rooted = topo.rooted_at(anchor)
    return serialize(rooted, weights=False)
