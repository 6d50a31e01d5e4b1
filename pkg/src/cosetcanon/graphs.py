"""Graphs, separators, improvement and clique-separator decomposition.

Separators come from unit-vertex-capacity max flow (vertex splitting); the
leftmost minimal separator is the cut frontier of the source-side residual
reachability.  The decomposition splits recursively on clique minimal
separators, discovered through a LEX-M minimal triangulation (those are
exactly the clique minimal separators of the graph), choosing each split by
an isomorphism-invariant key so decompositions of isomorphic graphs are
isomorphic as decorated trees.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

__all__ = [
    "Graph",
    "TreeDecomposition",
    "max_disjoint_paths",
    "leftmost_min_separator",
    "k_improve",
    "separability",
    "min_fill_width",
    "lexm_triangulation",
    "clique_min_separators",
    "atoms_of",
    "clique_separator_decomposition",
    "validate_decomposition",
]

EXACT_KEY_CAP = 9


@dataclass(frozen=True)
class Graph:
    vertices: tuple
    edges: frozenset  # of 2-element frozensets

    def __post_init__(self):
        vs = set(self.vertices)
        for e in self.edges:
            if len(e) != 2:
                raise ValueError("loops and non-binary edges are not allowed")
            if not e <= vs:
                raise ValueError("edge endpoint outside vertex set")

    @classmethod
    def build(cls, vertices, edge_pairs) -> "Graph":
        return cls(tuple(sorted(set(vertices))),
                   frozenset(frozenset(e) for e in edge_pairs))

    def adj(self) -> dict:
        out = {v: set() for v in self.vertices}
        for e in self.edges:
            a, b = tuple(e)
            out[a].add(b)
            out[b].add(a)
        return out

    def neighbors(self, v) -> frozenset:
        out = set()
        for e in self.edges:
            if v in e:
                (w,) = e - {v}
                out.add(w)
        return frozenset(out)

    def has_edge(self, a, b) -> bool:
        return frozenset((a, b)) in self.edges

    def induced(self, S) -> "Graph":
        S = frozenset(S)
        return Graph(tuple(sorted(S)),
                     frozenset(e for e in self.edges if e <= S))

    def components(self, removed=frozenset()) -> list[frozenset]:
        removed = frozenset(removed)
        adj = self.adj()
        seen = set(removed)
        out = []
        for v in self.vertices:
            if v in seen:
                continue
            comp = {v}
            queue = [v]
            seen.add(v)
            while queue:
                x = queue.pop()
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        comp.add(y)
                        queue.append(y)
            out.append(frozenset(comp))
        return sorted(out, key=min)

    def is_connected(self) -> bool:
        return len(self.vertices) <= 1 or len(self.components()) == 1

    def is_clique(self, S) -> bool:
        S = list(S)
        return all(
            self.has_edge(S[i], S[j])
            for i in range(len(S))
            for j in range(i + 1, len(S))
        )

    def relabel(self, mapping) -> "Graph":
        return Graph.build(
            [mapping[v] for v in self.vertices],
            [(mapping[a], mapping[b]) for (a, b) in map(tuple, self.edges)],
        )


# ---------------------------------------------------------------------------
# flows and separators
# ---------------------------------------------------------------------------


def _max_flow(G: Graph, v, w):
    """Unit-vertex-capacity max flow from v to w via vertex splitting.

    Returns (value, residual-reachable node set from the source)."""
    big = len(G.vertices) + 1
    cap: dict = {}
    nbrs: dict = {}

    def arc(a, b, c):
        cap[(a, b)] = cap.get((a, b), 0) + c
        nbrs.setdefault(a, set()).add(b)
        nbrs.setdefault(b, set()).add(a)

    for x in G.vertices:
        arc((x, 0), (x, 1), 1 if x not in (v, w) else big)
    for e in G.edges:
        a, b = tuple(e)
        arc((a, 1), (b, 0), big)
        arc((b, 1), (a, 0), big)
    flow: dict = {}
    src, snk = (v, 1), (w, 0)

    def residual(x, y):
        return cap.get((x, y), 0) - flow.get((x, y), 0) + flow.get((y, x), 0)

    total = 0
    while True:
        prev = {src: None}
        queue = [src]
        hit = False
        while queue and not hit:
            x = queue.pop(0)
            for y in nbrs.get(x, ()):
                if y in prev or residual(x, y) <= 0:
                    continue
                prev[y] = x
                if y == snk:
                    hit = True
                    break
                queue.append(y)
        if not hit:
            seen = {src}
            stack = [src]
            while stack:
                x = stack.pop()
                for y in nbrs.get(x, ()):
                    if y not in seen and residual(x, y) > 0:
                        seen.add(y)
                        stack.append(y)
            return total, seen
        y = snk
        while prev[y] is not None:
            x = prev[y]
            if flow.get((y, x), 0) > 0:
                flow[(y, x)] -= 1
            else:
                flow[(x, y)] = flow.get((x, y), 0) + 1
            y = x
        total += 1


def max_disjoint_paths(G: Graph, v, w) -> int:
    """Number of internally vertex-disjoint v-w paths."""
    if v == w:
        raise ValueError("endpoints coincide")
    total, _ = _max_flow(G, v, w)
    return total


def leftmost_min_separator(G: Graph, v, w) -> frozenset:
    """The minimal (v,w)-separator with inclusion-minimal v-side."""
    if v == w:
        raise ValueError("endpoints coincide")
    if G.has_edge(v, w):
        raise ValueError("endpoints are adjacent")
    total, seen = _max_flow(G, v, w)
    if total == 0:
        return frozenset()
    sep = frozenset(
        x for x in G.vertices if ((x, 0) in seen) and ((x, 1) not in seen)
    )
    if len(sep) != total:
        raise AssertionError("cut frontier size disagrees with the flow value")
    return sep


def k_improve(G: Graph, k: int, check_fixpoint: bool = True) -> Graph:
    """Join non-adjacent pairs with more than k internally disjoint paths
    (single pass over the input graph); asserts the fixpoint property."""
    if k < 1:
        raise ValueError("k must be at least 1")
    new_edges = set(G.edges)
    vs = G.vertices
    for i, v in enumerate(vs):
        for w in vs[i + 1:]:
            if not G.has_edge(v, w) and max_disjoint_paths(G, v, w) > k:
                new_edges.add(frozenset((v, w)))
    out = Graph(G.vertices, frozenset(new_edges))
    if check_fixpoint and out.edges != G.edges:
        again = k_improve(out, k, check_fixpoint=False)
        if again.edges != out.edges:
            raise AssertionError("k-improvement is not a fixpoint")
    return out


def separability(G: Graph) -> int:
    """Largest leftmost-minimal-separator size over non-adjacent pairs."""
    best = 0
    vs = G.vertices
    for i, v in enumerate(vs):
        for w in vs[i + 1:]:
            if not G.has_edge(v, w):
                best = max(best, max_disjoint_paths(G, v, w))
    return best


def min_fill_width(G: Graph) -> int:
    """Treewidth upper bound by the minimum-fill elimination heuristic."""
    adj = {v: set(ns) for v, ns in G.adj().items()}
    width = 0
    left = set(G.vertices)
    while left:
        best_v, best_fill = None, None
        for v in sorted(left):
            ns = adj[v] & left
            ns_list = sorted(ns)
            fill = sum(
                1
                for i, a in enumerate(ns_list)
                for b in ns_list[i + 1:]
                if b not in adj[a]
            )
            if best_fill is None or fill < best_fill:
                best_v, best_fill = v, fill
        ns = sorted(adj[best_v] & left)
        width = max(width, len(ns))
        for i, a in enumerate(ns):
            for b in ns[i + 1:]:
                adj[a].add(b)
                adj[b].add(a)
        left.remove(best_v)
    return max(width, 1)


# ---------------------------------------------------------------------------
# LEX-M, clique minimal separators, atoms
# ---------------------------------------------------------------------------


def lexm_triangulation(G: Graph):
    """LEX-M minimal triangulation.

    Returns (elimination order: first-eliminated first, filled graph).
    """
    adj = G.adj()
    label = {v: 0 for v in G.vertices}
    unnumbered = set(G.vertices)
    picks = []  # picked with decreasing elimination number
    fill: set = set()
    while unnumbered:
        x = max(sorted(unnumbered), key=lambda u: label[u])
        picks.append(x)
        unnumbered.discard(x)
        reached = {u: False for u in unnumbered}
        buckets: dict = {}
        updated = set()
        for y in adj[x]:
            if y in unnumbered:
                reached[y] = True
                buckets.setdefault(label[y], []).append(y)
                updated.add(y)
        j = 0
        pending = sorted(buckets)
        while pending:
            j = pending.pop(0)
            while buckets.get(j):
                y = buckets[j].pop()
                for z in adj[y]:
                    if z not in unnumbered or reached[z]:
                        continue
                    reached[z] = True
                    if label[z] > j:
                        updated.add(z)
                        buckets.setdefault(label[z], []).append(z)
                        if label[z] not in pending:
                            pending.append(label[z])
                            pending.sort()
                    else:
                        buckets.setdefault(j, []).append(z)
        for y in sorted(updated):
            label[y] += 2
            if y not in adj[x]:
                fill.add(frozenset((x, y)))
    elim = list(reversed(picks))
    filled = Graph(G.vertices, G.edges | frozenset(fill))
    return elim, filled


def clique_min_separators(G: Graph) -> list[frozenset]:
    """All clique minimal separators of G.

    A clique minimal separator survives in every minimal triangulation, and
    the minimal separators of a triangulation appear among the madj sets of
    any perfect elimination order, so one LEX-M pass finds them all; the
    result is a canonical set (independent of tie-breaking).
    """
    elim, H = lexm_triangulation(G)
    pos = {v: i for i, v in enumerate(elim)}
    hadj = H.adj()
    out = set()
    for x in elim:
        S = frozenset(y for y in hadj[x] if pos[y] > pos[x])
        if not S or not G.is_clique(S):
            continue
        if len(G.components(removed=S)) >= 2:
            out.add(S)
    return sorted(out, key=lambda s: tuple(sorted(s)))


def atoms_of(G: Graph) -> list[frozenset]:
    """The atoms: maximal induced subgraphs without clique separators.

    Computed by exhaustive splitting; the atom set is splitting-order
    independent (a canonical set).
    """
    atoms = []
    stack = [G]
    while stack:
        H = stack.pop()
        seps = clique_min_separators(H)
        if not seps:
            atoms.append(frozenset(H.vertices))
            continue
        S = seps[0]
        for comp in H.components(removed=S):
            stack.append(H.induced(comp | S))
    return sorted(set(atoms), key=lambda a: tuple(sorted(a)))


# ---------------------------------------------------------------------------
# the decomposition tree
# ---------------------------------------------------------------------------


@dataclass
class TreeDecomposition:
    bags: dict  # node id -> frozenset of vertices
    parent: dict  # node id -> node id or None
    root: int
    kind: dict  # node id -> 'atom' | 'sep'

    def nodes(self):
        return sorted(self.bags)

    def children(self, t) -> list:
        return sorted(u for u, p in self.parent.items() if p == t)

    def adhesion(self, t) -> frozenset:
        p = self.parent[t]
        if p is None:
            return frozenset()
        return self.bags[t] & self.bags[p]

    def width(self) -> int:
        return max(len(b) for b in self.bags.values()) - 1

    def subtree_nodes(self, t) -> list:
        out = [t]
        stack = [t]
        while stack:
            x = stack.pop()
            for c in self.children(x):
                out.append(c)
                stack.append(c)
        return out

    def subtree_vertices(self, t) -> frozenset:
        out = set()
        for x in self.subtree_nodes(t):
            out |= self.bags[x]
        return frozenset(out)


def _wl_hash(G: Graph, colored: frozenset) -> str:
    """1-WL color-refinement hash of (G, marked set); isomorphism-invariant."""
    adj = G.adj()
    color = {v: ("m" if v in colored else "p",) for v in G.vertices}
    for _ in range(len(G.vertices)):
        nxt = {}
        for v in G.vertices:
            sig = (color[v], tuple(sorted(color[u] for u in adj[v])))
            nxt[v] = sig
        # canonical renaming
        names = {}
        for v in sorted(G.vertices, key=lambda x: repr(nxt[x])):
            names.setdefault(repr(nxt[v]), len(names))
        new = {v: (names[repr(nxt[v])],) for v in G.vertices}
        if sorted(new.values()) == sorted(color.values()):
            color = new
            break
        color = new
    hist = sorted(color.values())
    return hashlib.sha256(repr(hist).encode()).hexdigest()


def _separator_key(G: Graph, S: frozenset):
    """Isomorphism-invariant selection key for a separator of G.

    Exact (canonical-form based) at small orders, 1-WL based beyond.
    """
    comp_sizes = tuple(sorted(len(c) for c in G.components(removed=S)))
    degs = tuple(sorted(len(G.neighbors(v)) for v in S))
    base = (len(S), comp_sizes, degs)
    if len(G.vertices) <= EXACT_KEY_CAP:
        from .canon_base import cl_graph
        from .objects import LabelingCoset

        E = set()
        for e in G.edges:
            a, b = tuple(e)
            E.add((a, b))
            E.add((b, a))
        for v in S:
            E.add((v, v))
        res = cl_graph(E, LabelingCoset.label(G.vertices))
        return base + (res.form,)
    return base + (_wl_hash(G, S),)


def clique_separator_decomposition(G: Graph) -> TreeDecomposition:
    """Rooted decomposition into clique-separator-free bags.

    Splits on the key-minimal clique minimal separator; every component
    hangs from a separator bag, attached at the highest node of its subtree
    containing the separator.  Repeated adhesion values at one node are
    collected behind auxiliary separator bags so every bag ends with
    adhesions either all equal or pairwise distinct.
    """
    if not G.is_connected():
        raise ValueError("decomposition needs a connected graph")
    bags: dict = {}
    parent: dict = {}
    kind: dict = {}
    counter = [0]

    def new_node(bag, k):
        t = counter[0]
        counter[0] += 1
        bags[t] = frozenset(bag)
        kind[t] = k
        parent[t] = None
        return t

    def reroot(t):
        """Reverse parent pointers so that t becomes its tree's root."""
        path = [t]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        for a, b in zip(path, path[1:]):
            parent[b] = a
        parent[t] = None

    def highest_containing(root_node, S):
        # nodes of the subtree rooted at root_node containing S form a
        # connected subtree; return the one nearest the root (breadth first)
        queue = [root_node]
        while queue:
            t = queue.pop(0)
            if S <= bags[t]:
                return t
            queue.extend(sorted(u for u, p in parent.items() if p == t))
        raise AssertionError("separator not contained in any child bag")

    def build(H: Graph):
        seps = clique_min_separators(H)
        if not seps:
            return new_node(H.vertices, "atom")
        S = min(seps, key=lambda s: (_separator_key(H, s), tuple(sorted(s))))
        node = new_node(S, "sep")
        for comp in H.components(removed=S):
            sub = H.induced(comp | S)
            child_root = build(sub)
            attach = highest_containing(child_root, S)
            reroot(attach)
            parent[attach] = node
        return node

    root = build(G)
    td = TreeDecomposition(bags, parent, root, kind)
    _collect_repeated_adhesions(td)
    return td


def _collect_repeated_adhesions(td: TreeDecomposition):
    """Restructure so each node's incident adhesions are all equal or
    pairwise distinct.

    A child sharing its value with the node's parent adhesion moves up to
    the grandparent (the value is contained in the grandparent's bag, so the
    decomposition properties survive); repeated values among children are
    collected behind an auxiliary separator bag carrying that value.
    """
    guard = 0
    changed = True
    while changed:
        guard += 1
        if guard > 4 * len(td.bags) + 16:
            raise AssertionError("adhesion restructuring did not stabilize")
        changed = False
        for t in list(td.bags):
            kids = td.children(t)
            child_vals = {c: td.bags[c] & td.bags[t] for c in kids}
            parent_val = td.adhesion(t) if td.parent[t] is not None else None
            incident = list(child_vals.values())
            if parent_val is not None:
                incident.append(parent_val)
            if len(set(incident)) <= 1:
                continue
            moved = False
            if parent_val is not None:
                for c, val in child_vals.items():
                    if val == parent_val:
                        td.parent[c] = td.parent[t]
                        moved = True
                if moved:
                    changed = True
                    break
            by_val: dict = {}
            for c, val in child_vals.items():
                by_val.setdefault(val, []).append(c)
            for val, cs in sorted(by_val.items(), key=lambda kv: tuple(sorted(kv[0]))):
                if len(cs) >= 2:
                    nid = max(td.bags) + 1
                    td.bags[nid] = frozenset(val)
                    td.kind[nid] = "sep"
                    td.parent[nid] = t
                    for c in cs:
                        td.parent[c] = nid
                    changed = True
                    break
            if changed:
                break


def validate_decomposition(G: Graph, td: TreeDecomposition):
    """Check (T1), (T2), clique adhesions and the adhesion trichotomy."""
    # (T2) every edge inside some bag
    for e in G.edges:
        if not any(e <= b for b in td.bags.values()):
            raise AssertionError(f"edge {sorted(e)} not inside any bag")
    # (T1) per-vertex bag sets nonempty and connected
    for v in G.vertices:
        nodes = [t for t, b in td.bags.items() if v in b]
        if not nodes:
            raise AssertionError(f"vertex {v} missing from all bags")
        nodeset = set(nodes)
        seen = {nodes[0]}
        stack = [nodes[0]]
        while stack:
            t = stack.pop()
            nb = [u for u in nodeset if td.parent.get(u) == t or td.parent.get(t) == u]
            for u in nb:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        if seen != nodeset:
            raise AssertionError(f"vertex {v} trace is disconnected")
    # adhesions are cliques
    for t in td.bags:
        if td.parent[t] is not None and not G.is_clique(td.adhesion(t)):
            raise AssertionError("non-clique adhesion")
    # trichotomy: per node, incident adhesion values all equal or distinct
    for t in td.bags:
        incident = [td.bags[c] & td.bags[t] for c in td.children(t)]
        if td.parent[t] is not None:
            incident.append(td.adhesion(t))
        if len(incident) <= 1:
            continue
        if len(set(incident)) not in (1, len(incident)):
            raise AssertionError(f"node {t} adhesions neither equal nor distinct")
    # atom bags induce clique-separator-free subgraphs
    for t, b in td.bags.items():
        sub = G.induced(b)
        if sub.is_connected() and clique_min_separators(sub):
            raise AssertionError("bag with a clique separator")
    return True
