"""File formats: DIMACS-like graphs, hypergraphs, relations, coset families,
objects, and the treewidth-track decomposition output."""

from __future__ import annotations

from .perms import Bij, PermGroup, cycle_string, parse_cycles
from .objects import LabelingCoset, object_from_text, object_to_text
from .canon_struct import Hypergraph, Relation
from .graphs import Graph, TreeDecomposition

__all__ = [
    "ParseError",
    "parse_graph",
    "serialize_graph",
    "parse_hypergraph",
    "serialize_hypergraph",
    "parse_relation",
    "serialize_relation",
    "parse_cosets",
    "serialize_cosets",
    "parse_object_file",
    "serialize_object_file",
    "serialize_decomposition",
    "parse_instance",
]


class ParseError(ValueError):
    def __init__(self, msg, line=None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


def _content_lines(text):
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        yield i, line


def parse_graph(text: str) -> Graph:
    n = m = None
    edges = []
    seen = set()
    for i, line in _content_lines(text):
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "edge":
                raise ParseError("expected 'p edge n m'", i)
            n, m = int(parts[2]), int(parts[3])
        elif parts[0] == "e":
            if len(parts) != 3:
                raise ParseError("expected 'e u v'", i)
            u, v = int(parts[1]), int(parts[2])
            if n is None or not (1 <= u <= n and 1 <= v <= n):
                raise ParseError("edge endpoint out of range", i)
            if u == v:
                raise ParseError("loops are not allowed", i)
            key = frozenset((u, v))
            if key in seen:
                continue  # duplicates collapse
            seen.add(key)
            edges.append((u, v))
        else:
            raise ParseError(f"unknown record {parts[0]!r}", i)
    if n is None:
        raise ParseError("missing 'p edge' header")
    return Graph.build(range(1, n + 1), edges)


def serialize_graph(G: Graph) -> str:
    lines = [f"p edge {len(G.vertices)} {len(G.edges)}"]
    for e in sorted(G.edges, key=lambda e: tuple(sorted(e))):
        a, b = sorted(e)
        lines.append(f"e {a} {b}")
    return "\n".join(lines) + "\n"


def parse_hypergraph(text: str) -> Hypergraph:
    n = None
    edges = []
    seen = set()
    for i, line in _content_lines(text):
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "hyper":
                raise ParseError("expected 'p hyper n m'", i)
            n = int(parts[2])
        elif parts[0] == "e":
            if len(parts) < 1:
                raise ParseError("expected 'e v1 v2 ...'", i)
            vs = frozenset(int(x) for x in parts[1:])
            if n is None or any(not (1 <= v <= n) for v in vs):
                raise ParseError("edge vertex out of range", i)
            if vs in seen:
                continue
            seen.add(vs)
            edges.append(vs)
        else:
            raise ParseError(f"unknown record {parts[0]!r}", i)
    if n is None:
        raise ParseError("missing 'p hyper' header")
    return Hypergraph(tuple(range(1, n + 1)), frozenset(edges))


def serialize_hypergraph(H: Hypergraph) -> str:
    lines = [f"p hyper {len(H.ground)} {len(H.edges)}"]
    for e in sorted(H.edges, key=lambda e: tuple(sorted(e))):
        lines.append("e " + " ".join(str(v) for v in sorted(e)))
    return "\n".join(lines) + "\n"


def parse_relation(text: str) -> Relation:
    n = k = None
    tuples = []
    for i, line in _content_lines(text):
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "rel":
                raise ParseError("expected 'p rel n k'", i)
            n, k = int(parts[2]), int(parts[3])
        elif parts[0] == "t":
            if k is None or len(parts) != k + 1:
                raise ParseError("tuple arity mismatch", i)
            t = tuple(int(x) for x in parts[1:])
            if any(not (1 <= v <= n) for v in t):
                raise ParseError("tuple entry out of range", i)
            tuples.append(t)
        else:
            raise ParseError(f"unknown record {parts[0]!r}", i)
    if n is None:
        raise ParseError("missing 'p rel' header")
    return Relation(tuple(range(1, n + 1)), k, frozenset(tuples))


def serialize_relation(R: Relation) -> str:
    lines = [f"p rel {len(R.ground)} {R.arity}"]
    for t in sorted(R.tuples):
        lines.append("t " + " ".join(map(str, t)))
    return "\n".join(lines) + "\n"


def parse_cosets(text: str) -> list[LabelingCoset]:
    """Coset family file: 'p cosets n t', then per coset 'b', generator lines
    'g <cycles>' and one representative line 'r v->label ...'."""
    n = None
    out = []
    cur_gens = None
    cur_rep = None
    domain = None

    def flush(i):
        nonlocal cur_gens, cur_rep
        if cur_gens is None:
            return
        if cur_rep is None:
            raise ParseError("coset block without representative", i)
        out.append(LabelingCoset(PermGroup(domain, cur_gens), cur_rep))
        cur_gens, cur_rep = None, None

    last = None
    for i, line in _content_lines(text):
        last = i
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "cosets":
                raise ParseError("expected 'p cosets n t'", i)
            n = int(parts[2])
            domain = tuple(range(1, n + 1))
        elif parts[0] == "b":
            flush(i)
            cur_gens = []
        elif parts[0] == "g":
            if cur_gens is None:
                raise ParseError("generator outside a coset block", i)
            cur_gens.append(parse_cycles(line[2:], domain))
        elif parts[0] == "r":
            mapping = {}
            for tok in parts[1:]:
                v, w = tok.split("->")
                mapping[int(v)] = int(w)
            if set(mapping) != set(domain):
                raise ParseError("representative must cover the ground set", i)
            cur_rep = Bij.from_dict(mapping)
        else:
            raise ParseError(f"unknown record {parts[0]!r}", i)
    flush(last)
    if n is None:
        raise ParseError("missing 'p cosets' header")
    return out


def serialize_cosets(cosets) -> str:
    cosets = list(cosets)
    n = len(cosets[0].ground) if cosets else 0
    lines = [f"p cosets {n} {len(cosets)}"]
    for c in cosets:
        lines.append("b")
        for g in c.group.gens:
            lines.append("g " + cycle_string(g))
        lines.append("r " + " ".join(f"{v}->{c.rep(v)}" for v in c.ground))
    return "\n".join(lines) + "\n"


def parse_object_file(text: str):
    """Object file: first line 'p object n', second the object text."""
    lines = [ln for _, ln in _content_lines(text)]
    if not lines or not lines[0].startswith("p object"):
        raise ParseError("missing 'p object n' header")
    n = int(lines[0].split()[2])
    body = "\n".join(lines[1:])
    return object_from_text(body), tuple(range(1, n + 1))


def serialize_object_file(obj, ground) -> str:
    return f"p object {len(ground)}\n{object_to_text(obj)}\n"


def serialize_decomposition(td: TreeDecomposition) -> str:
    nodes = td.nodes()
    rename = {t: i + 1 for i, t in enumerate(nodes)}
    width = max(len(b) for b in td.bags.values())
    verts = sorted(set().union(*td.bags.values())) if td.bags else []
    n = max(verts) if verts else 0
    lines = [f"s td {len(nodes)} {width} {n}"]
    for t in nodes:
        lines.append("b " + str(rename[t]) + " " + " ".join(map(str, sorted(td.bags[t]))))
    for t in nodes:
        p = td.parent[t]
        if p is not None:
            lines.append(f"{rename[p]} {rename[t]}")
    return "\n".join(lines) + "\n"


def parse_instance(path: str, kind: str):
    with open(path) as fh:
        text = fh.read()
    if kind == "graph":
        return parse_graph(text)
    if kind == "hypergraph":
        return parse_hypergraph(text)
    if kind == "relation":
        return parse_relation(text)
    if kind == "cosets":
        return parse_cosets(text)
    if kind == "object":
        return parse_object_file(text)
    raise ValueError(f"unknown instance kind {kind!r}")
