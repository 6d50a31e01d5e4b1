"""Seeded random instance generators for tests, selftest and benchmarks."""

from __future__ import annotations

import random

from .perms import Bij, PermGroup
from .objects import LabelingCoset, internal_key
from .graphs import Graph

__all__ = [
    "rand_bijection",
    "rand_group",
    "rand_coset",
    "rand_coset_family",
    "rand_digraph",
    "rand_graph_connected",
    "rand_hypergraph",
    "rand_relation",
    "rand_ktree",
    "rand_partial_ktree",
]


def rand_bijection(rng: random.Random, domain, target=None) -> Bij:
    tgt = list(target if target is not None else domain)
    rng.shuffle(tgt)
    return Bij(tuple(domain), tuple(tgt))


def rand_group(rng: random.Random, domain, max_gens=2) -> PermGroup:
    gens = [rand_bijection(rng, domain) for _ in range(rng.randint(0, max_gens))]
    return PermGroup(tuple(domain), gens)


def rand_coset(rng: random.Random, domain, max_gens=2) -> LabelingCoset:
    dom = tuple(sorted(domain))
    return LabelingCoset(
        rand_group(rng, dom, max_gens),
        rand_bijection(rng, dom, range(1, len(dom) + 1)),
    )


def rand_coset_family(rng: random.Random, domain, count, max_gens=2):
    out = {}
    guard = 0
    while len(out) < count:
        guard += 1
        if guard > 200 * count:
            break
        c = rand_coset(rng, domain, max_gens)
        out[internal_key(c)] = c
    return list(out.values())


def rand_digraph(rng: random.Random, domain, p=0.35) -> frozenset:
    E = set()
    for u in domain:
        for v in domain:
            if u != v and rng.random() < p:
                E.add((u, v))
    return frozenset(E)


def rand_graph_connected(rng: random.Random, n, p=0.35) -> Graph:
    vs = list(range(1, n + 1))
    es = [
        (a, b)
        for i, a in enumerate(vs)
        for b in vs[i + 1:]
        if rng.random() < p
    ]
    G = Graph.build(vs, es)
    comps = G.components()
    extra = [(min(c1), min(c2)) for c1, c2 in zip(comps, comps[1:])]
    return Graph.build(vs, es + extra)


def rand_hypergraph(rng: random.Random, domain, max_edges=4) -> frozenset:
    edges = set()
    n = len(domain)
    for _ in range(rng.randint(0, max_edges)):
        k = rng.randint(1, n)
        edges.add(frozenset(rng.sample(list(domain), k)))
    return frozenset(edges)


def rand_relation(rng: random.Random, domain, arity, max_tuples=6) -> frozenset:
    out = set()
    for _ in range(rng.randint(0, max_tuples)):
        out.add(tuple(rng.choice(list(domain)) for _ in range(arity)))
    return frozenset(out)


def rand_ktree(rng: random.Random, n, k) -> Graph:
    vs = list(range(1, n + 1))
    edges = set()
    clique = vs[: k + 1]
    for i, a in enumerate(clique):
        for b in clique[i + 1:]:
            edges.add((a, b))
    cliques = [tuple(clique)]
    for v in vs[k + 1:]:
        base = rng.choice(cliques)
        sub = rng.sample(list(base), k)
        for u in sub:
            edges.add((u, v))
        cliques.append(tuple(sub + [v]))
    return Graph.build(vs, edges)


def rand_partial_ktree(rng: random.Random, n, k, delete_p=0.12) -> Graph:
    G = rand_ktree(rng, n, k)
    keep = [tuple(e) for e in G.edges if rng.random() >= delete_p]
    H = Graph.build(G.vertices, keep)
    comps = H.components()
    extra = [(min(c1), min(c2)) for c1, c2 in zip(comps, comps[1:])]
    return Graph.build(G.vertices, keep + extra)
