"""Self-test harness: every module's invariant suite, seeded and shardable.

Each suite raises AssertionError on the first violated invariant and returns
a small stats dict otherwise.  The registry is shared by the CLI verb and by
the pytest wrappers.
"""

from __future__ import annotations

import random

from .perms import (
    Bij,
    PermGroup,
    coset_transversal,
    intersect_groups,
    min_label_rep,
    relative_base,
)
from .objects import (
    LabelingCoset,
    SetOf,
    apply_bijection,
    internal_key,
    join_cosets,
    ordered_encoding,
)
from .canon_base import cl_graph, cl_int, cl_object, cl_set_small, graph_instance_object
from .canon_struct import (
    Hypergraph,
    Relation,
    RecursionCounter,
    cl_hyper,
    cl_rel,
    cl_sethyper,
    cl_setset,
    hyper_bound,
    make_cosetmap_instance,
    rel_bound,
)
from .canon_set import GiantRep, ProgressLedger, cl_set, giant_floor
from .graphs import (
    clique_min_separators,
    clique_separator_decomposition,
    k_improve,
    leftmost_min_separator,
    max_disjoint_paths,
    validate_decomposition,
)
from .twiso import iso_treewidth
from .oracle import brute_aut, brute_iso_graphs
from . import gens

__all__ = ["SUITES", "run_selftest"]


def _brute_elements(gens_list, domain):
    ident = Bij.identity(domain)
    els = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens_list:
                c = a.then(g)
                if c not in els:
                    els.add(c)
                    nxt.append(c)
        frontier = nxt
    return els


def _check_cl1(canonize, obj, ground, rng, rounds=3):
    res = canonize(obj)
    for _ in range(rounds):
        phi = gens.rand_bijection(rng, ground)
        res2 = canonize(apply_bijection(obj, phi))
        lifted = LabelingCoset(
            res2.coset.group.conjugate(phi.inv()), phi.then(res2.coset.rep)
        )
        assert lifted == res.coset, "CL1 coset identity violated"
        assert res2.form == res.form, "canonical form is not relabeling-stable"
    return res


def suite_perm_core(rng: random.Random, scale=1.0):
    checks = 0
    for _ in range(int(12 * scale)):
        dom = tuple(range(1, rng.randint(2, 6)))
        G = gens.rand_group(rng, dom)
        els = _brute_elements(G.gens, dom)
        assert G.order == len(els), "order disagrees with enumeration"
        for _ in range(4):
            cand = gens.rand_bijection(rng, dom)
            assert (cand in G) == (cand in els), "membership disagrees"
        sub = gens.rand_group(rng, dom)
        H = intersect_groups(G, sub)
        reps = coset_transversal(G, H)
        Hels = set(H.elements())
        seen = set()
        for r in reps:
            coset = {r.then(h) for h in Hels}
            assert not (coset & seen), "transversal cosets overlap"
            seen |= coset
        assert len(seen) == G.order, "transversal misses elements"
        els_sorted = sorted(els, key=lambda b: b.img)
        regen = PermGroup(dom, rng.sample(els_sorted, min(3, len(els_sorted))))
        if regen.order == G.order:
            assert regen.canonical_gens() == G.canonical_gens(), (
                "canonical generators depend on the generating set"
            )
        X = relative_base(G, H)
        assert G.pointwise_stabilizer(X).is_subgroup_of(H), "relative base fails"
        if G.is_transitive():
            blocks = G.minimal_block_system()
            bset = set(blocks)
            for g in G.gens:
                for b in blocks:
                    assert g.apply_set(b) in bset, "blocks not a block system"
        checks += 1
    return {"instances": checks}


def suite_objects(rng: random.Random, scale=1.0):
    from .objects import compare_ordered

    checks = 0
    for _ in range(int(15 * scale)):
        dom = (1, 2, 3)
        c1 = gens.rand_coset(rng, dom)
        c2 = gens.rand_coset(rng, dom)
        mu = gens.rand_bijection(rng, dom, (4, 5, 6))
        nu = gens.rand_bijection(rng, (4, 5, 6), (7, 8, 9))
        obj = SetOf([c1, c2])
        a = apply_bijection(obj, mu.then(nu))
        b = apply_bijection(apply_bijection(obj, mu), nu)
        assert a == b, "group action law fails"
        j = join_cosets([c1, c2])
        assert c1.rep in j and c2.rep in j, "join misses members"
        phi = gens.rand_bijection(rng, dom, (7, 8, 9))
        assert apply_bijection(j, phi) == join_cosets(
            [apply_bijection(c1, phi), apply_bijection(c2, phi)]
        ), "join is not isomorphism-invariant"
        x = apply_bijection(c1, gens.rand_bijection(rng, dom, (1, 2, 3)))
        assert compare_ordered(x, x) == 0
        checks += 1
    return {"instances": checks}


def suite_canon_base(rng: random.Random, scale=1.0):
    checks = 0
    for _ in range(int(10 * scale)):
        n = rng.randint(2, 5)
        dom = tuple(range(1, n + 1))
        E = gens.rand_digraph(rng, dom)
        res = _check_cl1(
            lambda o: cl_graph(
                {(t.items[0].v, t.items[1].v) for t in o.members},
                LabelingCoset.label(dom),
            ),
            graph_instance_object(E),
            dom,
            rng,
        )
        assert res.group == brute_aut(graph_instance_object(E), dom), "CL2 fails"
        J = gens.rand_coset_family(rng, dom, rng.randint(1, 3))
        res = _check_cl1(lambda o: cl_set_small(list(o.members)), SetOf(J), dom, rng)
        assert res.group == brute_aut(SetOf(J), dom), "CL2 fails for coset sets"
        checks += 1
    return {"instances": checks}


def suite_canon_struct(rng: random.Random, scale=1.0):
    checks = 0
    max_rel_ratio = 0.0
    max_hyper_ratio = 0.0
    for _ in range(int(8 * scale)):
        n = rng.randint(2, 5)
        dom = tuple(range(1, n + 1))
        R = Relation(dom, 2, gens.rand_relation(rng, dom, 2))
        counter = RecursionCounter()
        res = cl_rel(R, counter)
        assert counter.calls <= rel_bound(R), "relation recursion bound violated"
        max_rel_ratio = max(max_rel_ratio, counter.calls / rel_bound(R))
        assert res.group == brute_aut(R.as_object(), dom), "CL2 fails for relations"
        H = Hypergraph(dom, gens.rand_hypergraph(rng, dom))
        counter = RecursionCounter()
        res = cl_hyper(H, counter)
        assert counter.calls <= hyper_bound(H), "hypergraph recursion bound violated"
        max_hyper_ratio = max(max_hyper_ratio, counter.calls / hyper_bound(H))
        assert res.group == brute_aut(H.as_object(), dom), "CL2 fails for hypergraphs"
        checks += 1
    return {
        "instances": checks,
        "max_rel_counter_ratio": round(max_rel_ratio, 3),
        "max_hyper_counter_ratio": round(max_hyper_ratio, 3),
    }


def suite_canon_set(rng: random.Random, scale=1.0):
    checks = 0
    calls = 0
    for _ in range(int(8 * scale)):
        n = rng.randint(2, 5)
        dom = tuple(range(1, n + 1))
        J = gens.rand_coset_family(rng, dom, rng.randint(1, 4))
        led = ProgressLedger()
        res = cl_set(J, ledger=led)
        calls += led.calls
        assert res.group == brute_aut(SetOf(J), dom), "CL2 fails for the main canonizer"
        _check_cl1(lambda o: cl_set(list(o.members)), SetOf(J), dom, rng, rounds=2)
        checks += 1
    return {"instances": checks, "ledger_calls": calls}


def suite_tw_iso(rng: random.Random, scale=1.0):
    checks = 0
    for _ in range(int(6 * scale)):
        n = rng.randint(3, 7)
        G1 = gens.rand_graph_connected(rng, n)
        img = list(G1.vertices)
        rng.shuffle(img)
        G2 = G1.relabel(dict(zip(G1.vertices, img)))
        mine = iso_treewidth(G1, G2)
        expect = brute_iso_graphs(G1.edges, G1.vertices, G2.edges, G2.vertices)
        got = set(mine.elements()) if not mine.is_empty else set()
        assert got == expect, "pipeline disagrees with brute-force isomorphism"
        Y = k_improve(G1, 2)
        assert k_improve(Y, 2).edges == Y.edges, "improvement not a fixpoint"
        td = clique_separator_decomposition(Y)
        validate_decomposition(Y, td)
        for i, v in enumerate(G1.vertices):
            for w in G1.vertices[i + 1:]:
                if not G1.has_edge(v, w):
                    sep = leftmost_min_separator(G1, v, w)
                    assert len(sep) == max_disjoint_paths(G1, v, w), (
                        "separator size differs from the flow value"
                    )
        checks += 1
    return {"instances": checks}


SUITES = {
    "perm-core": suite_perm_core,
    "objects": suite_objects,
    "canon-base": suite_canon_base,
    "canon-struct": suite_canon_struct,
    "canon-set": suite_canon_set,
    "tw-iso": suite_tw_iso,
}


def run_selftest(seed: int, scale: float = 1.0, suites=None) -> dict:
    report = {}
    failures = 0
    for name, fn in SUITES.items():
        if suites and name not in suites:
            continue
        rng = random.Random((seed, name).__repr__())
        try:
            stats = fn(rng, scale)
            report[name] = {"status": "pass", **stats}
        except AssertionError as exc:
            failures += 1
            report[name] = {"status": "FAIL", "reason": str(exc)}
    report["_failures"] = failures
    return report
