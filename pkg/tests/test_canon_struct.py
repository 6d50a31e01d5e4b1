import math
import random

import pytest

from cosetcanon.perms import Bij, PermGroup, parse_cycles, is_giant
from cosetcanon.objects import (
    LabelingCoset,
    SetOf,
    Tup,
    Vert,
    apply_bijection,
    internal_key,
    ordered_encoding,
)
from cosetcanon.canon_struct import (
    CosetMapInstance,
    Hypergraph,
    Relation,
    RecursionCounter,
    cl_hyper,
    cl_rel,
    cl_sethyper,
    cl_setset,
    hyper_bound,
    make_cosetmap_instance,
    primitive_case,
    rel_bound,
)
from cosetcanon.oracle import all_perms, brute_aut

V3 = (1, 2, 3)
V4 = (1, 2, 3, 4)
V5 = (1, 2, 3, 4, 5)


def perm(text, dom):
    return parse_cycles(text, dom)


def rand_bij(rng, ground, target=None):
    tgt = list(target if target is not None else ground)
    rng.shuffle(tgt)
    return Bij(tuple(ground), tuple(tgt))


def rand_coset(rng, dom, max_gens=2):
    G = PermGroup(dom, [rand_bij(rng, dom) for _ in range(rng.randint(0, max_gens))])
    return LabelingCoset(G, rand_bij(rng, dom, range(1, len(dom) + 1)))


class TestClRel:
    def test_diagonal_full_symmetric(self):
        R = Relation(V4, 2, frozenset((v, v) for v in V4))
        res = cl_rel(R)
        assert res.group.order == 24

    def test_single_pair(self):
        # spec example: {(a,b)} -> group Sym(V minus {a,b})
        R = Relation(V4, 2, frozenset({(1, 2)}))
        res = cl_rel(R)
        assert res.group.order == 2
        assert all(g(1) == 1 and g(2) == 2 for g in res.group.gens)

    def test_directed_triangle(self):
        # spec example: directed 3-cycle -> group order 3
        R = Relation(V3, 2, frozenset({(1, 2), (2, 3), (3, 1)}))
        res = cl_rel(R)
        assert res.group.order == 3
        assert res.group == brute_aut(R.as_object(), V3)

    def test_group_matches_bruteforce_random(self):
        rng = random.Random(21)
        for _ in range(20):
            n = rng.randint(2, 5)
            dom = tuple(range(1, n + 1))
            k = rng.randint(1, 3)
            tuples = set()
            for _ in range(rng.randint(0, 5)):
                tuples.add(tuple(rng.choice(dom) for _ in range(k)))
            R = Relation(dom, k, frozenset(tuples))
            res = cl_rel(R)
            assert res.group == brute_aut(R.as_object(), dom)

    def test_cl1_and_counter(self):
        rng = random.Random(22)
        for _ in range(10):
            n = rng.randint(2, 4)
            dom = tuple(range(1, n + 1))
            k = 2
            tuples = frozenset(
                (rng.choice(dom), rng.choice(dom)) for _ in range(rng.randint(1, 6))
            )
            R = Relation(dom, k, tuples)
            counter = RecursionCounter()
            res = cl_rel(R, counter)
            assert counter.calls <= rel_bound(R)
            phi = rand_bij(rng, dom)
            R2 = Relation(dom, k, frozenset(phi.apply_tuple(t) for t in tuples))
            res2 = cl_rel(R2)
            lifted = LabelingCoset(
                res2.coset.group.conjugate(phi.inv()), phi.then(res2.coset.rep)
            )
            assert lifted == res.coset
            assert res2.form == res.form


class TestClHyper:
    def test_all_singletons(self):
        H = Hypergraph(V4, frozenset(frozenset([v]) for v in V4))
        res = cl_hyper(H)
        assert res.group.order == 24

    def test_single_edge(self):
        # spec example: {S} -> Sym(S) x Sym(V minus S)
        H = Hypergraph(V4, frozenset({frozenset({1, 2})}))
        res = cl_hyper(H)
        assert res.group.order == 4

    def test_fano_plane(self):
        # spec/acceptance fixture: Fano plane has automorphism group PGL(3,2)
        lines = [
            {1, 2, 3},
            {1, 4, 5},
            {1, 6, 7},
            {2, 4, 6},
            {2, 5, 7},
            {3, 4, 7},
            {3, 5, 6},
        ]
        H = Hypergraph(tuple(range(1, 8)), frozenset(frozenset(l) for l in lines))
        res = cl_hyper(H)
        assert res.group.order == 168

    def test_group_matches_bruteforce_random(self):
        rng = random.Random(31)
        for _ in range(20):
            n = rng.randint(2, 5)
            dom = tuple(range(1, n + 1))
            edges = set()
            for _ in range(rng.randint(0, 4)):
                k = rng.randint(0, n)
                edges.add(frozenset(rng.sample(dom, k)))
            H = Hypergraph(dom, frozenset(edges))
            res = cl_hyper(H)
            assert res.group == brute_aut(H.as_object(), dom)

    def test_cl1_and_counter(self):
        rng = random.Random(32)
        for _ in range(10):
            n = rng.randint(2, 5)
            dom = tuple(range(1, n + 1))
            edges = frozenset(
                frozenset(rng.sample(dom, rng.randint(1, n)))
                for _ in range(rng.randint(1, 4))
            )
            H = Hypergraph(dom, edges)
            counter = RecursionCounter()
            res = cl_hyper(H, counter)
            assert counter.calls <= hyper_bound(H)
            phi = rand_bij(rng, dom)
            H2 = Hypergraph(dom, frozenset(phi.apply_set(e) for e in edges))
            res2 = cl_hyper(H2)
            lifted = LabelingCoset(
                res2.coset.group.conjugate(phi.inv()), phi.then(res2.coset.rep)
            )
            assert lifted == res.coset
            assert res2.form == res.form


class TestPrimitiveCase:
    def test_symmetric_natural_small(self):
        # spec example: Sym(5) natural with d=5 -> small by order test
        kind, cover = primitive_case(PermGroup.symmetric(V5), d=5)
        assert kind == "small"

    def test_cyclic_prime_small(self):
        G = PermGroup(V5, [perm("(1 2 3 4 5)", V5)])
        kind, _ = primitive_case(G, d=5)
        assert kind == "small"

    def test_johnson_pairs_cover(self):
        # spec example: Sym(5) on the 10 2-subsets -> sparse cover of 5 stars
        pairs = sorted(
            frozenset(p) for p in [(a, b) for a in V5 for b in V5 if a < b]
        )
        pair_index = {p: i for i, p in enumerate(pairs)}
        dom = tuple(range(10))
        gens = []
        for g in PermGroup.symmetric(V5).gens:
            img = [pair_index[frozenset({g(a) for a in p})] for p in pairs]
            gens.append(Bij(dom, tuple(img)))
        G = PermGroup(dom, gens)
        kind, cover = primitive_case(G, d=5)
        assert kind == "cover"
        assert len(cover) == 5
        assert all(len(c) == 4 for c in cover)
        assert all(len(c) <= len(dom) / 2 for c in cover)
        # invariance of the cover
        cover_set = set(cover)
        for g in G.gens:
            for c in cover:
                assert frozenset(g(x) for x in c) in cover_set


class TestClSetSet:
    def brute_aut_inst(self, inst):
        """Filter of the coset group by the preservation condition."""
        J, L, amap = inst.J, inst.L, dict(inst.alpha)
        jkeys = {internal_key(j): i for i, j in enumerate(J)}
        out = []
        for d in inst.coset.group.elements():
            ok = True
            for i, j in enumerate(J):
                k = internal_key(apply_bijection(j, d))
                i2 = jkeys[k]
                if internal_key(apply_bijection(L[amap[i]], d)) != internal_key(L[amap[i2]]):
                    ok = False
                    break
            if ok:
                out.append(d)
        return out

    def make_random(self, rng, dom, t):
        J = []
        seen = set()
        while len(J) < t:
            c = rand_coset(rng, dom, max_gens=1)
            if internal_key(c) not in seen:
                seen.add(internal_key(c))
                J.append(c)
        L = [rand_coset(rng, dom, max_gens=1) for _ in range(rng.randint(1, t))]
        alpha = [(i, rng.randrange(len(L))) for i in range(t)]
        # Delta must permute J: use the full automorphism group of J
        aut = brute_aut(SetOf(J), dom)
        coset = LabelingCoset(aut, rand_bij(rng, dom, range(1, len(dom) + 1)))
        return make_cosetmap_instance(J, L, alpha, coset)

    def test_singleton(self):
        rng = random.Random(41)
        inst = self.make_random(rng, V3, 1)
        res = cl_setset(inst)
        expect = self.brute_aut_inst(inst)
        assert set(res.group.elements()) == set(expect)

    def test_trivial_delta(self):
        rng = random.Random(42)
        J = [rand_coset(rng, V3), rand_coset(rng, V3)]
        L = [rand_coset(rng, V3)]
        coset = LabelingCoset.single(rand_bij(rng, V3, (1, 2, 3)))
        inst = make_cosetmap_instance(J, L, [(0, 0), (1, 0)], coset)
        res = cl_setset(inst)
        assert res.group.order == 1

    def test_group_matches_bruteforce_random(self):
        rng = random.Random(43)
        for trial in range(15):
            n = rng.randint(2, 4)
            dom = tuple(range(1, n + 1))
            t = rng.randint(1, 3)
            inst = self.make_random(rng, dom, t)
            res = cl_setset(inst)
            expect = self.brute_aut_inst(inst)
            assert set(res.group.elements()) == set(expect), f"trial {trial}"

    def test_cl1_random(self):
        rng = random.Random(44)
        for _ in range(8):
            n = rng.randint(2, 4)
            dom = tuple(range(1, n + 1))
            inst = self.make_random(rng, dom, rng.randint(1, 3))
            res = cl_setset(inst)
            phi = rand_bij(rng, dom)
            inst2 = CosetMapInstance(
                tuple(apply_bijection(j, phi) for j in inst.J),
                tuple(apply_bijection(l, phi) for l in inst.L),
                inst.alpha,
                apply_bijection(inst.coset, phi),
            )
            res2 = cl_setset(inst2)
            lifted = LabelingCoset(
                res2.coset.group.conjugate(phi.inv()), phi.then(res2.coset.rep)
            )
            assert lifted == res.coset


class TestClSetHyper:
    def test_labels_carry_no_information(self):
        # spec example: all labels Label(V) -> group = Aut(H)
        rng = random.Random(51)
        H = Hypergraph(V4, frozenset({frozenset({1, 2}), frozenset({3})}))
        L = [LabelingCoset.label(V4)]
        edges = sorted(H.edges, key=lambda e: tuple(sorted(e)))
        res = cl_sethyper(H, L, [(i, 0) for i in range(len(edges))])
        assert res.group == brute_aut(H.as_object(), V4)

    def test_single_edge_reduces_to_intersection(self):
        # spec example: H={S}, L={Theta tau} -> group = (Sym(S)xSym(V-S)) meet Theta
        rng = random.Random(52)
        S = frozenset({1, 2})
        H = Hypergraph(V4, frozenset({S}))
        theta = rand_coset(rng, V4)
        res = cl_sethyper(H, [theta], [(0, 0)])
        young = {g for g in PermGroup.symmetric(V4).elements()
                 if g.apply_set(S) == S}
        expect = {g for g in theta.group.elements() if g in young}
        assert set(res.group.elements()) == expect

    def test_group_matches_bruteforce_random(self):
        rng = random.Random(53)
        for _ in range(10):
            n = rng.randint(2, 4)
            dom = tuple(range(1, n + 1))
            edges = set()
            for _ in range(rng.randint(1, 3)):
                edges.add(frozenset(rng.sample(dom, rng.randint(1, n))))
            H = Hypergraph(dom, frozenset(edges))
            edges_sorted = sorted(H.edges, key=lambda e: tuple(sorted(e)))
            L = [rand_coset(rng, dom) for _ in range(rng.randint(1, 2))]
            amap = [(i, rng.randrange(len(L))) for i in range(len(edges_sorted))]
            res = cl_sethyper(H, L, amap)
            # brute force: sigma preserving edges and matching labels
            adict = dict(amap)
            expect = []
            for sigma in all_perms(dom):
                ok = True
                for i, e in enumerate(edges_sorted):
                    e2 = sigma.apply_set(e)
                    if e2 not in H.edges:
                        ok = False
                        break
                    j = edges_sorted.index(e2)
                    if internal_key(apply_bijection(L[adict[i]], sigma)) != internal_key(
                        L[adict[j]]
                    ):
                        ok = False
                        break
                if ok:
                    expect.append(sigma)
            assert set(res.group.elements()) == set(expect)
