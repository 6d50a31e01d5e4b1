import itertools
import random
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

from cosetcanon.perms import (
    Bij,
    GroupCoset,
    PermGroup,
    coset_transversal,
    cycle_string,
    intersect_cosets,
    intersect_groups,
    is_giant,
    min_image_perm,
    min_label_rep,
    min_right_coset_rep,
    normal_closure,
    parse_cycles,
    relative_base,
    solve_point_images,
    solve_set_images,
)


def perm(text, domain):
    return parse_cycles(text, domain)


def brute_elements(gens, domain):
    """Close a generating set under products (reference oracle)."""
    ident = Bij.identity(domain)
    els = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                c = a.then(g)
                if c not in els:
                    els.add(c)
                    nxt.append(c)
        frontier = nxt
    return els


DOM3 = (1, 2, 3)
DOM4 = (1, 2, 3, 4)
DOM5 = (1, 2, 3, 4, 5)


def random_group(rng, domain):
    k = rng.randint(0, 3)
    gens = []
    pts = list(domain)
    for _ in range(k):
        img = pts[:]
        rng.shuffle(img)
        gens.append(Bij(domain, tuple(img)))
    return PermGroup(domain, gens)


class TestBij:
    def test_composition_applies_left_first(self):
        f = perm("(1 2)", DOM3)
        g = perm("(2 3)", DOM3)
        fg = f * g
        assert all(fg(v) == g(f(v)) for v in DOM3)
        assert fg(1) == 3 and fg(2) == 1 and fg(3) == 2

    def test_inverse(self):
        b = Bij((1, 2, 3), (5, 9, 7))
        assert b.then(b.inv()) == Bij.identity((1, 2, 3))
        assert b.inv().then(b) == Bij.identity((5, 7, 9))
        assert b.inv()(9) == 2

    def test_cycle_roundtrip(self):
        for text in ["()", "(1 2)", "(1 2 3)(4 5)", "(2 4)(3 5)"]:
            p = perm(text, DOM5)
            assert perm(cycle_string(p), DOM5) == p

    def test_apply_set(self):
        p = perm("(1 2 3)", DOM3)
        assert p.apply_set({1, 2}) == frozenset({2, 3})


class TestGroupBasics:
    def test_sym3_from_transpositions(self):
        # spec example: gens {(1 2),(2 3)} on {1,2,3} -> order 6
        G = PermGroup(DOM3, [perm("(1 2)", DOM3), perm("(2 3)", DOM3)])
        assert G.order == 6

    def test_trivial_group(self):
        # spec example: gens {} -> order 1
        G = PermGroup(DOM3, [])
        assert G.order == 1
        assert G.canonical_gens() == ()

    def test_s5_order_matches_closure(self):
        # spec example: gens {(1 2 3 4 5),(1 2)} -> order 120, via closure oracle
        gens = [perm("(1 2 3 4 5)", DOM5), perm("(1 2)", DOM5)]
        G = PermGroup(DOM5, gens)
        assert G.order == 120
        assert G.order == len(brute_elements(gens, DOM5))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_order_and_membership_match_bruteforce(self, seed):
        rng = random.Random(seed)
        dom = tuple(range(1, rng.randint(2, 6)))
        G = random_group(rng, dom)
        els = brute_elements(G.gens, dom)
        assert G.order == len(els)
        # membership agrees with enumeration
        for _ in range(5):
            img = list(dom)
            rng.shuffle(img)
            cand = Bij(dom, tuple(img))
            assert (cand in G) == (cand in els)
        for e in itertools.islice(els, 10):
            assert e in G

    def test_elements_enumeration(self):
        G = PermGroup(DOM4, [perm("(1 2 3 4)", DOM4)])
        els = set(G.elements())
        assert len(els) == 4
        assert els == brute_elements(G.gens, DOM4)


class TestOrbitsBlocks:
    def test_orbit_partition_simple(self):
        G = PermGroup(DOM3, [perm("(1 2)", DOM3)])
        assert G.orbit_partition() == [frozenset({1, 2}), frozenset({3})]

    def test_orbit_partition_symmetric(self):
        G = PermGroup.symmetric(DOM4)
        assert G.orbit_partition() == [frozenset(DOM4)]

    def test_orbit_partition_closure_derived(self):
        # spec example: <(1 2)(3 4)> -> {{1,2},{3,4}}
        G = PermGroup(DOM4, [perm("(1 2)(3 4)", DOM4)])
        assert G.orbit_partition() == [frozenset({1, 2}), frozenset({3, 4})]

    def test_orbit_partition_invariance_error(self):
        G = PermGroup(DOM3, [perm("(1 2)", DOM3)])
        with pytest.raises(ValueError):
            G.orbit_partition([1, 3])

    def test_minimal_blocks_c4(self):
        # spec example: <(1 2 3 4)> -> {{1,3},{2,4}}
        G = PermGroup(DOM4, [perm("(1 2 3 4)", DOM4)])
        assert G.minimal_block_system() == [frozenset({1, 3}), frozenset({2, 4})]

    def test_minimal_blocks_primitive(self):
        G = PermGroup.symmetric(DOM4)
        assert G.minimal_block_system() == [frozenset({v}) for v in DOM4]

    def test_minimal_blocks_c6_prefers_smaller(self):
        # spec example: <(1..6)> has size-2 and size-3 systems; minimal is size 2
        dom = tuple(range(1, 7))
        G = PermGroup(dom, [perm("(1 2 3 4 5 6)", dom)])
        blocks = G.minimal_block_system()
        assert blocks == [frozenset({1, 4}), frozenset({2, 5}), frozenset({3, 6})]

    def test_blocks_are_block_system(self):
        rng = random.Random(7)
        for _ in range(20):
            dom = tuple(range(1, rng.randint(3, 7)))
            G = random_group(rng, dom)
            if not G.is_transitive():
                continue
            blocks = G.minimal_block_system()
            blockset = set(blocks)
            for g in G.gens:
                for b in blocks:
                    assert g.apply_set(b) in blockset


class TestStabilizers:
    def test_pointwise_sym3(self):
        # spec example: Sym({1,2,3}) pointwise {1} -> order 2
        G = PermGroup.symmetric(DOM3)
        assert G.pointwise_stabilizer([1]).order == 2

    def test_setwise_sym4(self):
        # spec example: Sym({1..4}) setwise {1,2} -> order 4
        G = PermGroup.symmetric(DOM4)
        S = G.setwise_stabilizer({1, 2})
        assert S.order == 4

    def test_setwise_cyclic(self):
        # spec example: <(1 2 3 4)> setwise {1,3} -> order 2, via filtering
        G = PermGroup(DOM4, [perm("(1 2 3 4)", DOM4)])
        S = G.setwise_stabilizer({1, 3})
        expect = {e for e in brute_elements(G.gens, DOM4) if e.apply_set({1, 3}) == frozenset({1, 3})}
        assert S.order == len(expect)
        assert S.order == 2

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_setwise_matches_bruteforce(self, seed):
        rng = random.Random(seed)
        dom = tuple(range(1, rng.randint(3, 6)))
        G = random_group(rng, dom)
        block = frozenset(rng.sample(dom, rng.randint(1, len(dom) - 1)))
        S = G.setwise_stabilizer(block)
        expect = {e for e in brute_elements(G.gens, dom) if e.apply_set(block) == block}
        assert set(S.elements()) == expect

    def test_pointwise_matches_bruteforce(self):
        rng = random.Random(11)
        for _ in range(20):
            dom = tuple(range(1, rng.randint(3, 7)))
            G = random_group(rng, dom)
            pts = rng.sample(dom, rng.randint(1, len(dom)))
            S = G.pointwise_stabilizer(pts)
            expect = {e for e in brute_elements(G.gens, dom) if all(e(p) == p for p in pts)}
            assert set(S.elements()) == expect


class TestTransversal:
    def test_same_group(self):
        G = PermGroup.symmetric(DOM3)
        assert coset_transversal(G, G) == [G.identity()]

    def test_index_three(self):
        # spec example: Sym3 over <(1 2)> -> 3 representatives
        G = PermGroup.symmetric(DOM3)
        H = PermGroup(DOM3, [perm("(1 2)", DOM3)])
        reps = coset_transversal(G, H)
        assert len(reps) == 3
        assert reps[0].is_identity

    def test_parity_split(self):
        # spec example: Sym4 over Alt4 -> 2 representatives (parity)
        G = PermGroup.symmetric(DOM4)
        H = PermGroup.alternating(DOM4)
        reps = coset_transversal(G, H)
        assert len(reps) == 2

    def test_cosets_disjoint_and_cover(self):
        rng = random.Random(3)
        for _ in range(15):
            dom = tuple(range(1, rng.randint(3, 6)))
            G = random_group(rng, dom)
            sub = random_group(rng, dom)
            H = intersect_groups(G, sub)
            reps = coset_transversal(G, H)
            Hels = set(H.elements())
            seen = set()
            for r in reps:
                coset = {r.then(h) for h in Hels}
                assert not (coset & seen)
                seen |= coset
            assert len(seen) == G.order

    def test_representation_independence(self):
        G1 = PermGroup.symmetric(DOM4)
        G2 = PermGroup(DOM4, [perm("(1 2)", DOM4), perm("(1 2 3 4)", DOM4), perm("(3 4)", DOM4)])
        H1 = PermGroup.alternating(DOM4)
        H2 = PermGroup(DOM4, [perm("(1 2 3)", DOM4), perm("(2 3 4)", DOM4)])
        assert coset_transversal(G1, H1) == coset_transversal(G2, H2)


class TestCanonicalGens:
    def test_determinism_sym3(self):
        # spec example: two generating sets of Sym3 -> identical output
        A = PermGroup(DOM3, [perm("(1 2)", DOM3), perm("(2 3)", DOM3)])
        B = PermGroup(DOM3, [perm("(1 2 3)", DOM3), perm("(1 2)", DOM3)])
        assert A.canonical_gens() == B.canonical_gens()

    def test_trivial_empty(self):
        assert PermGroup.trivial(DOM4).canonical_gens() == ()

    def test_cyclic_regenerations(self):
        # spec example: <(1 2 3)> vs <(1 3 2)> -> identical output
        A = PermGroup(DOM3, [perm("(1 2 3)", DOM3)])
        B = PermGroup(DOM3, [perm("(1 3 2)", DOM3)])
        assert set(A.elements()) == set(B.elements())
        assert A.canonical_gens() == B.canonical_gens()

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6))
    def test_random_regenerations(self, seed):
        rng = random.Random(seed)
        dom = tuple(range(1, rng.randint(2, 6)))
        G = random_group(rng, dom)
        els = sorted(brute_elements(G.gens, dom), key=lambda b: b.img)
        # regenerate from random elements until the same group appears
        for _ in range(3):
            k = rng.randint(1, min(3, len(els)))
            gens2 = rng.sample(els, k)
            H = PermGroup(dom, gens2)
            if H.order == G.order:
                assert H.canonical_gens() == G.canonical_gens()

    def test_cangens_generate_group(self):
        rng = random.Random(23)
        for _ in range(10):
            dom = tuple(range(1, rng.randint(2, 6)))
            G = random_group(rng, dom)
            H = PermGroup(dom, G.canonical_gens())
            assert H.order == G.order


class TestGiants:
    def test_symmetric(self):
        assert is_giant(PermGroup.symmetric(DOM5)) == "symmetric"

    def test_alternating(self):
        assert is_giant(PermGroup.alternating(DOM5)) == "alternating"

    def test_neither(self):
        G = PermGroup(DOM5, [perm("(1 2 3 4 5)", DOM5)])
        assert is_giant(G) == "neither"


class TestNormalClosure:
    def test_whole_group(self):
        G = PermGroup.symmetric(DOM4)
        assert normal_closure(G, G) == G

    def test_klein_four(self):
        # spec example: Sym4, <(1 2)(3 4)> -> closure of order 4
        G = PermGroup.symmetric(DOM4)
        H = PermGroup(DOM4, [perm("(1 2)(3 4)", DOM4)])
        N = normal_closure(G, H)
        assert N.order == 4
        assert perm("(1 3)(2 4)", DOM4) in N

    def test_already_normal(self):
        # spec example: Sym3, <(1 2 3)> -> Alt3
        G = PermGroup.symmetric(DOM3)
        H = PermGroup(DOM3, [perm("(1 2 3)", DOM3)])
        assert normal_closure(G, H) == PermGroup.alternating(DOM3)


class TestRelativeBase:
    def test_equal_groups(self):
        G = PermGroup.symmetric(DOM4)
        assert relative_base(G, G) == []

    def test_sym_over_alt(self):
        # spec example (paper): rb(Sym(V), Alt(V)) = |V|-1 for |V|=4
        D = PermGroup.symmetric(DOM4)
        P = PermGroup.alternating(DOM4)
        X = relative_base(D, P)
        assert len(X) == 3
        assert D.pointwise_stabilizer(X).is_subgroup_of(P)

    def test_setwise_shape(self):
        D = PermGroup.symmetric(DOM4)
        P = D.setwise_stabilizer({1, 2})
        X = relative_base(D, P)
        assert D.pointwise_stabilizer(X).is_subgroup_of(P)

    def test_stabilizer_containment_random(self):
        rng = random.Random(5)
        for _ in range(10):
            dom = tuple(range(1, rng.randint(3, 6)))
            D = random_group(rng, dom)
            block = frozenset(rng.sample(dom, rng.randint(1, len(dom))))
            P = D.setwise_stabilizer(block)
            X = relative_base(D, P)
            assert D.pointwise_stabilizer(X).is_subgroup_of(P)


class TestMinReps:
    def test_min_label_rep_is_least(self):
        rng = random.Random(9)
        for _ in range(20):
            dom = tuple(sorted(rng.sample(range(1, 12), rng.randint(2, 5))))
            G = random_group(rng, dom)
            labels = list(range(1, len(dom) + 1))
            rng.shuffle(labels)
            rho = Bij(dom, tuple(labels))
            got = min_label_rep(G, rho)
            best = min((d.then(rho) for d in G.elements()), key=lambda b: b.img)
            assert got == best

    def test_min_right_coset_rep_is_least(self):
        rng = random.Random(13)
        for _ in range(20):
            dom = tuple(range(1, rng.randint(2, 6)))
            H = random_group(rng, dom)
            img = list(dom)
            rng.shuffle(img)
            x = Bij(dom, tuple(img))
            got = min_right_coset_rep(H, x)
            best = min((x.then(h) for h in H.elements()), key=lambda b: b.img)
            assert got == best

    def test_solvers(self):
        G = PermGroup.symmetric(DOM4)
        e = solve_point_images(G, [(1, 3), (2, 4)])
        assert e is not None and e(1) == 3 and e(2) == 4
        e2 = solve_set_images(G, [({1, 2}, {3, 4})])
        assert e2 is not None and e2.apply_set({1, 2}) == frozenset({3, 4})
        C = PermGroup(DOM4, [perm("(1 2 3 4)", DOM4)])
        assert solve_point_images(C, [(1, 1), (2, 3)]) is None


class TestIntersections:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_group_intersection_bruteforce(self, seed):
        rng = random.Random(seed)
        dom = tuple(range(1, rng.randint(2, 6)))
        A = random_group(rng, dom)
        B = random_group(rng, dom)
        got = set(intersect_groups(A, B).elements())
        expect = brute_elements(A.gens, dom) & brute_elements(B.gens, dom)
        assert got == expect

    def test_coset_intersection(self):
        rng = random.Random(17)
        for _ in range(20):
            dom = tuple(range(1, rng.randint(2, 6)))
            A = random_group(rng, dom)
            B = random_group(rng, dom)
            i1 = list(dom)
            rng.shuffle(i1)
            r1 = Bij(dom, tuple(i1))
            i2 = list(dom)
            rng.shuffle(i2)
            r2 = Bij(dom, tuple(i2))
            got = intersect_cosets(A, r1, B, r2)
            c1 = {g.then(r1) for g in A.elements()}
            c2 = {h.then(r2) for h in B.elements()}
            expect = c1 & c2
            if not expect:
                assert got is None
            else:
                grp, rep = got
                assert {g.then(rep) for g in grp.elements()} == expect


class TestGroupCoset:
    def test_empty_marker(self):
        e = GroupCoset.empty()
        assert e.is_empty and not e
        assert e == GroupCoset.empty()

    def test_membership(self):
        G = PermGroup(DOM3, [perm("(1 2)", DOM3)])
        rep = Bij(DOM3, (7, 8, 9))
        c = GroupCoset(G, rep)
        assert rep in c
        assert c.size == 2
