import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from cosetcanon.perms import Bij, PermGroup, parse_cycles
from cosetcanon.objects import (
    LabelingCoset,
    Lit,
    SetOf,
    Tup,
    Vert,
    apply_bijection,
    compare_ordered,
    ground_of,
    induced_coset,
    internal_key,
    join_cosets,
    object_from_text,
    object_to_text,
    ordered_encoding,
    replace_objects,
)

V3 = (1, 2, 3)
V4 = (1, 2, 3, 4)


def perm(text, dom):
    return parse_cycles(text, dom)


def rand_object(rng, ground, depth=2):
    kind = rng.randint(0, 4 if depth > 0 else 1)
    if kind == 0 or depth == 0:
        return Vert(rng.choice(ground))
    if kind == 1:
        return Lit((rng.randint(0, 3),))
    if kind == 2:
        gens = []
        for _ in range(rng.randint(0, 2)):
            img = list(ground)
            rng.shuffle(img)
            gens.append(Bij(ground, tuple(img)))
        labels = list(range(1, len(ground) + 1))
        rng.shuffle(labels)
        return LabelingCoset(PermGroup(ground, gens), Bij(ground, tuple(labels)))
    if kind == 3:
        return Tup([rand_object(rng, ground, depth - 1) for _ in range(rng.randint(0, 3))])
    return SetOf([rand_object(rng, ground, depth - 1) for _ in range(rng.randint(0, 3))])


def rand_bij(rng, ground, target=None):
    tgt = list(target if target is not None else ground)
    rng.shuffle(tgt)
    return Bij(tuple(ground), tuple(tgt))


class TestLabelingCoset:
    def test_label_full(self):
        L = LabelingCoset.label(V3)
        assert L.size == 6
        assert set(L.members()) == {
            Bij(V3, img) for img in itertools.permutations((1, 2, 3))
        }

    def test_equality_same_coset_different_rep(self):
        G = PermGroup(V3, [perm("(1 2)", V3)])
        r1 = Bij(V3, (1, 2, 3))
        r2 = Bij(V3, (2, 1, 3))  # = (1 2) then r1
        assert LabelingCoset(G, r1) == LabelingCoset(G, r2)
        r3 = Bij(V3, (1, 3, 2))
        assert LabelingCoset(G, r1) != LabelingCoset(G, r3)

    def test_equality_needs_same_group(self):
        r = Bij(V3, (1, 2, 3))
        a = LabelingCoset(PermGroup(V3, [perm("(1 2)", V3)]), r)
        b = LabelingCoset(PermGroup(V3, [perm("(1 2 3)", V3)]), r)
        assert a != b

    def test_restriction_set(self):
        c = LabelingCoset.label(V3)
        rs = c.restriction_set([1, 2])
        assert rs == {
            (a, b)
            for a in (1, 2, 3)
            for b in (1, 2, 3)
            if a != b
        }


class TestApplyBijection:
    def test_vertex(self):
        mu = Bij((5,), (1,))
        assert apply_bijection(Vert(5), mu) == Vert(1)

    def test_identity_fixes(self):
        rng = random.Random(0)
        for _ in range(20):
            x = rand_object(rng, V3)
            mu = Bij.identity(V3)
            assert apply_bijection(x, mu) == x

    def test_set_elementwise(self):
        # spec example: {(a,b),(b,c)} under a->b,b->c,c->a gives {(b,c),(c,a)}
        a, b, c = 1, 2, 3
        mu = Bij((a, b, c), (b, c, a))
        X = SetOf([Tup([Vert(a), Vert(b)]), Tup([Vert(b), Vert(c)])])
        Y = apply_bijection(X, mu)
        assert Y == SetOf([Tup([Vert(b), Vert(c)]), Tup([Vert(c), Vert(a)])])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_group_action_law(self, seed):
        # X^(mu nu) == (X^mu)^nu
        rng = random.Random(seed)
        x = rand_object(rng, V3)
        mu = rand_bij(rng, V3, (4, 5, 6))
        nu = rand_bij(rng, (4, 5, 6), (7, 8, 9))
        assert apply_bijection(x, mu.then(nu)) == apply_bijection(apply_bijection(x, mu), nu)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_roundtrip(self, seed):
        rng = random.Random(seed)
        x = rand_object(rng, V3)
        mu = rand_bij(rng, V3, (10, 20, 30))
        assert apply_bijection(apply_bijection(x, mu), mu.inv()) == x

    def test_coset_apply(self):
        c = LabelingCoset(PermGroup(V3, [perm("(1 2)", V3)]), Bij(V3, (1, 2, 3)))
        mu = Bij(V3, (4, 5, 6))
        c2 = apply_bijection(c, mu)
        assert c2.ground == (4, 5, 6)
        # members translate: lam in c  <=>  mu^-1 then lam in c2
        for lam in c.members():
            assert mu.inv().then(lam) in c2


class TestCompareOrdered:
    def test_ints(self):
        assert compare_ordered(Vert(1), Vert(2)) == -1

    def test_reflexive(self):
        rng = random.Random(1)
        for _ in range(10):
            x = rand_object(rng, V3)
            lam = rand_bij(rng, V3, (1, 2, 3))
            xo = apply_bijection(x, lam)
            assert compare_ordered(xo, xo) == 0

    def test_tuple_before_set(self):
        # spec example: (1,2) compares below {1,2}
        t = Tup([Vert(1), Vert(2)])
        s = SetOf([Vert(1), Vert(2)])
        assert compare_ordered(t, s) == -1

    def test_total_order_axioms_small(self):
        # all ordered objects of depth <= 2 over {1,2,3}: antisymmetry,
        # transitivity and totality via the encoding order
        atoms = [Vert(1), Vert(2), Vert(3)]
        depth1 = list(atoms)
        for k in range(3):
            for combo in itertools.combinations(atoms, k):
                depth1.append(SetOf(combo))
                depth1.append(Tup(combo))
        pool = depth1[:14]
        for x, y in itertools.product(pool, repeat=2):
            cxy = compare_ordered(x, y)
            cyx = compare_ordered(y, x)
            assert cxy == -cyx
            if cxy == 0:
                assert ordered_encoding(x) == ordered_encoding(y)
        for x, y, z in itertools.product(pool[:8], repeat=3):
            if compare_ordered(x, y) <= 0 and compare_ordered(y, z) <= 0:
                assert compare_ordered(x, z) <= 0

    def test_unordered_coset_rejected(self):
        c = LabelingCoset.label((5, 7, 9))
        with pytest.raises(ValueError):
            compare_ordered(c, c)


class TestInducedCoset:
    def test_singletons_full_symmetric(self):
        # spec example: singletons under Sym(V) -> induced Sym
        c = LabelingCoset.label(V3)
        members = [SetOf([Vert(v)]) for v in V3]
        ind, objs = induced_coset(c, members)
        assert ind.size == 6

    def test_trivial_group_trivial_induced(self):
        c = LabelingCoset.single(Bij(V3, (1, 2, 3)))
        members = [SetOf([Vert(v)]) for v in V3]
        ind, _ = induced_coset(c, members)
        assert ind.size == 1

    def test_spec_two_member_example(self):
        # V={a,b,c}=1,2,3; members {a} and {b,c}; group <(b c)>: induced trivial,
        # member {1} labeled before {2,3}
        G = PermGroup(V3, [perm("(2 3)", V3)])
        c = LabelingCoset(G, Bij(V3, (1, 2, 3)))
        m1 = SetOf([Vert(1)])
        m2 = SetOf([Vert(2), Vert(3)])
        ind, objs = induced_coset(c, [m1, m2])
        assert ind.size == 1
        i1 = objs.index(m1)
        assert ind.rep(i1) == 1

    def test_not_automorphisms_error(self):
        G = PermGroup(V3, [perm("(1 2)", V3)])
        c = LabelingCoset(G, Bij(V3, (1, 2, 3)))
        with pytest.raises(ValueError):
            induced_coset(c, [SetOf([Vert(1)]), SetOf([Vert(3)])])

    def test_commutes_with_relabeling(self):
        rng = random.Random(4)
        for _ in range(10):
            G = PermGroup(V3, [perm("(2 3)", V3)])
            c = LabelingCoset(G, rand_bij(rng, V3, (1, 2, 3)))
            members = [SetOf([Vert(1)]), SetOf([Vert(2), Vert(3)])]
            mu = rand_bij(rng, V3, (4, 5, 6))
            ind1, objs1 = induced_coset(c, members)
            ind2, objs2 = induced_coset(
                apply_bijection(c, mu), [apply_bijection(m, mu) for m in members]
            )
            # matched member indices carry the same induced labels
            for o1 in objs1:
                o2 = apply_bijection(o1, mu)
                assert ind1.rep(objs1.index(o1)) == ind2.rep(objs2.index(o2))


class TestJoinCosets:
    def test_singleton(self):
        c = LabelingCoset(PermGroup(V3, [perm("(1 2)", V3)]), Bij(V3, (1, 2, 3)))
        assert join_cosets([c]) == c

    def test_label_absorbs(self):
        c = LabelingCoset.label(V3)
        d = LabelingCoset.single(Bij(V3, (2, 3, 1)))
        assert join_cosets([c, d]) == c

    def test_minimality_bruteforce(self):
        # join of two singleton cosets equals the smallest coset containing
        # both, verified against all subgroup cosets of Sym(3)
        r1 = Bij(V3, (1, 2, 3))
        r2 = Bij(V3, (2, 1, 3))
        j = join_cosets([LabelingCoset.single(r1), LabelingCoset.single(r2)])
        sym = PermGroup.symmetric(V3)
        best = None
        all_labelings = [Bij(V3, img) for img in itertools.permutations((1, 2, 3))]
        for k in range(1, 4):
            for gens in itertools.combinations(list(sym.elements()), k):
                G = PermGroup(V3, gens)
                for rep in all_labelings:
                    c = LabelingCoset(G, rep)
                    if r1 in c and r2 in c:
                        if best is None or c.size < best.size:
                            best = c
        assert j.size == best.size
        assert r1 in j and r2 in j

    def test_isomorphism_invariance(self):
        rng = random.Random(6)
        for _ in range(10):
            cosets = []
            for _ in range(rng.randint(1, 3)):
                gens = [rand_bij(rng, V3) for _ in range(rng.randint(0, 2))]
                gens = [g for g in gens if g.is_perm()]
                cosets.append(
                    LabelingCoset(PermGroup(V3, gens), rand_bij(rng, V3, (1, 2, 3)))
                )
            phi = rand_bij(rng, V3, (7, 8, 9))
            j1 = apply_bijection(join_cosets(cosets), phi)
            j2 = join_cosets([apply_bijection(c, phi) for c in cosets])
            assert j1 == j2

    def test_associative_in_effect(self):
        rng = random.Random(8)
        for _ in range(10):
            cs = [
                LabelingCoset.single(rand_bij(rng, V3, (1, 2, 3))) for _ in range(3)
            ]
            a = join_cosets([join_cosets(cs[:2]), cs[2]])
            b = join_cosets(cs)
            assert a == b


class TestReplaceObjects:
    def test_non_isomorphic_rejected(self):
        def cl(x):
            return LabelingCoset.label(tuple(sorted(ground_of(x))))

        # distinct canonical forms -> error
        def bad_cl(x):
            g = tuple(sorted(ground_of(x)))
            return LabelingCoset.single(Bij(g, tuple(range(1, len(g) + 1))))

        xs = [SetOf([Vert(1)]), SetOf([Vert(2), Vert(3)])]
        with pytest.raises(ValueError):
            replace_objects([apply_bijection(x, Bij.identity(V3)) for x in xs], bad_cl)


class TestSerialization:
    def test_examples(self):
        x = Tup([Vert(1), SetOf([Vert(2), Vert(3)])])
        assert object_from_text(object_to_text(x)) == x

    def test_coset_roundtrip(self):
        c = LabelingCoset(PermGroup(V3, [perm("(1 2)", V3)]), Bij(V3, (2, 1, 3)))
        assert object_from_text(object_to_text(c)) == c

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_random_roundtrip(self, seed):
        rng = random.Random(seed)
        x = rand_object(rng, V3)
        assert object_from_text(object_to_text(x)) == x

    def test_malformed(self):
        with pytest.raises(ValueError):
            object_from_text("(1, ")
