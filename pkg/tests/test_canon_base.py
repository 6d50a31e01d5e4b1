import random

import pytest

from cosetcanon.perms import Bij, PermGroup, parse_cycles
from cosetcanon.objects import (
    LabelingCoset,
    SetOf,
    Tup,
    Vert,
    apply_bijection,
    ordered_encoding,
)
from cosetcanon.canon_base import (
    cl_graph,
    cl_int,
    cl_object,
    cl_set_small,
    graph_instance_object,
    normalize_result,
)
from cosetcanon.oracle import all_labelings, brute_aut, brute_canon

V3 = (1, 2, 3)
V4 = (1, 2, 3, 4)


def perm(text, dom):
    return parse_cycles(text, dom)


def rand_bij(rng, ground, target=None):
    tgt = list(target if target is not None else ground)
    rng.shuffle(tgt)
    return Bij(tuple(ground), tuple(tgt))


def rand_group(rng, dom, max_gens=2):
    gens = []
    for _ in range(rng.randint(0, max_gens)):
        gens.append(rand_bij(rng, dom))
    return PermGroup(dom, gens)


def rand_coset(rng, dom, max_gens=2):
    return LabelingCoset(rand_group(rng, dom, max_gens), rand_bij(rng, dom, range(1, len(dom) + 1)))


def rand_digraph(rng, dom, p=0.4):
    E = set()
    for u in dom:
        for v in dom:
            if u != v and rng.random() < p:
                E.add((u, v))
    return frozenset(E)


def check_cl1_cl2(canonize, instance_obj, ground, relabel, translate, rng, rounds=4):
    """CL1 (coset identity) and form stability checks for one canonizer."""
    res = canonize(instance_obj)
    for _ in range(rounds):
        phi = rand_bij(rng, ground)
        res2 = canonize(translate(instance_obj, phi))
        # CL1 as a coset identity: CL(X) == phi . CL(X^phi)
        lifted = LabelingCoset(
            res2.coset.group.conjugate(phi.inv()), phi.then(res2.coset.rep)
        )
        assert lifted == res.coset
        assert res2.form == res.form
    return res


class TestClGraph:
    def test_empty_relation_returns_coset(self):
        c = LabelingCoset.label(V3)
        res = cl_graph(frozenset(), c)
        assert res.coset == c

    def test_path_group_order_two(self):
        # spec example: symmetric path a-b-c under Label(V) has |group| = 2
        E = {(1, 2), (2, 1), (2, 3), (3, 2)}
        res = cl_graph(E, LabelingCoset.label(V3))
        assert res.group.order == 2
        # brute force over all 6 labelings agrees
        coset, form = brute_canon(graph_instance_object(E), V3, LabelingCoset.label(V3))
        assert res.group == coset.group
        assert res.form == form

    def test_single_arc_trivial_group(self):
        E = {(1, 2)}
        res = cl_graph(E, LabelingCoset.label((1, 2)))
        assert res.group.order == 1

    def test_min_form_matches_bruteforce_within_coset(self):
        rng = random.Random(42)
        for _ in range(30):
            n = rng.randint(2, 5)
            dom = tuple(range(1, n + 1))
            coset = rand_coset(rng, dom)
            E = rand_digraph(rng, dom)
            res = cl_graph(E, coset)
            bc, bform = brute_canon(graph_instance_object(E), dom, coset)
            assert res.form == bform
            assert res.coset == bc

    def test_cl1_cl2_random(self):
        rng = random.Random(7)
        for _ in range(15):
            n = rng.randint(2, 5)
            dom = tuple(range(1, n + 1))
            E = rand_digraph(rng, dom)

            def canonize(obj, _dom=dom):
                edges = {(t.items[0].v, t.items[1].v) for t in obj.members}
                return cl_graph(edges, LabelingCoset.label(_dom))

            def translate(obj, phi):
                return apply_bijection(obj, phi)

            res = check_cl1_cl2(
                canonize, graph_instance_object(E), dom, None, translate, rng
            )
            assert res.group == brute_aut(graph_instance_object(E), dom)


class TestClInt:
    def test_same_coset(self):
        rng = random.Random(1)
        c = rand_coset(rng, V3)
        res = cl_int(c, c)
        assert res.group == c.group

    def test_label_absorbs(self):
        rng = random.Random(2)
        c = rand_coset(rng, V3)
        res = cl_int(LabelingCoset.label(V3), c)
        assert res.coset == c

    def test_disjoint_groups_trivial(self):
        # spec example: Theta=<(1 2)>, Delta=<(1 2 3)> -> trivial group
        theta = LabelingCoset(PermGroup(V3, [perm("(1 2)", V3)]), Bij(V3, (1, 2, 3)))
        delta = LabelingCoset(PermGroup(V3, [perm("(1 2 3)", V3)]), Bij(V3, (1, 2, 3)))
        res = cl_int(theta, delta)
        assert res.group.order == 1

    def test_group_is_intersection_random(self):
        rng = random.Random(3)
        for _ in range(25):
            n = rng.randint(2, 4)
            dom = tuple(range(1, n + 1))
            a, b = rand_coset(rng, dom), rand_coset(rng, dom)
            res = cl_int(a, b)
            expect = {g for g in a.group.elements()} & {g for g in b.group.elements()}
            assert set(res.group.elements()) == expect

    def test_cl1_random(self):
        rng = random.Random(4)
        for _ in range(12):
            n = rng.randint(2, 4)
            dom = tuple(range(1, n + 1))
            pair = Tup([rand_coset(rng, dom), rand_coset(rng, dom)])

            def canonize(obj):
                return cl_int(obj.items[0], obj.items[1])

            check_cl1_cl2(canonize, pair, dom, None, apply_bijection, rng)


class TestClSetSmall:
    def test_singleton(self):
        rng = random.Random(5)
        c = rand_coset(rng, V3)
        res = cl_set_small([c])
        assert res.group == c.group

    def test_two_equal_label_cosets_collapse(self):
        # spec example: {rho1 Sym(V), rho2 Sym(V)} is one coset; group = Sym(V)
        rng = random.Random(6)
        a = LabelingCoset.label(V3)
        b = LabelingCoset(PermGroup.symmetric(V3), rand_bij(rng, V3, (1, 2, 3)))
        res = cl_set_small([a, b])
        assert res.group.order == 6

    def test_two_singleton_cosets_bruteforce(self):
        # spec example: two trivial-group cosets differing by a transposition
        r1 = Bij(V3, (1, 2, 3))
        r2 = Bij(V3, (2, 1, 3))
        J = [LabelingCoset.single(r1), LabelingCoset.single(r2)]
        res = cl_set_small(J)
        expect = brute_aut(SetOf(J), V3)
        assert res.group == expect

    def test_group_matches_bruteforce_random(self):
        rng = random.Random(8)
        for _ in range(20):
            n = rng.randint(2, 4)
            dom = tuple(range(1, n + 1))
            J = [rand_coset(rng, dom) for _ in range(rng.randint(1, 3))]
            res = cl_set_small(J)
            assert res.group == brute_aut(SetOf(J), dom)

    def test_cl1_random(self):
        rng = random.Random(9)
        for _ in range(10):
            n = rng.randint(2, 4)
            dom = tuple(range(1, n + 1))
            J = SetOf([rand_coset(rng, dom) for _ in range(rng.randint(1, 3))])

            def canonize(obj):
                return cl_set_small(list(obj.members))

            check_cl1_cl2(canonize, J, dom, None, apply_bijection, rng)

    def test_min_form_agrees_with_bruteforce_when_normalized(self):
        # canon-base invariant: cl_set_small + normalization = exhaustive
        # min-form canonizer, |V| <= 4 here
        rng = random.Random(10)
        for _ in range(10):
            n = rng.randint(2, 4)
            dom = tuple(range(1, n + 1))
            J = [rand_coset(rng, dom) for _ in range(rng.randint(1, 3))]
            res = normalize_result(cl_set_small(J), SetOf(J), dom)
            bc, bform = brute_canon(SetOf(J), dom)
            assert res.form == bform
            assert res.coset == bc

    def test_mixed_grounds_rejected(self):
        with pytest.raises(ValueError):
            cl_set_small([LabelingCoset.label(V3), LabelingCoset.label(V4)])


class TestClObject:
    def test_single_vertex(self):
        res = cl_object(Vert(2), V3)
        assert res.group == PermGroup.symmetric(V3).pointwise_stabilizer([2])

    def test_vertex_set_full(self):
        res = cl_object(SetOf([Vert(v) for v in V3]), V3)
        assert res.group.order == 6

    def test_spec_tuple_example(self):
        # ({a},{a,b}) over V={a,b,c}: trivial automorphism group
        obj = Tup([SetOf([Vert(1)]), SetOf([Vert(1), Vert(2)])])
        res = cl_object(obj, V3)
        assert res.group.order == 1
        assert res.group == brute_aut(obj, V3)

    def test_empty_set_is_label(self):
        res = cl_object(SetOf([]), V3)
        assert res.group.order == 6

    def test_group_matches_bruteforce_random(self):
        rng = random.Random(11)
        from test_objects import rand_object

        for _ in range(25):
            n = rng.randint(2, 4)
            dom = tuple(range(1, n + 1))
            obj = rand_object(rng, dom)
            res = cl_object(obj, dom)
            assert res.group == brute_aut(obj, dom)

    def test_cl1_random(self):
        rng = random.Random(12)
        from test_objects import rand_object

        for _ in range(12):
            n = rng.randint(2, 4)
            dom = tuple(range(1, n + 1))
            obj = rand_object(rng, dom)

            def canonize(o, _dom=dom):
                return cl_object(o, _dom)

            check_cl1_cl2(canonize, obj, dom, None, apply_bijection, rng)
