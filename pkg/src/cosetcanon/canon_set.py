"""The main multiple-coset canonizer.

An instance carries a set J of labeling cosets, an invariant vertex subset A,
the shared ordered group of the members and optionally a giant representation
of that group.  Recursion preserves three invariants: all members restrict
identically outside A (A), all members share one ordered group and one
ordered image of A (B), and any attached giant representation acts
transitively on the ordered A with the pointwise stabilizer of A inside its
kernel (g).  Dispatch: without a giant representation the instance is pushed
toward a Johnson action; with one, local certificates are produced and
aggregated.  Every recursive call is logged against the progress shapes and
the global call-count bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .perms import (
    Bij,
    PermGroup,
    coset_transversal,
    intersect_groups,
    is_giant,
    normal_closure,
    relative_base,
    solve_point_images,
    solve_set_images,
)
from .objects import (
    LabelingCoset,
    Lit,
    SetOf,
    Tup,
    Vert,
    apply_bijection,
    internal_key,
    join_cosets,
    ordered_encoding,
)
from .canon_base import CanonResult, cl_int, cl_object, cl_set_small
from .canon_struct import Hypergraph, cl_sethyper, primitive_case

__all__ = [
    "SetInstance",
    "GiantRep",
    "ProgressLedger",
    "FullnessCertificate",
    "cl_set",
    "recurse_on_partition",
    "reduce_to_subgroup",
    "reduce_to_johnson",
    "produce_certificates",
    "aggregate_certificates",
    "extend_by_automorphisms",
    "A_SMALL_CONSTANT",
    "giant_floor",
    "progress_bound",
]

A_SMALL_CONSTANT = 8


def giant_floor(n: int) -> int:
    """Smallest admissible image size for a giant representation."""
    return max(8, 2 + math.ceil(math.log2(max(2, n))))


class GiantRep:
    """A homomorphism from an ordered group onto a giant, stored as the graph
    subgroup on domain-labels plus shifted image points."""

    __slots__ = ("domain_group", "w_points", "offset", "combined")

    def __init__(self, domain_group: PermGroup, image_gens: list[Bij], w_points: tuple):
        self.domain_group = domain_group
        self.w_points = tuple(w_points)
        self.offset = (max(domain_group.domain) if domain_group.domain else 0) + 1
        dom = tuple(domain_group.domain) + tuple(p + self.offset for p in self.w_points)
        gens = []
        if len(image_gens) != len(domain_group.gens):
            raise ValueError("one image per generator required")
        for g, im in zip(domain_group.gens, image_gens):
            m = {v: g(v) for v in domain_group.domain}
            for p in self.w_points:
                m[p + self.offset] = im(p) + self.offset
            gens.append(Bij.from_dict(m))
        self.combined = PermGroup(dom, gens)
        if self.combined.pointwise_stabilizer(domain_group.domain).order != 1:
            raise ValueError("images do not define a function of the domain group")

    @property
    def w_size(self) -> int:
        return len(self.w_points)

    def _wpart(self, g: Bij) -> Bij:
        off = self.offset
        return Bij(
            self.w_points, tuple(g(p + off) - off for p in self.w_points)
        )

    def _vpart(self, g: Bij) -> Bij:
        return g.restrict(self.domain_group.domain)

    def image_group(self) -> PermGroup:
        return PermGroup(self.w_points, [self._wpart(g) for g in self.combined.gens])

    def eval(self, d: Bij) -> Bij:
        """Image of a domain element (unique lift through the graph group)."""
        pairs = [(v, d(v)) for v in self.domain_group.domain]
        lift = solve_point_images(self.combined, pairs)
        if lift is None:
            raise ValueError("element outside the represented group")
        return self._wpart(lift)

    def kernel(self) -> PermGroup:
        off = self.offset
        stab = self.combined.pointwise_stabilizer(
            [p + off for p in self.w_points]
        )
        return PermGroup(
            self.domain_group.domain, [self._vpart(g) for g in stab.gens]
        )

    def image_of_subgroup(self, sub: PermGroup) -> PermGroup:
        return PermGroup(self.w_points, [self.eval(g) for g in sub.gens])

    def preimage_of_image_subgroup(self, M: PermGroup) -> PermGroup:
        """{d : eval(d) in M} for M <= Sym(W)."""
        img = self.image_group()
        meet = intersect_groups(img, M)
        gens = list(self.kernel().gens)
        for m in meet.gens:
            off = self.offset
            pairs = [(p + off, m(p) + off) for p in self.w_points]
            lift = solve_point_images(self.combined, pairs)
            if lift is None:
                raise AssertionError("image element without preimage")
            gens.append(self._vpart(lift))
        return PermGroup(self.domain_group.domain, gens)

    def restricted_to_subgroup(self, sub: PermGroup) -> "GiantRep":
        return GiantRep(sub, [self.eval(g) for g in sub.gens], self.w_points)

    def restricted_to_test_set(self, sub: PermGroup, T: tuple) -> "GiantRep":
        """Representation of ``sub`` acting on the test window T only."""
        images = []
        for g in sub.gens:
            im = self.eval(g)
            images.append(Bij(tuple(T), tuple(im(t) for t in T)))
        return GiantRep(sub, images, tuple(T))

    def dump(self) -> dict:
        return {
            "w": list(self.w_points),
            "gens": [list(g.img) for g in self.domain_group.gens],
            "images": [list(self.eval(g).img) for g in self.domain_group.gens],
        }


@dataclass(frozen=True)
class SetInstance:
    """One recursion node: members, invariant set, shared ordered group and
    optional giant representation."""

    J: tuple  # LabelingCosets, deterministically sorted, distinct
    A: frozenset
    delta_can: PermGroup
    giant: GiantRep | None = None

    @property
    def ground(self) -> tuple:
        return self.J[0].ground

    @property
    def a_can(self) -> frozenset:
        return self.J[0].rep.apply_set(self.A)

    def as_object(self) -> SetOf:
        return SetOf(self.J)

    def orb_size(self) -> int:
        """Largest orbit of the ordered group on the ordered A."""
        ac = self.a_can
        if not ac:
            return 1
        return max(len(o) for o in self.delta_can.orbit_partition(ac))


def make_instance(J, A, giant=None) -> SetInstance:
    members = _sorted_members(J)
    if not members:
        raise ValueError("empty member set")
    ground = members[0].ground
    A = frozenset(A)
    if not A <= set(ground):
        raise ValueError("A outside the ground set")
    delta_can = members[0].conjugated_group()
    acan = members[0].rep.apply_set(A)
    for c in members[1:]:
        if c.ground != ground:
            raise ValueError("mixed ground sets")
        if c.conjugated_group() != delta_can:
            raise ValueError("property (B) violated: ordered groups differ")
        if c.rep.apply_set(A) != acan:
            raise ValueError("property (B) violated: ordered A differs")
    for c in members:
        for g in c.group.gens:
            if g.apply_set(A) != A:
                raise ValueError("A is not invariant under a member group")
    if giant is not None:
        _check_g_property(delta_can, acan, giant, len(ground))
    return SetInstance(tuple(members), A, delta_can, giant)


def _check_g_property(delta_can, acan, giant: GiantRep, n: int):
    if giant.w_size < giant_floor(n):
        raise ValueError("giant image below the admissible floor")
    if is_giant(giant.image_group()) == "neither":
        raise ValueError("representation image is not a giant")
    if acan and not delta_can.is_transitive(acan):
        raise ValueError("ordered group not transitive on ordered A")
    stab = delta_can.pointwise_stabilizer(acan)
    ker = giant.kernel()
    if not stab.is_subgroup_of(ker):
        raise ValueError("pointwise stabilizer of A not inside the kernel")


def _sorted_members(J) -> list:
    seen = {}
    for c in J:
        seen[internal_key(c)] = c
    return [seen[k] for k in sorted(seen)]


# ---------------------------------------------------------------------------
# progress accounting
# ---------------------------------------------------------------------------


def progress_bound(n: int, t: int, a: int, orb: int, giant_defined: bool) -> float:
    """The recursion-count bound evaluated at instance parameters."""
    lj = math.log2(max(1, t))
    lo = math.log2(max(1, orb))
    expo = (math.log2(n + 2) ** 3) * (2 * math.log2(n + 4) * lj + lo)
    delta = 1 if giant_defined else 0
    return (2 ** expo) * (t ** 2) * max(1, a) * (n ** (2 - 2 * delta))


SHAPES = ("root", "linear-J", "linear-A", "in-J", "in-delta", "in-g", "sub")


@dataclass
class ProgressLedger:
    calls: int = 0
    records: list = field(default_factory=list)
    shape_counts: dict = field(default_factory=dict)

    def tick(self, inst: SetInstance):
        self.calls += 1
        self.records.append(
            (len(inst.J), len(inst.A), inst.orb_size(), inst.giant is not None)
        )

    def log_shape(self, shape: str, parent: SetInstance, child: SetInstance):
        if shape not in SHAPES:
            raise AssertionError(f"unknown progress shape {shape}")
        self.shape_counts[shape] = self.shape_counts.get(shape, 0) + 1
        if shape == "linear-J":
            assert len(child.J) < len(parent.J), "linear-J must shrink J"
        elif shape == "linear-A":
            assert child.A < parent.A, "linear-A must shrink A"
            assert child.giant is None
        elif shape == "in-J":
            assert len(child.J) <= max(1, len(parent.J) // 2) or len(child.J) < len(
                parent.J
            ), "in-J must reduce J"
        elif shape == "in-delta":
            assert child.giant is None
            assert child.orb_size() <= max(1, parent.orb_size() // 2), (
                "in-delta must halve the largest orbit on A"
            )
        elif shape == "in-g":
            assert child.giant is not None, "in-g must attach a representation"
        elif shape == "sub":
            assert len(child.J) <= len(parent.J), "subgroup step grew J"

    def check_root_bound(self, root: SetInstance):
        t = progress_bound(
            len(root.ground),
            len(root.J),
            len(root.A),
            root.orb_size(),
            root.giant is not None,
        )
        if self.calls > t:
            raise AssertionError(
                f"recursion ledger exceeded the progress bound: {self.calls} > {t}"
            )


# ---------------------------------------------------------------------------
# helpers shared by the subroutines
# ---------------------------------------------------------------------------


def _result_for(inst: SetInstance, coset: LabelingCoset) -> CanonResult:
    return CanonResult(coset, ordered_encoding(inst.as_object(), coset.rep))


def _object_base_case(inst: SetInstance) -> CanonResult:
    res = cl_set_small(list(inst.J))
    return _result_for(inst, res.coset)


def _argmin_join(inst: SetInstance, cosets: list[LabelingCoset]) -> CanonResult:
    obj = inst.as_object()
    best = None
    keep = []
    for c in cosets:
        form = ordered_encoding(obj, c.rep)
        if best is None or form < best:
            best = form
            keep = [c]
        elif form == best:
            keep.append(c)
    return CanonResult(join_cosets(keep), best)


def _chain_intersect(inst: SetInstance, cosets: list[LabelingCoset]) -> CanonResult:
    acc = cosets[0]
    for c in cosets[1:]:
        acc = cl_int(acc, c).coset
    return _result_for(inst, acc)


def _sub_members(inst: SetInstance, indices) -> list:
    return [inst.J[i] for i in sorted(indices)]


def _subcoset(member: LabelingCoset, d_can: Bij, psi_can: PermGroup) -> LabelingCoset:
    """The labeling coset rho d Psi (a subcoset of the member)."""
    x = member.rep.then(d_can)
    return LabelingCoset(psi_can.conjugate(x.inv()), x)


def _restriction_classes(subcosets: list, W, psi_can: PermGroup) -> list[list[int]]:
    """Partition indices by equality of the restriction outside A.

    (lam Psi)|_W == (lam' Psi)|_W iff some psi maps lam's W-labels onto
    lam's... the witness search solves psi(lam(w)) = lam'(w) pointwise.
    """
    Ws = sorted(W)
    classes: list[list[int]] = []
    reps: list[Bij] = []
    for i, c in enumerate(subcosets):
        lam = c.rep
        placed = False
        for k, lam0 in enumerate(reps):
            pairs = [(lam(w), lam0(w)) for w in Ws]
            if solve_point_images(psi_can, pairs) is not None:
                classes[k].append(i)
                placed = True
                break
        if not placed:
            classes.append([i])
            reps.append(lam)
    return classes


def _block_restriction_classes(members: list, blocks, psi_can: PermGroup) -> list[list[int]]:
    """Partition indices by equality of the induced restriction on blocks."""
    blks = sorted((frozenset(b) for b in blocks), key=min)
    classes: list[list[int]] = []
    reps: list[Bij] = []
    for i, c in enumerate(members):
        lam = c.rep
        placed = False
        for k, lam0 in enumerate(reps):
            pairs = [
                (frozenset(lam(v) for v in b), frozenset(lam0(v) for v in b))
                for b in blks
            ]
            if solve_set_images(psi_can, pairs) is not None:
                classes[k].append(i)
                placed = True
                break
        if not placed:
            classes.append([i])
            reps.append(lam)
    return classes


def _partition_by_key(inst: SetInstance, key_fn) -> list[list[int]]:
    classes: dict = {}
    for i in range(len(inst.J)):
        classes.setdefault(key_fn(i), []).append(i)
    return [classes[k] for k in sorted(classes)]


def _is_trivial_partition(parts, total) -> bool:
    return len(parts) <= 1 or all(len(p) == 1 for p in parts)


# ---------------------------------------------------------------------------
# the five subroutines
# ---------------------------------------------------------------------------


def recurse_on_partition(
    inst: SetInstance, family: list, ledger: ProgressLedger
) -> CanonResult:
    """Exploit a non-trivial partition family of J (Lemma-23 style)."""
    t = len(inst.J)
    fam = [tuple(sorted(map(frozenset, P), key=min)) for P in family]
    fam = [P for P in fam if not _is_trivial_partition(P, t)]
    if not fam:
        raise ValueError("partition family is trivial")
    equi = [P for P in fam if len({len(part) for part in P}) == 1]
    if equi:
        p_min = min(len(P) for P in equi)
        chosen = [P for P in equi if len(P) == p_min]
        outcomes = []
        for P in chosen:
            part_results = []
            for part in P:
                sub = make_instance(_sub_members(inst, part), inst.A, inst.giant)
                ledger.log_shape("in-J", inst, sub)
                res = _cl_set_core(sub, ledger)
                part_results.append((res, part))
            # order part results into form classes, recurse per class
            classes: dict = {}
            for res, part in part_results:
                form = ordered_encoding(SetOf(_sub_members(inst, part)), res.coset.rep)
                classes.setdefault(form, []).append(res.coset)
            class_cosets = []
            for form in sorted(classes):
                sub = make_instance(classes[form], frozenset(inst.ground), None)
                ledger.log_shape("in-J", inst, sub)
                class_cosets.append(_cl_set_core(sub, ledger).coset)
            outcomes.append(_chain_intersect(inst, class_cosets).coset)
        return _argmin_join(inst, outcomes)
    # no equipartition: smallest size-class unions
    p_stars = []
    for P in fam:
        by_size: dict = {}
        for part in P:
            by_size.setdefault(len(part), set()).update(part)
        star = None
        for x in sorted(by_size):
            if 1 <= len(by_size[x]) <= t / 2:
                star = frozenset(by_size[x])
                break
        if star is None:
            raise AssertionError("a non-equipartition must have a small size class")
        p_stars.append(star)
    union = frozenset().union(*p_stars)
    if union != frozenset(range(t)):
        sub1 = make_instance(_sub_members(inst, union), inst.A, inst.giant)
        sub2 = make_instance(
            _sub_members(inst, set(range(t)) - union), inst.A, inst.giant
        )
        ledger.log_shape("linear-J", inst, sub1)
        res1 = _cl_set_core(sub1, ledger)
        ledger.log_shape("linear-J", inst, sub2)
        res2 = _cl_set_core(sub2, ledger)
        return _chain_intersect(inst, [res1.coset, res2.coset])
    tagged = []
    for star in sorted(set(p_stars), key=lambda s: tuple(sorted(s))):
        sub = make_instance(_sub_members(inst, star), inst.A, inst.giant)
        ledger.log_shape("in-J", inst, sub)
        res = _cl_set_core(sub, ledger)
        form = ordered_encoding(SetOf(_sub_members(inst, star)), res.coset.rep)
        tagged.append(Tup([res.coset, Lit(form)]))
    out = cl_object(SetOf(tagged), inst.ground)
    return _result_for(inst, out.coset)


def reduce_to_subgroup(
    inst: SetInstance,
    psi_can: PermGroup,
    ledger: ProgressLedger,
    shape: str = "sub",
):
    """Split every member along a subgroup of the shared ordered group.

    Returns ('family', partitions-of-J) or ('result', CanonResult).  The
    subcoset classes pair a common restriction outside A with a common
    identifying tuple; each identifying tuple selects at most one subcoset
    per member, so classes never exceed |J|.
    """
    delta_can = inst.delta_can
    if not psi_can.is_subgroup_of(delta_can):
        raise ValueError("not a subgroup of the shared ordered group")
    if psi_can.order == delta_can.order:
        # identity step: the subcoset family is J itself; answer directly
        if inst.giant is None:
            return ("result", _object_base_case(inst))
        child = make_instance(list(inst.J), inst.A, None)
        return ("result", _cl_set_core(child, ledger))
    reps = coset_transversal(delta_can, psi_can)
    subs = []  # (member index, subcoset)
    for i, c in enumerate(inst.J):
        for dl in reps:
            subs.append((i, _subcoset(c, dl, psi_can)))
    # identifying tuple: pointwise stabilizer inside psi
    X = tuple(relative_base(delta_can, psi_can))
    # restriction classes outside A
    W = set(inst.ground) - inst.A
    rest_classes = _restriction_classes([sc for _, sc in subs], W, psi_can)
    rest_of = {}
    for k, cls in enumerate(rest_classes):
        for pos in cls:
            rest_of[pos] = k
    # classes: same restriction plus a shared identifying tuple (pairwise
    # witness search, closed transitively)
    parent_uf = list(range(len(subs)))

    def find(x):
        while parent_uf[x] != x:
            parent_uf[x] = parent_uf[parent_uf[x]]
            x = parent_uf[x]
        return x

    for a in range(len(subs)):
        for b in range(a + 1, len(subs)):
            if rest_of[a] != rest_of[b] or find(a) == find(b):
                continue
            if _share_identifier(subs[a][1].rep, subs[b][1].rep, psi_can, X):
                parent_uf[find(b)] = find(a)
    grouped: dict = {}
    for pos in range(len(subs)):
        grouped.setdefault(find(pos), []).append(pos)
    class_list = [grouped[k] for k in sorted(grouped)]
    for cls in class_list:
        if len(cls) > len(inst.J):
            raise AssertionError("identifying tuples failed: class exceeds |J|")
        members_in = [subs[pos][0] for pos in cls]
        if len(set(members_in)) != len(members_in):
            raise AssertionError("identifying tuple selected two subcosets of one member")
    # induced cover on J
    covers = []
    for cls in class_list:
        covers.append(frozenset(subs[pos][0] for pos in cls))
    t = len(inst.J)
    fam = []
    for cov in covers:
        if 0 < len(cov) < t:
            P = (cov, frozenset(range(t)) - cov)
            if not _is_trivial_partition(P, t):
                fam.append(P)
    if fam:
        return ("family", [list(P) for P in fam])
    # no usable two-part split; a split into singletons means |J| <= 2 and
    # the instance is small enough to canonize directly
    if t <= 2 and any(0 < len(cov) < t for cov in covers):
        return ("result", _object_base_case(inst))
    # every class meets every member: recurse per class
    results = []
    for cls in class_list:
        sub_members = [subs[pos][1] for pos in cls]
        child = make_instance(sub_members, inst.A, None)
        ledger.log_shape(shape, inst, child)
        results.append(_cl_set_core(child, ledger).coset)
    return ("result", _argmin_join(inst, results))


def _tuple_orbit(group: PermGroup, X: tuple) -> frozenset:
    out = {X}
    queue = [X]
    while queue:
        cur = queue.pop()
        for g in group.gens:
            nxt = tuple(g(x) for x in cur)
            if nxt not in out:
                out.add(nxt)
                queue.append(nxt)
    return frozenset(out)


def _share_identifier(lamA: Bij, lamB: Bij, psi: PermGroup, X: tuple) -> bool:
    """Do the subcosets lamA*Psi and lamB*Psi share an identifying tuple?

    A tuple T identifies a subcoset when some member maps T onto the anchor
    tuple X.  Sharing means: exist psi1, psi2 with (lamA psi1)^-1 X =
    (lamB psi2)^-1 X, i.e. a label tuple z with psi1: z -> X feasible and
    psi2: k(z) -> X feasible where k carries lamA-labels to lamB-labels.
    """
    if not X:
        return True
    k = lamA.inv().then(lamB)
    chain = psi.chain()
    from .perms import _prefix_feasible

    labels = sorted(psi.domain)

    def rec(i, m1, m2, used):
        if i == len(X):
            return True
        x = X[i]
        for z in labels:
            if z in used:
                continue
            m1[z] = x
            m2[k(z)] = x
            if _prefix_feasible(chain, m1) and _prefix_feasible(chain, m2):
                used.add(z)
                if rec(i + 1, m1, m2, used):
                    return True
                used.remove(z)
            del m1[z]
            del m2[k(z)]
        return False

    return rec(0, {}, {}, set())


def reduce_to_johnson(inst: SetInstance, ledger: ProgressLedger) -> CanonResult:
    """Dispatch an instance without a giant representation."""
    if inst.giant is not None:
        raise ValueError("reduce_to_johnson expects no representation")
    n = len(inst.ground)
    A = inst.A
    if len(A) < A_SMALL_CONSTANT:
        return _object_base_case(inst)
    delta_can = inst.delta_can
    acan = inst.a_can
    orbits = delta_can.orbit_partition(acan)
    if len(orbits) > 1:
        return _johnson_intransitive(inst, orbits, ledger)
    return _johnson_transitive(inst, ledger)


def _johnson_intransitive(inst, orbits, ledger) -> CanonResult:
    delta_can = inst.delta_can
    # orbit minimal in the order: orbits are label sets
    astar_can = min(orbits, key=lambda o: tuple(sorted(o)))
    astars = []
    for c in inst.J:
        inv = c.rep.inv()
        astars.append(frozenset(inv(x) for x in astar_can))
    parts = _partition_by_key(inst, lambda i: tuple(sorted(astars[i])))
    t = len(inst.J)
    if not _is_trivial_partition(parts, t):
        return recurse_on_partition(inst, parts, ledger)
    if len(parts) == t and t > 1:
        # pairwise distinct minimal orbits: coset-labeled hypergraph
        H = Hypergraph(inst.ground, frozenset(astars))
        edges_sorted = sorted(H.edges, key=lambda e: tuple(sorted(e)))
        by_edge = {tuple(sorted(astars[i])): i for i in range(t)}
        alpha = [(k, by_edge[tuple(sorted(e))]) for k, e in enumerate(edges_sorted)]
        res = cl_sethyper(H, list(inst.J), alpha)
        return _result_for(inst, res.coset)
    astar = astars[0]
    rest_classes = _restriction_classes(
        list(inst.J), set(inst.ground) - frozenset(astar), inst.delta_can
    )
    if not _is_trivial_partition(rest_classes, t):
        return recurse_on_partition(inst, rest_classes, ledger)
    if len(rest_classes) == 1:
        child = make_instance(list(inst.J), frozenset(astar), None)
        ledger.log_shape("linear-A", inst, child)
        return _result_for(inst, _cl_set_core(child, ledger).coset)
    # restrictions pairwise distinct: free the minimal orbit in each member
    circ_members = []
    for c in inst.J:
        gens = []
        for g in c.group.gens:
            m = {v: (v if v in astar else g(v)) for v in inst.ground}
            gens.append(Bij.from_dict(m))
        pts = sorted(astar)
        for i in range(len(pts) - 1):
            m = {v: v for v in inst.ground}
            m[pts[i]], m[pts[i + 1]] = pts[i + 1], pts[i]
            gens.append(Bij.from_dict(m))
        circ_members.append(LabelingCoset(PermGroup(inst.ground, gens), c.rep))
    child = make_instance(circ_members, inst.A - frozenset(astar), None)
    ledger.log_shape("linear-A", inst, child)
    joined = _cl_set_core(child, ledger)
    # pair each widened member with its original through CL_SetSet
    from .canon_struct import make_cosetmap_instance, cl_setset

    sorted_circ = _sorted_members(circ_members)
    orig_of = {}
    for c, o in zip(circ_members, inst.J):
        orig_of[internal_key(c)] = o
    J2 = sorted_circ
    L2 = [orig_of[internal_key(c)] for c in J2]
    if len({internal_key(c) for c in circ_members}) != len(circ_members):
        raise AssertionError("widened members collapsed unexpectedly")
    cm = make_cosetmap_instance(J2, L2, [(i, i) for i in range(len(J2))], joined.coset)
    res = cl_setset(cm)
    return _result_for(inst, res.coset)


def _johnson_transitive(inst, ledger) -> CanonResult:
    n = len(inst.ground)
    delta_can = inst.delta_can
    acan = sorted(inst.a_can)
    blocks = delta_can.minimal_block_system(acan)
    blocks_sorted = sorted(blocks, key=min)
    block_action, _ = delta_can.induced(
        blocks_sorted, lambda b, g: frozenset(g(x) for x in b), key_fn=lambda b: b
    )
    threshold = (3 + math.log2(n)) * math.log2(n)
    small = math.log2(block_action.order) < threshold - 1e-9
    if small:
        psi_can = _blockwise_stab_on_labels(delta_can, blocks_sorted, inst.ground)
        got = reduce_to_subgroup(inst, psi_can, ledger, shape="in-delta")
        if got[0] == "family":
            return recurse_on_partition(inst, got[1], ledger)
        return got[1]
    structure = _johnson_structure(block_action, blocks_sorted, n)
    if structure is not None:
        w_points, images = structure
        if len(w_points) >= giant_floor(n):
            giant = GiantRep(delta_can, images, w_points)
            if is_giant(giant.image_group()) != "neither":
                try:
                    child = make_instance(list(inst.J), inst.A, giant)
                except ValueError:
                    child = None
                if child is not None:
                    ledger.log_shape("in-g", inst, child)
                    return _result_for(inst, _cl_set_core(child, ledger).coset)
    # fallback: exact enumeration over the block kernel regardless of index
    psi_can = _blockwise_stab_on_labels(delta_can, blocks_sorted, inst.ground)
    got = reduce_to_subgroup(inst, psi_can, ledger, shape="in-delta")
    if got[0] == "family":
        return recurse_on_partition(inst, got[1], ledger)
    return got[1]


def _blockwise_stab_on_labels(delta_can, blocks_sorted, ground) -> PermGroup:
    color = {}
    blk_of = {}
    for bi, b in enumerate(blocks_sorted):
        for x in b:
            blk_of[x] = bi
    labels = delta_can.domain
    for x in labels:
        color[x] = blk_of.get(x, -1)
    return delta_can.color_stabilizer(color)


def _johnson_structure(block_action: PermGroup, blocks_sorted, d: int):
    """Detect a natural giant or s-subset Johnson action on the blocks and
    return (W points as block-index tuples?, generator images) or None.

    The W returned is a fresh point set 1..w with generator images of the
    shared ordered group acting through blocks onto W.
    """
    kind, cover = primitive_case(block_action, d=d)
    if kind != "cover":
        if is_giant(block_action) != "neither":
            # natural action: W = the blocks themselves
            w = len(block_action.domain)
            w_points = tuple(range(1, w + 1))
            images = [
                Bij(w_points, tuple(g(x) + 1 for x in sorted(block_action.domain)))
                for g in block_action.gens
            ]
            return w_points, images
        return None
    # cover of stars: W = the star parts
    stars = sorted(cover, key=lambda s: tuple(sorted(s)))
    star_index = {s: i for i, s in enumerate(stars)}
    if is_giant(block_action) != "neither" and all(len(s) == 1 for s in stars):
        w = len(block_action.domain)
        w_points = tuple(range(1, w + 1))
        images = [
            Bij(w_points, tuple(g(x) + 1 for x in sorted(block_action.domain)))
            for g in block_action.gens
        ]
        return w_points, images
    w_points = tuple(range(1, len(stars) + 1))
    images = []
    for g in block_action.gens:
        img = []
        for s in stars:
            s2 = frozenset(g(x) for x in s)
            j = star_index.get(s2)
            if j is None:
                return None
            img.append(j + 1)
        images.append(Bij(w_points, tuple(img)))
    act = PermGroup(w_points, images)
    if is_giant(act) == "neither":
        return None
    return w_points, images


def produce_certificates(inst: SetInstance, ledger: ProgressLedger):
    """Local-certificates pass for an instance with a giant representation.

    Returns ('result', CanonResult) or ('cert', FullnessCertificate).
    """
    giant = inst.giant
    if giant is None:
        raise ValueError("produce_certificates needs a representation")
    n = len(inst.ground)
    delta_can = inst.delta_can
    W = giant.w_points
    cT = 2 + math.ceil(math.log2(max(2, n)))
    T = tuple(W[:cT])
    img = giant.image_group()
    stabT = img.setwise_stabilizer(T)
    delta_T = giant.preimage_of_image_subgroup(stabT)
    g_T = giant.restricted_to_test_set(delta_T, T)
    if is_giant(g_T.image_group()) == "neither":
        raise AssertionError("test-window image lost giantness")
    # affected points: label whose stabilizer no longer maps onto a giant
    affected = set()
    for v in delta_can.domain:
        sub = delta_T.pointwise_stabilizer([v])
        if is_giant(g_T.image_of_subgroup(sub)) == "neither":
            affected.add(v)
    s_can = frozenset(affected)
    u_can = frozenset(delta_can.domain) - s_can
    acan = inst.a_can
    if not (acan & s_can):
        raise AssertionError("no ordered-A point is affected")
    psi_can = delta_can.setwise_stabilizer(s_can)
    reps = coset_transversal(delta_can, psi_can)
    hypers = []
    for c in inst.J:
        hs = set()
        for dl in reps:
            lam = c.rep.then(dl)
            inv = lam.inv()
            hs.add(frozenset(inv(x) for x in s_can))
        hypers.append(frozenset(hs))
    t = len(inst.J)
    parts = _partition_by_key(inst, lambda i: tuple(sorted(map(lambda s: tuple(sorted(s)), hypers[i]))))
    if not _is_trivial_partition(parts, t):
        return ("result", recurse_on_partition(inst, parts, ledger))
    if len(parts) == t and t > 1:
        return ("result", _certificates_all_distinct(inst, hypers, ledger))
    # common hypergraph of affected sets
    H = set(hypers[0])
    lam_reps = _affected_representatives(inst, H, s_can)
    jhat = {
        S: [_subcoset_from_rep(lam_reps[(i, S)], psi_can) for i in range(t)]
        for S in H
    }
    W_out = set(inst.ground) - inst.A
    fam = []
    for S in sorted(H, key=lambda s: tuple(sorted(s))):
        classes = _restriction_classes(jhat[S], W_out, psi_can)
        fam.append([frozenset(cls) for cls in classes])
    nontrivial = [P for P in fam if not _is_trivial_partition(P, t)]
    if nontrivial:
        return ("result", recurse_on_partition(inst, nontrivial, ledger))
    if any(all(len(cls) == 1 for cls in P) and len(P) > 1 for P in fam):
        return ("result", _object_base_case(inst))
    # local restrictions on S
    qfam = []
    per_S_local_distinct = []
    for S in sorted(H, key=lambda s: tuple(sorted(s))):
        classes = _local_restriction_classes(jhat[S], s_can, psi_can)
        qfam.append([frozenset(cls) for cls in classes])
        per_S_local_distinct.append(all(len(c) == 1 for c in classes))
    nontrivial = [P for P in qfam if not _is_trivial_partition(P, t)]
    if nontrivial:
        return ("result", recurse_on_partition(inst, nontrivial, ledger))
    H_sorted = sorted(H, key=lambda s: tuple(sorted(s)))
    if any(per_S_local_distinct[i] and t > 1 for i in range(len(H_sorted))):
        return (
            "result",
            _certificates_local_distinct(
                inst,
                [S for i, S in enumerate(H_sorted) if per_S_local_distinct[i]],
                jhat,
                s_can,
                psi_can,
                g_T,
                delta_T,
                ledger,
            ),
        )
    # all local restrictions coincide: assemble the fullness certificate
    delta_T_U = delta_T.pointwise_stabilizer(u_can)
    g_core = normal_closure(psi_can, delta_T_U)
    G_gens = []
    for S in H_sorted:
        lam = lam_reps[(0, S)]
        for g in g_core.gens:
            G_gens.append(lam.then(g).then(lam.inv()))
    G = PermGroup(inst.ground, G_gens)
    G_can = normal_closure(delta_can, delta_T_U)
    cert = FullnessCertificate(G, G_can)
    _validate_certificate(inst, cert)
    return ("cert", cert)


def _affected_representatives(inst, H, s_can):
    out = {}
    for i, c in enumerate(inst.J):
        for S in H:
            d = solve_set_images(inst.delta_can, [(c.rep.apply_set(S), s_can)])
            if d is None:
                raise AssertionError("affected set without a representative")
            out[(i, S)] = c.rep.then(d)
    return out


def _subcoset_from_rep(lam: Bij, psi_can: PermGroup) -> LabelingCoset:
    return LabelingCoset(psi_can.conjugate(lam.inv()), lam)


def _local_restriction_classes(subcosets, s_can, psi_can) -> list[list[int]]:
    """Classes by equality of the restriction of lam*Psi to the affected part."""
    classes: list[list[int]] = []
    reps: list[Bij] = []
    for i, c in enumerate(subcosets):
        lam = c.rep
        placed = False
        inv = lam.inv()
        src = sorted(inv(x) for x in s_can)
        for k, lam0 in enumerate(reps):
            inv0 = lam0.inv()
            src0 = sorted(inv0(x) for x in s_can)
            # equality of partial maps up to psi on the label side, matching
            # the affected vertex sets pointwise
            if frozenset(src) != frozenset(src0):
                continue
            pairs = [(lam(v), lam0(v)) for v in src]
            if solve_point_images(psi_can, pairs) is not None:
                classes[k].append(i)
                placed = True
                break
        if not placed:
            classes.append([i])
            reps.append(lam)
    return classes


def _certificates_all_distinct(inst, hypers, ledger) -> CanonResult:
    """All members carry distinct affected-set hypergraphs: identify edges by
    small subset pairs and finish through coset-labeled hypergraphs."""
    n = len(inst.ground)
    ground = inst.ground
    t = len(inst.J)
    if t <= 2:
        # any identifying pair hitting one member only splits J into
        # singletons, which is the direct-object case
        return _object_base_case(inst)
    c = math.ceil((2 + math.log2(n)) * math.log2(n))
    work = [set(h) for h in hypers]

    def identifies(k1, k2, S, Hset):
        if not (k1 <= S and k2 <= (set(ground) - S)):
            return False
        for S2 in Hset:
            if S2 == S:
                continue
            if k1 <= S2 and k2 <= (set(ground) - S2):
                return False
        return True

    import itertools as it

    while True:
        all_subsets = []
        for r in range(0, min(c, n) + 1):
            all_subsets.extend(map(frozenset, it.combinations(ground, r)))
        K = []
        for k1 in all_subsets:
            for k2 in all_subsets:
                K.append((k1, k2))
        covers = {}
        for k in K:
            cov = frozenset(
                i
                for i in range(t)
                if any(identifies(k[0], k[1], S, work[i]) for S in work[i])
            )
            covers[k] = cov
        fam = [
            [cov, frozenset(range(t)) - cov]
            for cov in set(covers.values())
            if 0 < len(cov) < t
            and not _is_trivial_partition([cov, frozenset(range(t)) - cov], t)
        ]
        if fam:
            return recurse_on_partition(inst, fam, ledger)
        K_full = [k for k, cov in covers.items() if len(cov) == t]
        if not K_full:
            raise AssertionError("no identifying pair covers every member")
        ek = {}
        q_results = {}
        for k in K_full:
            picked = {}
            for i in range(t):
                found = [S for S in work[i] if identifies(k[0], k[1], S, work[i])]
                if len(found) != 1:
                    picked = None
                    break
                picked[i] = found[0]
            if picked is None:
                continue
            ek[k] = picked
        qfam = []
        k_order = sorted(ek)
        for k in k_order:
            picked = ek[k]
            groups: dict = {}
            for i in range(t):
                groups.setdefault(tuple(sorted(picked[i])), []).append(i)
            qfam.append([frozenset(g) for g in groups.values()])
        nontrivial = [P for P in qfam if not _is_trivial_partition(P, t)]
        if nontrivial:
            return recurse_on_partition(inst, nontrivial, ledger)
        singleton_ks = [
            k for k, P in zip(k_order, qfam) if len(P) == 1
        ]
        if singleton_ks:
            shared = set()
            for k in singleton_ks:
                shared |= {ek[k][0]}
            changed = False
            for i in range(t):
                before = len(work[i])
                work[i] -= shared
                if len(work[i]) != before:
                    changed = True
                if not work[i]:
                    raise AssertionError("affected hypergraph emptied while looping")
            if len({tuple(sorted(map(lambda s: tuple(sorted(s)), w))) for w in work}) != t:
                raise AssertionError("hypergraphs collapsed while looping")
            if not changed:
                raise AssertionError("identifier loop made no progress")
            continue
        # all partitions into singletons
        results = []
        for k in k_order:
            picked = ek[k]
            edges = frozenset(picked[i] for i in range(t))
            H = Hypergraph(ground, edges)
            edges_sorted = sorted(H.edges, key=lambda e: tuple(sorted(e)))
            by_edge = {}
            for i in range(t):
                by_edge[picked[i]] = i
            alpha = [(j, by_edge[e]) for j, e in enumerate(edges_sorted)]
            res = cl_sethyper(H, list(inst.J), alpha)
            results.append(res.coset)
        return _argmin_join(inst, results)


def _certificates_local_distinct(
    inst, H_list, jhat, s_can, psi_can, g_T, delta_T, ledger
) -> CanonResult:
    """Pairwise-distinct local restrictions: reduce each affected set's
    subcosets to the orbit stabilizer of the test kernel and finish through
    CL_SetSet, keeping the minimal forms."""
    from .canon_struct import make_cosetmap_instance, cl_setset

    theta_can = g_T.kernel()
    results = []
    families = []
    ground = inst.ground
    for S in H_list:
        subs = jhat[S]
        # widen outside the affected part
        psi_star = _star_group(psi_can, s_can)
        subs_star = [
            LabelingCoset(psi_star.conjugate(c.rep.inv()), c.rep) for c in subs
        ]
        if len(_sorted_members(subs_star)) != len(subs_star):
            raise AssertionError("local widening collapsed subcosets")
        A_S = inst.A & S
        a_s_can = frozenset(x for x in inst.a_can if x in s_can)
        orbs = (
            theta_can.orbit_partition(sorted(a_s_can)) if a_s_can else []
        )
        theta_star = _blockwise_stab_on_labels(psi_star, sorted(orbs, key=min), ground)
        child = make_instance(subs_star, A_S, None)
        got = reduce_to_subgroup(child, theta_star, ledger, shape="in-delta")
        if got[0] == "family":
            induced = []
            key_of = {internal_key(c): i for i, c in enumerate(subs_star)}
            order_map = {}
            for i, c in enumerate(_sorted_members(subs_star)):
                order_map[i] = key_of[internal_key(c)]
            for P in got[1]:
                induced.append([frozenset(order_map[x] for x in part) for part in P])
            families.extend(induced)
            continue
        coset_S = got[1].coset
        J2 = _sorted_members(subs_star)
        pair_of = {}
        for star, plain in zip(subs_star, subs):
            pair_of[internal_key(star)] = plain
        L2 = [pair_of[internal_key(c)] for c in J2]
        cm = make_cosetmap_instance(
            J2, L2, [(i, i) for i in range(len(J2))], coset_S
        )
        results.append(cl_setset(cm).coset)
    if families:
        return recurse_on_partition(inst, families, ledger)
    return _argmin_join(inst, results)


def _star_group(psi_can: PermGroup, s_can: frozenset) -> PermGroup:
    """psi restricted to the affected labels, direct with Sym elsewhere."""
    dom = psi_can.domain
    gens = []
    for g in psi_can.gens:
        m = {v: (g(v) if v in s_can else v) for v in dom}
        gens.append(Bij.from_dict(m))
    outside = sorted(set(dom) - s_can)
    for i in range(len(outside) - 1):
        m = {v: v for v in dom}
        m[outside[i]], m[outside[i + 1]] = outside[i + 1], outside[i]
        gens.append(Bij.from_dict(m))
    return PermGroup(dom, gens)


@dataclass(frozen=True)
class FullnessCertificate:
    G: PermGroup  # over the unordered ground set
    G_can: PermGroup  # over the labels


def _validate_certificate(inst: SetInstance, cert: FullnessCertificate):
    keys = {internal_key(c) for c in inst.J}
    for g in cert.G.gens:
        for c in inst.J:
            if internal_key(apply_bijection(c, g)) not in keys:
                raise AssertionError("certificate group does not preserve J")
    for c in inst.J:
        conj = cert.G.conjugate(c.rep)
        if conj != cert.G_can:
            raise AssertionError("certificate ordered image depends on the member")
    if not cert.G_can.is_subgroup_of(inst.delta_can):
        raise AssertionError("certificate image outside the shared ordered group")
    if is_giant(inst.giant.image_of_subgroup(cert.G_can)) == "neither":
        raise AssertionError("certificate image is not a giant")


def extend_by_automorphisms(coset: LabelingCoset, G: PermGroup) -> LabelingCoset:
    """The labeling coset G * coset (Automorphism-Lemma extension)."""
    gens = list(G.gens) + list(coset.group.gens)
    grp = PermGroup(coset.ground, gens)
    if grp.order * intersect_groups(G, coset.group).order != G.order * coset.group.order:
        raise ValueError("extension is not a coset (closure check failed)")
    return LabelingCoset(grp, coset.rep)


def aggregate_certificates(
    inst: SetInstance, cert: FullnessCertificate, ledger: ProgressLedger
) -> CanonResult:
    """Turn a fullness certificate into progress (Lemma-32 style)."""
    giant = inst.giant
    delta_can = inst.delta_can
    ground = inst.ground
    n = len(ground)
    t = len(inst.J)
    pi_can = giant.kernel()
    W = giant.w_points
    M = _pair_stab_image(giant)
    psi_can = giant.preimage_of_image_subgroup(M)
    outside = sorted(set(ground) - inst.A)
    out_labels = sorted(inst.J[0].rep.apply_set(outside))
    idx_pi = _restricted_index(delta_can, pi_can, out_labels)
    if idx_pi > 2:
        lam1 = inst.J[0].min_rep()
        jhat0 = []
        for c in inst.J:
            x = _element_matching_restriction(c, lam1, delta_can, out_labels)
            jhat0.append(_subcoset_from_rep(x, psi_can))
        child = make_instance(jhat0, inst.A, None)
        ledger.log_shape("in-delta", inst, child)
        lam_hat = _cl_set_core(child, ledger).coset
        return _result_for(inst, extend_by_automorphisms(lam_hat, cert.G))
    # kernel orbits on A per member
    blocks_can = sorted(pi_can.orbit_partition(sorted(inst.a_can)), key=min)
    b_members = []
    for c in inst.J:
        inv = c.rep.inv()
        b_members.append(
            frozenset(frozenset(inv(x) for x in b) for b in blocks_can)
        )
    parts = _partition_by_key(
        inst, lambda i: tuple(sorted(tuple(sorted(b)) for b in b_members[i]))
    )
    if not _is_trivial_partition(parts, t):
        return recurse_on_partition(inst, parts, ledger)
    if len(parts) == t and t > 1:
        A_sorted = sorted(inst.A)
        fam = []
        for v in A_sorted:
            for w in A_sorted:
                cov = frozenset(
                    i
                    for i in range(t)
                    if any({v, w} <= b for b in b_members[i])
                )
                P = [cov, frozenset(range(t)) - cov]
                if 0 < len(cov) < t and not _is_trivial_partition(P, t):
                    fam.append(P)
        if not fam:
            return _aggregate_individualize(inst, cert, psi_can, pi_can, ledger)
        return recurse_on_partition(inst, fam, ledger)
    blocks_v = sorted(b_members[0], key=min)
    q_classes = _block_restriction_classes(list(inst.J), blocks_v, delta_can)
    if not _is_trivial_partition(q_classes, t):
        return recurse_on_partition(inst, q_classes, ledger)
    if len(q_classes) == t and t > 1:
        return _aggregate_individualize(inst, cert, psi_can, pi_can, ledger)
    # all members induce the same coset on the blocks
    lam1 = inst.J[0].min_rep()
    jhat0 = []
    for c in inst.J:
        x = _element_matching_blocks(c, lam1, delta_can, blocks_v)
        jhat0.append(_subcoset_from_rep(x, psi_can))
    rest_classes = _restriction_classes(jhat0, set(ground) - inst.A, psi_can)
    if len(rest_classes) == 1:
        child = make_instance(jhat0, inst.A, None)
        ledger.log_shape("in-delta", inst, child)
        lam_hat = _cl_set_core(child, ledger).coset
        return _result_for(inst, extend_by_automorphisms(lam_hat, cert.G))
    if len(rest_classes) != 2:
        raise AssertionError("restriction split of the chosen class is not binary")
    tagged = []
    for cls in rest_classes:
        sub_members = [jhat0[i] for i in cls]
        child = make_instance(sub_members, inst.A, None)
        ledger.log_shape("in-delta", inst, child)
        res = _cl_set_core(child, ledger)
        form = ordered_encoding(SetOf(sub_members), res.coset.rep)
        tagged.append(Tup([res.coset, Lit(form)]))
    out = cl_object(SetOf(tagged), ground)
    return _result_for(inst, extend_by_automorphisms(out.coset, cert.G))


def _aggregate_individualize(inst, cert, psi_can, pi_can, ledger) -> CanonResult:
    """Individualize one member and one kernel-coset, order the rest strictly
    and finish without further recursion."""
    t = len(inst.J)
    outcomes = []
    psi_reps = coset_transversal(psi_can, pi_can)
    for i in range(t):
        lam0 = inst.J[i].min_rep()
        branch = []
        for k, psik in enumerate(psi_reps):
            gamma = _subcoset_from_rep(lam0.then(psik), pi_can)
            pair_results = []
            for j in range(t):
                res = cl_int(gamma, inst.J[j])
                form = ordered_encoding(Tup([gamma, inst.J[j]]), res.rep)
                pair_results.append((form, j, res))
            pair_results.sort(key=lambda x: x[0])
            forms = [f for f, _, _ in pair_results]
            if len(set(forms)) != t:
                raise AssertionError("individualized ordering is not strict")
            ordered = [inst.J[j] for _, j, _ in pair_results]
            acc = ordered[0]
            for c in ordered[1:]:
                acc = cl_int(acc, c).coset
            branch.append(acc)
        if len(branch) == 2:
            f1 = ordered_encoding(inst.as_object(), branch[0].rep)
            f2 = ordered_encoding(inst.as_object(), branch[1].rep)
            if f1 == f2:
                merged = join_cosets(branch)
            else:
                merged = branch[0] if f1 < f2 else branch[1]
        else:
            merged = branch[0]
        outcomes.append(extend_by_automorphisms(merged, cert.G))
    return _argmin_join(inst, outcomes)


def _pair_stab_image(giant: GiantRep) -> PermGroup:
    """Pointwise stabilizer of all image points beyond the first two."""
    W = giant.w_points
    img = giant.image_group()
    return img.pointwise_stabilizer(list(W[2:]))


def _restricted_index(delta_can, pi_can, out_labels) -> int:
    """Index of the kernel's restriction inside the group's restriction on
    the labels outside A."""
    if not out_labels:
        return 1
    comb_d = delta_can
    # index of restrictions = |delta[out]| / |pi[out]|; compute via orbits of
    # the restriction kernel: |G[out]| = |G| / |G_(out pointwise)|
    d_out = comb_d.order // comb_d.pointwise_stabilizer(out_labels).order
    p_out = pi_can.order // pi_can.pointwise_stabilizer(out_labels).order
    return d_out // p_out


def _element_matching_restriction(c: LabelingCoset, lam1: Bij, delta_can, out_labels):
    """x in the member with x agreeing with lam1 outside A (on those labels)."""
    pairs = []
    inv1 = lam1.inv()
    for lbl in out_labels:
        pairs.append((c.rep(inv1(lbl)), lbl))
    d = solve_point_images(delta_can, pairs)
    if d is None:
        raise AssertionError("property (A) failed to supply a matching element")
    return c.rep.then(d)


def _element_matching_blocks(c: LabelingCoset, lam1: Bij, delta_can, blocks_v):
    pairs = []
    for b in blocks_v:
        src = frozenset(c.rep(v) for v in b)
        tgt = frozenset(lam1(v) for v in b)
        pairs.append((src, tgt))
    d = solve_set_images(delta_can, pairs)
    if d is None:
        raise AssertionError("block-matching element missing")
    return c.rep.then(d)


# ---------------------------------------------------------------------------
# the main algorithm
# ---------------------------------------------------------------------------


def _cl_set_core(inst: SetInstance, ledger: ProgressLedger) -> CanonResult:
    ledger.tick(inst)
    if inst.giant is None:
        return reduce_to_johnson(inst, ledger)
    got = produce_certificates(inst, ledger)
    if got[0] == "cert":
        return aggregate_certificates(inst, got[1], ledger)
    return got[1]


def dump_instance(inst: SetInstance) -> str:
    """Debug/replay dump: ground set, member blocks, A, ordered group and
    the optional giant table."""
    from .perms import cycle_string

    lines = ["ground " + " ".join(map(str, inst.ground))]
    lines.append("A " + " ".join(map(str, sorted(inst.A))))
    for c in inst.J:
        lines.append("coset")
        for g in c.group.gens:
            lines.append("  gen " + cycle_string(g))
        lines.append("  rep " + " ".join(f"{v}->{c.rep(v)}" for v in c.ground))
    lines.append("canonical")
    for g in inst.delta_can.gens:
        lines.append("  gen " + cycle_string(g))
    if inst.giant is not None:
        d = inst.giant.dump()
        lines.append("giant w " + " ".join(map(str, d["w"])))
        for gi, im in zip(d["gens"], d["images"]):
            lines.append("  pair " + ",".join(map(str, gi)) + " / " + ",".join(map(str, im)))
    return "\n".join(lines) + "\n"


def load_instance(text: str) -> SetInstance:
    from .perms import parse_cycles

    lines = [ln.rstrip() for ln in text.splitlines() if ln.strip()]
    ground = tuple(int(x) for x in lines[0].split()[1:])
    A = frozenset(int(x) for x in lines[1].split()[1:])
    i = 2
    members = []
    giant = None
    labels = tuple(range(1, len(ground) + 1))
    can_gens = []
    while i < len(lines):
        ln = lines[i]
        if ln == "coset":
            i += 1
            gens = []
            rep = None
            while i < len(lines) and lines[i].startswith("  "):
                body = lines[i].strip()
                if body.startswith("gen "):
                    gens.append(parse_cycles(body[4:], ground))
                elif body.startswith("rep "):
                    mapping = {}
                    for part in body[4:].split():
                        v, w = part.split("->")
                        mapping[int(v)] = int(w)
                    rep = Bij.from_dict(mapping)
                i += 1
            members.append(LabelingCoset(PermGroup(ground, gens), rep))
        elif ln == "canonical":
            i += 1
            while i < len(lines) and lines[i].startswith("  "):
                can_gens.append(parse_cycles(lines[i].strip()[4:], labels))
                i += 1
        elif ln.startswith("giant w "):
            w_points = tuple(int(x) for x in ln.split()[2:])
            i += 1
            dom_gens = []
            img_gens = []
            while i < len(lines) and lines[i].strip().startswith("pair "):
                body = lines[i].strip()[5:]
                left, right = body.split(" / ")
                dom_gens.append(Bij(labels, tuple(int(x) for x in left.split(","))))
                img_gens.append(Bij(w_points, tuple(int(x) for x in right.split(","))))
                i += 1
            giant = GiantRep(PermGroup(labels, dom_gens), img_gens, w_points)
        else:
            i += 1
    return make_instance(members, A, giant)


def cl_set(J, ledger: ProgressLedger | None = None) -> CanonResult:
    """Canonical labeling of a set of labeling cosets (the main machine).

    Enforces the shared-ordered-group property by an ordered split, runs the
    recursion per class and combines classes by canonical intersection.  The
    per-class ledger is checked against the progress bound.
    """
    members = _sorted_members(J)
    if not members:
        raise ValueError("empty member set")
    ground = members[0].ground
    for c in members:
        if c.ground != ground:
            raise ValueError("mixed ground sets")
    by_class: dict = {}
    for c in members:
        grp = c.conjugated_group()
        key = (grp.order, tuple(g.img for g in grp.canonical_gens()))
        by_class.setdefault(key, []).append(c)
    class_results = []
    for key in sorted(by_class):
        cls = by_class[key]
        inst = make_instance(cls, frozenset(ground), None)
        led = ledger if ledger is not None else ProgressLedger()
        res = _cl_set_core(inst, led)
        led.check_root_bound(inst)
        class_results.append(res.coset)
    acc = class_results[0]
    for c in class_results[1:]:
        acc = cl_int(acc, c).coset
    obj = SetOf(members)
    return CanonResult(acc, ordered_encoding(obj, acc.rep))
