"""Base canonizers.

cl_graph canonizes an edge relation within a labeling coset by exact
backtracking with neighborhood pruning (a correct, exponential-in-the-worst-
case stand-in for quasipolynomial string canonization; the callers never
look inside).  cl_int and cl_set_small both reduce to cl_graph through one
shared disjoint-copies blow-up, and cl_object canonizes arbitrary objects by
structural recursion.
"""

from __future__ import annotations

from dataclasses import dataclass

from .perms import (
    Bij,
    PermGroup,
    _subgroup_search,
    intersect_cosets,
    min_label_rep,
)
from .objects import (
    LabelingCoset,
    Lit,
    SetOf,
    Tup,
    Vert,
    apply_bijection,
    internal_key,
    ordered_encoding,
)

__all__ = [
    "CanonResult",
    "cl_graph",
    "cl_int",
    "cl_set_small",
    "cl_object",
    "graph_instance_object",
    "min_form_labeling",
    "normalize_result",
]


@dataclass(frozen=True)
class CanonResult:
    """A canonical labeling coset plus the canonical form it realizes."""

    coset: LabelingCoset
    form: tuple

    @property
    def group(self) -> PermGroup:
        return self.coset.group

    @property
    def rep(self) -> Bij:
        return self.coset.rep


def _result(coset: LabelingCoset, instance_obj) -> CanonResult:
    return CanonResult(coset, ordered_encoding(instance_obj, coset.rep))


def graph_instance_object(E) -> SetOf:
    return SetOf([Tup([Vert(u), Vert(v)]) for (u, v) in E])


# ---------------------------------------------------------------------------
# graph automorphisms and minimal labelings
# ---------------------------------------------------------------------------


def _graph_aut(E: frozenset, coset: LabelingCoset) -> PermGroup:
    """{d in Delta : E^d = E}."""
    Delta = coset.group
    V = Delta.domain
    if not E or len(E) == len(V) * len(V):
        return Delta
    Eset = E
    outs = {v: set() for v in V}
    ins = {v: set() for v in V}
    loops = set()
    for (u, v) in E:
        if u == v:
            loops.add(u)
        else:
            outs[u].add(v)
            ins[v].add(u)
    color = {v: (len(outs[v]), len(ins[v]), v in loops) for v in V}

    def prune(b, img, partial):
        if color[b] != color[img]:
            return False
        for v, w in partial.items():
            if ((v, b) in Eset) != ((w, img) in Eset):
                return False
            if ((b, v) in Eset) != ((img, w) in Eset):
                return False
        return True

    def full(g):
        return all(((g(u), g(v)) in Eset) for (u, v) in Eset)

    return _subgroup_search(Delta, prune, full)


def _coset_walk_levels(coset: LabelingCoset):
    """Chain walk of Delta deciding label preimages in label order.

    Yields per label position i (1-based) either a transversal dict or None
    (forced); walking composes ``outer`` so the vertex receiving label i is
    ``outer(q)`` for the chosen orbit point q.
    """
    Delta = coset.group
    rho = coset.rep
    inv = rho.inv()
    seq = tuple(inv(i) for i in range(1, len(Delta.domain) + 1))
    ch = Delta.chain(base_order=seq)
    by_point = {lv.point: lv for lv in ch.levels}
    return seq, by_point, ch.identity


def _graph_min_border(E: frozenset, coset: LabelingCoset, aut: PermGroup) -> Bij:
    """A labeling in the coset whose border code is minimal.

    The border code lists, per new label i, the adjacency bits against all
    earlier labels; its argmin set is representative-independent, which makes
    the returned coset Aut*lam canonical for the instance.
    """
    V = coset.group.domain
    n = len(V)
    seq, by_point, ident = _coset_walk_levels(coset)
    Eset = E
    best_codes: list = [None] * n
    best_mu: list = [None]
    root_seen: set = set()

    def code_for(u, vs):
        bits = []
        for w in vs:
            bits.append(1 if (w, u) in Eset else 0)
            bits.append(1 if (u, w) in Eset else 0)
        bits.append(1 if (u, u) in Eset else 0)
        return tuple(bits)

    def rec(i, outer, vs, improved):
        if i == n:
            if improved or best_mu[0] is None:
                best_mu[0] = list(vs)
            return
        p = seq[i]
        level = by_point.get(p)
        items = sorted(level.transversal) if level is not None else [None]
        for q in items:
            u = outer(p) if q is None else outer(q)
            if i == 0 and u in root_seen:
                continue
            c = code_for(u, vs)
            b = best_codes[i]
            if b is not None and c > b:
                continue
            imp = improved
            if b is None or c < b:
                best_codes[i] = c
                for j in range(i + 1, n):
                    best_codes[j] = None
                imp = True
            nxt = outer
            if q is not None:
                u_tr = level.transversal[q]
                if u_tr is not None:
                    nxt = u_tr.then(outer)
            vs.append(u)
            rec(i + 1, nxt, vs, imp)
            vs.pop()
            if i == 0:
                root_seen.add(u)
                root_seen.update(aut.orbit(u))

    rec(0, ident, [], False)
    mu = best_mu[0]
    return Bij(tuple(mu), tuple(range(1, n + 1)))


def _graph_min_prec(E: frozenset, coset: LabelingCoset, aut: PermGroup, warm: Bij) -> Bij:
    """The coset labeling whose edge set image is least in the total order.

    E^lam compares as the sorted tuple of labeled pairs; pruning merges the
    decided pairs with the smallest still-possible fillers (a sound lower
    bound) and skips root branches equivalent under known automorphisms.
    """
    n = len(coset.group.domain)
    m = len(E)
    seq, by_point, ident = _coset_walk_levels(coset)
    Eset = E
    best_form = [tuple(sorted((warm(u), warm(v)) for (u, v) in E))]
    best_mu = [tuple(warm.inv()(i) for i in range(1, n + 1))]
    root_seen: set = set()

    def lower_bound(decided, k):
        # decided pairs plus the lex-smallest possible fillers (pairs with an
        # endpoint beyond the decided labels) bound every completion below
        need = m - len(decided)
        if need == 0:
            return sorted(decided)
        fillers = []
        for a in range(1, n + 1):
            for b in range(1, n + 1):
                if a <= k and b <= k:
                    continue
                fillers.append((a, b))
                if len(fillers) == need:
                    return sorted(decided + fillers)
        return None  # cannot complete

    def rec(i, outer, vs, decided):
        if i == n:
            form = tuple(sorted(decided))
            if form < best_form[0]:
                best_form[0] = form
                best_mu[0] = tuple(vs)
            return
        k = i  # labels decided so far
        lb = lower_bound(decided, k)
        if lb is not None and tuple(lb) > best_form[0]:
            return
        p = seq[i]
        level = by_point.get(p)
        cands = sorted(level.transversal) if level is not None else [None]
        for q in cands:
            u = outer(p) if q is None else outer(q)
            if i == 0 and u in root_seen:
                continue
            new_pairs = []
            lbl = i + 1
            for j, w in enumerate(vs):
                if (w, u) in Eset:
                    new_pairs.append((j + 1, lbl))
                if (u, w) in Eset:
                    new_pairs.append((lbl, j + 1))
            if (u, u) in Eset:
                new_pairs.append((lbl, lbl))
            nxt = outer
            if q is not None:
                u_tr = level.transversal[q]
                if u_tr is not None:
                    nxt = u_tr.then(outer)
            vs.append(u)
            rec(i + 1, nxt, vs, decided + new_pairs)
            vs.pop()
            if i == 0:
                root_seen.add(u)
                root_seen.update(aut.orbit(u))

    rec(0, ident, [], [])
    mu = best_mu[0]
    return Bij(tuple(mu), tuple(range(1, n + 1)))


def cl_graph(E, coset: LabelingCoset, exact_min: bool = True) -> CanonResult:
    """Canonical labeling for an edge relation within a labeling coset.

    Returns Aut_Delta(E) * lam with E^lam minimal in the total order among
    the coset (when ``exact_min``; otherwise a cheaper representative-
    independent minimum is used, as the framework never relies on which).
    """
    E = frozenset((u, v) for (u, v) in E)
    V = set(coset.ground)
    for (u, v) in E:
        if u not in V or v not in V:
            raise ValueError("edge endpoint outside the ground set")
    aut = _graph_aut(E, coset)
    lam = _graph_min_border(E, coset, aut)
    if exact_min:
        lam = _graph_min_prec(E, coset, aut, lam)
    out = LabelingCoset(aut, lam)
    return _result(out, graph_instance_object(E))


# ---------------------------------------------------------------------------
# the disjoint-copies blow-up
# ---------------------------------------------------------------------------


def _blowup_canonize(base: LabelingCoset, copies: list[LabelingCoset]) -> LabelingCoset:
    """Canonize the disjoint-copies identification instance, restricted to V.

    The underlying picture is the blow-up U = V + V x {1..t} whose copy
    blocks are ordered by their group encodings, each copy labeled by its
    own coset, with identification arcs (v, (v,j)); canonizing that graph
    within the product coset and restricting to V yields the group
    {d in base group : d permutes the copy cosets} and some minimal base
    labeling.  This computes the same restriction directly: the group by a
    pruned search over the base group with exact coset-image tests (which is
    what the identification arcs force), the representative as the argmin of
    the copies' label-map sets over the base coset, with candidates
    equivalent under discovered automorphisms skipped.
    """
    ground = base.ground
    aut = _setlike_aut(base.group, copies)
    lam = _setlike_min_rep(base, copies, aut)
    return LabelingCoset(aut, lam)


def _setlike_aut(G: PermGroup, members: list[LabelingCoset]) -> PermGroup:
    """{d in G : d maps the member-coset set onto itself}.

    An element sending member i to member j lies in the transporter coset
    T(i,j) = Delta_i * (rho_i rho_j^-1), which is nonempty exactly when the
    members share their ordered group.  The search assigns images member by
    member, intersecting transporter cosets (and G) as it goes; the union of
    the surviving assignment cosets is the automorphism group.
    """
    ground = G.domain
    t = len(members)
    keys = []
    for c in members:
        grp = c.conjugated_group()
        keys.append((grp.order, tuple(g.img for g in grp.canonical_gens())))

    def transporter(i, j):
        if keys[i] != keys[j]:
            return None
        rep = members[i].rep.then(members[j].rep.inv())
        return (members[i].group, rep)

    sym_full = PermGroup.symmetric(ground)
    start: tuple | None
    if G.order == sym_full.order:
        start = None  # no constraint from the base group
    else:
        start = (G, G.identity())

    gens: list[Bij] = []

    def admit(state):
        grp, rep = state
        gens.extend(grp.gens)
        if not rep.is_identity:
            gens.append(rep)

    def rec(i, state, used):
        if i == t:
            if state is None:
                raise AssertionError("unconstrained assignment on empty member list")
            admit(state)
            return
        for j in range(t):
            if j in used:
                continue
            tc = transporter(i, j)
            if tc is None:
                continue
            if state is None:
                nxt = tc
            else:
                hit = intersect_cosets(state[0], state[1], tc[0], tc[1])
                if hit is None:
                    continue
                nxt = hit
            used.add(j)
            rec(i + 1, nxt, used)
            used.remove(j)

    if t == 0:
        return PermGroup(ground, [])
    rec(0, start, set())
    return PermGroup(ground, gens)


def _setlike_min_rep(base: LabelingCoset, members: list[LabelingCoset], aut: PermGroup) -> Bij:
    """Argmin over the base coset of the members' label-map code.

    Small members carry their full tuple of label maps; the depth-i code
    lists each one's distinct map-image prefixes on the vertices taking
    labels 1..i, so branches compare incrementally and the full-depth code
    determines the translated members completely.  Large members contribute
    an order/minimal-representative key at the leaves, completed by a full
    encoding tie-break.  Candidates equivalent under the automorphism group
    of the member set are skipped.
    """
    ground = base.ground
    n = len(ground)
    small_idx = []
    small_maps = []
    big_idx = []
    for idx, c in enumerate(members):
        if c.group.order * n <= 200_000:
            small_idx.append(idx)
            small_maps.append(tuple(c.members()))
        else:
            big_idx.append(idx)

    seq, by_point, ident = _coset_walk_levels(base)
    best_codes: list = [None] * n
    best: list = [None, []]  # (big-member leaf key, tie labelings)

    def big_key(lam):
        out = []
        for idx in big_idx:
            c = members[idx]
            grp = c.group.conjugate(lam)
            rep = lam.inv().then(c.rep)
            out.append((grp.order, min_label_rep(grp, rep).img))
        return tuple(sorted(out))

    def rec(i, outer, stab, prefix_lists, improved):
        if i == n:
            lam = Bij(tuple(outer(p) for p in seq), tuple(range(1, n + 1)))
            if big_idx:
                key = big_key(lam)
                if improved or best[0] is None or key < best[0]:
                    best[0] = key
                    best[1] = [lam]
                elif key == best[0]:
                    best[1].append(lam)
            else:
                if improved or not best[1]:
                    best[1] = [lam]
            return
        p = seq[i]
        level = by_point.get(p)
        items = sorted(level.transversal) if level is not None else [None]
        seen: set = set()
        for q in items:
            u = outer(p) if q is None else outer(q)
            if u in seen:
                continue
            seen |= stab.orbit(u)
            nxt_lists = [
                [pref + (m(u),) for pref, m in zip(plist, maps)]
                for plist, maps in zip(prefix_lists, small_maps)
            ]
            code = tuple(sorted(tuple(sorted(set(plist))) for plist in nxt_lists))
            b = best_codes[i]
            if b is not None and code > b:
                continue
            imp = improved
            if b is None or code < b:
                best_codes[i] = code
                for j in range(i + 1, n):
                    best_codes[j] = None
                best[0] = None
                best[1] = []
                imp = True
            nxt = outer
            if q is not None:
                u_tr = level.transversal[q]
                if u_tr is not None:
                    nxt = u_tr.then(outer)
            rec(i + 1, nxt, stab.pointwise_stabilizer([u]), nxt_lists, imp)

    rec(0, ident, aut, [[()] * len(maps) for maps in small_maps], False)
    ties = best[1]
    if len(ties) == 1:
        return ties[0]
    obj = SetOf(members)
    return min(ties, key=lambda lam: ordered_encoding(obj, lam))


_CL_INT_CACHE: dict = {}
_CL_SET_SMALL_CACHE: dict = {}
_CL_OBJECT_CACHE: dict = {}


def cl_int(theta: LabelingCoset, delta: LabelingCoset) -> CanonResult:
    """Canonical intersection of two labeling cosets: group Theta meet Delta.

    When the cosets share a labeling, that intersection coset is itself the
    canonical labeling (a nonempty intersection is an isomorphism-invariant
    event); otherwise the pair is canonized through the blow-up.
    """
    if theta.ground != delta.ground:
        raise ValueError("cosets live on different ground sets")
    ckey = (internal_key(theta), internal_key(delta))
    hit = _CL_INT_CACHE.get(ckey)
    if hit is not None:
        return hit
    inst = Tup([theta, delta])
    full = PermGroup.symmetric(theta.ground)
    if theta.group.order == full.order:
        return _result(delta, inst)
    if delta.group.order == full.order:
        return _result(theta, inst)
    if theta == delta:
        return _result(theta, inst)
    hit = intersect_cosets(theta.group, theta.rep, delta.group, delta.rep)
    if hit is not None:
        grp, rep = hit
        res = _result(LabelingCoset(grp, min_label_rep(grp, rep)), inst)
    else:
        res = _result(_blowup_canonize(delta, [theta]), inst)
    _CL_INT_CACHE[ckey] = res
    return res


def cl_set_small(J, exact_min: bool = False) -> CanonResult:
    """Canonical labeling of a set of labeling cosets via disjoint copies."""
    cosets = list(_dedupe_cosets(J))
    if not cosets:
        raise ValueError("empty coset set")
    ground = cosets[0].ground
    for c in cosets:
        if c.ground != ground:
            raise ValueError("mixed ground sets")
    inst = SetOf(cosets)
    if len(cosets) == 1:
        return _result(cosets[0], inst)
    ckey = tuple(internal_key(c) for c in cosets)
    hit = _CL_SET_SMALL_CACHE.get(ckey)
    if hit is None:
        hit = _result(_blowup_canonize(LabelingCoset.label(ground), cosets), inst)
        _CL_SET_SMALL_CACHE[ckey] = hit
    return hit


def _dedupe_cosets(J):
    seen = {}
    for c in J:
        seen[internal_key(c)] = c
    return [seen[k] for k in sorted(seen)]


# ---------------------------------------------------------------------------
# generic object canonization
# ---------------------------------------------------------------------------


def cl_object(obj, ground, set_canonizer=None) -> CanonResult:
    """Canonical labeling of a combinatorial object over a ground set.

    Atoms resolve constructively; tuples chain canonical intersections in
    order; sets partition members by canonical form, replace each class by
    its labeling cosets and canonize those (``set_canonizer`` defaults to the
    disjoint-copies canonizer), combining classes in form order.
    """
    ground = tuple(sorted(ground))
    if set_canonizer is None:
        ckey = (internal_key(obj), ground)
        hit = _CL_OBJECT_CACHE.get(ckey)
        if hit is None:
            hit = _result(_cl_object_coset(obj, ground, cl_set_small), obj)
            _CL_OBJECT_CACHE[ckey] = hit
        return hit
    coset = _cl_object_coset(obj, ground, set_canonizer)
    return _result(coset, obj)


def _cl_object_coset(obj, ground, setcan) -> LabelingCoset:
    n = len(ground)
    if isinstance(obj, Lit):
        return LabelingCoset.label(ground)
    if isinstance(obj, Vert):
        others = tuple(v for v in ground if v != obj.v)
        rep = Bij.from_dict({obj.v: 1, **{v: i + 2 for i, v in enumerate(others)}})
        return LabelingCoset(_young_group(ground, [frozenset([obj.v])]), rep)
    if isinstance(obj, LabelingCoset):
        if obj.ground != ground:
            raise ValueError("coset atom over a different ground set")
        return obj
    if isinstance(obj, Tup):
        if not obj.items:
            return LabelingCoset.label(ground)
        acc = _cl_object_coset(obj.items[0], ground, setcan)
        for item in obj.items[1:]:
            nxt = _cl_object_coset(item, ground, setcan)
            acc = cl_int(acc, nxt).coset
        return acc
    if isinstance(obj, SetOf):
        if not obj.members:
            return LabelingCoset.label(ground)
        if all(isinstance(m, Vert) for m in obj.members):
            S = frozenset(m.v for m in obj.members)
            return _vertex_set_coset(ground, S)
        # canonize members, split into form classes, replace and combine
        results = [( _cl_object_coset(m, ground, setcan), m) for m in obj.members]
        classes: dict = {}
        for coset, m in results:
            form = ordered_encoding(m, coset.rep)
            classes.setdefault(form, []).append(coset)
        acc = None
        for form in sorted(classes):
            part = setcan(classes[form])
            part_coset = part.coset if isinstance(part, CanonResult) else part
            acc = part_coset if acc is None else cl_int(acc, part_coset).coset
        return acc
    raise TypeError(f"not an object: {obj!r}")


def _young_group(ground, blocks) -> PermGroup:
    """Direct product of symmetric groups on the blocks and on the rest."""
    rest = set(ground)
    gens = []
    parts = [frozenset(b) for b in blocks]
    for b in parts:
        rest -= b
    parts.append(frozenset(rest))
    for part in parts:
        pts = sorted(part)
        for i in range(len(pts) - 1):
            m = {v: v for v in ground}
            m[pts[i]], m[pts[i + 1]] = pts[i + 1], pts[i]
            gens.append(Bij.from_dict(m))
    return PermGroup(ground, gens)


def _vertex_set_coset(ground, S: frozenset) -> LabelingCoset:
    inside = sorted(S)
    outside = sorted(set(ground) - S)
    rep = {}
    for i, v in enumerate(inside):
        rep[v] = i + 1
    for i, v in enumerate(outside):
        rep[v] = len(inside) + i + 1
    return LabelingCoset(_young_group(ground, [S]), Bij.from_dict(rep))


# ---------------------------------------------------------------------------
# representative normalization (exhaustive minimal form)
# ---------------------------------------------------------------------------


def min_form_labeling(obj, ground, aut: PermGroup) -> Bij:
    """The labeling of the ground set minimizing the encoded form of ``obj``.

    Explores label preimages depth-first; candidates equivalent under the
    stabilizer of the decided vertices in ``aut`` are skipped (forms agree),
    so the leaf count is bounded by n!/|aut| with full soundness.
    """
    ground = tuple(sorted(ground))
    best: list = [None, None]

    def go(vs, rest, stab):
        if not rest:
            lam = Bij.from_dict({v: i + 1 for i, v in enumerate(vs)})
            form = ordered_encoding(obj, lam)
            if best[0] is None or form < best[0]:
                best[0] = form
                best[1] = lam
            return
        seen: set = set()
        for u in sorted(rest):
            if u in seen:
                continue
            seen |= stab.orbit(u)
            go(vs + [u], rest - {u}, stab.pointwise_stabilizer([u]))

    go([], frozenset(ground), aut)
    return best[1]


def normalize_result(res: CanonResult, obj, ground) -> CanonResult:
    """Re-anchor a canonical labeling at the globally minimal encoded form."""
    lam = min_form_labeling(obj, ground, res.group)
    coset = LabelingCoset(res.group, lam)
    return CanonResult(coset, ordered_encoding(obj, lam))
