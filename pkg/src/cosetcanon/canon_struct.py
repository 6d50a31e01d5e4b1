"""Structured canonizers: k-ary relations, hypergraphs, coset-to-coset maps
and coset-labeled hypergraphs.

Relations recurse through the partitioning technique (split at the first
differing position), hypergraphs through the covering technique (vertex
incidence covers, complemented to sparseness).  Coset-map instances combine
orbit splitting, minimal block systems and a guarded primitive-group case
analysis: small order, a recognized natural Johnson action yielding a sparse
invariant cover, or an exact enumeration fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .perms import (
    Bij,
    PermGroup,
    coset_transversal,
    is_giant,
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
from .canon_base import (
    CanonResult,
    cl_int,
    cl_object,
    cl_set_small,
    _vertex_set_coset,
)

__all__ = [
    "Relation",
    "Hypergraph",
    "CosetMapInstance",
    "RecursionCounter",
    "cl_rel",
    "cl_hyper",
    "primitive_case",
    "cl_setset",
    "cl_sethyper",
    "rel_bound",
    "hyper_bound",
]


@dataclass(frozen=True)
class Relation:
    ground: tuple
    arity: int
    tuples: frozenset

    def __post_init__(self):
        for t in self.tuples:
            if len(t) != self.arity:
                raise ValueError("tuple arity mismatch")
            if any(v not in set(self.ground) for v in t):
                raise ValueError("tuple entry outside ground set")

    def as_object(self) -> SetOf:
        return SetOf([Tup([Vert(v) for v in t]) for t in self.tuples])


@dataclass(frozen=True)
class Hypergraph:
    ground: tuple
    edges: frozenset  # of frozensets

    def __post_init__(self):
        for e in self.edges:
            if not e <= set(self.ground):
                raise ValueError("edge outside ground set")

    def as_object(self) -> SetOf:
        return SetOf([SetOf([Vert(v) for v in e]) for e in self.edges])


@dataclass
class RecursionCounter:
    calls: int = 0

    def tick(self):
        self.calls += 1


def rel_bound(R: Relation) -> int:
    return max(1, len(R.tuples)) ** 2


def hyper_bound(H: Hypergraph) -> float:
    m = max(1, len(H.edges))
    n = max(2, len(H.ground))
    return m ** (2 * math.log2(n))


# ---------------------------------------------------------------------------
# k-ary relations: the partitioning technique
# ---------------------------------------------------------------------------


def cl_rel(R: Relation, counter: RecursionCounter | None = None) -> CanonResult:
    """Canonical labeling of a k-ary relation.

    Splits at the first position where tuples differ, canonizes each part
    recursively and merges the parts' labeling cosets tagged with their
    canonical forms.  The recursion-call count is asserted against the
    quadratic bound when the caller owns the counter.
    """
    own = counter is None
    counter = counter or RecursionCounter()
    res = _cl_rel(R, counter)
    if own and counter.calls > rel_bound(R):
        raise AssertionError(
            f"cl_rel recursion bound violated: {counter.calls} > {rel_bound(R)}"
        )
    return res


def _cl_rel(R: Relation, counter: RecursionCounter) -> CanonResult:
    counter.tick()
    ground = R.ground
    if len(R.tuples) <= 1:
        return cl_object(R.as_object(), ground)
    k = R.arity
    r = None
    for pos in range(k):
        vals = {t[pos] for t in R.tuples}
        if len(vals) > 1:
            r = pos
            break
    if r is None:
        raise AssertionError("distinct tuples must differ somewhere")
    parts: dict = {}
    for t in R.tuples:
        parts.setdefault(t[r], set()).add(t)
    tagged = []
    for v in sorted(parts):
        sub = Relation(ground, k, frozenset(parts[v]))
        res = _cl_rel(sub, counter)
        form = ordered_encoding(sub.as_object(), res.rep)
        tagged.append(Tup([res.coset, Lit(form)]))
    return cl_object(SetOf(tagged), ground)


# ---------------------------------------------------------------------------
# hypergraphs: the covering technique
# ---------------------------------------------------------------------------


def cl_hyper(H: Hypergraph, counter: RecursionCounter | None = None) -> CanonResult:
    """Canonical labeling of a hypergraph via sparse vertex-incidence covers."""
    own = counter is None
    counter = counter or RecursionCounter()
    res = _cl_hyper(H, counter)
    if own and counter.calls > hyper_bound(H):
        raise AssertionError(
            f"cl_hyper recursion bound violated: {counter.calls} > {hyper_bound(H)}"
        )
    return res


def _cl_hyper(H: Hypergraph, counter: RecursionCounter) -> CanonResult:
    counter.tick()
    ground = H.ground
    edges = H.edges
    if len(edges) <= 1:
        return cl_object(H.as_object(), ground)
    half = len(edges) / 2
    cover = {}
    for v in ground:
        Cv = frozenset(e for e in edges if v in e)
        Cstar = Cv if len(Cv) <= half else edges - Cv
        if Cstar:
            cover[Cstar] = True
    Hstar = frozenset().union(*cover) if cover else frozenset()
    if Hstar != edges:
        Ho = edges - Hstar
        res1 = _cl_hyper(Hypergraph(ground, Hstar), counter)
        res2 = _cl_hyper(Hypergraph(ground, Ho), counter)
        inst = Tup([res1.coset, res2.coset])
        out = cl_int(res1.coset, res2.coset)
        return CanonResult(out.coset, ordered_encoding(H.as_object(), out.rep))
    tagged = []
    for Cstar in cover:
        sub = Hypergraph(ground, Cstar)
        res = _cl_hyper(sub, counter)
        form = ordered_encoding(sub.as_object(), res.rep)
        tagged.append(Tup([res.coset, Lit(form)]))
    out = cl_object(SetOf(tagged), ground)
    return CanonResult(out.coset, ordered_encoding(H.as_object(), out.coset.rep))


# ---------------------------------------------------------------------------
# primitive case analysis (guarded classification substitute)
# ---------------------------------------------------------------------------

SMALL_ORDER_EXPONENT_C = 3


def primitive_case(group: PermGroup, d: int, c: int = SMALL_ORDER_EXPONENT_C):
    """Classify a primitive action: ('small', None), ('cover', parts) or
    ('fallback', None).

    A recognized Johnson action on s-subsets (s >= 2; orbit counts on
    ordered pairs match the Johnson scheme and the point stars reconstruct)
    yields a sparse invariant cover of size at most d^3.  Otherwise 'small'
    when |group| <= |X|^(c*log2 d) by exact order test, a singleton cover
    for an unrecognized large natural giant, and 'fallback' (callers
    enumerate exactly) for everything else.  Any returned option is valid,
    so the priority only steers which progress route the callers take.
    """
    X = group.domain
    nx = len(X)
    if nx <= 1:
        return ("small", None)
    cover = _johnson_cover_subsets(group, d)
    if cover is not None:
        return ("cover", cover)
    exponent = c * math.log2(max(2, d))
    if math.log2(group.order) <= exponent * math.log2(nx) + 1e-9:
        return ("small", None)
    if group.is_transitive() and is_giant(group) != "neither":
        if 2 <= nx <= d ** 3:
            return ("cover", [frozenset([x]) for x in X])
    return ("fallback", None)


def _johnson_cover_subsets(group: PermGroup, d: int):
    """Recognize Sym(W)/Alt(W) acting on s-subsets (s >= 2) and return the
    point-star cover, or None."""
    X = group.domain
    nx = len(X)
    if nx < 4 or not group.is_transitive():
        return None
    for w in range(4, d + 1):
        for s in range(2, w // 2 + 1):
            if math.comb(w, s) != nx:
                continue
            orbitals = _pair_orbits(group)
            if len(orbitals) != s + 1:
                continue
            star_size = math.comb(w - 1, s - 1)
            deg_target = s * (w - s)
            graph = None
            for orb in orbitals:
                if any(a == b for (a, b) in orb):
                    continue
                if len(orb) == nx * deg_target:
                    graph = orb
                    break
            if graph is None:
                continue
            adj = {x: set() for x in X}
            for (a, b) in graph:
                adj[a].add(b)
            stars = _max_cliques_of_size(adj, star_size)
            if stars is None or len(stars) != w:
                continue
            membership = {x: frozenset(i for i, st in enumerate(stars) if x in st) for x in X}
            if any(len(m) != s for m in membership.values()):
                continue
            if len(set(membership.values())) != nx:
                continue
            # the cover by stars is sparse and invariant if stars permute
            ok = True
            star_set = {frozenset(st) for st in stars}
            for g in group.gens:
                for st in stars:
                    if frozenset(g(x) for x in st) not in star_set:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            if 2 <= len(stars) <= d ** 3:
                return [frozenset(st) for st in stars]
    return None


def _pair_orbits(group: PermGroup):
    X = group.domain
    pairs = [(a, b) for a in X for b in X]
    seen = set()
    orbits = []
    for p in pairs:
        if p in seen:
            continue
        orb = {p}
        queue = [p]
        while queue:
            (a, b) = queue.pop()
            for g in group.gens:
                q = (g(a), g(b))
                if q not in orb:
                    orb.add(q)
                    queue.append(q)
        seen |= orb
        orbits.append(orb)
    return orbits


def _max_cliques_of_size(adj, size, limit=5000):
    """All maximal cliques having exactly the given size (None if the search
    budget is exhausted)."""
    out = []
    count = 0

    def bk(R, P, Xx):
        nonlocal count
        count += 1
        if count > limit:
            raise RuntimeError
        if not P and not Xx:
            if len(R) == size:
                out.append(frozenset(R))
            return
        pivot = max(P | Xx, key=lambda u: len(adj[u] & P))
        for v in sorted(P - adj[pivot]):
            bk(R | {v}, P & adj[v], Xx & adj[v])
            P = P - {v}
            Xx = Xx | {v}

    try:
        bk(set(), set(adj), set())
    except RuntimeError:
        return None
    return out


# ---------------------------------------------------------------------------
# coset-to-coset maps (CL_SetSet)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CosetMapInstance:
    J: tuple  # of LabelingCoset
    L: tuple  # of LabelingCoset
    alpha: tuple  # of (J-index, L-index)
    coset: LabelingCoset  # Delta rho with Delta <= Aut(J)

    def as_object(self):
        # automorphisms must respect the pairing J_i -> alpha(J_i); label
        # cosets not referenced by alpha impose no constraint
        amap = dict(self.alpha)
        pairs = [Tup([self.J[i], self.L[amap[i]]]) for i in range(len(self.J))]
        return Tup([SetOf(pairs), self.coset])


def make_cosetmap_instance(J, L, alpha_pairs, coset) -> CosetMapInstance:
    """Build and validate a CL_SetSet instance.

    ``alpha_pairs`` maps J indices to L indices; the instance checks alpha is
    total and the coset's group permutes J.
    """
    J = tuple(J)
    L = tuple(L)
    amap = dict(alpha_pairs)
    if set(amap) != set(range(len(J))):
        raise ValueError("alpha is not total on J")
    if any(not (0 <= v < len(L)) for v in amap.values()):
        raise ValueError("alpha image outside L")
    keys = {internal_key(j): i for i, j in enumerate(J)}
    if len(keys) != len(J):
        raise ValueError("J has duplicate members")
    for g in coset.group.gens:
        for j in J:
            if internal_key(apply_bijection(j, g)) not in keys:
                raise ValueError("coset group does not permute J")
    return CosetMapInstance(J, L, tuple(sorted(amap.items())), coset)


def cl_setset(inst: CosetMapInstance) -> CanonResult:
    """Canonical labeling of (J, L, alpha, Delta rho).

    Orbit-splits when the induced action on J is intransitive; otherwise
    reduces along a minimal block system and the primitive case analysis:
    enumerate block-permutation cosets (small order or fallback) keeping the
    minimal canonical forms, or recurse along a lifted sparse cover.
    """
    ground = inst.coset.ground
    obj = inst.as_object()
    J = inst.J
    amap = dict(inst.alpha)
    if len(J) <= 1:
        return cl_object(obj, ground)
    Delta = inst.coset.group
    keys = [internal_key(j) for j in J]
    key_index = {k: i for i, k in enumerate(keys)}
    induced, _ = Delta.induced(list(J), apply_bijection, key_fn=internal_key)
    orbit_parts = induced.orbit_partition()
    if len(orbit_parts) > 1:
        rho = inst.coset.rep
        def orbit_enc(part):
            return ordered_encoding(SetOf([J[i] for i in part]), rho)
        parts_sorted = sorted(orbit_parts, key=orbit_enc)
        first = parts_sorted[0]
        rest = sorted(set(range(len(J))) - set(first))
        res1 = cl_setset(_sub_instance(inst, sorted(first)))
        res2 = cl_setset(_sub_instance(inst, rest))
        out = cl_int(res1.coset, res2.coset)
        return CanonResult(out.coset, ordered_encoding(obj, out.rep))

    # transitive: work on the ordered side
    rho = inst.coset.rep
    delta_can = inst.coset.conjugated_group()
    Jcan = [apply_bijection(j, rho) for j in J]
    order = sorted(range(len(J)), key=lambda i: ordered_encoding(Jcan[i]))
    Jcan_sorted = [Jcan[i] for i in order]
    orig_of = {pos: order[pos] for pos in range(len(J))}
    act_can, _ = delta_can.induced(Jcan_sorted, apply_bijection, key_fn=internal_key)
    blocks = act_can.minimal_block_system()
    blocks_sorted = sorted(blocks, key=min)
    block_action, _ = act_can.induced(
        blocks_sorted, lambda b, g: frozenset(g(x) for x in b), key_fn=lambda b: b
    )
    kind, cover_blocks = primitive_case(block_action, d=len(ground))

    if kind in ("small", "fallback"):
        psi_can = _index_blockwise_stabilizer(delta_can, act_can, blocks_sorted)
        reps = coset_transversal(delta_can, psi_can)
        results = []
        for dl in reps:
            x = rho.then(dl)
            sub_coset = LabelingCoset(psi_can.conjugate(x.inv()), x)
            sub = CosetMapInstance(inst.J, inst.L, inst.alpha, sub_coset)
            results.append(cl_setset(sub))
        return _argmin_join(obj, results)

    # sparse cover on blocks, lifted to J (cover parts are block-index sets)
    parts = []
    for cb in cover_blocks:
        parts.append(frozenset().union(*[blocks_sorted[b] for b in sorted(cb)]))
    results = []
    for part in sorted(set(parts), key=lambda p: tuple(sorted(p))):
        # canonical minimal image of the part under the coset, with transporter
        tr = _index_set_orbit(delta_can, act_can, part)
        target_key = min(tr)
        _, mover = tr[target_key]
        x = rho.then(mover)
        stab = _index_set_stabilizer(delta_can, act_can, frozenset(target_key))
        sub_coset = LabelingCoset(stab.conjugate(x.inv()), x)
        sub_idxs = sorted(orig_of[p] for p in part)
        sub = _sub_instance(inst, sub_idxs, coset=sub_coset)
        res = cl_setset(sub)
        form = ordered_encoding(sub.as_object(), res.rep)
        results.append(Tup([res.coset, Lit(form)]))
    out = cl_object(SetOf(results), ground)
    return CanonResult(out.coset, ordered_encoding(obj, out.coset.rep))


def _index_set_orbit(delta_can: PermGroup, act_can: PermGroup, part: frozenset):
    """Orbit of an index set under the ordered group, with transporters in
    the ordered group (not just the induced action)."""
    gen_pairs = list(zip(delta_can.gens, act_can.gens))
    ident = delta_can.identity()
    start = tuple(sorted(part))
    out = {start: (frozenset(part), ident)}
    queue = [(frozenset(part), ident)]
    while queue:
        s, t = queue.pop()
        for g, ig in gen_pairs:
            s2 = frozenset(ig(x) for x in s)
            k2 = tuple(sorted(s2))
            if k2 not in out:
                t2 = t.then(g)
                out[k2] = (s2, t2)
                queue.append((s2, t2))
    return out


def _index_set_stabilizer(delta_can: PermGroup, act_can: PermGroup, target: frozenset):
    """{d in delta_can : induced(d) fixes the index set setwise}."""
    comb, back = _combined_group(delta_can, act_can)
    off = max(delta_can.domain) + 1
    dset = set(delta_can.domain)
    color = {}
    for v in comb.domain:
        if v in dset:
            color[v] = -1
        else:
            color[v] = 1 if (v - off) in target else 0
    stab = comb.color_stabilizer(color)
    return back(stab)


def _index_blockwise_stabilizer(delta_can, act, blocks_sorted):
    """{d : induced action preserves every block setwise}."""
    comb, back = _combined_group(delta_can, act)
    off = max(delta_can.domain) + 1
    dset = set(delta_can.domain)
    color = {}
    blk_of = {}
    for bi, b in enumerate(blocks_sorted):
        for x in b:
            blk_of[x] = bi
    for v in comb.domain:
        color[v] = -1 if v in dset else blk_of[v - off]
    stab = comb.color_stabilizer(color)
    return back(stab)


def _combined_group(delta_can: PermGroup, act: PermGroup):
    """Subdirect product of delta_can with its induced action (graph of the
    action hom), plus a projector back onto the ordered part."""
    off = max(delta_can.domain) + 1
    dom = tuple(delta_can.domain) + tuple(v + off for v in act.domain)
    gens = []
    for g, ig in zip(delta_can.gens, act.gens):
        m = {}
        for v in delta_can.domain:
            m[v] = g(v)
        for x in act.domain:
            m[x + off] = ig(x) + off
        gens.append(Bij.from_dict(m))
    comb = PermGroup(dom, gens)

    def back(sub: PermGroup) -> PermGroup:
        outs = [g.restrict(delta_can.domain) for g in sub.gens]
        return PermGroup(delta_can.domain, outs)

    return comb, back


def _sub_instance(inst: CosetMapInstance, j_indices, coset=None) -> CosetMapInstance:
    amap = dict(inst.alpha)
    J = [inst.J[i] for i in j_indices]
    used_l = sorted({amap[i] for i in j_indices})
    l_index = {l: k for k, l in enumerate(used_l)}
    L = [inst.L[l] for l in used_l]
    alpha = [(k, l_index[amap[i]]) for k, i in enumerate(j_indices)]
    return CosetMapInstance(tuple(J), tuple(L), tuple(alpha), coset or inst.coset)


def _argmin_join(obj, results: list[CanonResult]) -> CanonResult:
    from .objects import join_cosets

    best = None
    keep = []
    for res in results:
        form = ordered_encoding(obj, res.rep)
        if best is None or form < best:
            best = form
            keep = [res.coset]
        elif form == best:
            keep.append(res.coset)
    joined = join_cosets(keep)
    return CanonResult(joined, best)


# ---------------------------------------------------------------------------
# coset-labeled hypergraphs (CL_SetHyper)
# ---------------------------------------------------------------------------


def cl_sethyper(H: Hypergraph, labels, alpha_pairs) -> CanonResult:
    """Canonical labeling of a coset-labeled hypergraph (H, L, alpha).

    Canonizes the plain hypergraph, swaps each edge for its young-group
    labeling coset and finishes through CL_SetSet.
    """
    ground = H.ground
    edges = sorted(H.edges, key=lambda e: tuple(sorted(e)))
    amap = dict(alpha_pairs)
    if set(amap) != set(range(len(edges))):
        raise ValueError("alpha is not total on the edges")
    base = cl_hyper(H)
    J = [_vertex_set_coset(ground, e) for e in edges]
    L = list(labels)
    inst = make_cosetmap_instance(J, L, [(i, amap[i]) for i in range(len(edges))], base.coset)
    res = cl_setset(inst)
    pairs = [Tup([SetOf([Vert(v) for v in e]), L[amap[i]]]) for i, e in enumerate(edges)]
    obj = Tup([H.as_object(), SetOf(pairs)])
    return CanonResult(res.coset, ordered_encoding(obj, res.rep))
