"""Brute-force oracles: exhaustive canonization, automorphisms, isomorphism.

These never share code paths with the canonizers they check.  Everything
enumerates labelings or permutations outright and is capped at small ground
sets.
"""

from __future__ import annotations

import itertools

from .perms import Bij, PermGroup
from .objects import LabelingCoset, apply_bijection, ordered_encoding

__all__ = [
    "BRUTE_CAP",
    "all_labelings",
    "all_perms",
    "brute_canon",
    "brute_aut",
    "brute_iso_graphs",
    "brute_aut_graph",
]

BRUTE_CAP = 8


def _check_cap(ground):
    if len(ground) > BRUTE_CAP:
        raise ValueError(f"brute force refused: |V|={len(ground)} exceeds {BRUTE_CAP}")


def all_labelings(ground):
    pts = tuple(sorted(ground))
    labels = range(1, len(pts) + 1)
    for img in itertools.permutations(labels):
        yield Bij(pts, img)


def all_perms(ground):
    pts = tuple(sorted(ground))
    for img in itertools.permutations(pts):
        yield Bij(pts, img)


def brute_canon(obj, ground, coset: LabelingCoset | None = None):
    """Exhaustive canonical labeling: the argmin set of the encoded form.

    Enumerates the instance's coset when given, otherwise all labelings.
    Returns (LabelingCoset of all minimizers, minimal form).
    """
    ground = tuple(sorted(ground))
    _check_cap(ground)
    lams = list(coset.members()) if coset is not None else list(all_labelings(ground))
    best_form = None
    arg = []
    for lam in lams:
        form = ordered_encoding(obj, lam)
        if best_form is None or form < best_form:
            best_form = form
            arg = [lam]
        elif form == best_form:
            arg.append(lam)
    rep = arg[0]
    inv = rep.inv()
    gens = [lam.then(inv) for lam in arg]
    group = PermGroup(ground, [g for g in gens if not g.is_identity])
    assert group.order == len(arg), "argmin set is not a coset"
    return LabelingCoset(group, rep), best_form


def brute_aut(obj, ground) -> PermGroup:
    """{sigma in Sym(V) : obj^sigma == obj} by full enumeration."""
    ground = tuple(sorted(ground))
    _check_cap(ground)
    gens = []
    for sigma in all_perms(ground):
        if sigma.is_identity:
            continue
        if apply_bijection(obj, sigma) == obj:
            gens.append(sigma)
    return PermGroup(ground, gens)


def brute_aut_graph(E, ground) -> PermGroup:
    ground = tuple(sorted(ground))
    _check_cap(ground)
    Eset = frozenset(E)
    gens = []
    for sigma in all_perms(ground):
        if all(((sigma(u), sigma(v)) in Eset) == ((u, v) in Eset)
               for u in ground for v in ground):
            if not sigma.is_identity:
                gens.append(sigma)
    return PermGroup(ground, gens)


def brute_iso_graphs(E1, V1, E2, V2) -> set:
    """All edge-preserving bijections V1 -> V2 (undirected pair sets)."""
    V1 = tuple(sorted(V1))
    V2 = tuple(sorted(V2))
    _check_cap(V1)
    if len(V1) != len(V2):
        return set()
    A1 = {frozenset(e) for e in E1}
    A2 = {frozenset(e) for e in E2}
    out = set()
    for img in itertools.permutations(V2):
        phi = Bij(V1, img)
        if all((frozenset((phi(u), phi(v))) in A2) == (frozenset((u, v)) in A1)
               for i, u in enumerate(V1) for v in V1[i + 1:]):
            out.add(phi)
    return out
