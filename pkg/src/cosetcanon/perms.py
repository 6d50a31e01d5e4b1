"""Permutation-group algebra on small integer domains.

Groups are stored as strong generating sets produced by a deterministic
Schreier-Sims procedure.  All derived data (orders, orbits, transversals,
canonical generators, minimal coset representatives) is computed so that it
depends only on the group as a set of permutations, never on the generating
set that happened to produce it.  That property is what lets the canonizers
built on top treat group-valued subroutines as isomorphism-invariant.

Composition convention: ``a * b`` (or ``a.then(b)``) applies ``a`` first and
``b`` second, matching the left-to-right convention used throughout.
"""

from __future__ import annotations

from math import factorial

__all__ = [
    "Bij",
    "Perm",
    "PermGroup",
    "GroupCoset",
    "cycle_string",
    "parse_cycles",
    "is_giant",
    "normal_closure",
    "relative_base",
    "coset_transversal",
    "intersect_groups",
    "intersect_cosets",
    "min_image_perm",
    "min_label_rep",
    "min_right_coset_rep",
    "solve_point_images",
    "solve_set_images",
    "find_element",
]


_DOM_INDEX_CACHE: dict[tuple, dict] = {}
_CHAIN_CACHE: dict = {}


def _dom_index(dom: tuple) -> dict:
    idx = _DOM_INDEX_CACHE.get(dom)
    if idx is None:
        idx = {v: i for i, v in enumerate(dom)}
        _DOM_INDEX_CACHE[dom] = idx
    return idx


class Bij:
    """A bijection between two finite sets of ints (immutable, hashable)."""

    __slots__ = ("dom", "img", "_idx", "_hash")

    def __init__(self, dom, img):
        dom = tuple(dom)
        img = tuple(img)
        if len(dom) != len(img):
            raise ValueError("domain/image length mismatch")
        if len(set(img)) != len(img):
            raise ValueError("image is not injective")
        if any(dom[i] > dom[i + 1] for i in range(len(dom) - 1)):
            order = sorted(range(len(dom)), key=lambda i: dom[i])
            dom = tuple(dom[i] for i in order)
            img = tuple(img[i] for i in order)
        self.dom = dom
        self.img = img
        self._idx = _dom_index(dom)
        self._hash = None

    @classmethod
    def from_dict(cls, mapping) -> "Bij":
        dom = tuple(sorted(mapping))
        return cls(dom, tuple(mapping[v] for v in dom))

    @classmethod
    def identity(cls, points) -> "Bij":
        pts = tuple(sorted(points))
        return cls(pts, pts)

    def __call__(self, v):
        return self.img[self._idx[v]]

    def get(self, v, default=None):
        i = self._idx.get(v)
        return default if i is None else self.img[i]

    def apply_set(self, s) -> frozenset:
        return frozenset(self.img[self._idx[v]] for v in s)

    def apply_tuple(self, t) -> tuple:
        return tuple(self.img[self._idx[v]] for v in t)

    def then(self, other: "Bij") -> "Bij":
        """``self`` followed by ``other``."""
        oidx = other._idx
        oimg = other.img
        return Bij(self.dom, tuple(oimg[oidx[i]] for i in self.img))

    __mul__ = then

    def inv(self) -> "Bij":
        pairs = sorted(zip(self.img, self.dom))
        return Bij(tuple(p for p, _ in pairs), tuple(v for _, v in pairs))

    @property
    def codomain(self) -> tuple:
        return tuple(sorted(self.img))

    @property
    def is_identity(self) -> bool:
        return self.dom == self.img

    def is_perm(self) -> bool:
        return self.dom == tuple(sorted(self.img))

    def restrict(self, points) -> "Bij":
        pts = tuple(sorted(points))
        return Bij(pts, tuple(self(v) for v in pts))

    def __eq__(self, other):
        return (
            isinstance(other, Bij)
            and self.dom == other.dom
            and self.img == other.img
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash((self.dom, self.img))
        return h

    def __repr__(self):
        if self.is_perm():
            return f"Perm({cycle_string(self)!r})"
        body = ", ".join(f"{v}->{w}" for v, w in zip(self.dom, self.img))
        return f"Bij({body})"


Perm = Bij  # a Perm is a Bij whose image set equals its domain


def cycle_string(p: Bij) -> str:
    """Disjoint-cycle text form, e.g. ``(1 2 3)(4 5)``; identity is ``()``."""
    if not p.is_perm():
        raise ValueError("cycle notation needs a permutation")
    seen = set()
    out = []
    for v in p.dom:
        if v in seen or p(v) == v:
            continue
        cyc = [v]
        seen.add(v)
        w = p(v)
        while w != v:
            cyc.append(w)
            seen.add(w)
            w = p(w)
        out.append("(" + " ".join(str(x) for x in cyc) + ")")
    return "".join(out) if out else "()"


def parse_cycles(text: str, domain) -> Bij:
    """Parse disjoint-cycle notation over the given domain."""
    mapping = {v: v for v in domain}
    text = text.strip()
    if text in ("()", "", "id"):
        return Bij.from_dict(mapping)
    depth = 0
    cur: list[int] = []
    cycles = []
    tok = ""
    for ch in text:
        if ch == "(":
            if depth:
                raise ValueError(f"nested cycle in {text!r}")
            depth = 1
            cur = []
        elif ch == ")":
            if tok:
                cur.append(int(tok))
            tok = ""
            if len(cur) > 1:
                cycles.append(cur)
            depth = 0
        elif ch in " ,":
            if tok:
                cur.append(int(tok))
            tok = ""
        elif ch.isdigit() or ch == "-":
            tok += ch
        else:
            raise ValueError(f"bad character {ch!r} in permutation {text!r}")
    if depth:
        raise ValueError(f"unterminated cycle in {text!r}")
    for cyc in cycles:
        for a in cyc:
            if a not in mapping:
                raise ValueError(f"point {a} outside domain")
        for a, b in zip(cyc, cyc[1:]):
            mapping[a] = b
        mapping[cyc[-1]] = cyc[0]
    bij = Bij.from_dict(mapping)
    if not bij.is_perm():
        raise ValueError(f"{text!r} is not a permutation of the domain")
    return bij


class _Level:
    __slots__ = ("point", "transversal", "gens")

    def __init__(self, point):
        self.point = point
        # point -> Perm u with u(self.point) == point; None marks the identity
        self.transversal: dict = {point: None}
        self.gens: list[Bij] = []


class Chain:
    """Stabilizer chain for a fixed base order (deterministic).

    Levels always form a contiguous prefix of the base order, so the
    pointwise stabilizer of the first k base points is generated by the
    strong generators of levels k and beyond.
    """

    __slots__ = ("domain", "base_order", "levels", "identity")

    def __init__(self, domain: tuple, base_order: tuple, gens):
        self.domain = domain
        self.base_order = base_order
        self.identity = Bij.identity(domain)
        self.levels: list[_Level] = []
        for g in gens:
            if g.is_identity:
                continue
            home = self._level_index_for(g, 0)
            self.levels[home].gens.append(g)
        self._complete()

    def _tr(self, level: _Level, p) -> Bij:
        u = level.transversal[p]
        return self.identity if u is None else u

    def _rebuild_orbit(self, i: int):
        # the fundamental orbit uses every strong generator fixing the prefix
        level = self.levels[i]
        gens = self.gens_from(i)
        tr = {level.point: None}
        queue = [level.point]
        while queue:
            nxt = []
            for p in queue:
                up = tr[p]
                for g in gens:
                    q = g(p)
                    if q not in tr:
                        tr[q] = g if up is None else up.then(g)
                        nxt.append(q)
            queue = nxt
        level.transversal = tr

    def _level_index_for(self, g: Bij, start: int) -> int:
        """First level (at or after start) whose point g moves, creating levels.

        Levels always form a contiguous prefix of the base order.
        """
        pos = start
        used = {lv.point for lv in self.levels}
        while True:
            if pos == len(self.levels):
                nxt = None
                for b in self.base_order:
                    if b not in used:
                        nxt = b
                        break
                if nxt is None:
                    raise AssertionError("non-identity element fixing the whole base")
                self.levels.append(_Level(nxt))
                used.add(nxt)
            if g(self.levels[pos].point) != self.levels[pos].point:
                return pos
            pos += 1

    def _complete(self):
        """Bottom-up Schreier-Sims completion.

        Invariant: all levels deeper than the working level are complete.
        Residues of level i Schreier generators fix the base prefix through
        b_i, so their home level is deeper than i; processing jumps there and
        climbs back, rebuilding orbits on the way.
        """
        i = len(self.levels) - 1
        while i >= 0:
            self._rebuild_orbit(i)
            level = self.levels[i]
            gens_here = self.gens_from(i)
            jumped = False
            for p in sorted(level.transversal):
                up = self._tr(level, p)
                for s in gens_here:
                    q = s(p)
                    uq = self._tr(level, q)
                    sg = up.then(s).then(uq.inv())
                    if sg.is_identity:
                        continue
                    res, _ = self._strip(sg, i + 1)
                    if res.is_identity:
                        continue
                    home = self._level_index_for(res, i + 1)
                    self.levels[home].gens.append(res)
                    i = home
                    jumped = True
                    break
                if jumped:
                    break
            if not jumped:
                i -= 1

    def _strip(self, g: Bij, start: int = 0):
        for i in range(start, len(self.levels)):
            level = self.levels[i]
            p = g(level.point)
            if p == level.point:
                continue
            u = level.transversal.get(p)
            if u is None and p not in level.transversal:
                return g, i
            g = g.then(self._tr(level, p).inv())
        return g, len(self.levels)

    @property
    def order(self) -> int:
        o = 1
        for level in self.levels:
            o *= len(level.transversal)
        return o

    def contains(self, g: Bij) -> bool:
        if tuple(sorted(g.dom)) != self.domain or not g.is_perm():
            return False
        res, _ = self._strip(g, 0)
        return res.is_identity

    def gens_from(self, i: int) -> list[Bij]:
        out = []
        for level in self.levels[i:]:
            out.extend(level.gens)
        return out


class PermGroup:
    """A permutation group on a finite set of ints, with exact integer order."""

    __slots__ = ("domain", "gens", "_chains", "_cangens")

    def __init__(self, domain, gens=()):
        self.domain = tuple(sorted(domain))
        norm = []
        seen = set()
        for g in gens:
            if tuple(sorted(g.dom)) != self.domain:
                raise ValueError("generator domain mismatch")
            if not g.is_perm():
                raise ValueError("generator is not a permutation")
            if g.is_identity or g in seen:
                continue
            seen.add(g)
            norm.append(g)
        self.gens = tuple(norm)
        self._chains: dict[tuple, Chain] = {}
        self._cangens = None

    # -- constructors ------------------------------------------------------
    @classmethod
    def trivial(cls, domain) -> "PermGroup":
        return cls(domain, ())

    @classmethod
    def symmetric(cls, domain) -> "PermGroup":
        dom = tuple(sorted(domain))
        if len(dom) < 2:
            return cls(dom, ())
        gens = [_transposition(dom, dom[0], dom[1])]
        if len(dom) > 2:
            gens.append(_cycle(dom))
        return cls(dom, gens)

    @classmethod
    def alternating(cls, domain) -> "PermGroup":
        dom = tuple(sorted(domain))
        if len(dom) < 3:
            return cls(dom, ())
        gens = []
        for i in range(len(dom) - 2):
            m = {v: v for v in dom}
            a, b, c = dom[i], dom[i + 1], dom[i + 2]
            m[a], m[b], m[c] = b, c, a
            gens.append(Bij.from_dict(m))
        return cls(dom, gens)

    # -- basics --------------------------------------------------------
    def chain(self, base_order=None) -> Chain:
        if base_order is None:
            base = self.domain
        else:
            head = tuple(v for v in base_order if v in set(self.domain))
            seen = set(head)
            base = head + tuple(v for v in self.domain if v not in seen)
        ch = self._chains.get(base)
        if ch is None:
            gkey = (self.domain, self.gens, base)
            ch = _CHAIN_CACHE.get(gkey)
            if ch is None:
                ch = Chain(self.domain, base, self.gens)
                _CHAIN_CACHE[gkey] = ch
            self._chains[base] = ch
        return ch

    @property
    def order(self) -> int:
        return self.chain().order

    @property
    def is_trivial(self) -> bool:
        return not self.gens

    def identity(self) -> Bij:
        return Bij.identity(self.domain)

    def __contains__(self, g: Bij) -> bool:
        return self.chain().contains(g)

    def __eq__(self, other):
        if not isinstance(other, PermGroup):
            return NotImplemented
        if self.domain != other.domain or self.order != other.order:
            return False
        return all(g in other for g in self.gens)

    def __hash__(self):
        return hash((self.domain, self.order, self.canonical_gens()))

    def __repr__(self):
        return f"PermGroup(n={len(self.domain)}, order={self.order})"

    def elements(self):
        """All elements (use only on small groups)."""
        levels = self.chain().levels

        def rec(i, acc):
            if i < 0:
                yield acc
                return
            level = levels[i]
            for p in sorted(level.transversal):
                u = level.transversal[p]
                nxt = acc if u is None else acc.then(u)
                yield from rec(i - 1, nxt)

        yield from rec(len(levels) - 1, self.identity())

    # -- orbits ----------------------------------------------------------
    def orbit(self, p) -> frozenset:
        seen = {p}
        queue = [p]
        while queue:
            v = queue.pop()
            for g in self.gens:
                w = g(v)
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return frozenset(seen)

    def orbit_partition(self, subset=None) -> list[frozenset]:
        """G-orbits on subset (default whole domain), sorted by min element."""
        pts = self.domain if subset is None else tuple(sorted(subset))
        ptset = set(pts)
        out = []
        left = set(pts)
        while left:
            v = min(left)
            orb = self.orbit(v)
            if not orb <= ptset:
                raise ValueError("subset is not invariant under the group")
            out.append(orb)
            left -= orb
        return sorted(out, key=min)

    def is_transitive(self, subset=None) -> bool:
        pts = self.domain if subset is None else tuple(subset)
        if not pts:
            return True
        return len(self.orbit_partition(pts)) == 1

    def orbit_transporter(self, x, apply_fn, key_fn=None):
        """Orbit of an object with transporter elements: {key(y): (y, g)}."""
        key_fn = key_fn or (lambda o: o)
        ident = self.identity()
        out = {key_fn(x): (x, ident)}
        queue = [(x, ident)]
        while queue:
            y, t = queue.pop()
            for g in self.gens:
                z = apply_fn(y, g)
                k = key_fn(z)
                if k not in out:
                    tz = t.then(g)
                    out[k] = (z, tz)
                    queue.append((z, tz))
        return out

    # -- stabilizers -------------------------------------------------------
    def pointwise_stabilizer(self, points) -> "PermGroup":
        pts = tuple(sorted(set(points) & set(self.domain)))
        if not pts:
            return self
        ch = self.chain(base_order=pts)
        ptset = set(pts)
        gens: list[Bij] = []
        for i, level in enumerate(ch.levels):
            if level.point not in ptset:
                gens = ch.gens_from(i)
                break
        return PermGroup(self.domain, gens)

    def setwise_stabilizer(self, block) -> "PermGroup":
        block = frozenset(block)
        color = {v: (v in block) for v in self.domain}
        return self.color_stabilizer(color)

    def color_stabilizer(self, color: dict) -> "PermGroup":
        """Subgroup preserving a vertex coloring: {g : color(g(v)) == color(v)}."""

        def prune(b, img, partial):
            return color[img] == color[b]

        def full(g):
            return all(color[g(v)] == color[v] for v in self.domain)

        return _subgroup_search(self, prune, full)

    def blockwise_stabilizer(self, blocks) -> "PermGroup":
        """Subgroup stabilizing every listed block setwise."""
        color = {v: -1 for v in self.domain}
        for i, blk in enumerate(blocks):
            for v in blk:
                color[v] = i
        return self.color_stabilizer(color)

    # -- block systems -----------------------------------------------------
    def minimal_block_system(self, subset=None) -> list[frozenset]:
        """Minimal non-trivial block system on a transitive point set.

        Returns the partition into singletons when the action is primitive.
        Smallest block size wins; ties break lexicographically.  Block
        closures are generating-set independent, so the result depends only
        on the abstract action.
        """
        pts = tuple(sorted(subset)) if subset is not None else self.domain
        if not self.is_transitive(pts):
            raise ValueError("group is not transitive on the given set")
        if len(pts) <= 1:
            return [frozenset(pts)] if pts else []
        a = pts[0]
        best = None
        for b in pts[1:]:
            blocks = self._block_closure(pts, a, b)
            size = len(next(iter(blocks)))
            if size == len(pts):
                continue
            key = (size, sorted(tuple(sorted(bl)) for bl in blocks))
            if best is None or key < best[0]:
                best = (key, blocks)
        if best is None:
            return [frozenset([p]) for p in pts]
        return sorted(best[1], key=min)

    def _block_closure(self, pts, a, b):
        parent = {v: v for v in pts}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        queue = [(a, b)]
        ra, rb = find(a), find(b)
        parent[rb] = ra
        while queue:
            u, v = queue.pop()
            for g in self.gens:
                gu, gv = find(g(u)), find(g(v))
                if gu != gv:
                    parent[gv] = gu
                    queue.append((g(u), g(v)))
        blocks: dict[int, set] = {}
        for v in pts:
            blocks.setdefault(find(v), set()).add(v)
        return [frozenset(bl) for bl in blocks.values()]

    # -- canonical data ------------------------------------------------------
    def canonical_gens(self) -> tuple:
        """Strong generating set depending only on the group.

        Walks base points in sorted-domain order; each fundamental-orbit point
        contributes the lexicographically least element of its coset.
        """
        if self._cangens is not None:
            return self._cangens
        out = []
        prefix: list = []
        ch = self.chain()
        for level in ch.levels:
            b = level.point
            stab = self.pointwise_stabilizer(prefix) if prefix else self
            for p in sorted(stab.orbit(b)):
                if p == b:
                    continue
                out.append(min_image_perm(stab, stab.domain, prescribed=[(b, p)]))
            prefix.append(b)
        self._cangens = tuple(out)
        return self._cangens

    def conjugate(self, by: Bij) -> "PermGroup":
        """The group {by^-1 g by}, acting on the image domain of ``by``."""
        inv = by.inv()
        gens = [inv.then(g).then(by) for g in self.gens]
        return PermGroup(tuple(sorted(by.img)), gens)

    def induced(self, objects, apply_fn, key_fn=None):
        """Action induced on distinct objects permuted by the group.

        Returns (group on range(len(objects)), index-of-key dict).
        """
        key_fn = key_fn or (lambda o: o)
        keys = [key_fn(o) for o in objects]
        index = {k: i for i, k in enumerate(keys)}
        if len(index) != len(keys):
            raise ValueError("objects are not distinct")
        dom = tuple(range(len(objects)))
        gens = []
        for g in self.gens:
            img = []
            for o in objects:
                k = key_fn(apply_fn(o, g))
                if k not in index:
                    raise ValueError("group does not act on the objects")
                img.append(index[k])
            gens.append(Bij(dom, tuple(img)))
        return PermGroup(dom, gens), index

    def restriction(self, points) -> "PermGroup":
        """Action restricted to an invariant point set."""
        pts = tuple(sorted(points))
        for g in self.gens:
            if frozenset(g(v) for v in pts) != frozenset(pts):
                raise ValueError("point set is not invariant")
        return PermGroup(pts, [g.restrict(pts) for g in self.gens])

    def is_subgroup_of(self, other: "PermGroup") -> bool:
        return all(g in other for g in self.gens)


def _transposition(dom, a, b) -> Bij:
    m = {v: v for v in dom}
    m[a], m[b] = b, a
    return Bij.from_dict(m)


def _cycle(dom) -> Bij:
    m = {dom[i]: dom[(i + 1) % len(dom)] for i in range(len(dom))}
    return Bij.from_dict(m)


# ---------------------------------------------------------------------------
# chain backtracking
# ---------------------------------------------------------------------------


def _subgroup_search(G: PermGroup, prune, full_test) -> PermGroup:
    """Subgroup {g in G : full_test(g)}.

    ``prune(base_point, image, partial)`` must be a necessary condition on
    partial images (sound pruning); ``full_test`` decides membership at the
    leaves.  The target must be a subgroup.  Root-level images are pruned
    modulo the orbit of the subgroup found so far.
    """
    ch = G.chain()
    levels = ch.levels
    found: list[Bij] = []
    found_group = PermGroup(G.domain, ())

    def rec(i, outer, partial):
        nonlocal found_group
        if i == len(levels):
            if not outer.is_identity and full_test(g=outer) and outer not in found_group:
                found.append(outer)
                found_group = PermGroup(G.domain, found)
            return
        level = levels[i]
        root_seen: set = set()
        for q in sorted(level.transversal):
            img = outer(q)
            if i == 0 and img in root_seen:
                continue
            if not prune(level.point, img, partial):
                continue
            u = level.transversal[q]
            partial[level.point] = img
            rec(i + 1, outer if u is None else u.then(outer), partial)
            del partial[level.point]
            if i == 0:
                root_seen |= found_group.orbit(img)

    rec(0, ch.identity, {})
    return PermGroup(G.domain, found)


def find_element(G: PermGroup, prune, full_test, base_order=None):
    """First element of G passing full_test, searched with sound pruning."""
    ch = G.chain(base_order)
    levels = ch.levels

    def rec(i, outer, partial):
        if i == len(levels):
            return outer if full_test(outer) else None
        level = levels[i]
        for q in sorted(level.transversal):
            img = outer(q)
            if not prune(level.point, img, partial):
                continue
            u = level.transversal[q]
            partial[level.point] = img
            got = rec(i + 1, outer if u is None else u.then(outer), partial)
            del partial[level.point]
            if got is not None:
                return got
        return None

    return rec(0, ch.identity, {})


def solve_point_images(G: PermGroup, pairs):
    """Element of G with the prescribed point images, or None."""
    want = dict(pairs)

    def prune(b, img, partial):
        return want.get(b, img) == img

    def full(g):
        return all(g(p) == t for p, t in want.items())

    return find_element(G, prune, full, base_order=tuple(want))


def solve_set_images(G: PermGroup, set_pairs):
    """Element of G mapping each source set onto its target set, or None."""
    src_of = {}
    tgt_of = {}
    pairs = []
    for i, (s, t) in enumerate(set_pairs):
        s, t = frozenset(s), frozenset(t)
        if len(s) != len(t):
            return None
        pairs.append((s, t))
        for v in s:
            src_of[v] = i
        tgt_of[i] = t
    base = tuple(sorted(src_of))

    def prune(b, img, partial):
        i = src_of.get(b)
        return i is None or img in tgt_of[i]

    def full(g):
        return all(g.apply_set(s) == t for s, t in pairs)

    return find_element(G, prune, full, base_order=base)


# ---------------------------------------------------------------------------
# minimal representatives
# ---------------------------------------------------------------------------


def min_image_perm(G: PermGroup, points_seq, key=None, prescribed=()):
    """The element g of G minimizing ``tuple(key(g(p)) for p in points_seq)``.

    ``prescribed`` lists (point, image) constraints consumed before the
    minimization; the coset they select must be nonempty.  The result is a
    function of the group, the sequence and the constraints only.
    """
    key = key or (lambda x: x)
    pres = list(prescribed)
    want = dict(pres)
    base = tuple(p for p, _ in pres) + tuple(points_seq)
    ch = G.chain(base_order=base)
    outer = ch.identity
    for level in ch.levels:
        p = level.point
        if p in want:
            target = want[p]
            found = None
            for q in level.transversal:
                if outer(q) == target:
                    found = q
                    break
            if found is None:
                raise ValueError("prescription unreachable")
            q = found
        else:
            q = min(level.transversal, key=lambda r: key(outer(r)))
        u = level.transversal[q]
        if u is not None:
            outer = u.then(outer)
    for p, target in pres:
        if outer(p) != target:
            raise ValueError("prescription unreachable")
    return outer


def min_label_rep(group: PermGroup, rho: Bij) -> Bij:
    """Least element of the labeling coset {d then rho : d in group}.

    Minimality is w.r.t. the image tuple over the sorted ground set.
    """
    if group.is_trivial:
        return rho
    d = min_image_perm(group, group.domain, key=rho)
    return d.then(rho)


def min_right_coset_rep(H: PermGroup, x: Bij) -> Bij:
    """Least element of {x then h : h in H} (sift-minimal representative)."""
    if H.is_trivial:
        return x
    seen = set()
    seq = []
    for v in sorted(x.dom):
        p = x(v)
        if p not in seen:
            seen.add(p)
            seq.append(p)
    h = min_image_perm(H, seq)
    return x.then(h)


# ---------------------------------------------------------------------------
# derived group operations
# ---------------------------------------------------------------------------


def coset_transversal(G: PermGroup, H: PermGroup) -> list[Bij]:
    """Representatives d_1..d_s of the left cosets dH covering G.

    d_1 is the identity; every other representative is the sift-minimal
    element of its coset and the output is sorted by image tuple, so the
    transversal depends only on (G, H) as abstract groups.
    """
    if not H.is_subgroup_of(G):
        raise ValueError("H is not a subgroup of G")
    ident = G.identity()
    id_key = min_right_coset_rep(H, ident)
    reps = {id_key}
    queue = [id_key]
    while queue:
        r = queue.pop()
        for g in G.gens:
            key = min_right_coset_rep(H, g.then(r))
            if key not in reps:
                reps.add(key)
                queue.append(key)
    out = [ident] + sorted((r for r in reps if r != id_key), key=lambda b: b.img)
    expected = G.order // H.order
    if len(out) != expected:
        raise AssertionError("transversal size mismatch")
    return out


def normal_closure(G: PermGroup, H: PermGroup) -> PermGroup:
    """Smallest normal subgroup of G containing H."""
    if not H.is_subgroup_of(G):
        raise ValueError("H is not a subgroup of G")
    gens = list(H.gens)
    closure = PermGroup(G.domain, gens)
    changed = True
    while changed:
        changed = False
        for s in list(gens):
            for g in G.gens:
                c = g.inv().then(s).then(g)
                if c not in closure:
                    gens.append(c)
                    closure = PermGroup(G.domain, gens)
                    changed = True
    return closure


def _prefix_feasible(ch: Chain, partial: dict) -> bool:
    """Can some element of the chain's group realize the partial point map?"""
    outer = ch.identity
    todo = dict(partial)
    for level in ch.levels:
        p = level.point
        if p in todo:
            target = todo.pop(p)
            hit = None
            for q in level.transversal:
                if outer(q) == target:
                    hit = q
                    break
            if hit is None:
                return False
            u = level.transversal[hit]
            if u is not None:
                outer = u.then(outer)
        if not todo:
            return True
    return all(outer(p) == t for p, t in todo.items())


def intersect_groups(A: PermGroup, B: PermGroup) -> PermGroup:
    """Intersection of two groups on the same domain (backtracking)."""
    if A.domain != B.domain:
        raise ValueError("domain mismatch")
    if A.order > B.order:
        A, B = B, A
    if A.is_subgroup_of(B):
        return A
    chB = B.chain()

    def prune(b, img, partial):
        got = dict(partial)
        got[b] = img
        return _prefix_feasible(chB, got)

    def full(g):
        return chB.contains(g)

    return _subgroup_search(A, prune, full)


def intersect_cosets(G1: PermGroup, r1: Bij, G2: PermGroup, r2: Bij):
    """Intersection of the cosets {g then r1 : g in G1} and {h then r2 : h in G2}.

    Both cosets consist of bijections from one common domain onto one common
    codomain.  Returns (group, rep) with intersection {k then rep : k in group}
    where group = G1 meet G2, or None when the intersection is empty.
    """
    if tuple(sorted(r1.dom)) != tuple(sorted(r2.dom)) or set(r1.img) != set(r2.img):
        raise ValueError("coset shape mismatch")
    if G1.domain != G2.domain:
        raise ValueError("domain mismatch")
    m = r1.then(r2.inv())  # g r1 = h r2  <=>  h = g then m
    chB = G2.chain()

    def prune(b, img, partial):
        comp = {v: m(i) for v, i in partial.items()}
        comp[b] = m(img)
        return _prefix_feasible(chB, comp)

    def full(g):
        return chB.contains(g.then(m))

    w = find_element(G1, prune, full)
    if w is None:
        return None
    return intersect_groups(G1, G2), w.then(r1)


def is_giant(G: PermGroup, acted=None) -> str:
    """Classify as 'symmetric', 'alternating' or 'neither' on the acted set."""
    if acted is not None and set(acted) != set(G.domain):
        G = G.restriction(acted)
    n = len(G.domain)
    full = factorial(n)
    o = G.order
    if o == full:
        return "symmetric"
    if n >= 2 and o == full // 2 and G.is_transitive():
        return "alternating"
    return "neither"


def relative_base(D: PermGroup, P: PermGroup) -> list:
    """Point set X with pointwise stabilizer D_(X) <= P (greedy).

    Prefers a point whose stabilization at least halves the index
    (D_(X) : D_(X) meet P); falls back to any index-reducing point.
    """
    if not P.is_subgroup_of(D):
        raise ValueError("P is not a subgroup of D")
    X: list = []
    K = D
    KP = intersect_groups(K, P)
    while KP.order != K.order:
        idx = K.order // KP.order
        best = None
        fallback = None
        shrink = None
        for v in D.domain:
            if v in X:
                continue
            Kv = K.pointwise_stabilizer([v])
            if Kv.order == K.order:
                continue
            KPv = intersect_groups(Kv, P)
            nidx = Kv.order // KPv.order
            if shrink is None:
                shrink = (v, Kv, KPv)
            if nidx < idx and fallback is None:
                fallback = (v, Kv, KPv)
            if nidx * 2 <= idx:
                best = (v, Kv, KPv)
                break
        # a point halving the index, else any index reducer, else any point
        # shrinking the group (progress within base length is guaranteed)
        pick = best or fallback or shrink
        if pick is None:
            raise RuntimeError("relative_base: no progress point")
        v, K, KP = pick
        X.append(v)
    return X


class GroupCoset:
    """A coset {g then rep : g in group} of bijections, or the empty coset."""

    __slots__ = ("group", "rep")

    def __init__(self, group: PermGroup | None, rep: Bij | None):
        self.group = group
        self.rep = rep

    @classmethod
    def empty(cls) -> "GroupCoset":
        return cls(None, None)

    @property
    def is_empty(self) -> bool:
        return self.group is None

    @property
    def size(self) -> int:
        return 0 if self.is_empty else self.group.order

    def __bool__(self):
        return not self.is_empty

    def __contains__(self, b: Bij) -> bool:
        if self.is_empty:
            return False
        if tuple(sorted(b.dom)) != self.group.domain or set(b.img) != set(self.rep.img):
            return False
        return b.then(self.rep.inv()) in self.group

    def elements(self):
        if self.is_empty:
            return
        for g in self.group.elements():
            yield g.then(self.rep)

    def __eq__(self, other):
        if not isinstance(other, GroupCoset):
            return NotImplemented
        if self.is_empty or other.is_empty:
            return self.is_empty and other.is_empty
        return self.group == other.group and other.rep in self

    def __repr__(self):
        if self.is_empty:
            return "GroupCoset.empty()"
        return f"GroupCoset(order={self.group.order})"
