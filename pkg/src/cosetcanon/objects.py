"""Hereditarily finite combinatorial objects and labeling cosets.

An object over a ground set V is a vertex atom, a labeling-coset atom, an
inert literal, a tuple of objects or a set of objects.  Applying a bijection
mu sends vertex atoms to mu(v), coset atoms Delta*rho to mu^-1*Delta*rho and
containers memberwise; literals are fixed.

Ordered objects (ground set {1..n}) carry a total order: objects are ranked
by kind (integer < coset < tuple < set < literal), integers by value,
tuples lexicographically then by length, sets as sorted member sequences,
and cosets by (group order, canonical generators, minimal representative).
The encoding of an ordered object is a nested tuple whose native Python
comparison realizes exactly that order.
"""

from __future__ import annotations

from .perms import (
    Bij,
    PermGroup,
    cycle_string,
    min_label_rep,
    parse_cycles,
)

__all__ = [
    "LabelingCoset",
    "Vert",
    "Lit",
    "Tup",
    "SetOf",
    "CombObject",
    "label_coset_of",
    "apply_bijection",
    "ordered_encoding",
    "compare_ordered",
    "internal_key",
    "ground_of",
    "induced_coset",
    "join_cosets",
    "replace_objects",
    "object_to_text",
    "object_from_text",
    "K_INT",
    "K_COSET",
    "K_TUP",
    "K_SET",
    "K_LIT",
]

K_INT, K_COSET, K_TUP, K_SET, K_LIT = 0, 1, 2, 3, 4


class LabelingCoset:
    """A coset Delta*rho of labelings of an unordered ground set V.

    Members are the bijections {d then rho : d in Delta} from V onto
    {1..|V|}.  Two values are equal iff the groups are equal and the
    representatives lie in a common coset; the cached minimal member makes
    that test cheap.
    """

    __slots__ = ("ground", "group", "rep", "_minrep", "_enc_cache")

    def __init__(self, group: PermGroup, rep: Bij):
        if tuple(sorted(rep.dom)) != group.domain:
            raise ValueError("representative domain mismatch")
        n = len(group.domain)
        if sorted(rep.img) != list(range(1, n + 1)):
            raise ValueError("representative must label onto {1..n}")
        self.ground = group.domain
        self.group = group
        self.rep = rep
        self._minrep = None
        self._enc_cache = {}

    @classmethod
    def label(cls, ground) -> "LabelingCoset":
        """Label(V): all labelings of the ground set."""
        pts = tuple(sorted(ground))
        rep = Bij(pts, tuple(range(1, len(pts) + 1)))
        return cls(PermGroup.symmetric(pts), rep)

    @classmethod
    def single(cls, rho: Bij) -> "LabelingCoset":
        """The singleton coset of one labeling (trivial group)."""
        return cls(PermGroup.trivial(tuple(sorted(rho.dom))), rho)

    @property
    def size(self) -> int:
        return self.group.order

    def min_rep(self) -> Bij:
        m = self._minrep
        if m is None:
            m = self._minrep = min_label_rep(self.group, self.rep)
        return m

    def __contains__(self, lam: Bij) -> bool:
        if tuple(sorted(lam.dom)) != self.ground:
            return False
        return lam.then(self.rep.inv()) in self.group

    def members(self):
        for d in self.group.elements():
            yield d.then(self.rep)

    def __eq__(self, other):
        if not isinstance(other, LabelingCoset):
            return NotImplemented
        return (
            self.ground == other.ground
            and self.min_rep() == other.min_rep()
            and self.group == other.group
        )

    def __hash__(self):
        return hash((self.ground, self.group.order, self.min_rep()))

    def __repr__(self):
        return f"LabelingCoset(|V|={len(self.ground)}, order={self.size})"

    def apply(self, mu: Bij) -> "LabelingCoset":
        """(Delta rho)^mu = mu^-1 Delta rho over the new ground set."""
        return LabelingCoset(self.group.conjugate(mu), mu.inv().then(self.rep))

    def conjugated_group(self) -> PermGroup:
        """Delta^Can = rho^-1 Delta rho over {1..n} (representative-free)."""
        return self.group.conjugate(self.rep)

    def ordered_encoding(self, lam: Bij) -> tuple:
        """Encoding of (Delta rho)^lam as an ordered coset atom."""
        cached = self._enc_cache.get(lam)
        if cached is None:
            grp = self.group.conjugate(lam)
            rep = lam.inv().then(self.rep)
            cangens = tuple(g.img for g in grp.canonical_gens())
            cached = (K_COSET, grp.order, cangens, min_label_rep(grp, rep).img)
            self._enc_cache[lam] = cached
        return cached

    def restriction_set(self, W) -> frozenset:
        """The restriction (Delta rho)|_W as a set of image tuples over sorted W."""
        Ws = tuple(sorted(W))
        m = self.rep
        stab = self.group.pointwise_stabilizer(Ws)
        from .perms import coset_transversal

        reps = coset_transversal(self.group, stab)
        return frozenset(tuple(m(r(w)) for w in Ws) for r in reps)

    def blocks_restriction_set(self, blocks) -> frozenset:
        """The induced restriction on a block partition, as a set of tuples of
        frozen label sets (one entry per block, blocks in sorted order)."""
        blks = sorted((frozenset(b) for b in blocks), key=min)
        m = self.rep
        stab = self.group.blockwise_stabilizer(blks)
        from .perms import coset_transversal

        reps = coset_transversal(self.group, stab)
        out = set()
        for r in reps:
            out.add(tuple(frozenset(m(r(v)) for v in b) for b in blks))
        return frozenset(out)


class Vert:
    __slots__ = ("v",)

    def __init__(self, v: int):
        self.v = v

    def __eq__(self, other):
        return isinstance(other, Vert) and self.v == other.v

    def __hash__(self):
        return hash(("Vert", self.v))

    def __repr__(self):
        return f"Vert({self.v})"


class Lit:
    """An inert atom carrying an already-ordered payload (a nested tuple)."""

    __slots__ = ("payload",)

    def __init__(self, payload):
        self.payload = payload if isinstance(payload, tuple) else (payload,)

    def __eq__(self, other):
        return isinstance(other, Lit) and self.payload == other.payload

    def __hash__(self):
        return hash(("Lit", self.payload))

    def __repr__(self):
        return f"Lit({self.payload!r})"


class Tup:
    __slots__ = ("items",)

    def __init__(self, items):
        self.items = tuple(items)

    def __eq__(self, other):
        return isinstance(other, Tup) and self.items == other.items

    def __hash__(self):
        return hash(("Tup", self.items))

    def __repr__(self):
        return f"Tup{self.items!r}"


class SetOf:
    """A set of objects; members deduplicate and iterate in a deterministic
    internal order (by the identity-labeling encoding over the ground set)."""

    __slots__ = ("members",)

    def __init__(self, members):
        uniq = {}
        for m in members:
            uniq[internal_key(m)] = m
        self.members = tuple(uniq[k] for k in sorted(uniq))

    def __eq__(self, other):
        return isinstance(other, SetOf) and self.members == other.members

    def __hash__(self):
        return hash(("SetOf", self.members))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __repr__(self):
        return f"SetOf{self.members!r}"


CombObject = (Vert, Lit, Tup, SetOf, LabelingCoset)


def label_coset_of(group: PermGroup, rep: Bij) -> LabelingCoset:
    return LabelingCoset(group, rep)


def ground_of(obj) -> frozenset:
    """Ground-set elements referenced anywhere inside the object."""
    if isinstance(obj, Vert):
        return frozenset([obj.v])
    if isinstance(obj, Lit):
        return frozenset()
    if isinstance(obj, LabelingCoset):
        return frozenset(obj.ground)
    if isinstance(obj, Tup):
        out = frozenset()
        for m in obj.items:
            out |= ground_of(m)
        return out
    if isinstance(obj, SetOf):
        out = frozenset()
        for m in obj.members:
            out |= ground_of(m)
        return out
    raise TypeError(f"not an object: {obj!r}")


def apply_bijection(obj, mu: Bij):
    """The image X^mu of an object under a bijection of ground sets."""
    if isinstance(obj, Vert):
        return Vert(mu(obj.v))
    if isinstance(obj, Lit):
        return obj
    if isinstance(obj, LabelingCoset):
        return obj.apply(mu)
    if isinstance(obj, Tup):
        return Tup(tuple(apply_bijection(m, mu) for m in obj.items))
    if isinstance(obj, SetOf):
        return SetOf([apply_bijection(m, mu) for m in obj.members])
    raise TypeError(f"not an object: {obj!r}")


def ordered_encoding(obj, lam: Bij | None = None) -> tuple:
    """Nested-tuple encoding of X^lam (or of an already ordered X).

    Python's native tuple comparison on encodings realizes the total order:
    kind rank first; ints by value; cosets by (order, canonical generators,
    minimal representative); tuples lexicographically then by length; sets
    as sorted member sequences; literals by payload.
    """
    if isinstance(obj, Vert):
        return (K_INT, obj.v if lam is None else lam(obj.v))
    if isinstance(obj, Lit):
        return (K_LIT,) + tuple(obj.payload)
    if isinstance(obj, LabelingCoset):
        if lam is None:
            lam = Bij.identity(obj.ground)
            if tuple(sorted(obj.ground)) != tuple(range(1, len(obj.ground) + 1)):
                raise ValueError("coset atom is not ordered")
        return obj.ordered_encoding(lam)
    if isinstance(obj, Tup):
        return (K_TUP,) + tuple(ordered_encoding(m, lam) for m in obj.items)
    if isinstance(obj, SetOf):
        return (K_SET,) + tuple(sorted(ordered_encoding(m, lam) for m in obj.members))
    raise TypeError(f"not an object: {obj!r}")


def compare_ordered(x, y) -> int:
    """Total order on ordered objects: -1, 0 or 1.

    Ordered objects are those produced by applying a labeling; their coset
    atoms must live over {1..n} (anything else raises ValueError).  Vertex
    atoms of ordered objects are the integer labels themselves.
    """
    ex, ey = ordered_encoding(x), ordered_encoding(y)
    return -1 if ex < ey else (0 if ex == ey else 1)


def internal_key(obj) -> tuple:
    """Deterministic (not isomorphism-invariant) structural key.

    Vertex atoms key by their raw id, cosets by their ground plus canonical
    data under the position labeling of their own ground.  Injective on
    objects, so it doubles as an equality key; it never feeds canonization
    decisions, only storage order and deduplication.
    """
    if isinstance(obj, Vert):
        return ("v", obj.v)
    if isinstance(obj, Lit):
        return ("lit", obj.payload)
    if isinstance(obj, LabelingCoset):
        g = obj.ground
        lam = Bij(g, tuple(range(1, len(g) + 1)))
        return ("coset", g, obj.ordered_encoding(lam))
    if isinstance(obj, Tup):
        return ("tup", tuple(internal_key(m) for m in obj.items))
    if isinstance(obj, SetOf):
        return ("set", tuple(sorted(internal_key(m) for m in obj.members)))
    raise TypeError(f"not an object: {obj!r}")


def induced_coset(coset: LabelingCoset, members):
    """Induced labeling coset (Delta rho)[X] on a set of objects.

    ``members`` is a sequence of distinct objects over the coset's ground
    set, permuted by Delta.  Returns (induced LabelingCoset over point set
    {0..m-1}, members list in index order).  The induced representative
    orders members by the total order of their rho-images.
    """
    ground = coset.ground
    members = list(members)
    keyed = sorted({internal_key(o): o for o in members}.items())
    if len(keyed) != len(members):
        raise ValueError("members are not distinct")
    objs = [o for _, o in keyed]

    def act(o, g):
        return apply_bijection(o, g)

    grp, _index = coset.group.induced(objs, act, key_fn=internal_key)
    encs = [ordered_encoding(o, coset.rep) for o in objs]
    if len(set(encs)) != len(encs):
        raise ValueError("distinct members share an image (degenerate input)")
    order = sorted(range(len(objs)), key=lambda i: encs[i])
    rank = {i: r + 1 for r, i in enumerate(order)}
    rep = Bij(tuple(range(len(objs))), tuple(rank[i] for i in range(len(objs))))
    return LabelingCoset(grp, rep), objs


def join_cosets(cosets) -> LabelingCoset:
    """Smallest labeling coset containing every member of the sequence."""
    cosets = list(cosets)
    if not cosets:
        raise ValueError("join of an empty sequence")
    ground = cosets[0].ground
    for c in cosets:
        if c.ground != ground:
            raise ValueError("mixed ground sets")
    r1 = cosets[0].rep
    gens = []
    for c in cosets:
        gens.extend(c.group.gens)
        d = c.rep.then(r1.inv())
        if not d.is_identity:
            gens.append(d)
    return LabelingCoset(PermGroup(ground, gens), r1)


def replace_objects(members, cl_fn) -> list[LabelingCoset]:
    """Object replacement: swap members for their canonical labelings.

    Every member must have the same canonical form (callers partition by
    form first); violations raise ValueError.
    """
    out = []
    forms = set()
    for m in members:
        res = cl_fn(m)
        coset = res.coset if hasattr(res, "coset") else res
        lam = coset.rep
        forms.add(ordered_encoding(m, lam))
        out.append(coset)
    if len(forms) > 1:
        raise ValueError("members have unequal canonical forms")
    return out


# ---------------------------------------------------------------------------
# text serialization (round-trip stable)
# ---------------------------------------------------------------------------


def object_to_text(obj) -> str:
    if isinstance(obj, Vert):
        return str(obj.v)
    if isinstance(obj, Lit):
        return "#" + _payload_text(obj.payload)
    if isinstance(obj, Tup):
        return "(" + ", ".join(object_to_text(m) for m in obj.items) + ")"
    if isinstance(obj, SetOf):
        return "{" + ", ".join(object_to_text(m) for m in obj.members) + "}"
    if isinstance(obj, LabelingCoset):
        gens = ", ".join(cycle_string(g) for g in obj.group.gens) or "()"
        rep = ", ".join(f"{v}->{obj.rep(v)}" for v in obj.ground)
        return f"coset[{gens}; {rep}]"
    raise TypeError(f"not an object: {obj!r}")


def _payload_text(p) -> str:
    if isinstance(p, tuple):
        return "(" + ", ".join(_payload_text(x) for x in p) + ")"
    return str(p)


class _Parser:
    def __init__(self, text):
        self.text = text
        self.i = 0

    def error(self, msg):
        raise ValueError(f"object parse error at {self.i}: {msg}")

    def ws(self):
        while self.i < len(self.text) and self.text[self.i] in " \t\n":
            self.i += 1

    def peek(self):
        self.ws()
        return self.text[self.i] if self.i < len(self.text) else ""

    def expect(self, ch):
        self.ws()
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.i += 1

    def int_tok(self):
        self.ws()
        j = self.i
        if self.i < len(self.text) and self.text[self.i] == "-":
            self.i += 1
        while self.i < len(self.text) and self.text[self.i].isdigit():
            self.i += 1
        if j == self.i:
            self.error("expected integer")
        return int(self.text[j:self.i])

    def parse(self):
        c = self.peek()
        if c == "(":
            return self.parse_tuple()
        if c == "{":
            return self.parse_set()
        if c == "#":
            self.i += 1
            return Lit(self.parse_payload())
        if self.text.startswith("coset[", self.i):
            return self.parse_coset()
        return Vert(self.int_tok())

    def parse_list(self, close):
        out = []
        if self.peek() == close:
            self.i += 1
            return out
        while True:
            out.append(self.parse())
            c = self.peek()
            if c == ",":
                self.i += 1
                continue
            if c == close:
                self.i += 1
                return out
            self.error(f"expected ',' or {close!r}")

    def parse_tuple(self):
        self.expect("(")
        return Tup(self.parse_list(")"))

    def parse_set(self):
        self.expect("{")
        return SetOf(self.parse_list("}"))

    def parse_payload(self):
        if self.peek() == "(":
            self.i += 1
            out = []
            if self.peek() == ")":
                self.i += 1
                return tuple(out)
            while True:
                out.append(self.parse_payload())
                c = self.peek()
                if c == ",":
                    self.i += 1
                    continue
                if c == ")":
                    self.i += 1
                    return tuple(out)
                self.error("bad literal payload")
        return self.int_tok()

    def parse_coset(self):
        self.i += len("coset[")
        j = self.text.index(";", self.i)
        gens_text = self.text[self.i:j]
        self.i = j + 1
        k = self.text.index("]", self.i)
        rep_text = self.text[self.i:k]
        self.i = k + 1
        mapping = {}
        for part in rep_text.split(","):
            part = part.strip()
            if not part:
                continue
            v, w = part.split("->")
            mapping[int(v)] = int(w)
        rep = Bij.from_dict(mapping)
        dom = tuple(sorted(mapping))
        gens = []
        for part in _split_cycles(gens_text):
            gens.append(parse_cycles(part, dom))
        return LabelingCoset(PermGroup(dom, gens), rep)


def _split_cycles(text):
    out = []
    depth = 0
    cur = ""
    for ch in text:
        if ch == "," and depth == 0:
            if cur.strip():
                out.append(cur.strip())
            cur = ""
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


def object_from_text(text: str):
    p = _Parser(text)
    obj = p.parse()
    p.ws()
    if p.i != len(p.text):
        p.error("trailing input")
    return obj
