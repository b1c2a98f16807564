"""Signed graphs: the basis atoms of all the graph operads.

A graph is stored with an explicit ordered edge list; the edge order is the
only orientation data and carries all signs (edges are odd).  Two graphs
related by relabelling the unnumbered internal vertices and reordering the
edge list denote the same basis element up to the parity of the induced edge
permutation, so `canonical_form` picks the lexicographically smallest
relabelled, sorted edge list and tracks that parity.  A graph with an odd
symmetry (e.g. a double edge) is zero.

Vertices are tuples:
    ('e', i)  external, numbered 1..m        ('i', j)  internal, unnumbered
    ('b', j)  type II (function slot)        ('out',) / ('in',)  special
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction

GRA = "gra"
DGRA = "dgra"
GRA1 = "gra1"
SGRA = "sgra"
SGRA1 = "sgra1"

KINDS = (GRA, DGRA, GRA1, SGRA, SGRA1)
DIRECTED = {DGRA, GRA1, SGRA, SGRA1}

OUT = ("out",)
IN = ("in",)


def ext(i):
    return ("e", i)


def internal(j):
    return ("i", j)


def typeII(j):
    return ("b", j)


_VCLASS_RANK = {"e": 0, "out": 1, "in": 2, "b": 3, "i": 4}


def vkey(v):
    return (_VCLASS_RANK[v[0]], v[1] if len(v) > 1 else 0)


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class SignedGraph:
    """Immutable graph with ordered edges; hashable, usable as a LinComb key."""

    kind: str
    external_count: int
    edges: tuple  # tuple of (tail, head) vertex pairs
    internal_count: int = 0
    typeII_count: int = 0
    marked_edge: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((tuple(a), tuple(b)) for a, b in self.edges))
        self.validate()

    # -- structure ---------------------------------------------------------

    def vertices(self):
        vs = [ext(i) for i in range(1, self.external_count + 1)]
        if self.kind == GRA1:
            vs += [OUT, IN]
        if self.kind == SGRA1:
            vs.append(OUT)
        if self.kind in (SGRA, SGRA1):
            lo = 0 if self.kind == SGRA1 else 1
            vs += [typeII(j) for j in range(lo, lo + self.typeII_count)]
        vs += [internal(j) for j in range(1, self.internal_count + 1)]
        return vs

    def degree(self):
        return 2 * self.internal_count - len(self.edges)

    def valence(self, v):
        return sum((a == v) + (b == v) for a, b in self.edges)

    def edges_at(self, v):
        """Indices of edge ends at v as (edge index, end index 0=tail/1=head)."""
        out = []
        for i, e in enumerate(self.edges):
            for end in (0, 1):
                if e[end] == v:
                    out.append((i, end))
        return out

    def loop_order(self):
        verts = self.vertices()
        comp = _component_count(verts, self.edges)
        return len(self.edges) - len(verts) + comp

    # -- validity ----------------------------------------------------------

    def validate(self):
        if self.kind not in KINDS:
            raise GraphError(f"unknown graph kind {self.kind!r}")
        if self.kind in (GRA, DGRA, GRA1) and self.typeII_count:
            raise GraphError(f"{self.kind} graphs have no type II vertices")
        if self.internal_count > 8:
            raise GraphError("internal vertex count above the hard limit 8")
        vs = set(self.vertices())
        for a, b in self.edges:
            if a not in vs or b not in vs:
                raise GraphError(f"edge ({_vstr(a)},{_vstr(b)}) uses an unknown vertex")
            if a == b:
                raise GraphError(f"tadpole at vertex {_vstr(a)}")
            if b == OUT:
                raise GraphError("incoming edge at out")
            if a == IN:
                raise GraphError("outgoing edge at in")
            if a[0] == "b":
                raise GraphError(f"outgoing edge at type II vertex {_vstr(a)}")
            if self.kind == GRA and vkey(a) > vkey(b):
                raise GraphError("undirected edge stored out of normal order")
        if self.marked_edge is not None and not (0 <= self.marked_edge < len(self.edges)):
            raise GraphError("marked edge index out of range")

    # -- printing ----------------------------------------------------------

    def __str__(self):
        return format_graph(self)

    def key(self):
        return format_graph(self)


def _component_count(verts, edges):
    parent = {v: v for v in verts}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(v) for v in verts})


def perm_parity(perm):
    """Parity (+1/-1) of a permutation given as a tuple of images of 0..len-1."""
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, clen = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return sign


def _sort_sign(items):
    """Stable sort of a list of comparable keys, returning (sorted, parity).

    Returns None in place of the parity if two keys coincide (odd symmetry:
    the element is zero).
    """
    indexed = sorted(range(len(items)), key=lambda i: (items[i], i))
    for a, b in zip(indexed, indexed[1:]):
        if items[a] == items[b]:
            return None, None
    perm = [0] * len(items)
    for new_pos, old_pos in enumerate(indexed):
        perm[old_pos] = new_pos
    return [items[i] for i in indexed], (perm_parity(tuple(perm)), indexed)


def canonical_form(g: SignedGraph):
    """Return (canonical graph, sign) or (None, 0) when g is zero.

    Canonical = lexicographically minimal sorted edge list over all
    relabellings of the internal vertices; sign = parity of the edge
    permutation.  If the minimum is reached with both signs the graph has an
    odd symmetry and is zero.
    """
    g.validate()
    k = g.internal_count
    best = None  # (edge tuple, marked position)
    signs = set()
    for perm in itertools.permutations(range(1, k + 1)):
        relabel = {internal(j): internal(perm[j - 1]) for j in range(1, k + 1)}
        edges = []
        for a, b in g.edges:
            a = relabel.get(a, a)
            b = relabel.get(b, b)
            if g.kind == GRA and vkey(a) > vkey(b):
                a, b = b, a
            edges.append((vkey(a), vkey(b), a, b))
        srt, sig = _sort_sign(edges)
        if srt is None:
            return None, 0
        parity, order = sig
        key = tuple((a, b) for _, _, a, b in srt)
        mark = None
        if g.marked_edge is not None:
            mark = order.index(g.marked_edge)
        cand = (key, mark)
        if best is None or cand < best:
            best = cand
            signs = {(parity, mark)}
        elif cand == best:
            signs.add((parity, mark))
    if len({p for p, _ in signs}) > 1:
        return None, 0
    key, mark = best
    parity = next(iter(signs))[0]
    cg = SignedGraph(
        kind=g.kind,
        external_count=g.external_count,
        edges=key,
        internal_count=g.internal_count,
        typeII_count=g.typeII_count,
        marked_edge=mark,
    )
    return cg, parity


def is_canonical(g: SignedGraph):
    cg, s = canonical_form(g)
    return cg == g and s == 1


# ---------------------------------------------------------------------------
# Linear combinations


class LinComb:
    """Finite formal sum of canonical graphs (or trees) with Fraction coefficients."""

    def __init__(self, terms=()):
        self.terms = {}
        if isinstance(terms, dict):
            terms = terms.items()
        for key, coef in terms:
            self.add(key, coef)

    def add(self, key, coef):
        coef = Fraction(coef)
        if coef == 0:
            return self
        cur = self.terms.get(key, Fraction(0)) + coef
        if cur == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = cur
        return self

    def add_graph(self, g: SignedGraph, coef=1):
        """Canonicalize g and accumulate; zero graphs are dropped."""
        cg, s = canonical_form(g)
        if cg is not None:
            self.add(cg, Fraction(coef) * s)
        return self

    def combine(self, coef, other: "LinComb"):
        """self + coef * other, in place; returns self."""
        for key, c in other.terms.items():
            self.add(key, Fraction(coef) * c)
        return self

    def scaled(self, coef):
        return LinComb((k, Fraction(coef) * c) for k, c in self.terms.items())

    def map_terms(self, fn):
        """Apply fn(key) -> LinComb to every term and sum with coefficients."""
        out = LinComb()
        for key, c in self.terms.items():
            out.combine(c, fn(key))
        return out

    def is_zero(self):
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        return isinstance(other, LinComb) and self.terms == other.terms

    def __iter__(self):
        return iter(sorted(self.terms.items(), key=lambda kc: str(kc[0])))

    def __repr__(self):
        if self.is_zero():
            return "0"
        bits = []
        for key, c in self:
            bits.append(f"({c})*{key}")
        return " + ".join(bits)


def lincomb_combine(a: LinComb, coef, b: LinComb) -> LinComb:
    """a + coef*b as a new LinComb; kinds of graph keys must agree."""
    kinds = {g.kind for g in a.terms} | {g.kind for g in b.terms}
    if len(kinds) > 1:
        raise GraphError(f"cannot combine terms of kinds {sorted(kinds)}")
    out = LinComb(a.terms)
    return out.combine(coef, b)


# ---------------------------------------------------------------------------
# Text format
#
#   gra{n=3; e=[(1,2),(2,3)]}          dgra{n=2; e=[(1>2)]}
#   gra1{m=2; e=[(out>1),(1>in)]}      sgra{m=1,n=2; e=[(1>b1),(1>b2)]}
#   sgra1{m=1,n=2; e=[(out>b0)]}
#
# Internal vertices appear as i1..ik with an explicit count: gra{n=2,i=1; ...}.
# Type II vertices are b1..bn for sgra and b0..b(n-1) for sgra1 (b0 = in slot).
# A marked edge carries a trailing '!'.


def _vstr(v):
    if v == OUT:
        return "out"
    if v == IN:
        return "in"
    tag, idx = v
    return {"e": "", "i": "i", "b": "b"}[tag] + str(idx)


def format_graph(g: SignedGraph) -> str:
    params = []
    if g.kind in (GRA, DGRA):
        params.append(f"n={g.external_count}")
    else:
        params.append(f"m={g.external_count}")
    if g.kind in (SGRA, SGRA1):
        params.append(f"n={g.typeII_count}")
    if g.internal_count:
        params.append(f"i={g.internal_count}")
    sep = ">" if g.kind in DIRECTED else ","
    bits = []
    for i, (a, b) in enumerate(g.edges):
        mark = "!" if i == g.marked_edge else ""
        bits.append(f"({_vstr(a)}{sep}{_vstr(b)}){mark}")
    return f"{g.kind}{{{','.join(params)}; e=[{','.join(bits)}]}}"


_GRAPH_RE = re.compile(r"^(gra1|sgra1|dgra|sgra|gra)\{([^;}]*);e=\[(.*)\]\}$")
_EDGE_RE = re.compile(r"\(([^(),>]+)(>|,)([^(),>]+)\)(!?)")


class GraphParseError(GraphError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def parse_graph(text: str) -> SignedGraph:
    """Parse the whitespace-insensitive graph literal format."""
    stripped = "".join(text.split())
    m = _GRAPH_RE.match(stripped)
    if not m:
        raise GraphParseError("not a graph literal", 0)
    kind, params, body = m.groups()
    vals = {}
    if params:
        for part in params.split(","):
            if "=" not in part:
                raise GraphParseError(f"bad parameter {part!r}", stripped.index(part))
            k, v = part.split("=", 1)
            if k not in ("n", "m", "i") or not v.isdigit():
                raise GraphParseError(f"bad parameter {part!r}", stripped.index(part))
            vals[k] = int(v)
    directed = kind in DIRECTED

    def vert(tok, pos):
        if tok == "out":
            return OUT
        if tok == "in":
            return IN
        if tok.isdigit():
            return ext(int(tok))
        if tok[0] in "ib" and tok[1:].isdigit():
            return (tok[0], int(tok[1:]))
        raise GraphParseError(f"bad vertex token {tok!r}", pos)

    edges = []
    marked = None
    pos = 0
    body_start = stripped.index("e=[") + 3
    while pos < len(body):
        if body[pos] == ",":
            pos += 1
            continue
        m2 = _EDGE_RE.match(body, pos)
        if not m2:
            raise GraphParseError("bad edge syntax", body_start + pos)
        a, sep, b, mark = m2.groups()
        if directed and sep != ">" or not directed and sep != ",":
            raise GraphParseError("wrong edge separator for this graph kind", body_start + pos)
        va = vert(a, body_start + pos)
        vb = vert(b, body_start + pos)
        if kind == GRA and vkey(va) > vkey(vb):
            va, vb = vb, va
        if mark:
            marked = len(edges)
        edges.append((va, vb))
        pos = m2.end()

    if kind in (GRA, DGRA):
        external = vals.get("n", 0)
        n2 = 0
    else:
        external = vals.get("m", 0)
        n2 = vals.get("n", 0)
    ic = vals.get("i", 0)
    try:
        return SignedGraph(
            kind=kind,
            external_count=external,
            edges=tuple(edges),
            internal_count=ic,
            typeII_count=n2,
            marked_edge=marked,
        )
    except GraphError as exc:
        raise GraphParseError(str(exc), 0) from exc


# ---------------------------------------------------------------------------
# LinComb JSON


def lincomb_to_json(lc: LinComb):
    kinds = {g.kind for g in lc.terms}
    kind = kinds.pop() if len(kinds) == 1 else None
    return {
        "kind": kind,
        "terms": [
            {"coef": str(c), "graph": format_graph(g)} for g, c in lc
        ],
    }


def lincomb_from_json(data) -> LinComb:
    out = LinComb()
    for term in data["terms"]:
        out.add(parse_graph(term["graph"]), Fraction(term["coef"]))
    return out
