"""Rooted planar trees: the PT and braces operads, KS1, and Br-infinity trees.

Trees are stored as immutable nested tuples with explicit child order:

    ("e", label, children)     external, numbered
    ("i", children)            internal (unnumbered, >= 2 children in Br)
    ("b", deco, children)      blue vertex decorated by another tree
    ("r", deco, children)      red vertex (a composed decoration)
    ("u",)                     unit vertex (no children)
    ("in",)                    the distinguished input (no children)
    ("out", children)          cylinder root of PT1/KS1 trees; the edge to
                               children[0] is the marked one

Edges are labelled implicitly by depth-first order and are odd; blue
vertices are odd as well.  Every operation builds its result with an
explicit raw order of these odd atoms and the constructor converts to the
canonical (DFS) order, tracking the sign of the permutation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .graphs import GraphError, LinComb

PT = "pt"
BR = "br"
PT1 = "pt1"
KS1 = "ks1"
BINF = "binf"
BBR = "bbr"

_CYL = (PT1, KS1)


class TreeError(GraphError):
    pass


@dataclass(frozen=True)
class PlanarTree:
    kind: str
    root: tuple

    def __post_init__(self):
        validate_tree(self.kind, self.root)

    def __str__(self):
        return print_tree(self)

    def arity(self):
        return len(external_labels(self.root))

    def degree(self):
        return tree_degree(self.kind, self.root)


# ---------------------------------------------------------------------------
# Structure helpers (on the nested-tuple form)


def node_kind(n):
    return n[0]


def node_children(n):
    k = n[0]
    if k in ("u", "in"):
        return ()
    if k in ("e",):
        return n[2]
    if k in ("b", "r"):
        return n[2]
    return n[1]  # "i", "out"


def node_deco(n):
    return n[1] if n[0] in ("b", "r") else None


def _with_children(n, children):
    k = n[0]
    children = tuple(children)
    if k == "e":
        return ("e", n[1], children)
    if k in ("b", "r"):
        return (k, n[1], children)
    if k in ("i", "out"):
        return (k, children)
    raise TreeError(f"{k} vertices cannot have children")


def iter_vertices(n):
    """All vertices of the tree including decoration vertices, DFS order."""
    yield n
    deco = node_deco(n)
    if deco is not None:
        yield from iter_vertices(deco)
    for c in node_children(n):
        yield from iter_vertices(c)


def external_labels(n):
    return sorted(v[1] for v in iter_vertices(n) if v[0] == "e")


def count_vertices(n):
    return sum(1 for _ in iter_vertices(n))


def count_edges(n, is_root=True):
    """Edges of the tree itself plus all decoration edges.

    For a cylinder root the marked edge (to children[0]) is not labelled and
    not counted for degree purposes.
    """
    total = 0
    deco = node_deco(n)
    if deco is not None:
        total += count_edges(deco, is_root=True)
    kids = node_children(n)
    for idx, c in enumerate(kids):
        skip = is_root and n[0] == "out" and idx == 0
        total += (0 if skip else 1) + count_edges(c, is_root=False)
    return total


def tree_degree(kind, root):
    internals = sum(1 for v in iter_vertices(root) if v[0] == "i")
    blues = sum(1 for v in iter_vertices(root) if v[0] == "b")
    deg = 2 * internals - count_edges(root) - blues
    if kind == BBR:
        deg -= 1
    return deg


def validate_tree(kind, root):
    if kind in _CYL:
        if root[0] != "out":
            raise TreeError("cylinder trees must be rooted at out")
        if not node_children(root):
            raise TreeError("out needs at least the marked edge")
    else:
        if root[0] == "out":
            raise TreeError(f"{kind} trees have no out vertex")
    n_in = 0
    labels = []
    for v in iter_vertices(root):
        k = v[0]
        if k == "in":
            n_in += 1
        elif k == "e":
            labels.append(v[1])
        elif k == "i":
            # in the ambient twisted operad internal vertices may have any
            # valence; the braces condition >= 2 is a membership predicate
            # (is_braces) except for br-infinity trees where it is structural
            if kind in (BINF, BBR) and len(node_children(v)) < 2:
                raise TreeError("internal vertex with fewer than 2 children")
        if k in ("u", "in") and v is not root and False:
            pass
        if k == "u" and kind not in (KS1,):
            raise TreeError(f"unit vertices only occur in ks1 trees, not {kind}")
        if k == "b" and kind not in (BINF, BBR):
            raise TreeError(f"blue vertices only occur in br-infinity trees, not {kind}")
        if k == "r" and kind != BINF:
            raise TreeError(f"red vertices only occur in binf trees, not {kind}")
        if k == "in" and kind not in _CYL:
            raise TreeError(f"an in vertex requires a cylinder tree, not {kind}")
        deco = node_deco(v)
        if deco is not None and len(tuple(iter_vertices(deco))) == 1:
            raise TreeError("single-vertex decorations are not allowed")
    if kind in _CYL and n_in != 1:
        raise TreeError(f"cylinder tree needs exactly one in vertex, found {n_in}")
    if sorted(labels) != list(range(1, len(labels) + 1)):
        raise TreeError(f"external labels must be exactly 1..n, got {sorted(labels)}")
    if kind in (BINF, BBR):
        if len(tuple(iter_vertices(root))) == 1 or (
            node_deco(root) is not None and not node_children(root)
        ):
            raise TreeError("a br-infinity tree is not a lone (decorated) vertex")


# ---------------------------------------------------------------------------
# Mutable builder nodes


class _N:
    __slots__ = ("kind", "label", "children", "deco", "uid")
    _next = [0]

    def __init__(self, kind, label=None, children=None, deco=None):
        self.kind = kind
        self.label = label
        self.children = children if children is not None else []
        self.deco = deco
        _N._next[0] += 1
        self.uid = _N._next[0]


def _thaw(n) -> _N:
    deco = node_deco(n)
    node = _N(
        n[0],
        label=n[1] if n[0] == "e" else None,
        children=[_thaw(c) for c in node_children(n)],
        deco=_thaw(deco) if deco is not None else None,
    )
    return node


def _freeze(node: _N):
    kids = tuple(_freeze(c) for c in node.children)
    k = node.kind
    if k == "e":
        return ("e", node.label, kids)
    if k in ("b", "r"):
        return (k, _freeze(node.deco), kids)
    if k in ("i", "out"):
        return (k, kids)
    return (k,)


def _atoms(node: _N, is_root=True):
    """Canonical odd-atom order: DFS; a vertex contributes its parent edge,
    then (if blue) its blue atom, then its decoration's atoms, then its
    children's.  The marked edge of a cylinder root is skipped."""
    out = []

    def visit(v, parent_edge_atom):
        if parent_edge_atom is not None:
            out.append(parent_edge_atom)
        if v.kind == "b":
            out.append(("blue", v.uid))
        if v.deco is not None:
            visit(v.deco, None)
        for idx, c in enumerate(v.children):
            skip = v is node and node.kind == "out" and idx == 0
            visit(c, None if skip else ("edge", c.uid))

    visit(node, None)
    return out


def _find(node: _N, pred):
    for v in _iter_builder(node):
        if pred(v):
            return v
    return None


def _iter_builder(node: _N):
    yield node
    if node.deco is not None:
        yield from _iter_builder(node.deco)
    for c in node.children:
        yield from _iter_builder(c)


def _find_parent(root: _N, target: _N):
    for v in _iter_builder(root):
        for idx, c in enumerate(v.children):
            if c is target:
                return v, idx
    return None, None


def _perm_sign(raw, canonical):
    if len(raw) != len(canonical):
        raise TreeError("atom bookkeeping mismatch")
    pos = {a: i for i, a in enumerate(canonical)}
    perm = [pos[a] for a in raw]
    sign = 1
    seen = [False] * len(perm)
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


def _emit(out: LinComb, kind, root: _N, raw_atoms, coef):
    """Freeze, compute the sign from the raw atom order, and accumulate."""
    for v in _iter_builder(root):
        if v.kind in ("u", "in") and v.children:
            return  # unit/in acquired children: the term is zero
    sign = _perm_sign(raw_atoms, _atoms(root))
    out.add(PlanarTree(kind, _freeze(root)), Fraction(coef) * sign)


# ---------------------------------------------------------------------------
# Corners and planar insertion


def _corners(root: _N, skip_units=True):
    """Corner walk of the tree: (vertex, index) in contour order.

    Corner (v, k) sits between child k-1 and child k of v; vertices that
    must stay childless (in, and units when skip_units) contribute none.
    For a cylinder root the rim gaps are cyclic; the list starts inside the
    marked subtree and ends with the gap between the last child and the
    marked one.
    """

    def collect(v, acc):
        if v.kind == "in" or (skip_units and v.kind == "u"):
            return
        acc.append((v, 0))
        for j, cc in enumerate(v.children):
            collect(cc, acc)
            acc.append((v, j + 1))

    walk = []
    if root.kind == "out":
        for idx, c in enumerate(root.children):
            collect(c, walk)
            walk.append((root, idx + 1))
        return walk
    collect(root, walk)
    return walk


def _insert_at_corners(root: _N, corners, assignment, subtrees):
    """Attach subtrees at the assigned corners (weakly increasing indices)."""
    per_vertex = {}
    for sub, ci in zip(subtrees, assignment):
        v, k = corners[ci]
        per_vertex.setdefault(id(v), (v, []))[1].append((k, sub))
    for v, ins in per_vertex.values():
        shift = 0
        for k, sub in sorted(ins, key=lambda t: t[0]):
            v.children.insert(k + shift, sub)
            shift += 1


# ---------------------------------------------------------------------------
# Operadic composition


def _relabel(root: _N, table):
    for v in _iter_builder(root):
        if v.kind == "e":
            v.label = table(v.label)


def pt_compose(t1: PlanarTree, j: int, t2: PlanarTree) -> LinComb:
    """Insert t2 into the external vertex j of t1, summing over the planar
    redistributions of the children of j onto t2.  Edges of t2 get the
    higher labels."""
    if t1.kind not in (PT, BR) or t2.kind not in (PT, BR):
        raise TreeError("pt_compose expects pt or br trees")
    kind = BR if BR in (t1.kind, t2.kind) else PT
    n1, n2 = t1.arity(), t2.arity()
    if not 1 <= j <= n1:
        raise TreeError(f"slot {j} out of range 1..{n1}")
    out = LinComb()
    for root, raw in _compose_builders(t1.root, j, t2.root, n2):
        _emit(out, kind, root, raw, 1)
    return out


def _compose_builders(root1, j, root2, n2):
    """Yield (root, raw_atoms) builders for all planar insertions of tree 2
    into the external vertex j of tree 1, with operadic relabelling."""
    probe1 = _thaw(root1)
    v = _find(probe1, lambda x: x.kind == "e" and x.label == j)
    n_children = len(v.children)
    n_corners = len(_corners(_thaw(root2)))
    for assignment in itertools.combinations_with_replacement(range(n_corners), n_children):
        b1 = _thaw(root1)
        b2 = _thaw(root2)
        atoms1 = _atoms(b1)
        atoms2 = _atoms(b2)
        _relabel(b1, lambda lab: lab if lab < j else (0 if lab == j else lab + n2 - 1))
        _relabel(b2, lambda lab: lab + j - 1)
        v1 = _find(b1, lambda x: x.kind == "e" and x.label == 0)
        corners = _corners(b2)
        kids = list(v1.children)
        v1.children = []
        _insert_at_corners(b2, corners, assignment, kids)
        parent, idx = _find_parent(b1, v1)
        rename = {("edge", v1.uid): ("edge", b2.uid)}
        if parent is None:
            root = b2
        else:
            parent.children[idx] = b2
            root = b1
        raw = [rename.get(a, a) for a in atoms1] + atoms2
        yield root, raw


def pt1_insert(t1: PlanarTree, j: int, t2: PlanarTree) -> LinComb:
    """Right action: insert a pt/br tree into the numbered vertex j of a
    cylinder tree."""
    if t1.kind not in _CYL or t2.kind not in (PT, BR):
        raise TreeError("pt1_insert expects a cylinder tree and a pt/br tree")
    kind = KS1 if t1.kind == KS1 or t2.kind == BR else t1.kind
    n1, n2 = t1.arity(), t2.arity()
    if not 1 <= j <= n1:
        raise TreeError(f"slot {j} out of range 1..{n1}")
    out = LinComb()
    for root, raw in _compose_builders(t1.root, j, t2.root, n2):
        _emit(out, kind, root, raw, 1)
    return out


def ks1_unit() -> PlanarTree:
    return PlanarTree(PT1, ("out", (("in",),)))


def ks1_compose(t1: PlanarTree, t2: PlanarTree, normalize=True) -> LinComb:
    """Moperadic composition of cylinder trees: splice the marked subtree of
    t2 into the in vertex of t1 and reconnect the remaining rim subtrees in
    all planar ways around the cylinder.  Externals of t2 come first."""
    if t1.kind not in _CYL or t2.kind not in _CYL:
        raise TreeError("ks1_compose expects two cylinder trees")
    kind = KS1 if KS1 in (t1.kind, t2.kind) else PT1
    n1, n2 = t1.arity(), t2.arity()

    probe2 = _thaw(t2.root)
    n_rest = len(probe2.children) - 1
    # count available corners on a probe copy of the spliced tree
    pb1 = _thaw(t1.root)
    pb2 = _thaw(t2.root)
    pin = _find(pb1, lambda x: x.kind == "in")
    pp, pq = _find_parent(pb1, pin)
    walk = _cyl_walk_after(pb1, pp, pq, exclude=None)
    n_corners = len(walk)

    out = LinComb()
    for assignment in itertools.combinations_with_replacement(range(n_corners), n_rest):
        b1 = _thaw(t1.root)
        b2 = _thaw(t2.root)
        atoms1 = _atoms(b1)
        atoms2 = _atoms(b2)
        _relabel(b1, lambda lab: lab + n2)
        inn = _find(b1, lambda x: x.kind == "in")
        p, q = _find_parent(b1, inn)
        s0 = b2.children[0]
        rest = list(b2.children[1:])
        p.children[q] = s0
        rename = {("edge", inn.uid): ("edge", s0.uid)}
        corners = _cyl_walk_after(b1, p, q, exclude=s0)
        _insert_at_corners(b1, corners, assignment, rest)
        raw = [rename.get(a, a) for a in atoms1] + atoms2
        _emit(out, kind, b1, raw, 1)
    if kind == KS1 and normalize:
        out = lincomb_normalize(out)
    return out


def _cyl_walk_after(root: _N, p: _N, q: int, exclude):
    """Corner walk of the cylinder tree starting just after corner (p, q+1)
    and ending at (p, q); corners inside the excluded subtree are dropped.

    Here (p, q) is the position of the spliced edge.  The full rim walk is
    cyclic and the returned list is its rotation starting after the splice.
    """
    excluded = set()
    if exclude is not None:
        excluded = {id(v) for v in _iter_builder(exclude)}

    def collect(v, acc):
        if id(v) in excluded or v.kind in ("in", "u"):
            return
        acc.append((v, 0))
        for j, cc in enumerate(v.children):
            collect(cc, acc)
            acc.append((v, j + 1))

    walk = []
    for idx, c in enumerate(root.children):
        collect(c, walk)
        walk.append((root, idx + 1))
    # rotate to start just after corner (p, q+1). The splice sits at child q
    # of p, so the first legal corner is (p, q+1) and the last is (p, q).
    if p is root:
        start = (p, q + 1)
    else:
        start = (p, q + 1)
    if start in walk:
        i0 = walk.index(start)
        walk = walk[i0:] + walk[:i0]
    return walk


# ---------------------------------------------------------------------------
# KS1 normalization (the four unit-vertex relations)


def ks1_normalize(t: PlanarTree) -> LinComb:
    """Reduce a ks1 tree by the unit relations; returns the normal form."""
    if t.kind not in (PT1, KS1):
        raise TreeError("ks1_normalize expects a cylinder tree")
    out = LinComb()
    _normalize_into(out, _thaw(t.root), None, Fraction(1), t.kind)
    return out


def lincomb_normalize(lc: LinComb) -> LinComb:
    out = LinComb()
    for tree, coef in lc.terms.items():
        _normalize_into(out, _thaw(tree.root), None, coef, tree.kind)
    return out


def _normalize_into(out: LinComb, root: _N, raw, coef, kind):
    if raw is None:
        raw = _atoms(root)
    while True:
        redex = None
        for v in _iter_builder(root):
            for c in v.children:
                if c.kind != "u":
                    continue
                if v.kind == "e":
                    return  # relation 3: zero
                if v.kind == "out":
                    if v.children.index(c) != 0:
                        return  # relation 4: zero
                    continue
                if v.kind == "i":
                    if len(v.children) >= 3:
                        return  # relation 1: zero
                    redex = (v, c)
                    break
            if redex:
                break
        if not redex:
            break
        v, u = redex
        # relation 2: drop the unit and its internal parent, splice the edge
        others = [c for c in v.children if c is not u]
        w = others[0]
        parent, idx = _find_parent(root, v)
        if parent is None:
            raise TreeError("internal vertex cannot be the cylinder root")
        raw = _remove_atom(raw, ("edge", u.uid))
        if raw is None:
            return
        marked = parent.kind == "out" and idx == 0
        if marked:
            # the merged edge is the marked one: w's own atom disappears too
            raw = _remove_atom(raw, ("edge", w.uid))
        else:
            raw = _remove_atom(raw, ("edge", v.uid))
        if raw is None:
            return
        sign = raw.pop()
        coef = coef * sign
        parent.children[idx] = w
    sign = _perm_sign(raw, _atoms(root))
    out.add(PlanarTree(kind, _freeze(root)), coef * sign)


def _remove_atom(raw, atom):
    """Remove atom by moving it to the end; returns new list + sign appended."""
    if atom not in raw:
        return None
    i = raw.index(atom)
    sign = (-1) ** (len(raw) - 1 - i)
    raw = raw[:i] + raw[i + 1 :]
    return raw + [sign]


# ---------------------------------------------------------------------------
# Differentials


# Per-family signs of the twisted differential.  Edges are odd and new atoms
# are appended at the end of the raw order, so each knob is a global factor
# epsilon * (-1)^(p * #old atoms); the values below are pinned by d^2 = 0
# together with the closure of the braces suboperad (tests assert both).
_SIGN_SPLIT_EXT = (1, 1)
_SIGN_SPLIT_INT = (1, 1)
_SIGN_PENDANT = (-1, 1)
_SIGN_ROOT = (-1, 1)
_SIGN_BR = (1, 0)
_SIGN_BI = (1, 0)


def _family_sign(knob, n_old_atoms):
    eps, p = knob
    return eps * ((-1) ** (p * n_old_atoms)) if p else eps


def _blocks(seq):
    """All splittings of seq into three consecutive blocks (A, B, C)."""
    n = len(seq)
    for i in range(n + 1):
        for j in range(i, n + 1):
            yield seq[:i], seq[i:j], seq[j:]


def br_differential(t: PlanarTree) -> LinComb:
    """Full vertex-splitting differential of the twisted planar-tree operad.

    All reconnection terms are generated (including the pendant and new-root
    families); on braces trees the forbidden terms cancel pairwise and the
    result again has all internal vertices with >= 2 children.
    """
    if t.kind not in (PT, BR):
        raise TreeError("br_differential expects a pt or br tree")
    out = LinComb()
    _add_split_terms(out, BR, t.root, full=True)
    return out


def _add_split_terms(out: LinComb, kind, root_tuple, full, budget=None):
    base = _thaw(root_tuple)
    n_atoms = len(_atoms(base))
    # DFS positions are stable across thaws, so address vertices by position.
    positions = [
        i
        for i, v in enumerate(_iter_builder(base))
        if v.kind in ("e", "i", "b", "r")
    ]

    def nth(root, i):
        for k, v in enumerate(_iter_builder(root)):
            if k == i:
                return v
        raise TreeError("vertex position out of range")

    for pos in positions:
        probe = _thaw(root_tuple)
        v = nth(probe, pos)
        nkids = len(v.children)
        for i in range(nkids + 1):
            for j in range(i, nkids + 1):
                for parent_case in (False, True):
                    b = _thaw(root_tuple)
                    atoms = _atoms(b)
                    v2 = nth(b, pos)
                    A = v2.children[:i]
                    B = v2.children[i:j]
                    C = v2.children[j:]
                    u = _N("i", children=list(B))
                    if v2.kind == "i" and parent_case:
                        continue  # internal splits are counted once
                    if not full:
                        good = (len(B) >= 2) if not parent_case else (len(A) + len(C) >= 1)
                        if not good:
                            continue
                    if parent_case:
                        u.children = list(A) + [v2] + list(C)
                        v2.children = list(B)
                        parent, idx = _find_parent(b, v2)
                        rename = {("edge", v2.uid): ("edge", u.uid)}
                        raw = [rename.get(a, a) for a in atoms] + [("edge", v2.uid)]
                        if parent is None:
                            if _deco_parent(b, v2) is not None:
                                dp = _deco_parent(b, v2)
                                dp.deco = u
                                newroot = b
                            else:
                                newroot = u
                        else:
                            parent.children[idx] = u
                            newroot = b
                    else:
                        v2.children = list(A) + [u] + list(C)
                        raw = list(atoms) + [("edge", u.uid)]
                        newroot = b
                    sign = _family_sign(
                        _SIGN_SPLIT_INT if v2.kind == "i" else _SIGN_SPLIT_EXT, n_atoms
                    )
                    _maybe_emit(out, kind, newroot, raw, sign, budget)

    # pendant family: a new internal leaf at every corner
    probe = _thaw(root_tuple)
    n_corners = len(_corners(probe))
    for ci in range(n_corners):
        b = _thaw(root_tuple)
        atoms = _atoms(b)
        u = _N("i")
        corners = _corners(b)
        _insert_at_corners(b, corners, [ci], [u])
        raw = list(atoms) + [("edge", u.uid)]
        if not full and len(u.children) < 2:
            continue
        _maybe_emit(out, kind, b, raw, _family_sign(_SIGN_PENDANT, n_atoms), budget)

    # new-root family (plain rooted trees only)
    if root_tuple[0] != "out" and full:
        b = _thaw(root_tuple)
        atoms = _atoms(b)
        u = _N("i", children=[b])
        raw = list(atoms) + [("edge", b.uid)]
        _maybe_emit(out, kind, u, raw, _family_sign(_SIGN_ROOT, n_atoms), budget)


def _deco_parent(root: _N, target: _N):
    for v in _iter_builder(root):
        if v.deco is target:
            return v
    return None


def _maybe_emit(out, kind, root, raw, coef, budget):
    try:
        _emit(out, kind, root, raw, coef)
    except TreeError:
        raise


def brinf_differential(t: PlanarTree) -> LinComb:
    """d = d_s + d_br + d_bi on br-infinity trees (d_br omitted for bbr).

    d_s splits any vertex keeping internal vertices >= 2-valent, d_br colors
    one blue vertex red, d_bi inserts the decoration of one blue vertex and
    reconnects its children in all planar ways.
    """
    if t.kind not in (BINF, BBR):
        raise TreeError("brinf_differential expects a br-infinity tree")
    out = LinComb()
    _add_split_terms(out, t.kind, t.root, full=False)

    base = _thaw(t.root)
    blue_positions = [i for i, v in enumerate(_iter_builder(base)) if v.kind == "b"]

    def nth(root, i):
        for k, v in enumerate(_iter_builder(root)):
            if k == i:
                return v
        raise TreeError("no such vertex")

    for pos in blue_positions:
        if t.kind == BINF:
            # d_br: recolor blue -> red
            b = _thaw(t.root)
            atoms = _atoms(b)
            v = nth(b, pos)
            raw = _remove_atom(atoms, ("blue", v.uid))
            sign = raw.pop()
            v.kind = "r"
            _emit(out, BINF, b, raw, sign * _family_sign(_SIGN_BR, len(atoms)))

        # d_bi: insert the decoration, reconnecting children planarly
        probe = _thaw(t.root)
        pv = nth(probe, pos)
        n_corners = len(_corners(pv.deco))
        nkids = len(pv.children)
        for assignment in itertools.combinations_with_replacement(range(n_corners), nkids):
            b = _thaw(t.root)
            atoms = _atoms(b)
            v = nth(b, pos)
            deco = v.deco
            raw = _remove_atom(atoms, ("blue", v.uid))
            sign = raw.pop()
            kids = list(v.children)
            corners = _corners(deco)
            _insert_at_corners(deco, corners, assignment, kids)
            parent, idx = _find_parent(b, v)
            rename = {("edge", v.uid): ("edge", deco.uid)}
            raw = [rename.get(a, a) for a in raw]
            if parent is None:
                dp = _deco_parent(b, v)
                if dp is not None:
                    dp.deco = deco
                    newroot = b
                else:
                    newroot = deco
            else:
                parent.children[idx] = deco
                newroot = b
            _emit(out, t.kind, newroot, raw, sign * _family_sign(_SIGN_BI, len(atoms)))
    return out


# ---------------------------------------------------------------------------
# The functional tree-expression language
#
#   I(...)        internal vertex          E(t; ...)   external vertex t
#   B(T; ...)     blue vertex, deco T      R(T; ...)   red vertex, deco T
#   K(S0,...,Sr)  cylinder tree, S0 marked
#   K_B(T; S1..)  bar-construction cylinder vertex decorated by T
#   terminals: 1, 2, ..., in, unit symbol (U+1D7D9, ascii alias "unit")

UNIT_CHAR = "\U0001d7d9"
BKS1 = "bks1"


class TreeParseError(TreeError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, msg):
        raise TreeParseError(msg, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        self.skip_ws()
        if not self.text.startswith(ch, self.pos):
            self.error(f"expected {ch!r}")
        self.pos += len(ch)

    def ident(self):
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] in "_"
        ):
            self.pos += 1
        if self.pos < len(self.text) and self.text[self.pos] == UNIT_CHAR:
            pass
        return self.text[start : self.pos]

    def parse_toplevel(self):
        self.skip_ws()
        if self.text.startswith("K_B", self.pos):
            node = self.parse_kb()
        elif self.text.startswith("K", self.pos) and self.text[
            self.pos + 1 : self.pos + 2
        ] == "(":
            node = self.parse_k()
        else:
            node = self.parse_expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error("trailing input after the tree expression")
        return node

    def parse_k(self):
        self.expect("K")
        self.expect("(")
        slots = [self.parse_expr()]
        while self.peek() == ",":
            self.expect(",")
            slots.append(self.parse_expr())
        self.expect(")")
        return ("out", tuple(slots))

    def parse_kb(self):
        self.expect("K_B")
        self.expect("(")
        self.skip_ws()
        if self.text.startswith("K_B", self.pos):
            deco = self.parse_kb()
        elif self.text.startswith("K", self.pos):
            deco = self.parse_k()
        else:
            self.error("the first slot of K_B must be a K(...) or K_B(...) tree")
        self.expect(";")
        slots = [self.parse_expr()]
        while self.peek() == ",":
            self.expect(",")
            slots.append(self.parse_expr())
        self.expect(")")
        return ("kb", deco, tuple(slots))

    def parse_expr(self):
        self.skip_ws()
        ch = self.peek()
        if ch == UNIT_CHAR:
            self.pos += 1
            return ("u",)
        if ch.isdigit():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            return ("e", int(self.text[start : self.pos]), ())
        name = self.ident()
        if name == "in":
            return ("in",)
        if name == "unit":
            return ("u",)
        if name == "I":
            self.expect("(")
            kids = [self.parse_expr()]
            while self.peek() == ",":
                self.expect(",")
                kids.append(self.parse_expr())
            self.expect(")")
            return ("i", tuple(kids))
        if name == "E":
            self.expect("(")
            self.skip_ws()
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if start == self.pos:
                self.error("E(...) needs a numeric label first")
            label = int(self.text[start : self.pos])
            kids = []
            if self.peek() == ";":
                self.expect(";")
                kids = [self.parse_expr()]
                while self.peek() == ",":
                    self.expect(",")
                    kids.append(self.parse_expr())
            self.expect(")")
            return ("e", label, tuple(kids))
        if name in ("B", "R"):
            self.expect("(")
            deco = self.parse_expr()
            kids = []
            if self.peek() == ";":
                self.expect(";")
                kids = [self.parse_expr()]
                while self.peek() == ",":
                    self.expect(",")
                    kids.append(self.parse_expr())
            self.expect(")")
            return ("b" if name == "B" else "r", deco, tuple(kids))
        self.error(f"unknown symbol {name!r}" if name else "unexpected character")


def _infer_kind(root):
    kinds = {v[0] for v in iter_vertices(root)} if root[0] != "kb" else {"kb"}
    if root[0] == "kb":
        return BKS1
    if root[0] == "out":
        return KS1 if kinds & {"u", "i"} else PT1
    if "r" in kinds:
        return BINF
    if "b" in kinds:
        return BBR
    if "i" in kinds:
        return BR
    return PT


def parse_tree(text: str, kind=None) -> PlanarTree:
    """Parse a tree expression; the kind is inferred unless given."""
    root = _Parser(text).parse_toplevel()
    if root[0] == "kb":
        _validate_kb(root)
        return _KBTree(root)
    k = kind or _infer_kind(root)
    try:
        return PlanarTree(k, root)
    except TreeError as exc:
        raise TreeParseError(str(exc), 0) from exc


@dataclass(frozen=True)
class _KBTree:
    """A parsed K_B(...) expression: printable, not operated on."""

    root: tuple
    kind: str = BKS1

    def __str__(self):
        return print_node(self.root)


def _validate_kb(root):
    deco = root[1]
    labels = []
    for part in (deco,) + root[2]:
        for v in iter_vertices(part) if part[0] != "kb" else [part]:
            if v[0] == "e":
                labels.append(v[1])
    seen = set()
    for lab in labels:
        if lab in seen:
            raise TreeParseError(f"terminal {lab} occurs twice", 0)
        seen.add(lab)


def print_node(n) -> str:
    k = n[0]
    if k == "e":
        kids = node_children(n)
        if not kids:
            return str(n[1])
        return f"E({n[1]};{','.join(print_node(c) for c in kids)})"
    if k == "i":
        return f"I({','.join(print_node(c) for c in n[1])})"
    if k in ("b", "r"):
        name = "B" if k == "b" else "R"
        kids = n[2]
        if not kids:
            return f"{name}({print_node(n[1])})"
        return f"{name}({print_node(n[1])};{','.join(print_node(c) for c in kids)})"
    if k == "u":
        return UNIT_CHAR
    if k == "in":
        return "in"
    if k == "out":
        return f"K({','.join(print_node(c) for c in n[1])})"
    if k == "kb":
        return f"K_B({print_node(n[1])};{','.join(print_node(c) for c in n[2])})"
    raise TreeError(f"cannot print node kind {k}")


def print_tree(t) -> str:
    return print_node(t.root)


# ---------------------------------------------------------------------------
# Generators and relation checks


def gen_T(n: int) -> PlanarTree:
    """The braces generator T_n: external root 1 with leaf children 2..n+1."""
    kids = tuple(("e", i, ()) for i in range(2, n + 2))
    return PlanarTree(PT, ("e", 1, kids))


def gen_Tp(n: int) -> PlanarTree:
    """The generator T_n': internal root with leaf children 1..n."""
    kids = tuple(("e", i, ()) for i in range(1, n + 1))
    return PlanarTree(BR, ("i", kids))


def tree_unit() -> PlanarTree:
    return PlanarTree(PT, ("e", 1, ()))


def planar_leibniz_residual(m: int, n: int, primed=False) -> LinComb:
    """LHS minus RHS of the planar Leibniz rule T_m o_1 T_n (resp. T_n').

    The right-hand side enumerates the good expressions
    T_(n+m-J) o_(i_1..i_n) (T_(k_1), ..., T_(k_n)); signs come from our
    edge-order convention, so the check asserts that the two sides match
    term by term with unit coefficients.
    """
    if m > 4 or n > 4:
        raise TreeError("planar Leibniz residual capped at m, n <= 4")
    left = gen_T(m)
    right = gen_Tp(n) if primed else gen_T(n)
    residual = LinComb()
    lhs = pt_compose(left, 1, right)
    for tree, coef in lhs.terms.items():
        residual.add(tree, coef)
    bad = LinComb()
    for ks in itertools.product(range(m + 1), repeat=n):
        J = sum(ks)
        if J > m:
            continue
        big = n + m - J
        outer = gen_Tp(big) if primed else gen_T(big)
        slot_base = 0 if primed else 1
        for positions in itertools.combinations(range(1, big + 1), n):
            term = LinComb().add_graph if False else None
            cur = LinComb()
            cur.add(outer, 1)
            for t_idx in range(n - 1, -1, -1):
                k = ks[t_idx]
                if k == 0:
                    continue
                slot = positions[t_idx] + slot_base
                nxt = LinComb()
                for tree, coef in cur.terms.items():
                    nxt.combine(coef, pt_compose(tree, slot, gen_T(k)))
                cur = nxt
            for tree, coef in cur.terms.items():
                if tree in residual.terms and abs(residual.terms[tree]) == 1:
                    residual.add(tree, -residual.terms[tree])
                else:
                    residual.add(tree, -coef)
    return residual


# ---------------------------------------------------------------------------
# Enumeration (for the d^2 = 0 suites)


def _shapes(nv):
    """All rooted planar tree shapes with nv vertices (child-count nests)."""
    if nv == 1:
        return [()]
    out = []
    for parts in _compositions(nv - 1):
        for combo in itertools.product(*[_shapes(p) for p in parts]):
            out.append(tuple(combo))
    return out


def _compositions(n):
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            yield (first,) + rest


def enumerate_br_trees(max_vertices, max_externals=None):
    """All braces trees with at most the given number of vertices."""
    out = []
    for nv in range(1, max_vertices + 1):
        for shape in _shapes(nv):
            for tree in _decorate(shape):
                labels = external_labels(tree)
                ne = len(labels)
                if max_externals is not None and ne > max_externals:
                    continue
                for perm in itertools.permutations(range(1, ne + 1)):
                    relabelled = _relabel_tuple(tree, dict(zip(range(1, ne + 1), perm)))
                    try:
                        out.append(PlanarTree(BR, relabelled))
                    except TreeError:
                        pass
    return out


def _decorate(shape):
    """Assign external/internal kinds to a shape; externals get temp labels."""
    counter = [0]

    def build(s, assign):
        idx = counter[0]
        counter[0] += 1
        kids = []
        for sub in s:
            kids.append(build(sub, assign))
        if assign[idx] == "i":
            return ("i", tuple(kids))
        return ("e", 0, tuple(kids))

    n = _count_shape(shape)
    results = []
    for bits in itertools.product("ei", repeat=n):
        counter[0] = 0
        tree = build(shape, bits)
        tree = _number_externals(tree)
        results.append(tree)
    return results


def _count_shape(shape):
    return 1 + sum(_count_shape(s) for s in shape)


def _number_externals(tree):
    counter = [0]

    def walk(n):
        kids = tuple(walk(c) for c in node_children(n))
        if n[0] == "e":
            counter[0] += 1
            return ("e", counter[0], kids)
        return _with_children(n, kids)

    return walk(tree)


def _relabel_tuple(tree, table):
    def walk(n):
        kids = tuple(walk(c) for c in node_children(n))
        if n[0] == "e":
            return ("e", table[n[1]], kids)
        deco = node_deco(n)
        if deco is not None:
            return (n[0], walk(deco), kids)
        return _with_children(n, kids)

    return walk(tree)


def enumerate_binf_trees(max_vertices, kind=BINF):
    """Br-infinity trees with one level of blue decoration, small sizes."""
    base = enumerate_br_trees(max_vertices)
    out = []
    for t in base:
        if t.arity() >= 1:
            try:
                out.append(PlanarTree(kind, t.root))
            except TreeError:
                pass
    # decorate one external vertex as blue with a small decoration
    for t in enumerate_br_trees(max_vertices - 2):
        nv = count_vertices(t.root)
        for deco in enumerate_br_trees(max_vertices - nv):
            if count_vertices(deco.root) < 2:
                continue
            for pos, v in enumerate(iter_vertices(t.root)):
                if v[0] != "e":
                    continue
                root = _blueify(t.root, pos, deco.root)
                if root is None:
                    continue
                root = _renumber_all(root)
                try:
                    out.append(PlanarTree(kind, root))
                except TreeError:
                    pass
    return out


def _blueify(tree, pos, deco):
    counter = [-1]

    def walk(n):
        counter[0] += 1
        here = counter[0]
        kids = tuple(walk(c) for c in node_children(n))
        if here == pos and n[0] == "e":
            return ("b", deco, kids)
        if n[0] == "e":
            return ("e", n[1], kids)
        d = node_deco(n)
        if d is not None:
            return (n[0], d, kids)
        return _with_children(n, kids)

    return walk(tree)


def _renumber_all(tree):
    counter = [0]

    def walk(n):
        deco = node_deco(n)
        nd = walk(deco) if deco is not None else None
        if n[0] == "e":
            counter[0] += 1
            lab = counter[0]
            kids = tuple(walk(c) for c in node_children(n))
            return ("e", lab, kids)
        kids = tuple(walk(c) for c in node_children(n))
        if nd is not None:
            return (n[0], nd, kids)
        return _with_children(n, kids)

    return walk(tree)


def is_braces(t: PlanarTree) -> bool:
    """Membership in the braces suboperad: internal vertices >= 2 children."""
    return all(
        len(node_children(v)) >= 2 for v in iter_vertices(t.root) if v[0] == "i"
    )
