"""Operadic and moperadic compositions of signed graphs.

All reconnection sums are generated as raw graphs with explicit edge orders
and only canonicalized at the end, so sign cancellations (double edges etc.)
come out of the canonicalization rule and not out of ad-hoc filters.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .graphs import (
    DGRA,
    GRA,
    GRA1,
    IN,
    OUT,
    SGRA,
    SGRA1,
    DIRECTED,
    GraphError,
    LinComb,
    SignedGraph,
    canonical_form,
    ext,
    internal,
    typeII,
)


def _compose_kinds_ok(k1, k2):
    return (k1, k2) in (
        (GRA, GRA),
        (DGRA, DGRA),
        (SGRA, DGRA),
        (SGRA1, DGRA),
        (GRA1, DGRA),
    )


def gra_compose(g1: SignedGraph, j: int, g2: SignedGraph) -> LinComb:
    """Insert g2 into the j-th external vertex of g1 and sum over reconnections.

    The edge ends of g1 at vertex j are reconnected to vertices of g2 in all
    possible ways; edges of g2 get the higher labels.
    """
    if not _compose_kinds_ok(g1.kind, g2.kind):
        raise GraphError(f"cannot insert a {g2.kind} graph into a {g1.kind} graph")
    m1, m2 = g1.external_count, g2.external_count
    if not 1 <= j <= m1:
        raise GraphError(f"slot {j} out of range 1..{m1}")
    k1 = g1.internal_count

    def map1(v):
        if v[0] == "e":
            i = v[1]
            if i < j:
                return ext(i)
            if i > j:
                return ext(i + m2 - 1)
            return None  # the replaced slot
        return v

    def map2(v):
        if v[0] == "e":
            return ext(j - 1 + v[1])
        if v[0] == "i":
            return internal(k1 + v[1])
        return v

    targets = [map2(v) for v in g2.vertices()]
    slot_ends = g1.edges_at(ext(j))
    out = LinComb()
    for assignment in itertools.product(targets, repeat=len(slot_ends)):
        reassign = dict(zip(slot_ends, assignment))
        edges = []
        for i, (a, b) in enumerate(g1.edges):
            na = reassign.get((i, 0)) or map1(a)
            nb = reassign.get((i, 1)) or map1(b)
            if g1.kind == GRA:
                from .graphs import vkey

                if vkey(na) > vkey(nb):
                    na, nb = nb, na
            edges.append((na, nb))
        for a, b in g2.edges:
            edges.append((map2(a), map2(b)))
        out.add_graph(
            SignedGraph(
                kind=g1.kind,
                external_count=m1 + m2 - 1,
                edges=tuple(edges),
                internal_count=k1 + g2.internal_count,
                typeII_count=g1.typeII_count,
                marked_edge=g1.marked_edge,
            )
        )
    return out


def directed_expansion(g: SignedGraph) -> LinComb:
    """Map an undirected graph to the sum over all edge orientations."""
    if g.kind != GRA:
        raise GraphError("directed_expansion expects an undirected graph")
    out = LinComb()
    for dirs in itertools.product((0, 1), repeat=len(g.edges)):
        edges = []
        for (a, b), d in zip(g.edges, dirs):
            edges.append((a, b) if d == 0 else (b, a))
        out.add_graph(
            SignedGraph(
                kind=DGRA,
                external_count=g.external_count,
                edges=tuple(edges),
                internal_count=g.internal_count,
            )
        )
    return out


def gra1_unit() -> SignedGraph:
    return SignedGraph(kind=GRA1, external_count=0, edges=())


def gra1_compose(g1: SignedGraph, g2: SignedGraph) -> LinComb:
    """Moperadic composition: plug g2 into the distinguished input of g1.

    Vertex in of g1 and vertex out of g2 are deleted; the freed edge ends are
    reconnected arbitrarily (ends from g1 to vertices of g2, ends from g2 to
    vertices of g1).  In the result the externals of g2 come first, then the
    externals of g1; out of g1 and in of g2 become the new out/in.
    """
    if g1.kind != GRA1 or g2.kind != GRA1:
        raise GraphError("gra1_compose expects two gra1 graphs")
    m1, m2 = g1.external_count, g2.external_count
    k1 = g1.internal_count

    def map1(v):
        if v[0] == "e":
            return ext(m2 + v[1])
        if v == IN:
            return None
        return v  # out, internal

    def map2(v):
        if v[0] == "e":
            return ext(v[1])
        if v[0] == "i":
            return internal(k1 + v[1])
        if v == OUT:
            return None
        return v  # in

    verts1 = [map1(v) for v in g1.vertices() if map1(v) is not None and v != OUT] + [OUT]
    verts1 = [v for v in verts1 if v is not None]
    verts2 = [map2(v) for v in g2.vertices() if v != OUT]

    ends1 = g1.edges_at(IN)  # ends to reattach to vertices of g2
    ends2 = g2.edges_at(OUT)  # ends to reattach to vertices of g1
    out = LinComb()
    for asg1 in itertools.product(verts2, repeat=len(ends1)):
        for asg2 in itertools.product(verts1, repeat=len(ends2)):
            re1 = dict(zip(ends1, asg1))
            re2 = dict(zip(ends2, asg2))
            edges = []
            for i, (a, b) in enumerate(g1.edges):
                na = re1.get((i, 0)) or map1(a)
                nb = re1.get((i, 1)) or map1(b)
                edges.append((na, nb))
            for i, (a, b) in enumerate(g2.edges):
                na = re2.get((i, 0)) or map2(a)
                nb = re2.get((i, 1)) or map2(b)
                edges.append((na, nb))
            out.add_graph(
                SignedGraph(
                    kind=GRA1,
                    external_count=m1 + m2,
                    edges=tuple(edges),
                    internal_count=k1 + g2.internal_count,
                )
            )
    return out


def sgra_insert_typeII(g1: SignedGraph, p: int, g2: SignedGraph) -> LinComb:
    """Insert g2 (an sgra graph) into the p-th type II vertex of g1.

    The edge ends at that vertex reconnect to any vertex of g2; the linear
    order of type II vertices is preserved, with g2's block replacing slot p.
    Positions are 1-based for sgra, 0-based for sgra1 (where b0 is the
    distinguished slot).
    """
    if g1.kind not in (SGRA, SGRA1) or g2.kind != SGRA:
        raise GraphError("type II insertion expects sgra-family graphs")
    lo = 0 if g1.kind == SGRA1 else 1
    hi = lo + g1.typeII_count - 1
    if not lo <= p <= hi:
        raise GraphError(f"type II slot {p} out of range {lo}..{hi}")
    m1, m2 = g1.external_count, g2.external_count
    n2 = g2.typeII_count
    k1 = g1.internal_count

    def map1(v):
        if v[0] == "b":
            if v[1] < p:
                return v
            if v[1] > p:
                return typeII(v[1] + n2 - 1)
            return None
        return v

    def map2(v):
        if v[0] == "e":
            return ext(m1 + v[1])
        if v[0] == "i":
            return internal(k1 + v[1])
        if v[0] == "b":
            return typeII(p + v[1] - 1)
        return v

    targets = [map2(v) for v in g2.vertices()]
    slot_ends = g1.edges_at(typeII(p))
    out = LinComb()
    for assignment in itertools.product(targets, repeat=len(slot_ends)):
        reassign = dict(zip(slot_ends, assignment))
        edges = []
        for i, (a, b) in enumerate(g1.edges):
            na = reassign.get((i, 0)) or map1(a)
            nb = reassign.get((i, 1)) or map1(b)
            edges.append((na, nb))
        for a, b in g2.edges:
            edges.append((map2(a), map2(b)))
        out.add_graph(
            SignedGraph(
                kind=g1.kind,
                external_count=m1 + m2,
                edges=tuple(edges),
                internal_count=k1 + g2.internal_count,
                typeII_count=g1.typeII_count + n2 - 1,
                marked_edge=g1.marked_edge,
            )
        )
    return out


def sym_action(g: SignedGraph, sigma) -> tuple:
    """Relabel external vertices by i -> sigma[i]; returns (graph, sign).

    sigma is a dict or sequence defining a bijection of 1..external_count.
    """
    m = g.external_count
    if isinstance(sigma, dict):
        images = [sigma[i] for i in range(1, m + 1)]
    else:
        images = list(sigma)
    if sorted(images) != list(range(1, m + 1)):
        raise GraphError(f"not a permutation of 1..{m}: {images}")
    table = {i + 1: images[i] for i in range(m)}

    def mp(v):
        if v[0] == "e":
            return ext(table[v[1]])
        return v

    from .graphs import vkey

    edges = []
    for a, b in g.edges:
        na, nb = mp(a), mp(b)
        if g.kind == GRA and vkey(na) > vkey(nb):
            na, nb = nb, na
        edges.append((na, nb))
    return canonical_form(
        SignedGraph(
            kind=g.kind,
            external_count=m,
            edges=tuple(edges),
            internal_count=g.internal_count,
            typeII_count=g.typeII_count,
            marked_edge=g.marked_edge,
        )
    )


def sgra1_cyclic(g: SignedGraph, k: int) -> tuple:
    """Rotate the type II labels of an sgra1 graph by k; returns (graph, sign)."""
    if g.kind != SGRA1:
        raise GraphError("cyclic rotation is defined on sgra1 graphs")
    n = g.typeII_count
    if not 0 <= k < max(n, 1):
        raise GraphError(f"rotation {k} out of range 0..{n - 1}")

    def mp(v):
        if v[0] == "b":
            return typeII((v[1] + k) % n)
        return v

    edges = tuple((mp(a), mp(b)) for a, b in g.edges)
    return canonical_form(
        SignedGraph(
            kind=SGRA1,
            external_count=g.external_count,
            edges=edges,
            internal_count=g.internal_count,
            typeII_count=n,
            marked_edge=g.marked_edge,
        )
    )


# ---------------------------------------------------------------------------
# Axiom checking harness


def _as_lincomb(g: SignedGraph) -> LinComb:
    return LinComb().add_graph(g)


def _compose_lc(lc: LinComb, j: int, g2: SignedGraph, compose_fn) -> LinComb:
    out = LinComb()
    for g, c in lc.terms.items():
        out.combine(c, compose_fn(g, j, g2))
    return out


def _expanded_perm(sigma, m1, j, m2):
    """The permutation induced on the slots of g1 o_j g2 by relabelling g1.

    Slot p of the composite maps as: g1-slots follow sigma (stretched by the
    inserted block), g2-slots move with the block to position sigma[j].
    """
    sj = sigma[j - 1]
    images = {}
    for q in range(1, m1 + 1):
        if q == j:
            continue
        p = q if q < j else q + m2 - 1
        sq = sigma[q - 1]
        images[p] = sq if sq < sj else sq + m2 - 1
    for r in range(1, m2 + 1):
        images[j - 1 + r] = sj - 1 + r
    return [images[p] for p in range(1, m1 + m2)]


class AxiomReport:
    def __init__(self):
        self.checks = 0
        self.failures = []

    @property
    def passed(self):
        return not self.failures

    def record(self, ok, description):
        self.checks += 1
        if not ok and len(self.failures) < 5:
            self.failures.append(description)

    def __repr__(self):
        status = "pass" if self.passed else "FAIL"
        msg = f"AxiomReport({status}, {self.checks} checks"
        if self.failures:
            msg += f"; first failure: {self.failures[0]}"
        return msg + ")"


def operad_axiom_report(samples, kind, compose_fn=gra_compose) -> AxiomReport:
    """Exhaustively check unit, associativity and equivariance on the sample.

    Samples should stay small (<= 4 externals, <= 3 edges each); the checks
    themselves are the oracle.
    """
    report = AxiomReport()
    unit = SignedGraph(kind=kind, external_count=1, edges=())
    insert_kind_unit = (
        unit if kind in (GRA, DGRA) else SignedGraph(kind=DGRA, external_count=1, edges=())
    )

    for g in samples:
        m = g.external_count
        base = _as_lincomb(g)
        for j in range(1, m + 1):
            got = compose_fn(g, j, insert_kind_unit)
            report.record(got == base, f"unit: {g} o_{j} id != {g}")
        if kind in (GRA, DGRA):
            got = compose_fn(unit, 1, g)
            report.record(got == base, f"unit: id o_1 {g} != {g}")

    pairs = [(a, b) for a in samples for b in samples]
    for a, b in pairs:
        if a.kind != kind:
            continue
        for c in samples:
            if b.kind != c.kind:
                continue
            ma, mb, mc = a.external_count, b.external_count, c.external_count
            # nested: (a o_i b) o_{i-1+j} c == a o_i (b o_j c)
            for i in range(1, ma + 1):
                for j in range(1, mb + 1):
                    lhs = _compose_lc(compose_fn(a, i, b), i - 1 + j, c, compose_fn)
                    rhs = _compose_lc(compose_fn(b, j, c), i, a, _flipped(compose_fn))
                    report.record(
                        lhs == rhs,
                        f"assoc nested: ({a} o_{i} {b}) o_{i-1+j} {c}",
                    )
            # parallel slots, with the Koszul sign (-1)^{|b||c|}
            sign = Fraction(-1) ** ((b.degree() % 2) * (c.degree() % 2))
            for i in range(1, ma + 1):
                for j in range(1, ma + 1):
                    if i >= j:
                        continue
                    lhs = _compose_lc(compose_fn(a, i, b), j + mb - 1, c, compose_fn)
                    rhs = _compose_lc(compose_fn(a, j, c), i, b, compose_fn).scaled(sign)
                    report.record(
                        lhs == rhs,
                        f"assoc parallel: slots {i},{j} of {a}",
                    )

    for g in samples:
        m = g.external_count
        if m < 2:
            continue
        for sigma in itertools.permutations(range(1, m + 1)):
            for b in samples:
                if b.external_count > 2:
                    continue
                for j in range(1, m + 1):
                    gs, sg = sym_action(g, sigma)
                    if gs is None:
                        continue
                    lhs = compose_fn(gs, sigma[j - 1], b).scaled(sg)
                    comp = compose_fn(g, j, b)
                    tau = _expanded_perm(sigma, m, j, b.external_count)
                    rhs = LinComb()
                    for h, c in comp.terms.items():
                        hh, sh = sym_action(h, tau)
                        if hh is not None:
                            rhs.add(hh, c * sh)
                    report.record(
                        lhs == rhs,
                        f"equivariance: sigma={sigma}, j={j} on {g}",
                    )
    return report


def _flipped(compose_fn):
    """Adapter: compose the accumulated inner sum into a fixed outer graph."""

    def fn(inner_graph, slot, outer_graph):
        return compose_fn(outer_graph, slot, inner_graph)

    return fn


def moperad_axiom_report(samples_gra1, samples_dgra) -> AxiomReport:
    """Check the moperad axioms of gra1 over dgra on a small sample."""
    report = AxiomReport()
    unit = gra1_unit()

    for g in samples_gra1:
        base = _as_lincomb(g)
        report.record(gra1_compose(g, unit) == base, f"moperad unit right: {g}")
        report.record(gra1_compose(unit, g) == base, f"moperad unit left: {g}")

    for a in samples_gra1:
        for b in samples_gra1:
            for c in samples_gra1:
                lhs = LinComb()
                for h, coef in gra1_compose(a, b).terms.items():
                    lhs.combine(coef, gra1_compose(h, c))
                rhs = LinComb()
                for h, coef in gra1_compose(b, c).terms.items():
                    rhs.combine(coef, gra1_compose(a, h))
                report.record(lhs == rhs, f"moperad assoc: {a},{b},{c}")

    # mixed compatibility: inserting x at a slot of a commutes with the
    # moperadic composition, up to the Koszul sign for moving x past b.
    for a in samples_gra1:
        for b in samples_gra1:
            for x in samples_dgra:
                sign = (-1) ** ((x.degree() % 2) * (b.degree() % 2))
                mb = b.external_count
                for i in range(1, a.external_count + 1):
                    lhs = LinComb()
                    for h, coef in gra_compose(a, i, x).terms.items():
                        lhs.combine(coef, gra1_compose(h, b))
                    rhs = LinComb()
                    for h, coef in gra1_compose(a, b).terms.items():
                        rhs.combine(coef, gra_compose(h, mb + i, x))
                    report.record(
                        lhs == rhs.scaled(sign),
                        f"moperad mixed: slot {i} of {a} with {x}, then {b}",
                    )
                for i in range(1, b.external_count + 1):
                    lhs = LinComb()
                    for h, coef in gra_compose(b, i, x).terms.items():
                        lhs.combine(coef, gra1_compose(a, h))
                    rhs = LinComb()
                    for h, coef in gra1_compose(a, b).terms.items():
                        rhs.combine(coef, gra_compose(h, i, x))
                    report.record(
                        lhs == rhs,
                        f"moperad mixed inner: slot {i} of {b} with {x}",
                    )
    return report
