"""Polynomial models of multivector fields, forms and polydifferential operators.

Everything is exact: coefficients are Fractions, odd variables anticommute.
A `Poly` lives in C[x_1..x_d] tensored with an exterior algebra on odd
symbols (read as xi_k for multivector fields, as dx_k for differential
forms) and optionally with formal derivative symbols a_j^(alpha) used while
extracting polydifferential operators from graphs.

Monomial layout: (xexp, odd, fder) with
    xexp  tuple of d exponents
    odd   strictly increasing tuple of odd indices 1..d
    fder  tuple of (slot, multiindex) pairs, sorted by slot, each slot once
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .graphs import DGRA, GRA1, IN, OUT, SGRA, GraphError, SignedGraph


class DimensionError(ValueError):
    pass


def _merge_odd(t1, t2):
    """Concatenate two sorted odd words; returns (sorted word, sign) or (None, 0)."""
    word = list(t1) + list(t2)
    sign = 1
    # insertion sort, counting transpositions; duplicates kill the monomial
    for i in range(1, len(word)):
        j = i
        while j > 0 and word[j - 1] > word[j]:
            word[j - 1], word[j] = word[j], word[j - 1]
            sign = -sign
            j -= 1
        if j > 0 and word[j - 1] == word[j]:
            return None, 0
    return tuple(word), sign


class Poly:
    """Exact polynomial with even x's, anticommuting odd symbols, formal slots."""

    __slots__ = ("d", "terms")

    def __init__(self, d, terms=()):
        self.d = d
        self.terms = {}
        if isinstance(terms, dict):
            terms = terms.items()
        for mono, coef in terms:
            self._add(mono, coef)

    def _add(self, mono, coef):
        coef = Fraction(coef)
        if coef == 0:
            return
        cur = self.terms.get(mono, Fraction(0)) + coef
        if cur == 0:
            self.terms.pop(mono, None)
        else:
            self.terms[mono] = cur

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, d):
        return cls(d)

    @classmethod
    def const(cls, d, c):
        return cls(d, {((0,) * d, (), ()): Fraction(c)})

    @classmethod
    def x(cls, d, k, power=1):
        e = [0] * d
        e[k - 1] = power
        return cls(d, {(tuple(e), (), ()): Fraction(1)})

    @classmethod
    def odd(cls, d, *indices):
        word, sign = _merge_odd((), tuple(indices))
        if word is None:
            return cls.zero(d)
        return cls(d, {((0,) * d, word, ()): Fraction(sign)})

    @classmethod
    def slot_symbol(cls, d, slot):
        return cls(d, {((0,) * d, (), ((slot, (0,) * d),)): Fraction(1)})

    # -- basics --------------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, Poly) and self.d == other.d and self.terms == other.terms

    def __hash__(self):
        return hash((self.d, frozenset(self.terms.items())))

    def copy(self):
        return Poly(self.d, dict(self.terms))

    def __add__(self, other):
        out = self.copy()
        for m, c in other.terms.items():
            out._add(m, c)
        return out

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, c):
        c = Fraction(c)
        return Poly(self.d, {m: v * c for m, v in self.terms.items()} if c else {})

    def __neg__(self):
        return self.scaled(-1)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scaled(other)
        out = Poly(self.d)
        for (x1, o1, f1), c1 in self.terms.items():
            for (x2, o2, f2), c2 in other.terms.items():
                word, sign = _merge_odd(o1, o2)
                if word is None:
                    continue
                slots1 = {s for s, _ in f1}
                if any(s in slots1 for s, _ in f2):
                    raise GraphError("formal slot used twice in a product")
                xe = tuple(a + b for a, b in zip(x1, x2))
                fd = tuple(sorted(f1 + f2))
                out._add((xe, word, fd), c1 * c2 * sign)
        return out

    __rmul__ = __mul__

    def parity(self):
        """Parity if homogeneous, else raises."""
        ps = {len(o) % 2 for (_, o, _) in self.terms}
        if not ps:
            return 0
        if len(ps) > 1:
            raise GraphError("inhomogeneous element has no parity")
        return ps.pop()

    def odd_degree(self):
        ds = {len(o) for (_, o, _) in self.terms}
        if not ds:
            return 0
        if len(ds) > 1:
            raise GraphError("not homogeneous in the odd variables")
        return ds.pop()

    def dx(self, k):
        """Partial derivative in x_k (1-based); formal slots absorb it too."""
        out = Poly(self.d)
        for (xe, o, fd), c in self.terms.items():
            e = xe[k - 1]
            if e:
                ne = list(xe)
                ne[k - 1] -= 1
                out._add((tuple(ne), o, fd), c * e)
        return out

    def dx_slot(self, k):
        """Derivative in x_k hitting formal slot symbols by the product rule."""
        out = self.dx(k)
        for (xe, o, fd), c in self.terms.items():
            for idx, (slot, mi) in enumerate(fd):
                nmi = list(mi)
                nmi[k - 1] += 1
                nfd = fd[:idx] + ((slot, tuple(nmi)),) + fd[idx + 1 :]
                out._add((xe, o, nfd), c)
        return out

    def dodd(self, k):
        """Left derivative in the odd symbol k."""
        out = Poly(self.d)
        for (xe, o, fd), c in self.terms.items():
            if k in o:
                pos = o.index(k)
                out._add((xe, o[:pos] + o[pos + 1 :], fd), c * (-1) ** pos)
        return out

    def rodd(self, k):
        """Right derivative in the odd symbol k."""
        out = Poly(self.d)
        for (xe, o, fd), c in self.terms.items():
            if k in o:
                pos = o.index(k)
                out._add((xe, o[:pos] + o[pos + 1 :], fd), c * (-1) ** (len(o) - 1 - pos))
        return out

    def odd_part(self, word):
        """Coefficient (an even Poly) of the odd monomial `word`."""
        out = Poly(self.d)
        for (xe, o, fd), c in self.terms.items():
            if o == tuple(word):
                out._add((xe, (), fd), c)
        return out

    def subs_zero(self):
        """Value at x = 0 of the purely even, slot-free part."""
        return self.terms.get(((0,) * self.d, (), ()), Fraction(0))

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for (xe, o, fd), c in sorted(self.terms.items()):
            factors = []
            for k, e in enumerate(xe):
                if e:
                    factors.append(f"x{k + 1}" + (f"^{e}" if e > 1 else ""))
            factors += [f"~{k}" for k in o]
            for slot, mi in fd:
                factors.append(f"a{slot}^{mi}")
            body = "*".join(factors) if factors else "1"
            bits.append(f"({c})*{body}")
        return " + ".join(bits)


def random_poly(d, max_deg, odd_count, rng, nterms=3):
    out = Poly.zero(d)
    for _ in range(nterms):
        xe = [0] * d
        for _ in range(rng.randint(0, max_deg)):
            xe[rng.randrange(d)] += 1
        odd = tuple(sorted(rng.sample(range(1, d + 1), odd_count)))
        out._add((tuple(xe), odd, ()), Fraction(rng.randint(-3, 3)))
    return out


# ---------------------------------------------------------------------------
# The graph action engine


def _tensor_dodd(factors_term, i, k):
    """Left odd derivative on factor i of a tensor monomial, with Koszul sign."""
    monos, coef = factors_term
    sign = 1
    for l in range(i):
        sign *= (-1) ** (len(monos[l][1]) % 2)
    xe, o, fd = monos[i]
    if k not in o:
        return None
    pos = o.index(k)
    nm = (xe, o[:pos] + o[pos + 1 :], fd)
    return (monos[:i] + (nm,) + monos[i + 1 :], coef * sign * (-1) ** pos)


def _tensor_dx(factors_term, j, k, d):
    """x_k derivative on factor j (hits x's and formal slots); returns a list."""
    monos, coef = factors_term
    xe, o, fd = monos[j]
    out = []
    e = xe[k - 1]
    if e:
        ne = list(xe)
        ne[k - 1] -= 1
        out.append((monos[:j] + ((tuple(ne), o, fd),) + monos[j + 1 :], coef * e))
    for idx, (slot, mi) in enumerate(fd):
        nmi = list(mi)
        nmi[k - 1] += 1
        nfd = fd[:idx] + ((slot, tuple(nmi)),) + fd[idx + 1 :]
        out.append((monos[:j] + ((xe, o, nfd),) + monos[j + 1 :], coef))
    return out


def apply_edge_operators(edges, factors):
    """Apply prod over edges of  sum_k d/dx_k^(head) d/dxi_k^(tail), then multiply.

    `edges` is a list of (tail index, head index) into `factors`; the edge
    operators are applied in reverse list order (the first edge acts
    outermost), matching the reading of an ordered operator product.
    """
    if not factors:
        raise GraphError("empty factor list")
    d = factors[0].d
    if any(f.d != d for f in factors):
        raise DimensionError("mixed dimensions in graph action")

    terms = {}
    for combo in itertools.product(*[list(f.terms.items()) for f in factors]):
        monos = tuple(m for m, _ in combo)
        coef = Fraction(1)
        for _, c in combo:
            coef *= c
        terms[monos] = terms.get(monos, Fraction(0)) + coef

    work = [(m, c) for m, c in terms.items() if c]
    for tail, head in reversed(edges):
        if tail == head:
            raise GraphError("edge operator with equal endpoints")
        new = {}
        for term in work:
            for k in range(1, d + 1):
                t1 = _tensor_dodd(term, tail, k)
                if t1 is None:
                    continue
                for monos, coef in _tensor_dx(t1, head, k, d):
                    new[monos] = new.get(monos, Fraction(0)) + coef
        work = [(m, c) for m, c in new.items() if c]
        if not work:
            return Poly.zero(d)

    out = Poly.zero(d)
    for monos, coef in work:
        prod = Poly.const(d, 1)
        for m in monos:
            prod = prod * Poly(d, {m: Fraction(1)})
        out = out + prod.scaled(coef)
    return out


def act_dgra(g: SignedGraph, gammas, internal_value=None) -> Poly:
    """Action of a directed graph on polyvector fields.

    External vertex i takes gammas[i-1]; internal vertices all take
    `internal_value` (one copy each).  The single global sign is fixed so
    that the directed expansion of the one-edge graph reproduces the
    Schouten bracket exactly.
    """
    if g.kind != DGRA:
        raise GraphError("act_dgra expects a dgra graph")
    if len(gammas) != g.external_count:
        raise GraphError(
            f"arity mismatch: {g.external_count} external vertices, {len(gammas)} arguments"
        )
    factors = list(gammas)
    index = {("e", i): i - 1 for i in range(1, g.external_count + 1)}
    if g.internal_count:
        if internal_value is None:
            raise GraphError("graph has internal vertices but no internal value given")
        for j in range(1, g.internal_count + 1):
            index[("i", j)] = len(factors)
            factors.append(internal_value)
    edges = [(index[a], index[b]) for a, b in g.edges]
    return apply_edge_operators(edges, factors)


def schouten_bracket(a: Poly, b: Poly) -> Poly:
    """Odd Poisson bracket on polyvector fields (independent oracle).

    [a,b] = (-1)^(|a|+1) sum_k ((a d_xi_k^right)(d_x_k b) - (a d_x_k)(d_xi_k^left b)).

    This is the bracket of C^inf(T*[1]R^d) in the unshifted convention: it is
    Koszul-symmetric ([a,b] = (-1)^(|a||b|) [b,a]), restricts to the Lie
    bracket of vector fields, and satisfies [xi_i, f] = df/dx_i.  The
    unshifted convention is forced by the anchor below: the one-edge graph is
    a symmetric operad element, so its action must be Koszul-symmetric too.
    """
    if a.d != b.d:
        raise DimensionError("dimension mismatch in bracket")
    d = a.d
    out = Poly.zero(d)
    for k in range(1, d + 1):
        out = out + a.rodd(k) * b.dx(k)
        out = out - a.dx(k) * b.dodd(k)
    return out.scaled((-1) ** (a.odd_degree() + 1))


# ---------------------------------------------------------------------------
# Polydifferential operators


class PolyOperator:
    """Finite sum of terms (coefficient Poly) * prod_slots d^(alpha_slot).

    Terms are stored as a dict (alpha_1, ..., alpha_k) -> Poly; arity k.
    The coefficient may itself carry odd symbols (operators with polyvector
    values); plain Hochschild cochains have even, slot-free coefficients.
    """

    def __init__(self, d, arity, terms=()):
        self.d = d
        self.arity = arity
        self.terms = {}
        if isinstance(terms, dict):
            terms = terms.items()
        for mis, coef in terms:
            self.add(mis, coef)

    def add(self, mis, coef):
        mis = tuple(tuple(mi) for mi in mis)
        if len(mis) != self.arity:
            raise GraphError("slot count mismatch in operator term")
        cur = self.terms.get(mis, Poly.zero(self.d)) + coef
        if cur.is_zero():
            self.terms.pop(mis, None)
        else:
            self.terms[mis] = cur
        return self

    @classmethod
    def multiplication(cls, d, arity=2):
        z = (0,) * d
        return cls(d, arity, {(z,) * arity: Poly.const(d, 1)})

    def degree(self):
        """Hochschild degree: arity - 1."""
        return self.arity - 1

    def is_zero(self):
        return not self.terms

    def is_normalized(self):
        z = (0,) * self.d
        return all(all(mi != z for mi in mis) for mis in self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, PolyOperator)
            and (self.d, self.arity) == (other.d, other.arity)
            and self.terms == other.terms
        )

    def __add__(self, other):
        if self.arity != other.arity:
            raise GraphError("cannot add operators of different arity")
        out = PolyOperator(self.d, self.arity, dict(self.terms))
        for mis, c in other.terms.items():
            out.add(mis, c)
        return out

    def scaled(self, c):
        return PolyOperator(
            self.d, self.arity, {mis: p.scaled(c) for mis, p in self.terms.items()}
        )

    def __sub__(self, other):
        return self + other.scaled(-1)

    def apply(self, args):
        if len(args) != self.arity:
            raise GraphError("operator arity mismatch")
        out = Poly.zero(self.d)
        for mis, coef in self.terms.items():
            prod = coef
            for mi, arg in zip(mis, args):
                da = arg
                for k, e in enumerate(mi):
                    for _ in range(e):
                        da = da.dx(k + 1)
                prod = prod * da
            out = out + prod
        return out

    def compose_at(self, j, other):
        """Insert `other` into slot j (1-based), expanding by Leibniz."""
        if not 1 <= j <= self.arity:
            raise GraphError(f"slot {j} out of range")
        d = self.d
        out = PolyOperator(d, self.arity + other.arity - 1)
        for mis, coef in self.terms.items():
            alpha = mis[j - 1]
            for omis, ocoef in other.terms.items():
                # distribute d^alpha over the coefficient and the inner slots
                for split in _multiindex_splits(alpha, other.arity + 1):
                    mult = _multinomial(alpha, split)
                    dcoef = ocoef
                    for k, e in enumerate(split[0]):
                        for _ in range(e):
                            dcoef = dcoef.dx(k + 1)
                    if dcoef.is_zero():
                        continue
                    inner = tuple(
                        tuple(a + b for a, b in zip(omis[t], split[t + 1]))
                        for t in range(other.arity)
                    )
                    nmis = mis[: j - 1] + inner + mis[j:]
                    out.add(nmis, (coef * dcoef).scaled(mult))
        return out

    def __repr__(self):
        return f"PolyOperator(d={self.d}, arity={self.arity}, terms={len(self.terms)})"


def _multiindex_splits(alpha, parts):
    """All ways to write alpha as an ordered sum of `parts` multiindices."""
    if parts == 1:
        yield (tuple(alpha),)
        return
    ranges = [range(e + 1) for e in alpha]
    for first in itertools.product(*ranges):
        rest = tuple(a - f for a, f in zip(alpha, first))
        for tail in _multiindex_splits(rest, parts - 1):
            yield (tuple(first),) + tail


def _multinomial(alpha, split):
    from math import comb

    total = 1
    for k in range(len(alpha)):
        n = alpha[k]
        for part in split[:-1]:
            total *= comb(n, part[k])
            n -= part[k]
    return total


def braces(a0: PolyOperator, args) -> PolyOperator:
    """The brace operation a0{a1,...,ak} with the Gerstenhaber sign rule.

    The term inserting a_i at slot j_i of a0 carries the sign
    (-1)^(sum_i (|a_i| + 1) p_i) where |a| is the arity of a (cochains in
    the unshifted grading) and p_i is the number of inputs of the composite
    standing before a_i, i.e. p_i = (j_i - 1) + sum_(q<i) (|a_q| - 1).
    This is the unique parity for which nested and iterated braces agree.
    """
    args = list(args)
    if not args:
        return a0
    k = len(args)
    out_arity = a0.arity + sum(a.arity for a in args) - k
    out = PolyOperator(a0.d, out_arity)
    for pos in itertools.combinations(range(1, a0.arity + 1), k):
        sign = 1
        before = 0
        for a, j in zip(args, pos):
            sign *= (-1) ** ((a.arity + 1) * (j - 1 + before))
            before += a.arity - 1
        term = a0
        shift = 0
        for a, j in zip(args, pos):
            term = term.compose_at(j + shift, a)
            shift += a.arity - 1
        for mis, coef in term.terms.items():
            out.add(mis, coef.scaled(sign))
    return out


def gerstenhaber_bracket(a: PolyOperator, b: PolyOperator) -> PolyOperator:
    """[a,b] = a{b} - (-1)^(|a||b|) b{a}."""
    sign = (-1) ** (a.degree() * b.degree())
    return braces(a, [b]) - braces(b, [a]).scaled(sign)


def hochschild_differential(a: PolyOperator) -> PolyOperator:
    """delta a = [mu, a] with mu the 2-ary multiplication."""
    mu = PolyOperator.multiplication(a.d)
    return gerstenhaber_bracket(mu, a)


def act_sgra(g: SignedGraph, gammas, internal_value=None, dim=None) -> PolyOperator:
    """The polydifferential operator of a Kontsevich-style graph.

    Type I externals take the polyvector fields, internal vertices take
    `internal_value`, and each type II vertex becomes an operator slot; the
    defining identity D(gammas)(a_1..a_n) = Gamma(gammas, a_1..a_n) holds
    with functions placed in the type II slots.
    """
    if g.kind != SGRA:
        raise GraphError("act_sgra expects an sgra graph")
    if len(gammas) != g.external_count:
        raise GraphError("type I arity mismatch")
    d = dim
    if d is None:
        d = gammas[0].d if gammas else (internal_value.d if internal_value is not None else None)
    if d is None:
        raise GraphError("cannot infer dimension: pass dim=")
    factors = list(gammas)
    index = {("e", i): i - 1 for i in range(1, g.external_count + 1)}
    for j in range(1, g.internal_count + 1):
        if internal_value is None:
            raise GraphError("graph has internal vertices but no internal value given")
        index[("i", j)] = len(factors)
        factors.append(internal_value)
    n = g.typeII_count
    for j in range(1, n + 1):
        index[("b", j)] = len(factors)
        factors.append(Poly.slot_symbol(d, j))
    edges = [(index[a], index[b]) for a, b in g.edges]
    result = apply_edge_operators(edges, factors)

    op = PolyOperator(d, n)
    zero_mi = (0,) * d
    for (xe, o, fd), c in result.terms.items():
        slots = dict(fd)
        mis = tuple(slots.get(j, zero_mi) for j in range(1, n + 1))
        op.add(mis, Poly(d, {(xe, o, ()): c}))
    return op


# ---------------------------------------------------------------------------
# Differential forms and the gra1 action


def de_rham(omega: Poly) -> Poly:
    """Exterior derivative: odd symbols are read as dx's."""
    out = Poly.zero(omega.d)
    for k in range(1, omega.d + 1):
        out = out + Poly.odd(omega.d, k) * omega.dx(k)
    return out


def contract(gamma: Poly, omega: Poly) -> Poly:
    """Contraction of a polyvector field into a form.

    A monomial p(x) xi_{s1}..xi_{sr} (s1<..<sr) acts as
    p(x) * d/d(dx_{sr}) o ... o d/d(dx_{s1}), applying d/d(dx_{s1}) first,
    so that iota_(a b) = iota_b o iota_a.
    """
    if gamma.d != omega.d:
        raise DimensionError("dimension mismatch in contraction")
    d = gamma.d
    out = Poly.zero(d)
    for (xe, word, fd), c in gamma.terms.items():
        if fd:
            raise GraphError("cannot contract a formal-slot element")
        part = omega
        for s in word:
            part = part.dodd(s)
        out = out + (Poly(d, {(xe, (), ()): c}) * part)
    return out


def lie_derivative(gamma: Poly, omega: Poly) -> Poly:
    """L_gamma = [d, iota_gamma] = d iota_gamma - (-1)^|gamma| iota_gamma d.

    For a vector field this is Cartan's magic formula d iota + iota d.
    """
    sign = (-1) ** gamma.odd_degree()
    return de_rham(contract(gamma, omega)) - contract(gamma, de_rham(omega)).scaled(sign)


def act_gra1(g: SignedGraph, gammas, omega: Poly, internal_value=None) -> Poly:
    """Action of a gra1 graph on (polyvector fields; a differential form).

    Defined through the contraction identity
        iota_gamma Gamma(gammas; omega)
            = (-1)^(|Gamma| |gamma|) iota_(Gamma'(gammas, gamma, f)) omega_0
    where omega = sum f * omega_0 with omega_0 constant and Gamma' is the
    underlying dgra graph with gamma at out and f at in.
    """
    if g.kind != GRA1:
        raise GraphError("act_gra1 expects a gra1 graph")
    d = omega.d
    m = g.external_count
    if len(gammas) != m:
        raise GraphError("arity mismatch")
    k = g.internal_count

    # underlying dgra graph: externals 1..m, out -> m+1, in -> m+2
    def mp(v):
        if v == OUT:
            return ("e", m + 1)
        if v == IN:
            return ("e", m + 2)
        return v

    gd = SignedGraph(
        kind=DGRA,
        external_count=m + 2,
        edges=tuple((mp(a), mp(b)) for a, b in g.edges),
        internal_count=k,
    )
    deg_g = g.degree()

    out = Poly.zero(d)
    omega_parts = {}
    for (xe, word, fd), c in omega.terms.items():
        omega_parts.setdefault(word, Poly.zero(d))
        omega_parts[word] = omega_parts[word] + Poly(d, {(xe, (), ()): c})

    for beta_size in range(0, d + 1):
        for beta in itertools.combinations(range(1, d + 1), beta_size):
            test = Poly.odd(d, *beta)
            # In this contraction convention (iota_(ab) = iota_b iota_a and
            # test vectors read off coefficients with no residual sign) the
            # Koszul dressing of the defining identity is identically +1;
            # the anchors below pin it: the one-edge graph acts as +d and
            # the edgeless graph as the plain contraction.
            sign_id = 1
            rhs = Poly.zero(d)
            for word, f in omega_parts.items():
                p = act_dgra(gd, gammas + [test, f], internal_value=internal_value)
                rhs = rhs + contract(p, Poly.odd(d, *word))
            rhs = rhs.scaled(sign_id)
            # read off the dx^beta coefficient: iota_(xi_beta) dx^beta = 1
            # in this contraction convention
            coef = rhs.odd_part(())
            if coef.is_zero():
                continue
            out = out + Poly.odd(d, *beta) * coef
    return out


# ---------------------------------------------------------------------------
# Moyal star product


def bivector_matrix(pi: Poly):
    """Constant bivector -> antisymmetric coefficient matrix c[i][j]."""
    d = pi.d
    c = [[Fraction(0)] * (d + 1) for _ in range(d + 1)]
    for (xe, word, fd), coef in pi.terms.items():
        if any(xe) or fd or len(word) != 2:
            raise GraphError("moyal star needs a constant bivector")
        i, j = word
        c[i][j] += coef
        c[j][i] -= coef
    return c


def moyal_star(f: Poly, g: Poly, pi: Poly, order: int):
    """Moyal product as a list of epsilon coefficients [B_0, B_1/2, ...].

    Term n is (1 / (2^n n!)) sum c_{i1 j1}..c_{in jn} d^n f * d^n g.
    """
    if order > 3:
        raise GraphError("moyal star is capped at order 3")
    d = f.d
    c = bivector_matrix(pi)
    terms = [f * g]
    pairs = [(f, g)]
    fact = Fraction(1)
    for n in range(1, order + 1):
        new_pairs = []
        for a, b in pairs:
            for i in range(1, d + 1):
                for j in range(1, d + 1):
                    if c[i][j]:
                        new_pairs.append((a.dx(i).scaled(c[i][j]), b.dx(j)))
        pairs = new_pairs
        fact *= Fraction(1, 2 * n)
        total = Poly.zero(d)
        for a, b in pairs:
            total = total + a * b
        terms.append(total.scaled(fact))
    return terms


def star_series_eq(s1, s2):
    return len(s1) == len(s2) and all(a == b for a, b in zip(s1, s2))
