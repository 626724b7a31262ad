"""Exact comparisons with symbolic perturbation.

Every comparison of field values goes through this module.  A vertex value
of field ``fid`` is treated as ``value + pi(fid, v)`` where the ``pi`` are
infinitesimals ordered by ``(fid, v)``: a larger pair means a strictly
larger infinitesimal, and any single infinitesimal dominates every product
of two.  This realizes the lexicographic order (value, field_id, vertex)
without numeric epsilons, and extends it to linearly interpolated values
and to the orientation predicate used by the Jacobi edge test.
"""

from __future__ import annotations

from fractions import Fraction

# float filter slack for the orientation predicate; conservative for the
# handful of products involved
_FILTER_EPS = 1e-12


def order_key(values, field_id, v):
    """Sort key realizing the symbolic total order of one field."""
    return (values[v], field_id, v)


def sym_less(values, field_id, u, v):
    """True iff value of u < value of v under symbolic perturbation."""
    return (values[u], u) < (values[v], v)


class SymVal:
    """Value interpolated along mesh edges, with first-order perturbation.

    ``main`` is the exact rational value; ``eps`` maps vertex id to the
    rational coefficient of that vertex's infinitesimal.  Two SymVals of
    the same field compare equal only when they are the same point.
    """

    __slots__ = ("main", "eps", "field_id")

    def __init__(self, main, eps, field_id):
        self.main = main
        self.eps = eps
        self.field_id = field_id

    @classmethod
    def at_vertex(cls, values, field_id, v):
        return cls(Fraction(values[v]), {v: Fraction(1)}, field_id)

    @classmethod
    def interpolate(cls, values, field_id, u, v, s):
        """Value at parameter s in [0,1] along edge (u, v); s is a Fraction."""
        r = 1 - s
        main = r * Fraction(values[u]) + s * Fraction(values[v])
        eps = {}
        if r != 0:
            eps[u] = r
        if s != 0:
            eps[v] = s
        return cls(main, eps, field_id)

    def _eps_cmp(self, other):
        # larger vertex index carries the larger infinitesimal
        keys = sorted(set(self.eps) | set(other.eps), reverse=True)
        for k in keys:
            a = self.eps.get(k, 0)
            b = other.eps.get(k, 0)
            if a != b:
                return -1 if a < b else 1
        return 0

    def cmp(self, other):
        if self.field_id != other.field_id:
            raise ValueError("comparing SymVals of different fields")
        if self.main != other.main:
            return -1 if self.main < other.main else 1
        return self._eps_cmp(other)

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def __eq__(self, other):
        return isinstance(other, SymVal) and self.cmp(other) == 0

    def __hash__(self):
        return hash((self.main, tuple(sorted(self.eps.items())), self.field_id))

    def __sub__(self, other):
        if self.field_id != other.field_id:
            raise ValueError("mixing fields")
        eps = dict(self.eps)
        for k, c in other.eps.items():
            eps[k] = eps.get(k, 0) - c
            if eps[k] == 0:
                del eps[k]
        return SymVal(self.main - other.main, eps, self.field_id)

    def abs_cmp(self, other):
        """Compare |self| against |other| (both interpreted as differences)."""
        zero = SymVal(Fraction(0), {}, self.field_id)
        a = self if self.cmp(zero) >= 0 else zero - self
        b = other if other.cmp(zero) >= 0 else zero - other
        return a.cmp(b)

    def sign(self):
        if self.main != 0:
            return -1 if self.main < 0 else 1
        for k in sorted(self.eps, reverse=True):
            c = self.eps[k]
            if c != 0:
                return -1 if c < 0 else 1
        return 0

    def __float__(self):
        return float(self.main)

    def __repr__(self):
        return f"SymVal({float(self.main)!r}, eps={len(self.eps)} terms)"


def _monomial_weight_key(sym_ranks, nsyms):
    # weight of a monomial = sum of 2**(nsyms-1-rank); smaller weight means
    # a larger infinitesimal.  Represent as normalized descending bit list.
    bits = sorted((nsyms - 1 - r for r in sym_ranks), reverse=True)
    # merge equal bits (x + x = one bit higher); at most two symbols here
    out = []
    for b in bits:
        while out and out[-1] == b:
            out.pop()
            b += 1
        out.append(b)
    return tuple(sorted(out, reverse=True))


def orient_gf(gu, gv, gw, fu, fv, fw, ids, nverts):
    """Sign of (g(v)-g(u))(f(w)-f(u)) - (f(v)-f(u))(g(w)-g(u)).

    Positive means w lies on the f-above side of the directed line u->v in
    the (g, f) plane.  ``ids`` are the vertex indices of u, v, w; they feed
    the symbolic fallback, so the result is never zero.
    """
    a = gv - gu
    b = fw - fu
    c = fv - fu
    d = gw - gu
    det = a * b - c * d
    bound = _FILTER_EPS * (abs(a * b) + abs(c * d))
    if det > bound:
        return 1
    if det < -bound:
        return -1

    A = Fraction(gv) - Fraction(gu)
    B = Fraction(fw) - Fraction(fu)
    C = Fraction(fv) - Fraction(fu)
    D = Fraction(gw) - Fraction(gu)
    exact = A * B - C * D
    if exact != 0:
        return 1 if exact > 0 else -1

    # full symbolic expansion; symbol rank = fid * nverts + vertex, f=0 g=1
    u, v, w = ids
    nsyms = 2 * nverts

    def f_rank(x):
        return x

    def g_rank(x):
        return nverts + x

    monomials = {}

    def add(ranks, coeff):
        if coeff == 0:
            return
        key = tuple(sorted(ranks))
        monomials[key] = monomials.get(key, Fraction(0)) + coeff

    # first order in f perturbations: A*(pf_w - pf_u) - (pf_v - pf_u)*D
    add((f_rank(w),), A)
    add((f_rank(u),), -A + D)
    add((f_rank(v),), -D)
    # first order in g perturbations: (pg_v - pg_u)*B - C*(pg_w - pg_u)
    add((g_rank(v),), B)
    add((g_rank(u),), -B + C)
    add((g_rank(w),), -C)
    # second order: (pg_v - pg_u)(pf_w - pf_u) - (pf_v - pf_u)(pg_w - pg_u)
    for gs, gsgn in ((g_rank(v), 1), (g_rank(u), -1)):
        for fs, fsgn in ((f_rank(w), 1), (f_rank(u), -1)):
            add((gs, fs), Fraction(gsgn * fsgn))
    for fs, fsgn in ((f_rank(v), 1), (f_rank(u), -1)):
        for gs, gsgn in ((g_rank(w), 1), (g_rank(u), -1)):
            add((fs, gs), Fraction(-fsgn * gsgn))

    live = [(k, c) for k, c in monomials.items() if c != 0]
    if not live:
        raise ArithmeticError("degenerate orientation with no symbolic term")
    best = min(live, key=lambda kc: _monomial_weight_key(kc[0], nsyms))
    return 1 if best[1] > 0 else -1
