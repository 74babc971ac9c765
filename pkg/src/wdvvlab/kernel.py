"""Exact sparse multivariate polynomial arithmetic over the rationals.

A polynomial is a dict mapping packed monomials to nonzero rational
coefficients (gmpy2.mpq).  A monomial over n variables is packed into a
single int, ``width`` bits per variable, so that monomial multiplication
is integer addition::

    x1^2*x3  over (x1, x2, x3), width 16  ->  2 | (1 << 32)

The top bit of each lane is reserved (exponents must stay below
2**(width-1)); that spare bit makes componentwise >= comparisons a single
arithmetic operation (used heavily by exact division).

Everything here is immutable after construction and all operations are
pure; the only randomness in the module is the seeded specialization
inside `is_squarefree_in`.
"""

from __future__ import annotations

import heapq
from fractions import Fraction

from gmpy2 import mpq

QQ = mpq  # exact rational constructor

_MPQ_ZERO = mpq(0)
_MPQ_ONE = mpq(1)


class KernelError(Exception):
    """Base class for kernel failures."""


class RingMismatch(KernelError):
    """Operands live over different ambient variable lists."""


class NotDivisible(KernelError):
    """Exact division failed; reported, never swallowed."""


class NotInvertible(KernelError):
    """Matrix (or element) has no inverse over the current ring."""


def as_mpq(value, den=None):
    """Coerce ints, Fractions, strings like '3/4' and mpq to mpq."""
    if den is not None:
        return mpq(value, den)
    if isinstance(value, type(_MPQ_ZERO)):
        return value
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(value)


class Ring:
    """Ordered ambient variable list plus the packing geometry.

    Two rings are interchangeable iff their variable name tuples agree;
    the packing width is an internal layout choice and must then agree
    too (it is derived deterministically from the variable count).
    """

    __slots__ = ("vars", "index", "width", "nvars", "_tops", "_lane_mask",
                 "_guard", "_var_keys", "_zero", "_one")

    def __init__(self, names, width=None):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise KernelError("duplicate variable names: %r" % (names,))
        if width is None:
            # keep packed keys within a couple of machine words when the
            # variable count is large (construction ansatz rings)
            width = 16 if len(names) <= 16 else 10
        self.vars = names
        self.index = {n: i for i, n in enumerate(names)}
        self.width = width
        self.nvars = len(names)
        self._lane_mask = (1 << width) - 1
        self._guard = 1 << (width - 1)
        # one reserved top bit per lane, for SWAR divisibility tests
        self._tops = sum(1 << (width * i + width - 1)
                         for i in range(self.nvars))
        self._var_keys = tuple(1 << (width * i) for i in range(self.nvars))
        self._zero = Poly(self, {})
        self._one = Poly(self, {0: _MPQ_ONE})

    def __repr__(self):
        return "Ring(%s)" % ", ".join(self.vars)

    def __eq__(self, other):
        return self is other or (isinstance(other, Ring)
                                 and self.vars == other.vars
                                 and self.width == other.width)

    def __hash__(self):
        return hash(self.vars)

    def same(self, other):
        if self is not other and self.vars != other.vars:
            raise RingMismatch("%r vs %r" % (self.vars, other.vars))

    def pack(self, exps):
        k = 0
        w = self.width
        for i, e in enumerate(exps):
            if e < 0 or e >= self._guard:
                raise KernelError("exponent %d out of packing range" % e)
            k |= e << (w * i)
        return k

    def unpack(self, key):
        w, m = self.width, self._lane_mask
        return tuple((key >> (w * i)) & m for i in range(self.nvars))

    def exponent(self, key, var):
        return (key >> (self.width * var)) & self._lane_mask

    # -- constructors ------------------------------------------------

    def zero(self):
        return self._zero

    def one(self):
        return self._one

    def const(self, c):
        c = as_mpq(c)
        return self._zero if c == 0 else Poly(self, {0: c})

    def var(self, name):
        return Poly(self, {self._var_keys[self.index[name]]: _MPQ_ONE})

    def monomial(self, coeff, exps):
        c = as_mpq(coeff)
        return self._zero if c == 0 else Poly(self, {self.pack(exps): c})

    def from_terms(self, terms):
        """Build from {exponent tuple: coefficient}; zeros dropped."""
        t = {}
        for e, c in terms.items():
            c = as_mpq(c)
            if c != 0:
                t[self.pack(e)] = c
        return Poly(self, t)

    def extended(self, extra_names, width=None):
        return Ring(self.vars + tuple(extra_names), width)


def _grlex_key(ring, key):
    exps = ring.unpack(key)
    return (sum(exps), exps)


class Poly:
    """Sparse polynomial: dict of packed monomial -> nonzero mpq."""

    __slots__ = ("ring", "t")

    def __init__(self, ring, terms):
        self.ring = ring
        self.t = terms

    # -- basics --------------------------------------------------------

    def is_zero(self):
        return not self.t

    def is_const(self):
        return not self.t or (len(self.t) == 1 and 0 in self.t)

    def const_value(self):
        if not self.t:
            return _MPQ_ZERO
        if len(self.t) == 1 and 0 in self.t:
            return self.t[0]
        raise KernelError("not a constant: %s" % self)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ring.vars == other.ring.vars and self.t == other.t
        if isinstance(other, (int, type(_MPQ_ZERO), Fraction)):
            c = as_mpq(other)
            if c == 0:
                return not self.t
            return len(self.t) == 1 and self.t.get(0) == c
        return NotImplemented

    def __hash__(self):
        return hash((self.ring.vars, frozenset(self.t.items())))

    def __bool__(self):
        return bool(self.t)

    def __len__(self):
        return len(self.t)

    def terms(self):
        """Iterate (exponent tuple, coefficient) in grlex-descending order."""
        ring = self.ring
        keys = sorted(self.t, key=lambda k: _grlex_key(ring, k), reverse=True)
        for k in keys:
            yield ring.unpack(k), self.t[k]

    def lead(self):
        """Leading (packed key, coeff) under graded lex."""
        if not self.t:
            raise KernelError("zero polynomial has no leading term")
        ring = self.ring
        k = max(self.t, key=lambda k: _grlex_key(ring, k))
        return k, self.t[k]

    def lead_coeff(self):
        return self.lead()[1]

    def total_degree(self):
        if not self.t:
            return -1
        ring = self.ring
        return max(sum(ring.unpack(k)) for k in self.t)

    def degree(self, var):
        if not self.t:
            return -1
        w, m = self.ring.width, self.ring._lane_mask
        s = w * var
        return max((k >> s) & m for k in self.t)

    def uses(self, var):
        s = self.ring.width * var
        m = self.ring._lane_mask
        return any((k >> s) & m for k in self.t)

    def variables(self):
        """Indices of variables actually present."""
        out = set()
        for k in self.t:
            e = self.ring.unpack(k)
            out.update(i for i, x in enumerate(e) if x)
        return out

    # -- ring operations ------------------------------------------------

    def __add__(self, other):
        if isinstance(other, RatFrac):
            return NotImplemented
        if not isinstance(other, Poly):
            other = self.ring.const(other)
        self.ring.same(other.ring)
        a, b = self.t, other.t
        if len(a) < len(b):
            a, b = b, a
        out = dict(a)
        for k, c in b.items():
            v = out.get(k)
            if v is None:
                out[k] = c
            else:
                v = v + c
                if v:
                    out[k] = v
                else:
                    del out[k]
        return Poly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {k: -c for k, c in self.t.items()})

    def __sub__(self, other):
        if isinstance(other, RatFrac):
            return NotImplemented
        if not isinstance(other, Poly):
            other = self.ring.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RatFrac):
            return NotImplemented
        if not isinstance(other, Poly):
            c = as_mpq(other)
            if c == 0:
                return self.ring._zero
            if c == 1:
                return self
            return Poly(self.ring, {k: v * c for k, v in self.t.items()})
        self.ring.same(other.ring)
        a, b = self.t, other.t
        if not a or not b:
            return self.ring._zero
        if len(a) < len(b):
            a, b = b, a
        out = {}
        get = out.get
        for kb, cb in b.items():
            for ka, ca in a.items():
                k = ka + kb
                v = get(k)
                if v is None:
                    out[k] = ca * cb
                else:
                    out[k] = v + ca * cb
        for k in [k for k, v in out.items() if not v]:
            del out[k]
        return Poly(self.ring, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise KernelError("pow exponent must be a non-negative int")
        if n == 0:
            return self.ring._one
        result = None
        base = self
        while True:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if not n:
                return result
            base = base * base

    def scale_monomial(self, coeff, key):
        """Multiply by coeff * (packed monomial key)."""
        c = as_mpq(coeff)
        if c == 0 or not self.t:
            return self.ring._zero
        return Poly(self.ring, {k + key: v * c for k, v in self.t.items()})

    def map_coeffs(self, fn):
        out = {}
        for k, c in self.t.items():
            v = fn(c)
            if v:
                out[k] = v
        return Poly(self.ring, out)

    # -- calculus ---------------------------------------------------------

    def diff(self, var):
        """Formal partial derivative with respect to variable index."""
        shift = self.ring.width * var
        mask = self.ring._lane_mask
        step = 1 << shift
        out = {}
        for k, c in self.t.items():
            e = (k >> shift) & mask
            if e:
                out[k - step] = c * e
        return Poly(self.ring, out)

    def content(self):
        """Positive rational content (gcd of coefficients), 0 for zero."""
        if not self.t:
            return _MPQ_ZERO
        num_g = 0
        den_l = 1
        for c in self.t.values():
            num_g = _gcd_int(num_g, abs(c.numerator))
            den_l = _lcm_int(den_l, c.denominator)
        return mpq(num_g, den_l)

    def monomial_gcd_key(self):
        """Packed key of the componentwise-min monomial (0 for zero poly)."""
        if not self.t:
            return 0
        ring = self.ring
        mins = None
        for k in self.t:
            e = ring.unpack(k)
            mins = e if mins is None else tuple(map(min, mins, e))
        return ring.pack(mins)

    # -- substitution -------------------------------------------------------

    def subs(self, bindings, target=None):
        """Simultaneous substitution var name -> Poly/RatFrac/rational.

        Unbound variables must exist in the target ring under the same
        name.  Returns a Poly, or a RatFrac when a binding is a RatFrac
        with a nontrivial denominator.
        """
        ring = self.ring
        target = target or _infer_target(ring, bindings)
        vals = []
        fracs = False
        for i, name in enumerate(ring.vars):
            if name in bindings:
                v = bindings[name]
                if isinstance(v, RatFrac):
                    if v.den == 1:
                        v = v.num
                    else:
                        fracs = True
                elif isinstance(v, Poly):
                    pass
                else:
                    v = target.const(v)
                if isinstance(v, Poly):
                    v.ring.same(target)
                vals.append(v)
            else:
                if name not in target.index:
                    if self.uses(i):
                        raise KernelError(
                            "variable %s lost by substitution" % name)
                    vals.append(None)  # unused, never looked up
                    continue
                vals.append(target.var(name))
        if not fracs:
            return self._subs_poly(vals, target)
        num, den = self._subs_frac(vals, target)
        return RatFrac(num, den)

    def _subs_poly(self, vals, target):
        ring = self.ring
        cache = [dict() for _ in range(ring.nvars)]
        acc = target.zero()
        for k, c in self.t.items():
            term = target.const(c)
            for i in range(ring.nvars):
                e = ring.exponent(k, i)
                if e:
                    term = term * _cached_pow(cache[i], vals[i], e)
            acc = acc + term
        return acc

    def _subs_frac(self, vals, target):
        npows = [dict() for _ in range(self.ring.nvars)]
        dpows = [dict() for _ in range(self.ring.nvars)]
        ring = self.ring
        pairs = []
        for i, v in enumerate(vals):
            if isinstance(v, RatFrac):
                pairs.append((v.num, v.den))
            else:
                pairs.append((v, target.one()))
        # common denominator: product of den_i^(max exponent of var i)
        maxe = [0] * ring.nvars
        for k in self.t:
            for i in range(ring.nvars):
                e = ring.exponent(k, i)
                if e > maxe[i]:
                    maxe[i] = e
        num = target.zero()
        for k, c in self.t.items():
            term = target.const(c)
            for i in range(ring.nvars):
                e = ring.exponent(k, i)
                if e:
                    term = term * _cached_pow(npows[i], pairs[i][0], e)
                defect = maxe[i] - e
                if defect and pairs[i][1] != 1:
                    term = term * _cached_pow(dpows[i], pairs[i][1], defect)
            num = num + term
        den = target.one()
        for i in range(ring.nvars):
            if maxe[i] and pairs[i][1] != 1:
                den = den * _cached_pow(dpows[i], pairs[i][1], maxe[i])
        return num, den

    # -- division ---------------------------------------------------------

    def divides(self, other):
        try:
            other.exact_div(self)
            return True
        except NotDivisible:
            return False

    def exact_div(self, b):
        """Quotient q with self == b*q; raises NotDivisible otherwise."""
        if not isinstance(b, Poly):
            c = as_mpq(b)
            if c == 0:
                raise NotDivisible("division by zero polynomial")
            return self * (1 / c)
        self.ring.same(b.ring)
        if not b.t:
            raise NotDivisible("division by zero polynomial")
        if not self.t:
            return self.ring._zero
        if b.is_const():
            return self * (1 / b.t[0])
        ring = self.ring
        tops = ring._tops
        kb, cb = b.lead()
        cb_inv = 1 / cb
        btail = [(k, c) for k, c in b.t.items() if k != kb]
        r = dict(self.t)
        # max-heap over grlex via negated sort keys
        heap = [(-d, tuple(-x for x in e), k)
                for k, (d, e) in ((k, _grlex_key(ring, k)) for k in r)]
        heapq.heapify(heap)
        q = {}
        while heap:
            _, _, ka = heapq.heappop(heap)
            ca = r.get(ka)
            if ca is None:
                continue
            # SWAR: every lane of ka must dominate kb
            if ((ka | tops) - kb) & tops != tops:
                raise NotDivisible("leading monomial not divisible")
            kq = ka - kb
            cq = ca * cb_inv
            q[kq] = cq
            del r[ka]
            for k2, c2 in btail:
                k = kq + k2
                v = r.get(k)
                if v is None:
                    r[k] = nv = -cq * c2
                    d, e = _grlex_key(ring, k)
                    heapq.heappush(heap, (-d, tuple(-x for x in e), k))
                else:
                    nv = v - cq * c2
                    if nv:
                        r[k] = nv
                    else:
                        del r[k]
        if r:
            raise NotDivisible("nonzero remainder")
        return Poly(ring, q)

    def __truediv__(self, other):
        if isinstance(other, Poly):
            return RatFrac(self, other)
        c = as_mpq(other)
        return self * (1 / c)

    def __rtruediv__(self, other):
        return RatFrac(self.ring.const(other), self)

    # -- rendering helpers (real rendering lives in exprio) ---------------

    def __repr__(self):
        from .exprio import render
        return render(self)


def _cached_pow(cache, base, e):
    v = cache.get(e)
    if v is None:
        v = base ** e
        cache[e] = v
    return v


def _infer_target(ring, bindings):
    """Target ring for subs: unbound vars keep their name and order,
    bound Poly/RatFrac values must all share one ring, which wins."""
    target = None
    for v in bindings.values():
        r = v.num.ring if isinstance(v, RatFrac) else (
            v.ring if isinstance(v, Poly) else None)
        if r is not None:
            if target is None:
                target = r
            else:
                target.same(r)
    if target is None:
        return ring
    for name in ring.vars:
        if name not in bindings and name not in target.index:
            raise KernelError("variable %s missing from target ring" % name)
    return target


def _gcd_int(a, b):
    while b:
        a, b = b, a % b
    return a


def _lcm_int(a, b):
    return a // _gcd_int(a, b) * b


# ---------------------------------------------------------------------------
# rational fractions


class RatFrac:
    """num/den of Polys; den nonzero.  No global gcd reduction: only the
    rational content and the common monomial factor are stripped, and the
    denominator is kept with positive leading coefficient.  Equality is
    by cross-multiplication."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if den is None:
            den = num.ring.one()
        num.ring.same(den.ring)
        if not den.t:
            raise KernelError("zero denominator")
        if not num.t:
            den = num.ring.one()
        else:
            kg = num.monomial_gcd_key()
            kd = den.monomial_gcd_key()
            k = _key_min(num.ring, kg, kd)
            if k:
                num = Poly(num.ring, {kk - k: c for kk, c in num.t.items()})
                den = Poly(den.ring, {kk - k: c for kk, c in den.t.items()})
            c = den.content() * (1 if den.lead_coeff() > 0 else -1)
            if c != 1:
                inv = 1 / c
                num = num * inv
                den = den * inv
        self.num = num
        self.den = den

    @property
    def ring(self):
        return self.num.ring

    def is_zero(self):
        return self.num.is_zero()

    def is_poly(self):
        return self.den == 1

    def as_poly(self):
        if self.den == 1:
            return self.num
        return self.num.exact_div(self.den)

    def __eq__(self, other):
        if isinstance(other, RatFrac):
            return (self.num * other.den - other.num * self.den).is_zero()
        if isinstance(other, (Poly, int, type(_MPQ_ZERO), Fraction)):
            if not isinstance(other, Poly):
                other = self.ring.const(other)
            return (self.num - other * self.den).is_zero()
        return NotImplemented

    def __hash__(self):
        raise TypeError("RatFrac is unhashable (equality is semantic)")

    def __bool__(self):
        return bool(self.num.t)

    def __add__(self, other):
        other = _as_frac(self.ring, other)
        if self.den.t == other.den.t:
            return RatFrac(self.num + other.num, self.den)
        return RatFrac(self.num * other.den + other.num * self.den,
                       self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFrac(-self.num, self.den)

    def __sub__(self, other):
        return self + (-_as_frac(self.ring, other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_frac(self.ring, other)
        return RatFrac(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_frac(self.ring, other)
        if not other.num.t:
            raise KernelError("division by zero fraction")
        return RatFrac(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return _as_frac(self.ring, other) / self

    def __pow__(self, n):
        if n < 0:
            return RatFrac(self.den ** (-n), self.num ** (-n))
        return RatFrac(self.num ** n, self.den ** n)

    def subs(self, bindings, target=None):
        n = self.num.subs(bindings, target)
        d = self.den.subs(bindings, target)
        n = _as_frac(n.ring if isinstance(n, (Poly, RatFrac)) else None, n)
        d = _as_frac(d.ring, d)
        return n / d

    def __repr__(self):
        from .exprio import render_frac
        return render_frac(self)


def _key_min(ring, ka, kb):
    return ring.pack(tuple(map(min, ring.unpack(ka), ring.unpack(kb))))


def _as_frac(ring, v):
    if isinstance(v, RatFrac):
        return v
    if isinstance(v, Poly):
        return RatFrac(v)
    return RatFrac(ring.const(v))


# ---------------------------------------------------------------------------
# weighted homogeneity


class WeightVector:
    """Positive rational weights w1 <= ... <= wn = 1, one per variable."""

    def __init__(self, weights):
        self.w = tuple(as_mpq(x) for x in weights)
        if not self.w:
            raise KernelError("empty weight vector")
        if self.w[-1] != 1:
            raise KernelError("last weight must be 1")
        for a in self.w:
            if not (0 < a <= 1):
                raise KernelError("weights must lie in (0,1]")

    def __len__(self):
        return len(self.w)

    def __iter__(self):
        return iter(self.w)

    def __getitem__(self, i):
        return self.w[i]

    def __eq__(self, other):
        return isinstance(other, WeightVector) and self.w == other.w

    def __repr__(self):
        return "WeightVector(%s)" % ", ".join(str(x) for x in self.w)


class NotHomogeneous:
    """Returned (not raised) by weighted_degree: carries a witness pair of
    monomials with distinct weighted degrees."""

    def __init__(self, witness):
        self.witness = witness

    def __repr__(self):
        (e1, d1), (e2, d2) = self.witness
        return "NotHomogeneous(%s: %s vs %s: %s)" % (e1, d1, e2, d2)


def weighted_degree(p, weights):
    """Common weighted degree of all monomials of p, or NotHomogeneous.

    Weights may be a WeightVector or any sequence of rationals matching
    the ambient variable count.  The zero polynomial reports degree None.
    """
    ws = list(weights)
    if len(ws) != p.ring.nvars:
        raise KernelError("weight count != variable count")
    ws = [as_mpq(x) for x in ws]
    ring = p.ring
    deg = None
    first = None
    for k in p.t:
        e = ring.unpack(k)
        d = sum((w * x for w, x in zip(ws, e) if x), _MPQ_ZERO)
        if deg is None:
            deg, first = d, e
        elif d != deg:
            return NotHomogeneous(((first, deg), (e, d)))
    return deg


def weighted_degree_frac(x, weights):
    if isinstance(x, RatFrac):
        dn = weighted_degree(x.num, weights)
        dd = weighted_degree(x.den, weights)
        if isinstance(dn, NotHomogeneous):
            return dn
        if isinstance(dd, NotHomogeneous):
            return dd
        return None if dn is None else dn - dd
    return weighted_degree(x, weights)


# ---------------------------------------------------------------------------
# univariate views, resultants, gcds


def to_univar(p, var):
    """p as a list of coefficient Polys c[0..d] in variable `var`
    (the coefficients do not involve `var`)."""
    ring = p.ring
    shift = ring.width * var
    mask = ring._lane_mask
    d = p.degree(var)
    if d < 0:
        return []
    coeffs = [dict() for _ in range(d + 1)]
    for k, c in p.t.items():
        e = (k >> shift) & mask
        coeffs[e][k - (e << shift)] = c
    return [Poly(ring, t) for t in coeffs]


def from_univar(coeffs, var, ring):
    shift = ring.width * var
    out = {}
    for e, c in enumerate(coeffs):
        if isinstance(c, Poly) and c.t:
            for k, v in c.t.items():
                out[k + (e << shift)] = v
    return Poly(ring, out)


def _uni_deg(a):
    return len(a) - 1


def _uni_trim(a):
    while a and a[-1].is_zero():
        a.pop()
    return a


def _uni_scale(a, s):
    return [c * s for c in a]


def _uni_pseudo_rem(a, b):
    """Pseudo-remainder: lc(b)^(da-db+1) * a  mod b  (univariate lists)."""
    da, db = _uni_deg(a), _uni_deg(b)
    lb = b[-1]
    r = list(a)
    for i in range(da, db - 1, -1):
        if _uni_deg(r) < i:
            r = _uni_scale(r, lb)
            continue
        top = r[i]
        r = _uni_scale(r, lb)
        if top.is_zero():
            continue
        for j in range(db + 1):
            r[i - db + j] = r[i - db + j] - top * b[j]
        _uni_trim(r)
        r += [a[0].ring.zero()] * 0
    _uni_trim(r)
    return r


def resultant(a, b, var):
    """Resultant of a and b with respect to variable index `var`,
    computed by the subresultant pseudo-remainder sequence."""
    ring = a.ring
    ring.same(b.ring)
    A = _uni_trim(to_univar(a, var))
    B = _uni_trim(to_univar(b, var))
    if not A or not B:
        return ring.zero()
    da, db = _uni_deg(A), _uni_deg(B)
    if da == 0 and db == 0:
        raise KernelError("both operands constant in the chosen variable")
    if da == 0:
        return A[0] ** db
    if db == 0:
        return B[0] ** da
    sign = 1
    if da < db:
        A, B, da, db = B, A, db, da
        if (da * db) % 2:
            sign = -sign
    one = ring.one()
    g, h = one, one
    while True:
        delta = da - db
        if (da % 2) and (db % 2):
            sign = -sign
        R = _uni_pseudo_rem(A, B)
        A, da = B, db
        if not R:
            return ring.zero()
        denom = g * (h ** delta)
        B = [c.exact_div(denom) for c in R]
        db = _uni_deg(B)
        g = A[-1]
        if delta:
            h = (g ** delta).exact_div(h ** (delta - 1))
        if db == 0:
            break
    # deg(B) == 0: finish with Cohen's closing step
    h = (B[0] ** da).exact_div(h ** (da - 1)) if da > 1 else B[0]
    return h if sign > 0 else -h


def gcd_in(a, b, var):
    """gcd of a, b as univariate polynomials in `var` over the fraction
    field of the remaining variables, up to a factor free of `var`.
    The result is made primitive with respect to `var`."""
    ring = a.ring
    ring.same(b.ring)
    A = _uni_trim(to_univar(a, var))
    B = _uni_trim(to_univar(b, var))
    if not A:
        return b
    if not B:
        return a
    if _uni_deg(A) < _uni_deg(B):
        A, B = B, A
    one = ring.one()
    g, h = one, one
    while True:
        da, db = _uni_deg(A), _uni_deg(B)
        if db == 0:
            return one
        R = _uni_pseudo_rem(A, B)
        if not R:
            break
        delta = da - db
        denom = g * (h ** delta)
        A, B = B, [c.exact_div(denom) for c in R]
        g = A[-1]
        if delta:
            h = (g ** delta).exact_div(h ** (delta - 1))
    return _primitive_in(from_univar(B, var, ring), var)


def _primitive_in(p, var):
    """Divide by the content with respect to var (gcd of the coefficient
    polynomials, computed recursively)."""
    coeffs = [c for c in to_univar(p, var) if not c.is_zero()]
    if not coeffs:
        return p
    g = coeffs[0]
    for c in coeffs[1:]:
        if g.is_const():
            break
        g = poly_gcd(g, c)
    if g.is_const():
        cont = coeffs[0].content() * (1 if coeffs[-1].lead_coeff() > 0 else -1)
        return p * (1 / cont) if cont != 1 else p
    q = p.exact_div(g)
    cont = q.content() * (1 if q.lead_coeff() > 0 else -1)
    return q * (1 / cont) if cont != 1 else q


def poly_gcd(a, b):
    """Full multivariate gcd (primitive PRS).  Adequate for the small
    normalization jobs it is used for; not a general-purpose fast gcd."""
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    if a.is_const() or b.is_const():
        return a.ring.one()
    vs = sorted(a.variables() | b.variables())
    v = vs[-1]
    if not (a.uses(v) and b.uses(v)):
        ca = _content_in(a, v)
        cb = _content_in(b, v)
        return poly_gcd(ca, cb)
    ca, pa = _content_pp(a, v)
    cb, pb = _content_pp(b, v)
    g = gcd_in(pa, pb, v)
    c = poly_gcd(ca, cb)
    return _normalize_sign(g * c)


def _content_in(p, v):
    coeffs = [c for c in to_univar(p, v) if not c.is_zero()]
    g = coeffs[0]
    for c in coeffs[1:]:
        if g.is_const():
            return p.ring.one()
        g = poly_gcd(g, c)
    return g if not g.is_const() else p.ring.one()


def _content_pp(p, v):
    c = _content_in(p, v)
    if c.is_const():
        return p.ring.one(), p
    return c, p.exact_div(c)


def _normalize_sign(p):
    if p.t and p.lead_coeff() < 0:
        return -p
    return p


# ---------------------------------------------------------------------------
# seeded squarefreeness test


class Squarefree:
    def __repr__(self):
        return "Squarefree"


class MultipleFactor:
    def __init__(self, witness):
        self.witness = witness

    def __repr__(self):
        return "MultipleFactor(%r)" % (self.witness,)


class Inconclusive:
    def __repr__(self):
        return "Inconclusive"


def is_squarefree_in(p, var, seed=0, trials=3):
    """Probabilistic-then-exact squarefreeness in one variable.

    Other variables are specialized at seeded random rationals (rejecting
    specializations that drop the leading coefficient in `var`); a single
    successful trial with gcd(p, dp/dvar) of degree 0 certifies
    Squarefree.  A positive-degree gcd triggers a full symbolic gcd to
    confirm a MultipleFactor witness.  If every trial degenerates the
    answer is Inconclusive.
    """
    import random
    ring = p.ring
    d = p.degree(var)
    if d <= 0:
        raise KernelError("p must be nonconstant in the chosen variable")
    if d == 1:
        return Squarefree()
    rng = random.Random(seed)
    others = [i for i in range(ring.nvars) if i != var and p.uses(i)]
    coeffs = to_univar(p, var)
    lead = coeffs[-1]
    suspicious = False
    for _ in range(max(1, trials)):
        point = {ring.vars[i]: mpq(rng.randint(-40, 40), rng.randint(1, 7))
                 for i in others}
        lval = _eval_at(lead, point)
        if lval == 0:
            continue
        uni = [_eval_at(c, point) for c in coeffs]
        g = _uni_rat_gcd_degree(uni)
        if g == 0:
            return Squarefree()
        suspicious = True
        break
    if suspicious or not others:
        g = gcd_in(p, p.diff(var), var)
        if g.degree(var) > 0:
            return MultipleFactor(g)
        return Squarefree()
    return Inconclusive()


def _eval_at(p, point):
    ring = p.ring
    acc = _MPQ_ZERO
    for k, c in p.t.items():
        v = c
        for i, name in enumerate(ring.vars):
            e = ring.exponent(k, i)
            if e:
                v = v * (point.get(name, _MPQ_ZERO) ** e)
        acc += v
    return acc


def _uni_rat_gcd_degree(coeffs):
    """Degree of gcd(f, f') for a rational-coefficient univariate poly
    given as a coefficient list."""
    a = [c for c in coeffs]
    while a and a[-1] == 0:
        a.pop()
    b = [c * i for i, c in enumerate(a)][1:]
    while b and b[-1] == 0:
        b.pop()
    while b:
        # a mod b over Q
        da, db = len(a) - 1, len(b) - 1
        if da < db:
            a, b = b, a
            continue
        lb = b[-1]
        r = list(a)
        for i in range(da, db - 1, -1):
            t = r[i]
            if t == 0:
                continue
            f = t / lb
            for j in range(db + 1):
                r[i - db + j] -= f * b[j]
        while r and r[-1] == 0:
            r.pop()
        a, b = b, r
    return len(a) - 1


# ---------------------------------------------------------------------------
# matrices


class PolyMatrix:
    """Rectangular matrix of Poly (or RatFrac) entries, row-major."""

    __slots__ = ("ring", "rows")

    def __init__(self, ring, rows):
        self.ring = ring
        self.rows = [list(r) for r in rows]
        n = len(self.rows[0]) if self.rows else 0
        if any(len(r) != n for r in self.rows):
            raise KernelError("ragged matrix")

    @classmethod
    def identity(cls, ring, n):
        z, o = ring.zero(), ring.one()
        return cls(ring, [[o if i == j else z for j in range(n)]
                          for i in range(n)])

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.rows[0]) if self.rows else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def map(self, fn):
        return PolyMatrix(self.ring, [[fn(x) for x in r] for r in self.rows])

    def transpose(self):
        return PolyMatrix(self.ring, [list(c) for c in zip(*self.rows)])

    def __add__(self, other):
        return PolyMatrix(self.ring,
                          [[a + b for a, b in zip(ra, rb)]
                           for ra, rb in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return PolyMatrix(self.ring,
                          [[a - b for a, b in zip(ra, rb)]
                           for ra, rb in zip(self.rows, other.rows)])

    def __mul__(self, other):
        if isinstance(other, PolyMatrix):
            if self.ncols != other.nrows:
                raise KernelError("matrix dimension mismatch")
            cols = other.transpose().rows
            return PolyMatrix(self.ring,
                              [[_dot(r, c) for c in cols] for r in self.rows])
        return self.map(lambda x: x * other)

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        if self.nrows != other.nrows or self.ncols != other.ncols:
            return False
        return all(a == b for ra, rb in zip(self.rows, other.rows)
                   for a, b in zip(ra, rb))

    def is_zero(self):
        return all(_entry_is_zero(x) for r in self.rows for x in r)

    def submatrix(self, drop_row, drop_col):
        return PolyMatrix(self.ring,
                          [[x for j, x in enumerate(r) if j != drop_col]
                           for i, r in enumerate(self.rows) if i != drop_row])


def _dot(row, col):
    acc = None
    for a, b in zip(row, col):
        p = a * b
        acc = p if acc is None else acc + p
    return acc


def _entry_is_zero(x):
    if isinstance(x, (Poly, RatFrac)):
        return x.is_zero()
    return not x


def det(M, strategy="auto"):
    """Exact determinant of a square PolyMatrix.

    RatFrac entries are handled by clearing a common denominator per row
    and dividing the cleared determinant back out (exactly when possible,
    otherwise as a RatFrac).  Strategies: fraction-free Bareiss,
    cofactor expansion (dynamic programming over column subsets), or
    auto (Bareiss from 4x4 up).
    """
    if M.nrows != M.ncols:
        raise KernelError("determinant of a non-square matrix")
    n = M.nrows
    if n == 0:
        return M.ring.one()
    cleared, extra_den = _clear_row_denominators(M)
    if strategy == "auto":
        strategy = "bareiss" if n >= 4 else "cofactor"
    if strategy == "bareiss":
        d = _det_bareiss(cleared)
    elif strategy == "cofactor":
        d = _det_cofactor(cleared.rows)
    else:
        raise KernelError("unknown det strategy %r" % (strategy,))
    if extra_den is None:
        return d
    try:
        return d.exact_div(extra_den)
    except NotDivisible:
        return RatFrac(d, extra_den)


def _clear_row_denominators(M):
    if not any(isinstance(x, RatFrac) for r in M.rows for x in r):
        return M, None
    ring = M.ring
    rows = []
    total = None
    for r in M.rows:
        den = ring.one()
        for x in r:
            if isinstance(x, RatFrac) and not x.den == 1:
                den = den * x.den
        rows.append([(x.num * den.exact_div(x.den) if isinstance(x, RatFrac)
                      else x * den) for x in r])
        total = den if total is None else total * den
    return PolyMatrix(ring, rows), (None if total == 1 else total)


def _det_bareiss(M):
    n = M.nrows
    ring = M.ring
    a = [row[:] for row in M.rows]
    sign = 1
    prev = ring.one()
    for k in range(n - 1):
        if a[k][k].is_zero():
            for i in range(k + 1, n):
                if not a[i][k].is_zero():
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return ring.zero()
        pk = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                e = pk * a[i][j] - a[i][k] * a[k][j]
                a[i][j] = e.exact_div(prev)
            a[i][k] = ring.zero()
        prev = pk
    d = a[n - 1][n - 1]
    return d if sign > 0 else -d


def _det_cofactor(rows):
    """Expansion by minors, sharing subminors across column subsets."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    # minors[S] = det of the last |S| rows restricted to column set S
    prev = {frozenset([j]): rows[n - 1][j] for j in range(n)}
    for size in range(2, n + 1):
        row = rows[n - size]
        cur = {}
        from itertools import combinations
        for cols in combinations(range(n), size):
            acc = None
            s = frozenset(cols)
            for pos, j in enumerate(cols):
                m = prev[s - {j}]
                term = row[j] * m
                if pos % 2:
                    acc = -term if acc is None else acc - term
                else:
                    acc = term if acc is None else acc + term
            cur[s] = acc
        prev = cur
    return prev[frozenset(range(n))]


def matrix_invert(M):
    """Inverse as a matrix of RatFrac entries (adjugate over determinant)."""
    if M.nrows != M.ncols:
        raise KernelError("inverse of a non-square matrix")
    n = M.nrows
    d = det(M)
    if _entry_is_zero(d):
        raise NotInvertible("singular matrix")
    dfrac = d if isinstance(d, RatFrac) else RatFrac(d)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            m = det(M.submatrix(j, i))
            m = m if isinstance(m, RatFrac) else RatFrac(m)
            c = m / dfrac
            row.append(-c if (i + j) % 2 else c)
        rows.append(row)
    return PolyMatrix(M.ring, rows)


def jacobian(exprs, var_indices, ring=None):
    """Matrix of partials, row i = derivatives with respect to the i-th
    listed variable."""
    ring = ring or exprs[0].ring
    return PolyMatrix(ring, [[e.diff(v) for e in exprs]
                             for v in var_indices])
