"""Arithmetic in Q(x)[z]/(m(z;x)) for one algebraic function z.

Elements are kept as (numerator, denominator) with the numerator a
polynomial of z-degree < deg_z(m) and the denominator free of z; a
division that would force a z-bearing denominator is rationalized
through the multiplication-matrix adjugate, so zero testing stays a pure
numerator test.  The defining polynomial is normalized monic in z (its
z-leading coefficient must be a nonzero rational).

Negative z-powers are legal exactly when m has a nonzero z-constant
term; they enter as fractions and are cleared by one inversion.
"""

from __future__ import annotations

from .kernel import (KernelError, NotDivisible, Poly, PolyMatrix, RatFrac,
                     Ring, as_mpq, det, resultant, to_univar, from_univar,
                     weighted_degree)


class ZeroDivisorError(KernelError):
    """Division hit a zero divisor: the defining polynomial is reducible
    (or the divisor is zero); surfaced as a distinct diagnostic."""


class AlgebraicRelation:
    """Defining relation m(z;x) = 0, monic in z of degree >= 2."""

    def __init__(self, ring, zvar_name, m):
        self.ring = ring
        self.zvar = ring.index[zvar_name]
        ring.same(m.ring)
        coeffs = to_univar(m, self.zvar)
        d = len(coeffs) - 1
        if d < 2:
            raise KernelError("relation must have z-degree >= 2")
        lead = coeffs[-1]
        if not lead.is_const():
            raise KernelError("z-leading coefficient must be rational")
        lc = lead.const_value()
        if lc != 1:
            inv = 1 / lc
            m = m * inv
            coeffs = [c * inv for c in coeffs]
        self.m = m
        self.d = d
        self.coeffs = coeffs
        self.base_vars = tuple(i for i in range(ring.nvars) if i != self.zvar)
        # z^d == tail, extended on demand to higher powers
        zkey = ring._var_keys[self.zvar]
        tail = {}
        for e, c in enumerate(coeffs[:-1]):
            for k, v in c.t.items():
                tail[k + e * zkey] = -v
        self._powers = {d: Poly(ring, tail)}
        self._maxpow = d
        self._mz_inverse = None
        self._partials = {}

    def __repr__(self):
        return "AlgebraicRelation(%s: %r)" % (self.ring.vars[self.zvar],
                                              self.m)

    def zpower(self, e):
        """z^e reduced mod m (e >= d)."""
        ring = self.ring
        zkey = ring._var_keys[self.zvar]
        while self._maxpow < e:
            p = self._powers[self._maxpow]
            nxt = {}
            d = self.d
            shift = ring.width * self.zvar
            mask = ring._lane_mask
            tail = self._powers[d]
            for k, c in p.t.items():
                ze = (k >> shift) & mask
                if ze + 1 < d:
                    _acc(nxt, k + zkey, c)
                else:
                    base = k - (ze << shift)
                    for kt, ct in tail.t.items():
                        _acc(nxt, base + kt, c * ct)
            self._maxpow += 1
            self._powers[self._maxpow] = Poly(ring, nxt)
        return self._powers[e]

    def reduce_poly(self, p):
        """Reduce a Poly in (x, z) to z-degree < d."""
        ring = self.ring
        self.ring.same(p.ring)
        d = self.d
        shift = ring.width * self.zvar
        mask = ring._lane_mask
        low = {}
        high = {}
        for k, c in p.t.items():
            ze = (k >> shift) & mask
            if ze < d:
                _acc(low, k, c)
            else:
                high.setdefault(ze, {})[k - (ze << shift)] = c
        acc = Poly(ring, low)
        for ze, terms in high.items():
            acc = acc + Poly(ring, terms) * self.zpower(ze)
        return acc

    def element(self, num, den=None):
        return AlgElement(self, num, den)

    def zero(self):
        return AlgElement(self, self.ring.zero())

    def one(self):
        return AlgElement(self, self.ring.one())

    def z(self):
        return AlgElement(self, self.ring.var(self.ring.vars[self.zvar]))

    def mz(self):
        return self.m.diff(self.zvar)

    def mz_inverse(self):
        """Inverse of dm/dz mod m, cached; fails if dm/dz is a zero
        divisor (never the case for the relations in the catalog)."""
        if self._mz_inverse is None:
            self._mz_inverse = invert(AlgElement(self, self.mz()))
        return self._mz_inverse

    def implicit_partial(self, var):
        """dz/dx_var = -(dm/dx_var) / (dm/dz), reduced."""
        if var == self.zvar:
            raise KernelError("partial with respect to z itself")
        got = self._partials.get(var)
        if got is None:
            mx = self.m.diff(var)
            got = AlgElement(self, -mx) * self.mz_inverse()
            self._partials[var] = got
        return got

    def z_weight(self, weights):
        """Weight of z making m weighted homogeneous; `weights` lists the
        base-variable weights in ring order (z skipped); short lists are
        padded with zeros (construction parameter symbols)."""
        ws = list(weights)
        ws += [as_mpq(0)] * (len(self.base_vars) - len(ws))
        return self.z_weight_from_base(ws)

    def z_weight_from_base(self, ws):
        base_w = {i: as_mpq(ws[j]) for j, i in enumerate(self.base_vars)}
        graded = []
        for e, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            degs = set()
            for k in c.t:
                ex = self.ring.unpack(k)
                degs.add(sum(base_w[i] * ex[i] for i in self.base_vars))
            if len(degs) != 1:
                raise KernelError("relation coefficient %d not homogeneous"
                                  % e)
            graded.append((e, degs.pop()))
        top = self.d
        # pick wz from any pair, then check all
        wz = None
        for e, w in graded:
            if e != top:
                wz = (w - 0) / (top - e)
                break
        if wz is None:
            raise KernelError("relation is a pure z power")
        for e, w in graded:
            if w + e * wz != top * wz + 0:
                # compare against z^top term weight: top*wz
                raise KernelError("relation not weighted homogeneous")
        return wz


def _acc(d, k, c):
    v = d.get(k)
    if v is None:
        d[k] = c
    elif v + c:
        d[k] = v + c
    else:
        del d[k]


class AlgElement:
    """Residue class: numerator (z-degree < d) over a z-free denominator."""

    __slots__ = ("rel", "num", "den")

    def __init__(self, rel, num, den=None):
        ring = rel.ring
        ring.same(num.ring)
        if den is None:
            den = ring.one()
        else:
            ring.same(den.ring)
        if den.is_zero():
            raise KernelError("zero denominator")
        if den.uses(rel.zvar):
            raise KernelError("denominator must be z-free")
        if num.degree(rel.zvar) >= rel.d:
            num = rel.reduce_poly(num)
        if num.is_zero():
            den = ring.one()
        else:
            f = RatFrac(num, den)
            num, den = f.num, f.den
        self.rel = rel
        self.num = num
        self.den = den

    # -- predicates -----------------------------------------------------

    def is_zero(self):
        return self.num.is_zero()

    def is_const(self):
        return self.num.is_const() and self.den.is_const()

    def __bool__(self):
        return bool(self.num.t)

    def __eq__(self, other):
        if isinstance(other, AlgElement):
            return (self - other).is_zero()
        if isinstance(other, (Poly, int)):
            return (self - _lift(self.rel, other)).is_zero()
        return NotImplemented

    def __hash__(self):
        raise TypeError("AlgElement is unhashable")

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = _lift(self.rel, other)
        if self.den.t == other.den.t:
            return AlgElement(self.rel, self.num + other.num, self.den)
        return AlgElement(self.rel,
                          self.num * other.den + other.num * self.den,
                          self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return AlgElement(self.rel, -self.num, self.den)

    def __sub__(self, other):
        return self + (-_lift(self.rel, other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _lift(self.rel, other)
        return AlgElement(self.rel, self.num * other.num,
                          self.den * other.den)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int):
            raise KernelError("pow exponent must be an int")
        if n < 0:
            return invert(self) ** (-n)
        acc = self.rel.one()
        base = self
        while n:
            if n & 1:
                acc = acc * base
            n >>= 1
            if n:
                base = base * base
        return acc

    def __truediv__(self, other):
        return self * invert(_lift(self.rel, other))

    def __rtruediv__(self, other):
        return _lift(self.rel, other) * invert(self)

    def __repr__(self):
        from .exprio import render
        if self.den == 1:
            return render(self.num)
        return "(%s)/(%s)" % (render(self.num), render(self.den))

    # -- structure ---------------------------------------------------------

    def zcoeffs(self):
        """Numerator coefficients [c_0..c_{d-1}] as z-free Polys."""
        cs = to_univar(self.num, self.rel.zvar)
        cs += [self.rel.ring.zero()] * (self.rel.d - len(cs))
        return cs

    def norm(self):
        """Product of the conjugates: Res_z(m, num) / den^d, free of z.

        Argument order matters when deg m is odd: Res_z(m, .) is the one
        that is multiplicative (for even z-degrees both orders agree)."""
        rel = self.rel
        if self.num.is_zero():
            return RatFrac(rel.ring.zero())
        if not self.num.uses(rel.zvar):
            return RatFrac(self.num ** rel.d, self.den ** rel.d)
        r = resultant(rel.m, self.num, rel.zvar)
        return RatFrac(r, self.den ** rel.d)

    def total_derivative(self, var):
        """d/dx_var with z treated as an algebraic function of x."""
        rel = self.rel
        dn = _poly_total_derivative(rel, self.num, var)
        if self.den.is_const():
            c = self.den.const_value()
            return AlgElement(rel, dn.num, dn.den * c)
        dden = self.den.diff(var)  # den is z-free
        # (dn*den - num*dden) / den^2, with dn = dn.num/dn.den
        lead = dn.num * self.den - self.num * dden * dn.den
        return AlgElement(rel, lead, dn.den * self.den * self.den)

    def subs_base(self, bindings, target_rel=None):
        """Substitute base variables only (z must not be bound here)."""
        rel = target_rel or self.rel
        num = self.num.subs(bindings, rel.ring)
        den = self.den.subs(bindings, rel.ring)
        num = num if isinstance(num, Poly) else num.as_poly()
        den = den if isinstance(den, Poly) else den.as_poly()
        return AlgElement(rel, num, den)


def _lift(rel, v):
    if isinstance(v, AlgElement):
        if v.rel is not rel and v.rel.m != rel.m:
            raise KernelError("elements over different relations")
        return v
    if isinstance(v, RatFrac):
        return reduce_expr(v, rel)
    if isinstance(v, Poly):
        return AlgElement(rel, v)
    return AlgElement(rel, rel.ring.const(v))


def _poly_total_derivative(rel, p, var):
    """Total derivative of a reduced Poly: d_var p + (d_z p) * dz/dx_var."""
    base = p.diff(var)
    pz = p.diff(rel.zvar)
    if pz.is_zero():
        return AlgElement(rel, base)
    return AlgElement(rel, base) + AlgElement(rel, pz) * \
        rel.implicit_partial(var)


def reduce_expr(expr, rel):
    """Bring a Poly or RatFrac in (x, z) into the quotient ring.

    RatFrac denominators may involve z (e.g. Laurent z-powers); they are
    cleared through one inversion, which requires the denominator to be
    invertible mod m (for pure z-powers: a nonzero z-constant term)."""
    if isinstance(expr, Poly):
        return AlgElement(rel, expr)
    num = AlgElement(rel, expr.num)
    den = expr.den
    if not den.uses(rel.zvar):
        return AlgElement(rel, expr.num, den)
    return num * invert(AlgElement(rel, den))


def invert(a):
    """Multiplicative inverse via the multiplication-matrix adjugate.

    Solves (mult-by-num) u = den * e_0 by Cramer; the common denominator
    is det of the multiplication matrix, a z-free polynomial that is
    nonzero exactly when num is invertible mod m."""
    rel = a.rel
    if a.num.is_zero():
        raise ZeroDivisorError("inverse of zero")
    ring = rel.ring
    d = rel.d
    if not a.num.uses(rel.zvar):
        # base-ring element: invert directly
        return AlgElement(rel, a.den, a.num)
    cols = []
    zname = ring.vars[rel.zvar]
    zpoly = ring.var(zname)
    cur = AlgElement(rel, a.num)
    for j in range(d):
        cols.append(cur.zcoeffs())
        if j + 1 < d:
            cur = AlgElement(rel, cur.num * zpoly)
    M = PolyMatrix(ring, [[cols[j][i] for j in range(d)] for i in range(d)])
    D = det(M)
    if isinstance(D, RatFrac):
        D = D.as_poly()
    if D.is_zero():
        raise ZeroDivisorError("defining polynomial has a zero divisor")
    # Cramer against e_0: u_j = cofactor(0, j) / D
    u = ring.zero()
    zkey = ring._var_keys[rel.zvar]
    for j in range(d):
        m = det(M.submatrix(0, j))
        if isinstance(m, RatFrac):
            m = m.as_poly()
        if j % 2:
            m = -m
        if not m.is_zero():
            u = u + Poly(ring, {k + j * zkey: c for k, c in m.t.items()})
    return AlgElement(rel, u * a.den, D)


def alg_weighted_degree(a, weights_with_z):
    """Weighted degree of an AlgElement; weights cover the full ring
    (z included at its inferred weight).  NotHomogeneous propagates."""
    from .kernel import NotHomogeneous
    dn = weighted_degree(a.num, weights_with_z)
    if dn is None or isinstance(dn, NotHomogeneous):
        return dn
    dd = weighted_degree(a.den, weights_with_z)
    if isinstance(dd, NotHomogeneous):
        return dd
    return dn - dd
