"""WDVV structures: gradient, Hessian, structure matrices, Euler field,
discriminant, and the verification checks built on them.

Two computation paths share one interface:

* quadratic extensions whose potential has no z or z^3 slot keep every
  Hessian entry polynomial in (x, z) with z kept formal (the defining
  relation is only used to reduce commutators at the very end);
* everything else (cubic and higher relations, Laurent potentials) runs
  through AlgElement arithmetic with denominators.

The gradient follows the reversed-index convention P_k = dF/dx_{n+1-k},
and C[j][k] = dP_k/dx_j; the Euler field acts entrywise on C as
multiplication by each entry's weighted degree.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .algext import AlgebraicRelation, AlgElement, reduce_expr
from .kernel import (KernelError, NotDivisible, NotHomogeneous, Poly,
                     PolyMatrix, RatFrac, Ring, WeightVector, as_mpq, det,
                     weighted_degree)


class SpecError(KernelError):
    pass


@dataclass
class PotentialSpec:
    case_id: str
    ring: Ring
    weights: WeightVector
    potential: object = None          # Poly or RatFrac over (x, z)
    vector_field: list | None = None  # list of Poly (y-coordinates)
    relation: AlgebraicRelation | None = None
    tier: str = "base"

    @classmethod
    def from_entry(cls, entry):
        if entry.kind == "potential":
            return cls(entry.id, entry.ring, entry.weights,
                       potential=entry.potential, relation=entry.relation,
                       tier=entry.tier)
        if entry.kind == "vector_field":
            return cls(entry.id, entry.ring,
                       WeightVector(entry.euler_weights),
                       vector_field=entry.vector_field, tier=entry.tier)
        raise SpecError("entry %s is not a potential" % entry.id)

    @property
    def n(self):
        return len(self.weights)

    def full_weights(self):
        """Weights for every ring variable: the flat block keeps its
        declared weights, z gets its inferred weight, and any leftover
        symbols (construction parameters) count as weight 0."""
        n = self.n
        out = [as_mpq(0)] * self.ring.nvars
        for i in range(n):
            out[i] = as_mpq(self.weights[i])
        if self.relation is not None:
            base_w = [out[i] for i in self.relation.base_vars]
            out[self.relation.zvar] = self.relation.z_weight_from_base(base_w)
        return out

    def zslot_coeffs(self):
        """Coefficients u_k(x) of z^k in the potential (Poly input)."""
        from .kernel import to_univar
        if not isinstance(self.potential, Poly):
            raise SpecError("potential is not polynomial in (x, z)")
        if self.relation is None:
            return [self.potential]
        return to_univar(self.potential, self.relation.zvar)


@dataclass
class CheckRecord:
    name: str
    status: str            # pass | fail | inconclusive
    witness: str = ""
    constant: str = ""
    ms: int = 0


@dataclass
class VerificationReport:
    case_id: str
    checks: list = field(default_factory=list)
    tier: str = "base"
    ms: int = 0

    @property
    def status(self):
        if any(c.status == "fail" for c in self.checks):
            return "fail"
        if any(c.status == "inconclusive" for c in self.checks):
            return "inconclusive"
        return "pass"

    def add(self, name, ok, witness="", constant="", ms=0):
        self.checks.append(CheckRecord(
            name, "pass" if ok else "fail", witness, constant, ms))
        return ok

    def to_dict(self):
        return {
            "case": self.case_id,
            "status": self.status,
            "tier": self.tier,
            "ms": self.ms,
            "checks": [{"name": c.name, "status": c.status,
                        "witness": c.witness, "constant": c.constant,
                        "ms": c.ms} for c in self.checks],
        }


def build_F0(n, ring=None):
    """The fixed cubic-in-x_n part common to every potential."""
    if n < 2:
        raise SpecError("need at least two variables")
    ring = ring or Ring(["x%d" % (i + 1) for i in range(n)])
    xs = [ring.var(ring.vars[i]) for i in range(n)]
    f = xs[0] * xs[n - 1] * xs[n - 1] * as_mpq(1, 2)
    if n % 2 == 0:
        for j in range(2, n // 2 + 1):
            f = f + xs[j - 1] * xs[n - j] * xs[n - 1]
    else:
        m = (n + 1) // 2
        for j in range(2, m):
            f = f + xs[j - 1] * xs[2 * m - j - 1] * xs[n - 1]
        f = f + xs[m - 1] * xs[m - 1] * xs[n - 1] * as_mpq(1, 2)
    return f


# ---------------------------------------------------------------------------
# derivation layers


class _PolyLayer:
    """Scalar polynomial potential: plain partial derivatives."""

    def __init__(self, spec):
        self.spec = spec
        self.ring = spec.ring

    def derive(self, p, var):
        return p.diff(var)

    def reduce(self, p):
        return p

    def is_zero(self, p):
        return p.is_zero()


class _QuadLayer:
    """Quadratic relation, z kept formal; derivatives stay polynomial as
    long as the z-derivative of the operand is divisible by z."""

    def __init__(self, spec):
        rel = spec.relation
        self.spec = spec
        self.ring = spec.ring
        self.rel = rel
        self.zvar = rel.zvar
        zname = self.ring.vars[rel.zvar]
        self.z = self.ring.var(zname)
        # m = z^2 + m0(x); require no z^1 term
        if rel.coeffs[1] and not rel.coeffs[1].is_zero():
            raise SpecError("quadratic relation has a z-linear term")
        self.m0 = rel.coeffs[0]
        self.dm0 = [self.m0.diff(i) for i in range(self.ring.nvars)]

    def derive(self, p, var):
        """Total derivative; polynomial whenever z | dp/dz."""
        base = p.diff(var)
        pz = p.diff(self.zvar)
        if pz.is_zero() or self.dm0[var].is_zero():
            return base
        q = pz.exact_div(self.z)  # raises NotDivisible when unlucky
        return base - q * self.dm0[var] * as_mpq(1, 2)

    def reduce(self, p):
        return self.rel.reduce_poly(p)

    def is_zero(self, p):
        return self.rel.reduce_poly(p).is_zero()


class _AlgLayer:
    """General relation: AlgElement arithmetic with denominators."""

    def __init__(self, spec):
        self.spec = spec
        self.ring = spec.ring
        self.rel = spec.relation

    def lift(self, p):
        if isinstance(p, AlgElement):
            return p
        if isinstance(p, RatFrac):
            return reduce_expr(p, self.rel)
        return AlgElement(self.rel, p)

    def derive(self, p, var):
        return self.lift(p).total_derivative(var)

    def reduce(self, p):
        return self.lift(p)

    def is_zero(self, p):
        return self.lift(p).is_zero()


class QuotVal:
    """p / (mz^a * den^b) with p reduced mod the relation; the formal
    denominators are never expanded.  Sound for zero testing whenever mz
    and den are non-zero-divisors mod m (checked once per relation)."""

    __slots__ = ("lay", "p", "a", "b")

    def __init__(self, lay, p, a=0, b=0):
        self.lay = lay
        self.p = p
        self.a = a
        self.b = b

    def is_zero(self):
        return self.p.is_zero()

    def __add__(self, other):
        lay = self.lay
        if not isinstance(other, QuotVal):
            other = lay.lift(other)
        a = max(self.a, other.a)
        b = max(self.b, other.b)
        ps = lay.scale_to(self, a, b)
        po = lay.scale_to(other, a, b)
        return QuotVal(lay, ps + po, a, b)

    def __neg__(self):
        return QuotVal(self.lay, -self.p, self.a, self.b)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        lay = self.lay
        if isinstance(other, QuotVal):
            return QuotVal(lay, lay.reduce_poly(self.p * other.p),
                           self.a + other.a, self.b + other.b)
        return QuotVal(lay, lay.reduce_poly(self.p * other), self.a, self.b)


class _CurveLayer:
    """Fraction-free derivation layer for arbitrary relation degree.

    Total derivatives are computed through the polynomial derivation
    Delta_j = mz * d/dx_j - m_{x_j} * d/dz (then D_j f = Delta_j f / mz),
    so every quantity stays a reduced polynomial over a formal
    denominator mz^a * den^b.  den is the x-only denominator of a
    Laurent potential (1 otherwise)."""

    def __init__(self, spec, den=None):
        rel = spec.relation
        self.spec = spec
        self.ring = spec.ring
        self.rel = rel
        self.zvar = rel.zvar
        self.mz = rel.reduce_poly(rel.mz())
        self.mx = [rel.m.diff(i) for i in range(self.ring.nvars)]
        self.den = den if den is not None else self.ring.one()
        self.dden = [self.den.diff(i) for i in range(self.ring.nvars)]
        # mz (and den) must not be zero divisors mod m
        if AlgElement(rel, self.mz).norm().is_zero():
            raise SpecError("relation has vanishing z-derivative norm")
        self._mzpow = {0: self.ring.one(), 1: self.mz}
        self._denpow = {0: self.ring.one(), 1: self.den}

    def reduce_poly(self, p):
        return self.rel.reduce_poly(p)

    def _pow(self, cache, base, e):
        got = cache.get(e)
        if got is None:
            got = self.reduce_poly(self._pow(cache, base, e - 1) * base)
            cache[e] = got
        return got

    def scale_to(self, v, a, b):
        p = v.p
        if a > v.a:
            p = self.reduce_poly(p * self._pow(self._mzpow, self.mz,
                                               a - v.a))
        if b > v.b:
            p = self.reduce_poly(p * self._pow(self._denpow, self.den,
                                               b - v.b))
        return p

    def delta(self, p, var):
        """mz * dp/dx_var - m_x_var * dp/dz, reduced."""
        out = self.mz * p.diff(var)
        pz = p.diff(self.zvar)
        if not pz.is_zero() and not self.mx[var].is_zero():
            out = out - self.mx[var] * pz
        return self.reduce_poly(out)

    def derive(self, v, var):
        """Total derivative of a QuotVal."""
        lay = self
        p, a, b = v.p, v.a, v.b
        num = self.delta(p, var) * self.mz * self.den
        if a:
            num = num - p * self.delta(self.mz, var) * self.den * a
        if b:
            num = num - p * self.dden[var] * self.mz * self.mz * b
        return QuotVal(lay, self.reduce_poly(num), a + 2, b + 1)

    def lift(self, x):
        if isinstance(x, QuotVal):
            return x
        if not isinstance(x, (Poly, RatFrac)):
            return QuotVal(self, self.ring.const(x))
        if isinstance(x, RatFrac):
            num = self.reduce_poly(x.num)
            den = x.den
            if den.uses(self.zvar):
                # rationalize the z-bearing denominator once
                inv = invert(AlgElement(self.rel, den))
                num = self.reduce_poly(num * inv.num)
                den = inv.den
            # fold the x-only denominator into the den slot: den must
            # divide a power of self.den; otherwise extend the slot
            if den.is_const():
                return QuotVal(self, num * (1 / den.const_value()))
            q = den
            b = 0
            while not q.is_const():
                q2 = None
                try:
                    q2 = self.den.exact_div(q)
                except NotDivisible:
                    pass
                if q2 is not None and q2.is_const():
                    num = num * q2.const_value()
                    b += 1
                    q = self.ring.one()
                    break
                try:
                    q = q.exact_div(self.den)
                    b += 1
                except NotDivisible:
                    raise SpecError("denominator %r outside the layer" % den)
            if not q.is_const():
                raise SpecError("denominator %r outside the layer" % den)
            return QuotVal(self, num * (1 / q.const_value())
                           if q.const_value() != 1 else num, 0, b)
        return QuotVal(self, self.reduce_poly(x))

    def reduce(self, v):
        return self.lift(v)

    def is_zero(self, v):
        if isinstance(v, QuotVal):
            return v.p.is_zero()
        if isinstance(v, Poly):
            return self.reduce_poly(v).is_zero()
        return self.lift(v).is_zero()

    def to_alg(self, v):
        """Convert a QuotVal to an honest AlgElement (one inversion)."""
        e = AlgElement(self.rel, v.p)
        if v.a:
            e = e * (invert(AlgElement(self.rel, self.mz)) ** v.a)
        if v.b:
            e = e * AlgElement(self.rel, self.ring.one(), self.den ** v.b)
        return e


class FrobeniusData:
    """P, C and the derived structure of one potential."""

    def __init__(self, spec):
        self.spec = spec
        self.ring = spec.ring
        n = spec.n
        self.scale = None     # x-free global denominator, when present
        if spec.vector_field is not None:
            self.layer = _PolyLayer(spec)
            self.P = list(spec.vector_field)
        else:
            F = spec.potential
            if isinstance(F, RatFrac) and not any(
                    F.den.uses(i) for i in range(spec.n)) and (
                    spec.relation is None
                    or not F.den.uses(spec.relation.zvar)):
                # constant (parameter-only) denominator: factor it out
                self.scale = F.den
                F = F.num
                spec = PotentialSpec(spec.case_id, spec.ring, spec.weights,
                                     potential=F, relation=spec.relation,
                                     tier=spec.tier)
                self.spec = spec
            if spec.relation is None:
                self.layer = _PolyLayer(spec)
            else:
                self.layer = self._pick_layer(spec)
                if isinstance(self.layer, (_AlgLayer, _CurveLayer)):
                    F = self.layer.lift(F)
            self.P = [self.layer.derive(F, self._xi(n - k + 1)) for k in
                      range(1, n + 1)]
        self.C = [[self.layer.derive(self.P[k], self._xi(j + 1))
                   for k in range(n)] for j in range(n)]
        self._struct = None
        self._T = None

    @staticmethod
    def _pick_layer(spec):
        if spec.relation.d == 2 and isinstance(spec.potential, Poly):
            zc = spec.zslot_coeffs()
            u1 = zc[1] if len(zc) > 1 else None
            u3 = zc[3] if len(zc) > 3 else None
            if (u1 is None or u1.is_zero()) and (u3 is None or u3.is_zero()):
                return _QuadLayer(spec)
        den = None
        if isinstance(spec.potential, RatFrac):
            from .algext import reduce_expr
            den = reduce_expr(spec.potential, spec.relation).den
        return _CurveLayer(spec, den)

    def _xi(self, onebased):
        # flat variable index in the ring (z is parked at the end)
        return onebased - 1

    # -- structure matrices -------------------------------------------------

    def structure_matrices(self):
        """d(C)/dx_j for all j.  For the quadratic layer the matrices are
        returned scaled by 2z (polynomial form, written M_j); commutator
        tests are unaffected by the shared scalar factor."""
        if self._struct is None:
            n = self.spec.n
            lay = self.layer
            if isinstance(lay, _QuadLayer):
                z2 = lay.z * 2
                mats = []
                for j in range(n):
                    dm = lay.dm0[j]
                    rows = []
                    for r in range(n):
                        row = []
                        for c in range(n):
                            e = self.C[r][c]
                            v = e.diff(j) * z2
                            if not dm.is_zero():
                                pz = e.diff(lay.zvar)
                                if not pz.is_zero():
                                    v = v - pz * dm
                            row.append(v)
                        rows.append(row)
                    mats.append(rows)
                self._struct = ("2z", mats)
            else:
                mats = []
                for j in range(n):
                    mats.append([[lay.derive(self.C[r][c], j)
                                  for c in range(n)] for r in range(n)])
                self._struct = ("plain", mats)
        return self._struct

    def bn_is_identity(self):
        """dC/dx_n == I (in the scaled form, 2z*I for the quadratic
        layer, times the factored-out constant denominator if any)."""
        kind, mats = self.structure_matrices()
        n = self.spec.n
        Bn = mats[n - 1]
        lay = self.layer
        if kind == "2z":
            unit = lay.z * 2
        else:
            unit = 1
        if self.scale is not None:
            unit = unit * self.scale
        for r in range(n):
            for c in range(n):
                e = Bn[r][c] - (unit if r == c else 0)
                if not lay.is_zero(e):
                    return False, (r, c)
        return True, None

    def commutator_entry_iter(self, p, q):
        """Entries of [B_p, B_q] (up to a nonzero scalar), reduced."""
        kind, mats = self.structure_matrices()
        A, B = mats[p], mats[q]
        n = self.spec.n
        lay = self.layer
        if kind == "plain" and isinstance(lay, _AlgLayer):
            A = _common_den(A)
            B = _common_den(B)
            for i in range(n):
                for j in range(n):
                    acc = None
                    for k in range(n):
                        t = A[0][i][k] * B[0][k][j] - B[0][i][k] * A[0][k][j]
                        acc = t if acc is None else acc + t
                    yield (i, j), AlgElement(lay.rel, acc)
            return
        if kind == "plain" and isinstance(lay, _CurveLayer):
            A = _common_quot(lay, A)
            B = _common_quot(lay, B)
            red = lay.reduce_poly
            for i in range(n):
                for j in range(n):
                    acc = None
                    for k in range(n):
                        aik, bkj = A[i][k], B[k][j]
                        bik, akj = B[i][k], A[k][j]
                        t = None
                        if aik.t and bkj.t:
                            t = aik * bkj
                        if bik.t and akj.t:
                            t = -(bik * akj) if t is None \
                                else t - bik * akj
                        if t is not None:
                            acc = t if acc is None else acc + t
                    yield (i, j), (red(acc) if acc is not None
                                   else lay.ring.zero())
            return
        for i in range(n):
            for j in range(n):
                acc = None
                for k in range(n):
                    t = A[i][k] * B[k][j] - B[i][k] * A[k][j]
                    acc = t if acc is None else acc + t
                yield (i, j), acc

    def check_commutator(self, p, q):
        for (i, j), e in self.commutator_entry_iter(p, q):
            if not self.layer.is_zero(e):
                return False, (i, j, e)
        return True, None

    # -- Euler action ------------------------------------------------------

    def full_weights(self):
        return self.spec.full_weights()

    def T_matrix(self):
        """T = E(C): each entry scaled by its weighted degree."""
        if self._T is None:
            wf = self.full_weights()
            n = self.spec.n
            rows = []
            for r in range(n):
                row = []
                for c in range(n):
                    e = self.C[r][c]
                    row.append(_euler_scale(e, wf))
                rows.append(row)
            self._T = rows
        return self._T

    def discriminant(self):
        """det(T) over the appropriate ring."""
        T = self.T_matrix()
        lay = self.layer
        if isinstance(lay, _PolyLayer):
            return det(PolyMatrix(self.ring, T), "auto")
        if isinstance(lay, _QuadLayer):
            red = [[lay.reduce(e) for e in row] for row in T]
            return _det_mod(red, lay)
        if isinstance(lay, _CurveLayer):
            rows = [[lay.lift(e) for e in row] for row in T]
            d = _det_quot(rows, lay)
            return lay.to_alg(d)
        red = [[lay.lift(e) for e in row] for row in T]
        return _det_generic(red)

    def restrict_T(self, bindings):
        """T with a substitution applied entrywise (unreduced form)."""
        return [[_subs_any(e, bindings) for e in row]
                for row in self.T_matrix()]


def _euler_scale(e, wf):
    if isinstance(e, QuotVal):
        if e.is_zero():
            return e
        d = weighted_degree(e.p, wf)
        if isinstance(d, NotHomogeneous):
            raise SpecError("inhomogeneous Hessian entry: %r" % d)
        lay = e.lay
        dmz = weighted_degree(lay.mz, wf)
        dden = weighted_degree(lay.den, wf) if e.b else 0
        d = d - e.a * dmz - e.b * (dden or 0)
        return e * d
    if isinstance(e, AlgElement):
        from .algext import alg_weighted_degree
        if e.is_zero():
            return e
        d = alg_weighted_degree(e, wf)
        if isinstance(d, NotHomogeneous):
            raise SpecError("inhomogeneous Hessian entry: %r" % d)
        return e * d
    if e.is_zero():
        return e
    d = weighted_degree(e, wf)
    if isinstance(d, NotHomogeneous):
        raise SpecError("inhomogeneous Hessian entry: %r" % d)
    return e * d


def _subs_any(e, bindings):
    if isinstance(e, AlgElement):
        return e.subs_base(bindings)
    return e.subs(bindings)


def _common_quot(lay, mat):
    """Scale a QuotVal matrix to its maximal (a, b) exponents; returns
    plain numerator polynomials."""
    A = max(e.a for row in mat for e in row)
    B = max(e.b for row in mat for e in row)
    return [[lay.scale_to(e, A, B) for e in row] for row in mat]


def _common_den(mat):
    """Bring an AlgElement matrix to one shared denominator; returns
    (numerator Poly matrix, den).  Denominators here are powers of a few
    fixed polynomials, so a divisibility-aware accumulation keeps the
    common one small."""
    dens = []
    for row in mat:
        for e in row:
            if not any(e.den.t == d.t for d in dens):
                dens.append(e.den)
    total = dens[0]
    for d in dens[1:]:
        try:
            total.exact_div(d)
            continue          # d divides total already
        except NotDivisible:
            pass
        try:
            total = d.exact_div(total) * total  # total divides d
        except NotDivisible:
            total = total * d
    nums = []
    for row in mat:
        out = []
        for e in row:
            scale = total.exact_div(e.den)
            out.append(e.rel.reduce_poly(e.num * scale))
        nums.append(out)
    return nums, total


def _det_mod(rows, lay):
    """Cofactor-DP determinant with reduction mod the quadratic relation
    after every product."""
    from itertools import combinations
    n = len(rows)
    if n == 1:
        return rows[0][0]
    prev = {frozenset([j]): rows[n - 1][j] for j in range(n)}
    for size in range(2, n + 1):
        row = rows[n - size]
        cur = {}
        for cols in combinations(range(n), size):
            acc = None
            s = frozenset(cols)
            for pos, j in enumerate(cols):
                if row[j].is_zero():
                    continue
                term = lay.reduce(row[j] * prev[s - {j}])
                if pos % 2:
                    acc = -term if acc is None else acc - term
                else:
                    acc = term if acc is None else acc + term
            cur[s] = acc if acc is not None else row[0].ring.zero()
        prev = cur
    return prev[frozenset(range(n))]


def _det_quot(rows, lay):
    from itertools import combinations
    n = len(rows)
    zero = QuotVal(lay, lay.ring.zero())
    if n == 1:
        return rows[0][0]
    prev = {frozenset([j]): rows[n - 1][j] for j in range(n)}
    for size in range(2, n + 1):
        row = rows[n - size]
        cur = {}
        for cols in combinations(range(n), size):
            acc = None
            s = frozenset(cols)
            for pos, j in enumerate(cols):
                if row[j].is_zero():
                    continue
                term = row[j] * prev[s - {j}]
                if pos % 2:
                    acc = -term if acc is None else acc - term
                else:
                    acc = term if acc is None else acc + term
            cur[s] = acc if acc is not None else zero
        prev = cur
    return prev[frozenset(range(n))]


def _det_generic(rows):
    from itertools import combinations
    n = len(rows)
    if n == 1:
        return rows[0][0]
    prev = {frozenset([j]): rows[n - 1][j] for j in range(n)}
    for size in range(2, n + 1):
        row = rows[n - size]
        cur = {}
        for cols in combinations(range(n), size):
            acc = None
            s = frozenset(cols)
            for pos, j in enumerate(cols):
                if row[j].is_zero():
                    continue
                term = row[j] * prev[s - {j}]
                if pos % 2:
                    acc = -term if acc is None else acc - term
                else:
                    acc = term if acc is None else acc + term
            cur[s] = acc if acc is not None else row[0].rel.zero()
        prev = cur
    return prev[frozenset(range(n))]


# ---------------------------------------------------------------------------
# public operations


def derive_frobenius(spec):
    data = FrobeniusData(spec)
    if spec.vector_field is None and spec.relation is None:
        _assert_f0_shape(spec)
    return data


def _assert_f0_shape(spec):
    """F - F0 must not involve x_n (scalar polynomial specs)."""
    n = spec.n
    f0 = build_F0(n, spec.ring)
    if isinstance(spec.potential, Poly):
        rest = spec.potential - f0
        if rest.uses(n - 1):
            raise SpecError("potential's x_n part is not the standard cube")


def check_homogeneity(spec):
    """Weight w with E F = w F; returns w or raises with a witness."""
    wf = spec.full_weights()
    f = spec.potential
    if isinstance(f, RatFrac):
        dn = weighted_degree(f.num, wf)
        dd = weighted_degree(f.den, wf)
        for d in (dn, dd):
            if isinstance(d, NotHomogeneous):
                raise SpecError("not weighted homogeneous: %r" % d)
        d = dn - dd
    else:
        d = weighted_degree(f, wf)
        if isinstance(d, NotHomogeneous):
            raise SpecError("not weighted homogeneous: %r" % d)
    return d


def check_tri_hamiltonian(w):
    """n even and w = (a, ..., a, 1, ..., 1) with a < 1, half each."""
    ws = list(w)
    n = len(ws)
    if n % 2:
        return False
    k = n // 2
    a = as_mpq(ws[0])
    if not all(as_mpq(x) == a for x in ws[:k]):
        return False
    if not all(as_mpq(x) == 1 for x in ws[k:]):
        return False
    return a < 1


def check_wdvv(spec, report=None, pairs=None):
    """Full WDVV verification: homogeneity, B_n = I, all commutators."""
    rep = report or VerificationReport(spec.case_id, tier=spec.tier)
    t0 = time.time()
    if spec.vector_field is None:
        try:
            w = check_homogeneity(spec)
            rep.add("homogeneity", w == spec.weights[0] + 2,
                    witness="" if w == spec.weights[0] + 2 else
                    "EF = %sF" % w)
        except SpecError as exc:
            rep.add("homogeneity", False, witness=str(exc))
    else:
        rep.add("integrability", _integrable(spec))
    data = derive_frobenius(spec)
    ok, where = data.bn_is_identity()
    rep.add("unit_structure_matrix", ok,
            witness="" if ok else "entry %r" % (where,))
    n = spec.n
    todo = pairs or [(p, q) for p in range(n - 1) for q in range(p + 1, n - 1)]
    for p, q in todo:
        t1 = time.time()
        ok, bad = data.check_commutator(p, q)
        wit = ""
        if not ok:
            i, j, e = bad
            wit = "[B%d,B%d](%d,%d) != 0" % (p + 1, q + 1, i + 1, j + 1)
        rep.add("commutator_%d_%d" % (p + 1, q + 1), ok, witness=wit,
                ms=int(1000 * (time.time() - t1)))
    rep.ms = int(1000 * (time.time() - t0))
    return rep


def _integrable(spec):
    """dC[i][k]/dy_j symmetric in (i, j) for vector-field input."""
    n = spec.n
    P = spec.vector_field
    C = [[P[k].diff(j) for k in range(n)] for j in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(i + 1, n):
                if not (C[i][k].diff(j) - C[j][k].diff(i)).is_zero():
                    return False
    return True


def discriminant(spec):
    return derive_frobenius(spec).discriminant()


def delta_extract(spec):
    """Split det(T)|_{z=0} into phi * delta by conjugating away the row
    of the distinguished next-to-last variable.

    Requires the z^2 + v - x_{n-1} = 0 relation shape.  Returns
    (phi, delta, report) with delta monic of degree n-1 in x_n."""
    n = spec.n
    rel = spec.relation
    if rel is None or rel.d != 2:
        raise SpecError("delta extraction needs a quadratic relation")
    ring = spec.ring
    lay = _QuadLayer(spec)
    # m = z^2 + v - x_{n-1}: check shape and recover v
    m0 = lay.m0
    xn1 = ring.vars[n - 2]
    coeff = m0.diff(n - 2)
    if not (coeff.is_const() and coeff.const_value() == -1):
        raise SpecError("relation is not of the z^2 + v - %s shape" % xn1)
    v = m0 + ring.var(xn1)
    if v.uses(n - 2):
        raise SpecError("v still involves %s" % xn1)

    data = derive_frobenius(spec)
    T = data.T_matrix()
    # into (x_1..x_{n-2}, x_n, z) coordinates, then z = 0
    zname = ring.vars[rel.zvar]
    zpoly = ring.var(zname)
    bind_g = {xn1: zpoly * zpoly + v}
    bind_z0 = {zname: ring.zero()}
    Tg = [[e.subs(bind_g).subs(bind_z0) for e in row] for row in T]
    # U = I + U_0 with the v-gradient in column n-1
    du = [v.diff(i) for i in range(n - 2)]
    # T~ = U T U^-1 = (I + U0) T (I - U0)
    Tt = [row[:] for row in Tg]
    col = n - 2
    for i in range(n - 2):
        if du[i].is_zero():
            continue
        for c in range(n):
            Tt[i][c] = Tt[i][c] + du[i] * Tg[col][c]
    # right factor (I - U0): col(n-1) -= sum_i du_i * col(i), using the
    # already row-updated matrix
    Tt2 = [row[:] for row in Tt]
    for r in range(n):
        acc = Tt[r][col]
        for i in range(n - 2):
            if not du[i].is_zero():
                acc = acc - Tt[r][i] * du[i]
        Tt2[r][col] = acc
    Tt = Tt2
    rep = VerificationReport(spec.case_id + "_delta", tier=spec.tier)
    # one full line through (n-1, n-1) must vanish off-diagonal; with this
    # Hessian orientation it is the column
    row_ok = all(Tt[col][c].is_zero() for c in range(n) if c != col)
    col_ok = all(Tt[r][col].is_zero() for r in range(n) if r != col)
    rep.add("vanishing_line", row_ok or col_ok,
            witness="" if (row_ok or col_ok) else
            "line %d has off-diagonal entries" % (n - 1))
    if not (row_ok or col_ok):
        raise SpecError("conjugated matrix line check failed")
    phi = Tt[col][col]
    minor = [[Tt[r][c] for c in range(n) if c != col]
             for r in range(n) if r != col]
    delta = det(PolyMatrix(ring, minor), "auto")
    lead = _leading_in(delta, n - 1, ring)
    rep.add("delta_monic", lead == 1,
            witness="" if lead == 1 else "leading coefficient %s" % lead)
    return phi, delta, rep


def _leading_in(p, var, ring):
    from .kernel import to_univar
    cs = to_univar(p, var)
    top = cs[-1]
    if not top.is_const():
        return None
    return top.const_value()


def euler_antiderivative(T_rows, weights, ring):
    """Divide each weighted-homogeneous entry by its weighted degree, so
    the Euler field reproduces the input."""
    out = []
    for row in T_rows:
        orow = []
        for e in row:
            if e.is_zero():
                orow.append(e)
                continue
            d = weighted_degree(e, weights)
            if isinstance(d, NotHomogeneous):
                raise SpecError("entry not homogeneous: %r" % d)
            if d == 0:
                raise SpecError("entry of weighted degree zero")
            orow.append(e * (1 / d))
        out.append(orow)
    return out
