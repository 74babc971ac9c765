"""The construction problem: weighted ansatz generation, commutator
equation extraction, sequential elimination along a pivot schedule, and
the specialization/truncation engine that pins down transformation
constants.

Unknown coefficients are ordinary ring variables; an elimination trace
records, in order, (pivot, solving equation, substitution) so that a
replay against the original equation set leaves exactly the recorded
residuals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from gmpy2 import mpq

from .algext import AlgebraicRelation
from .exprio import parse_poly, render
from .frobenius import FrobeniusData, PotentialSpec, build_F0
from .kernel import (KernelError, NotDivisible, Poly, RatFrac, Ring,
                     WeightVector, as_mpq, to_univar, weighted_degree)


class ConstructError(KernelError):
    pass


# ---------------------------------------------------------------------------
# weighted ansatz


def weighted_monomial_basis(ring, var_indices, weights, target):
    """All monomials in the chosen variables of exact weighted degree
    `target`, ordered by descending reversed exponent tuple (matching the
    printed coefficient numbering)."""
    target = as_mpq(target)
    out = []

    def rec(pos, left, exps):
        if pos == len(var_indices):
            if left == 0:
                out.append(tuple(exps))
            return
        w = as_mpq(weights[pos])
        e = 0
        while w * e <= left:
            rec(pos + 1, left - w * e, exps + [e])
            e += 1
    rec(0, target, [])

    def sort_key(exps):
        return tuple(reversed(exps))
    out.sort(key=sort_key, reverse=True)
    monos = []
    for exps in out:
        full = [0] * ring.nvars
        for i, e in zip(var_indices, exps):
            full[i] = e
        monos.append(tuple(full))
    return monos


@dataclass
class AnsatzSpec:
    n: int
    weights: WeightVector
    zslots: tuple              # powers of z that carry unknown coefficients
    slot_names: dict           # slot -> (prefix, start index)
    v_prefix: tuple            # (prefix, start) for the relation ansatz
    nonvanishing: tuple

    @classmethod
    def from_entry(cls, entry):
        a = {k: v for k, v in entry.raw["ansatz"]}
        n = int(a["n"])
        w = WeightVector(a["w"].split())
        zslots = tuple(int(x) for x in a["zslots"].split())
        names = {}
        top = max(zslots)
        for k in zslots:
            key = "names_u%d" % k
            spec = a[key]
            if ":" in spec:
                pfx, start = spec.split(":")
                names[k] = (pfx.strip(), int(start))
            else:
                names[k] = (spec.strip(), None)  # single constant slot
        vp, vs = a["v_name"].split(":")
        return cls(n, w, zslots, names, (vp.strip(), int(vs)),
                   tuple(a["nonvanishing"].split()))


@dataclass
class Ansatz:
    spec: AnsatzSpec
    ring: Ring                 # x1..xn, z, then unknowns
    potential: Poly            # F_A with symbolic unknowns
    relation: AlgebraicRelation
    unknowns: list             # unknown names in declaration order
    slot_monomials: dict       # slot -> list of (name, monomial key)
    v_terms: list              # (name, monomial key) for the relation


def build_ansatz(spec):
    """F_A = F_0 + sum u_k z^k with each u_k spread over its weighted
    monomial basis, and the relation z^2 + v - x_{n-1} with v spread
    likewise."""
    n = spec.n
    w = list(spec.weights)
    flat = ["x%d" % (i + 1) for i in range(n)]
    base_idx = list(range(n - 2))          # u_k and v use x1..x_{n-2}
    base_w = [w[i] for i in base_idx]
    wz = as_mpq(w[n - 2]) / 2
    probe = Ring(flat + ["z"])

    slot_monos = {}
    unknown_names = []
    f_weight = as_mpq(w[0]) + 2
    for k in spec.zslots:
        target = f_weight - wz * k
        monos = weighted_monomial_basis(probe, base_idx, base_w, target)
        prefix, start = spec.slot_names[k]
        if start is None:
            if [m for m in monos if any(m)] or not monos:
                if monos != [tuple([0] * probe.nvars)]:
                    raise ConstructError("slot %d is not a pure constant" % k)
            slot_monos[k] = [(prefix, monos[0])]
            unknown_names.append(prefix)
        else:
            named = []
            for i, m in enumerate(monos):
                name = "%s%d" % (prefix, start + i)
                named.append((name, m))
                unknown_names.append(name)
            slot_monos[k] = named

    vp, vs = spec.v_prefix
    v_monos = weighted_monomial_basis(probe, base_idx, base_w,
                                      as_mpq(w[n - 2]))
    v_terms = []
    for i, m in enumerate(v_monos):
        name = "%s%d" % (vp, vs + i)
        v_terms.append((name, m))
        unknown_names.append(name)

    ring = Ring(flat + ["z"] + unknown_names)
    zkey = ring._var_keys[ring.index["z"]]

    def embed(mono):
        e = list(mono) + [0] * (ring.nvars - probe.nvars)
        return ring.pack(tuple(e))

    F = build_F0(n, ring)
    for k in spec.zslots:
        for name, m in slot_monos[k]:
            key = embed(m) + k * zkey + ring._var_keys[ring.index[name]]
            F = F + Poly(ring, {key: mpq(1)})
    v = ring.zero()
    for name, m in v_terms:
        v = v + Poly(ring, {embed(m) + ring._var_keys[ring.index[name]]:
                            mpq(1)})
    m_rel = ring.var("z") ** 2 + v - ring.var("x%d" % (n - 1))
    rel = AlgebraicRelation(ring, "z", m_rel)
    return Ansatz(spec, ring, F, rel, unknown_names, slot_monos, v_terms)


# ---------------------------------------------------------------------------
# equation extraction


@dataclass
class EquationSet:
    """Coefficient equations tagged with their origin."""
    equations: list = field(default_factory=list)  # (origin, Poly-in-unknowns)

    def nonzero(self):
        return [(o, e) for o, e in self.equations if not e.is_zero()]


class AnsatzSystem:
    """Structure matrices of the ansatz potential, computed once."""

    def __init__(self, ansatz):
        self.ansatz = ansatz
        spec = PotentialSpec("ansatz", ansatz.ring,
                             ansatz.spec.weights, potential=ansatz.potential,
                             relation=ansatz.relation)
        # weights for the unknown variables are irrelevant to derivatives;
        # FrobeniusData only differentiates
        self.data = FrobeniusData(spec)
        kind, mats = self.data.structure_matrices()
        if kind != "2z":
            raise ConstructError("ansatz did not stay on the quadratic path")
        self.mats = mats
        self.n = ansatz.spec.n

    def commutator_entry(self, p, q, i, j):
        """Entry (i, j) of z[B_p, B_q], a polynomial in (x, z, unknowns),
        organized exactly as the z-cleared commutator."""
        A, B = self.mats[p - 1], self.mats[q - 1]
        n = self.n
        acc = None
        for k in range(n):
            t = A[i - 1][k] * B[k][j - 1] - B[i - 1][k] * A[k][j - 1]
            acc = t if acc is None else acc + t
        # acc = [M_p, M_q](i,j) with M = 2z B; so acc = 4 z^2 [B_p,B_q]
        # and z [B_p, B_q] = acc / (4 z): reduce then divide by z once
        red = self.ansatz.relation.reduce_poly(acc)
        ring = self.ansatz.ring
        zv = ring.index["z"]
        s = to_univar(red, zv)
        s += [ring.zero()] * (2 - len(s))
        s0, s1 = s[0], s[1]
        # z[B_p,B_q] = (s1 + s0/z)/4 = (s1 + s0 z / m0') / 4; polynomial
        # iff the relation's z-free part divides s0
        m0 = -self.ansatz.relation.coeffs[0]
        if s0.is_zero():
            lowpart = ring.zero()
        else:
            lowpart = s0.exact_div(m0)
        zpoly = ring.var("z")
        return (s1 + lowpart * zpoly) * as_mpq(1, 4)


def extract_equations(system, p, q, i, j):
    """Coefficient equations (in the unknowns) from z[B_p,B_q](i,j) = 0,
    one per (x, z)-monomial, ordered grlex-descending in (x, z)."""
    ansatz = system.ansatz
    ring = ansatz.ring
    entry = system.commutator_entry(p, q, i, j)
    nflat = ansatz.spec.n + 1         # x's and z
    buckets = {}
    for key, c in entry.t.items():
        e = ring.unpack(key)
        xz = e[:nflat]
        uk = ring.pack(tuple([0] * nflat + list(e[nflat:])))
        buckets.setdefault(xz, {})[uk] = c
    origin = "B%d%d(%d,%d)" % (p, q, i, j)
    eqs = EquationSet()
    for xz in sorted(buckets, key=lambda e: (sum(e), e), reverse=True):
        eqs.equations.append((("%s@%s" % (origin, xz)),
                              Poly(ring, buckets[xz])))
    return eqs


# ---------------------------------------------------------------------------
# sequential solving


@dataclass
class TraceStep:
    pivot: str
    origin: str
    value: Poly               # substitution expression over the ring


@dataclass
class EliminationTrace:
    steps: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    branch_notes: list = field(default_factory=list)

    def substitution(self, ring):
        return {s.pivot: s.value for s in self.steps}

    def value_of(self, name):
        for s in self.steps:
            if s.pivot == name:
                return s.value
        raise KeyError(name)


def _apply_subst(p, subst, ring, nonvanishing=()):
    """Substitute solved values (Poly or RatFrac with a nonvanishing
    monomial denominator); fraction denominators are cleared, which is
    sound because they cannot vanish."""
    if isinstance(p, RatFrac):
        num = _apply_subst(p.num, subst, ring, nonvanishing)
        den = _apply_subst(p.den, subst, ring, nonvanishing)
        num = num if isinstance(num, RatFrac) else RatFrac(num)
        den = den if isinstance(den, RatFrac) else RatFrac(den)
        return num / den
    if not subst:
        return p
    used = {n for n in subst if p.uses(ring.index[n])}
    if not used:
        return p
    out = p.subs({n: subst[n] for n in used}, ring)
    if isinstance(out, RatFrac) and out.den == 1:
        return out.num
    return out


def _clear_unit_denominator(e, nonvanishing, ring):
    if isinstance(e, RatFrac):
        den = e.den
        if not den.is_const():
            if len(den) != 1 or not _is_unit_coeff(den, nonvanishing, ring):
                raise ConstructError("denominator %r is not a nonvanishing "
                                     "monomial" % den)
        return e.num
    return e


def _strip_nonvanishing(p, nonvanishing, ring):
    """Cancel monomial factors built from nonvanishing symbols (and
    rational content)."""
    if p.is_zero():
        return p
    k = p.monomial_gcd_key()
    if k:
        exps = ring.unpack(k)
        keep = [0] * ring.nvars
        for i, e in enumerate(exps):
            if e and ring.vars[i] not in nonvanishing:
                keep[i] = e
        strip = k - ring.pack(tuple(keep))
        if strip:
            p = Poly(ring, {kk - strip: c for kk, c in p.t.items()})
    c = p.content() * (1 if p.lead_coeff() > 0 else -1)
    return p * (1 / c) if c != 1 else p


def solve_sequential(system, schedule, nonvanishing=(), trace=None):
    """Work through (p, q, i, j, pivots) schedule entries in order.

    Each pivot must appear linearly, with a coefficient that is rational
    or a monomial in nonvanishing symbols, in some equation from its
    step; its solved value is substituted everywhere.  Nonlinear
    leftovers are kept as residuals (a later step may discharge them)."""
    ansatz = system.ansatz
    ring = ansatz.ring
    trace = trace or EliminationTrace()
    subst = {s.pivot: s.value for s in trace.steps}

    for p, q, i, j, pivots in schedule:
        eqs = extract_equations(system, p, q, i, j)
        current = []
        for origin, e in eqs.equations:
            e = _apply_subst(e, subst, ring, nonvanishing)
            e = _clear_unit_denominator(e, nonvanishing, ring)
            e = _strip_nonvanishing(e, nonvanishing, ring)
            if not e.is_zero():
                current.append((origin, e))
        for pivot in pivots:
            pv = ring.index[pivot]
            found = None
            for origin, e in current:
                d = e.degree(pv)
                if d != 1:
                    continue
                cs = to_univar(e, pv)
                coeff, rest = cs[1], cs[0]
                if coeff.uses(pv):
                    continue
                if not _is_unit_coeff(coeff, nonvanishing, ring):
                    continue
                found = (origin, coeff, rest)
                break
            if found is None:
                raise ConstructError("no usable linear equation for %s "
                                     "at B%d%d(%d,%d)" % (pivot, p, q, i, j))
            origin, coeff, rest = found
            value = _divide_by_unit(-rest, coeff, nonvanishing, ring)
            trace.steps.append(TraceStep(pivot, origin, value))
            subst[pivot] = value
            # refresh this step's remaining equations
            refreshed = []
            for o2, e2 in current:
                e2 = _apply_subst(e2, {pivot: value}, ring, nonvanishing)
                e2 = _clear_unit_denominator(e2, nonvanishing, ring)
                e2 = _strip_nonvanishing(e2, nonvanishing, ring)
                if not e2.is_zero():
                    refreshed.append((o2, e2))
            current = refreshed
            # solved values must stay closed under substitution
            for k in list(subst):
                if _value_uses(subst[k], pv):
                    subst[k] = _apply_subst(subst[k], {pivot: value}, ring,
                                            nonvanishing)
            for s in trace.steps:
                if _value_uses(s.value, pv):
                    s.value = _apply_subst(s.value, {pivot: value}, ring,
                                           nonvanishing)
        for origin, e in current:
            trace.residuals.append((origin, e))
            trace.branch_notes.append(
                "unresolved at %s: %s" % (origin, render(e)[:80]))
    # drop residuals discharged by later substitutions
    still = []
    for origin, e in trace.residuals:
        e = _apply_subst(e, subst, ring, nonvanishing)
        e = _clear_unit_denominator(e, nonvanishing, ring)
        if not e.is_zero():
            still.append((origin, _strip_nonvanishing(e, nonvanishing, ring)))
    trace.residuals = still
    return trace


def _is_unit_coeff(coeff, nonvanishing, ring):
    if coeff.is_const():
        return True
    if len(coeff) != 1:
        return False
    [(exps, _)] = list(coeff.terms())
    return all(ring.vars[i] in nonvanishing
               for i, e in enumerate(exps) if e)


def _value_uses(v, var):
    if isinstance(v, RatFrac):
        return v.num.uses(var) or v.den.uses(var)
    return v.uses(var)


def _divide_by_unit(num, coeff, nonvanishing, ring):
    if coeff.is_const():
        return num * (1 / coeff.const_value())
    # single monomial in nonvanishing symbols: a legal fraction, kept as
    # such until later substitutions clear it
    try:
        return num.exact_div(coeff)
    except NotDivisible:
        f = RatFrac(num, coeff)
        return f.num if f.den == 1 else f


def replay(system, schedule, trace, nonvanishing=()):
    """Re-apply a recorded trace to freshly extracted equations; the
    leftovers must match the recorded residuals exactly."""
    ring = system.ansatz.ring
    subst = trace.substitution(ring)
    leftovers = []
    for p, q, i, j, _ in schedule:
        eqs = extract_equations(system, p, q, i, j)
        for origin, e in eqs.equations:
            e = _apply_subst(e, subst, ring, nonvanishing)
            e = _clear_unit_denominator(e, nonvanishing, ring)
            e = _strip_nonvanishing(e, nonvanishing, ring)
            if not e.is_zero():
                leftovers.append((origin, e))
    want = {o: e for o, e in trace.residuals}
    if len(leftovers) != len(want):
        return False
    for o, e in leftovers:
        w = want.get(o)
        if w is None or not (e - w).is_zero():
            return False
    return True


# ---------------------------------------------------------------------------
# scaling normalization


def normalize_scaling(pairs, nflat, params):
    """Solve lam_k * source_k(m_1 x_1, ..., m_z z) = target_k for all the
    (source, target) pairs at once (one lam per pair, shared m's).

    Sources live over (x-block + z + parameter symbols) with every
    coefficient a rational multiple of a parameter monomial; targets over
    the x-block + z alone.  Returns {unknown: (sign_exponent,
    {base: exponent})} with bases = primes and parameter names, and
    half-integral exponents allowed (formal radicals).  Consistency of
    the full overdetermined system proves the transformed sources equal
    the targets exactly."""
    unknowns = (["lam%d" % k for k in range(len(pairs))]
                + ["m%d" % (i + 1) for i in range(nflat)] + ["mz"])
    solver = MultiplicativeSolver(unknowns)
    npairs = len(pairs)
    for k, (source, target) in enumerate(pairs):
        _scaling_rows(solver, source, target, nflat, params, k, npairs)
    return solver.solve()


def normalize_scaling_pinned(pairs, nflat, params, pins):
    """normalize_scaling with gauge rows pinning chosen unknowns to
    rational values (the weighted scaling symmetry leaves one degree of
    freedom; the printed normalizations fix it)."""
    unknowns = (["lam%d" % k for k in range(len(pairs))]
                + ["m%d" % (i + 1) for i in range(nflat)] + ["mz"])
    solver = MultiplicativeSolver(unknowns)
    npairs = len(pairs)
    for k, (source, target) in enumerate(pairs):
        _scaling_rows(solver, source, target, nflat, params, k, npairs)
    for name, value in pins.items():
        row = [1 if u == name else 0 for u in unknowns]
        solver.add(row, MultiplicativeSolver.factor_value(value, params))
    return solver.solve()


def _scaling_rows(solver, source, target, nflat, params, pair_index, npairs):
    den_fac = {}
    if isinstance(source, RatFrac):
        den = source.den
        if len(den) != 1:
            raise ConstructError("source denominator is not a monomial")
        [(dexps, dc)] = list(den.terms())
        sign, den_fac = MultiplicativeSolver.factor_value(dc, params)
        if sign < 0:
            raise ConstructError("negative denominator normalization")
        dnames = source.ring.vars
        for i, e in enumerate(dexps):
            if e:
                den_fac[dnames[i]] = den_fac.get(dnames[i], 0) + e
        source = source.num
    sring = source.ring
    tring = target.ring
    src_by_key = {}
    for key, c in source.t.items():
        e = sring.unpack(key)
        xz = e[:nflat + 1]
        if xz in src_by_key:
            raise ConstructError("source coefficient is not a monomial "
                                 "in the parameters at %s" % (xz,))
        pfac = {}
        for i in range(nflat + 1, sring.nvars):
            if e[i]:
                name = sring.vars[i]
                if name not in params:
                    raise ConstructError("unsolved symbol %s survives"
                                         % name)
                pfac[name] = e[i]
        src_by_key[xz] = (c, pfac)
    seen = set()
    for key, c in target.t.items():
        e = tring.unpack(key)
        xz = tuple(e[:nflat + 1])
        got = src_by_key.pop(xz, None)
        if got is None:
            raise ConstructError("target monomial %s missing from the "
                                 "source" % (xz,))
        csrc, pmono = got
        ratio_sign, ratio_fac = MultiplicativeSolver.factor_value(
            (c / csrc, {}), params)
        for s, x in pmono.items():
            ratio_fac[s] = ratio_fac.get(s, 0) - x
        for s, x in den_fac.items():
            ratio_fac[s] = ratio_fac.get(s, 0) + x
        lam_block = [0] * npairs
        lam_block[pair_index] = 1
        row = lam_block + [e[i] for i in range(nflat)] + [e[nflat]]
        solver.add(row, (ratio_sign, ratio_fac))
        seen.add(xz)
    if src_by_key:
        raise ConstructError("source monomials %s missing from the target"
                             % sorted(src_by_key)[:3])


# ---------------------------------------------------------------------------
# multiplicative exponent solver (used by the scaling normalization)


class MultiplicativeSolver:
    """Solve for unknown positive quantities m_i given relations
    prod m_i^{a_ij} = value_j, where values live in the multiplicative
    group generated by primes and declared parameter symbols (with
    rational exponents)."""

    def __init__(self, unknowns):
        self.unknowns = list(unknowns)
        self.rows = []
        self.rhs = []

    @staticmethod
    def factor_value(c, symbols):
        """mpq or (mpq, {sym: exp}) -> (sign, {base: exponent})."""
        from gmpy2 import mpq as _q
        if isinstance(c, tuple):
            sign, fac = MultiplicativeSolver.factor_value(c[0], symbols)
            for s, e in c[1].items():
                fac[s] = fac.get(s, 0) + e
            return sign, fac
        c = as_mpq(c)
        sign = 1 if c > 0 else -1
        c = abs(c)
        fac = {}
        num, den = int(c.numerator), int(c.denominator)
        for n, s in ((num, 1), (den, -1)):
            d = 2
            while d * d <= n:
                while n % d == 0:
                    fac[d] = fac.get(d, 0) + s
                    n //= d
                d += 1
            if n > 1:
                fac[n] = fac.get(n, 0) + s
        return sign, fac

    def add(self, exponents, value):
        self.rows.append(exponents)
        self.rhs.append(value)

    def solve(self):
        """Gaussian elimination over Q per multiplicative base."""
        bases = set()
        signs = []
        facs = []
        for sign, fac in self.rhs:
            bases.update(fac)
            facs.append(fac)
            signs.append(sign)
        bases = sorted(bases, key=str)
        ncols = len(self.unknowns)
        # solve the linear system A e_b = f_b for each base simultaneously
        A = [[as_mpq(x) for x in r] for r in self.rows]
        B = [[as_mpq(f.get(b, 0)) for b in bases] for f in facs]
        S = [as_mpq(0) if s > 0 else as_mpq(1) for s in signs]  # mod-2 signs
        n = len(A)
        piv = []
        r = 0
        for c in range(ncols):
            sel = next((i for i in range(r, n) if A[i][c]), None)
            if sel is None:
                continue
            A[r], A[sel] = A[sel], A[r]
            B[r], B[sel] = B[sel], B[r]
            S[r], S[sel] = S[sel], S[r]
            f = A[r][c]
            A[r] = [x / f for x in A[r]]
            B[r] = [x / f for x in B[r]]
            S[r] = S[r] / f
            for i in range(n):
                if i != r and A[i][c]:
                    g = A[i][c]
                    A[i] = [x - g * y for x, y in zip(A[i], A[r])]
                    B[i] = [x - g * y for x, y in zip(B[i], B[r])]
                    S[i] = S[i] - g * S[r]
            piv.append(c)
            r += 1
        for i in range(r, n):
            odd_sign = S[i].denominator == 1 and int(S[i]) % 2 != 0
            if any(B[i]) or odd_sign:
                raise ConstructError("inconsistent scaling system")
        out = {}
        for i, c in enumerate(piv):
            out[self.unknowns[c]] = (
                S[i], {b: B[i][j] for j, b in enumerate(bases) if B[i][j]})
        return out
