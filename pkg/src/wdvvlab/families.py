"""Deformation families z^2 = f(x, y; t) and their discriminants.

The discriminant of a family comes from an elimination matrix: multiplier
polynomials g1, g2, g3 are chosen so that H = g1*f + g2*f_x + g3*f_y is
supported on a fixed short list of monomials; forcing every other
coefficient to zero determines all but a few of the multiplier
coefficients uniquely, and the surviving coefficients assemble into a
square matrix over the parameter ring whose determinant cuts out the
parameters with a singular fiber.  An iterated resultant provides an
independent (factor-rich) oracle for that locus.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .exprio import parse_poly
from .kernel import (KernelError, NotDivisible, Poly, PolyMatrix, RatFrac,
                     Ring, as_mpq, det, matrix_invert, poly_gcd, resultant,
                     to_univar)


class SupportError(KernelError):
    """The ansatz supports do not produce a unique elimination."""


@dataclass
class FamilySpec:
    case_id: str
    ring: Ring               # (x, y, params)
    f: Poly
    xy: tuple                # ("x", "y")
    params: tuple
    supports: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @classmethod
    def from_entry(cls, entry):
        return cls(entry.id, entry.ring, entry.family, entry.family_vars,
                   entry.params, dict(entry.supports), dict(entry.extras))

    @property
    def xvar(self):
        return self.ring.index[self.xy[0]]

    @property
    def yvar(self):
        return self.ring.index[self.xy[1]]

    def param_ring(self):
        return Ring(self.params)


@dataclass
class AnsatzSupport:
    """Monomial supports for g1, g2, g3; target support for H; which g1
    coefficients survive (order fixes the matrix columns)."""
    g1: list                  # [(ex, ey), ...]
    g2: list
    g3: list
    target: list              # [(ex, ey), ...] in row order
    keep: list | None = None  # kept coefficient names, e.g. ["a7", ...]

    @classmethod
    def from_spec(cls, fam):
        supp = fam.supports
        if not supp or "g1" not in supp:
            raise SupportError("no ansatz support configured for %s"
                               % fam.case_id)

        def box(desc):
            parts = desc.split()
            xd, yd = int(parts[1]), int(parts[3])
            return [(i, j) for j in range(yd + 1) for i in range(xd + 1)]

        tgt = [_mono_of(t) for t in supp["target"].split()]
        keep = supp.get("keep", "").split() or None
        return cls(box(supp["g1"]), box(supp["g2"]), box(supp["g3"]),
                   tgt, keep)


def _mono_of(text):
    R = Ring(["x", "y"])
    p = parse_poly(text, R)
    [(e, c)] = list(p.terms())
    if c != 1:
        raise SupportError("target monomials must be monic: %r" % text)
    return e


@dataclass
class EliminationMatrix:
    fam: FamilySpec
    ring: Ring                # parameter ring
    rows: list                # rows = target monomials, cols = kept names
    target: list
    keep: list
    solution: dict            # eliminated name -> {kept name: RatFrac}
    col_cofactors: dict = field(default_factory=dict)

    def matrix(self):
        return PolyMatrix(self.ring, self.rows)

    def det(self):
        return det(self.matrix(), "bareiss")

    def g_polys(self, kept_name):
        """The multipliers (g1, g2, g3) realizing the unit vector at
        kept_name (all other kept coefficients zero), over (x, y, t)."""
        fam = self.fam
        ring = fam.ring
        supp = self._supp
        out = []
        for gi, prefix in ((supp.g1, "a"), (supp.g2, "b"), (supp.g3, "c")):
            acc = ring.zero()
            for pos, (ex, ey) in enumerate(gi, 1):
                name = "%s%d" % (prefix, pos)
                if name == kept_name:
                    coeff = ring.one()
                elif name in self.solution:
                    val = self.solution[name].get(kept_name)
                    if val is None or val.is_zero():
                        continue
                    coeff = _lift_frac(val, ring)
                else:
                    continue
                mono = ring.monomial(1, _emb(ring, fam, ex, ey))
                acc = acc + coeff * mono
            out.append(acc)
        return out


def _emb(ring, fam, ex, ey):
    e = [0] * ring.nvars
    e[fam.xvar] = ex
    e[fam.yvar] = ey
    return tuple(e)


def _lift_frac(v, ring):
    num = v.num.subs({}, ring)
    den = v.den.subs({}, ring)
    return num if den == 1 else RatFrac(num, den)


def eliminate(fam, supp=None):
    """Build the elimination matrix for a family.

    Every coefficient of H = g1 f + g2 f_x + g3 f_y outside the target
    support is forced to zero; that linear system must determine the
    non-kept multiplier coefficients uniquely over the parameter fraction
    field.  The unique solution makes the matrix canonical."""
    supp = supp or AnsatzSupport.from_spec(fam)
    ring = fam.ring
    tR = fam.param_ring()
    xv, yv = fam.xvar, fam.yvar
    f = fam.f
    fx = f.diff(xv)
    fy = f.diff(yv)

    names = []
    columns = {}   # unknown name -> list of ((ex,ey), Poly-in-t) pairs
    for gi, prefix, src in ((supp.g1, "a", f), (supp.g2, "b", fx),
                            (supp.g3, "c", fy)):
        for pos, (ex, ey) in enumerate(gi, 1):
            name = "%s%d" % (prefix, pos)
            names.append(name)
            contrib = {}
            for k, c in src.t.items():
                e = ring.unpack(k)
                key = (e[xv] + ex, e[yv] + ey)
                te = list(e)
                te[xv] = 0
                te[yv] = 0
                mono = _project_t(ring, tR, te, c)
                prev = contrib.get(key)
                contrib[key] = mono if prev is None else prev + mono
            columns[name] = contrib

    keep = supp.keep or ["a%d" % (i + 1) for i in range(len(supp.target))]
    for k in keep:
        if k not in columns:
            raise SupportError("kept name %s outside the ansatz" % k)
    eliminated = [n for n in names if n not in keep]
    if len(keep) != len(supp.target):
        raise SupportError("kept count %d != target size %d"
                           % (len(keep), len(supp.target)))

    # equations: coefficient of every non-target monomial vanishes
    monos = {}
    for name in names:
        for key, val in columns[name].items():
            if val.is_zero():
                continue
            monos.setdefault(key, {})[name] = RatFrac(val)
    target_set = set(supp.target)
    equations = [dict(eq) for key, eq in sorted(monos.items())
                 if key not in target_set]

    solution = _solve_linear(equations, eliminated, keep, tR)

    # assemble the kept-coefficient matrix over the parameter ring
    rows = []
    for key in supp.target:
        eq = monos.get(key, {})
        row = []
        for kname in keep:
            acc = eq.get(kname)
            acc = acc if acc is not None else RatFrac(tR.zero())
            for ename, coeff in eq.items():
                if ename in solution:
                    part = solution[ename].get(kname)
                    if part is not None and not part.is_zero():
                        acc = acc + coeff * part
            if not acc.is_poly():
                raise SupportError("non-polynomial matrix entry at %r, %s"
                                   % (key, kname))
            row.append(acc.as_poly())
        rows.append(row)
    em = EliminationMatrix(fam, tR, rows, supp.target, keep, solution)
    em._supp = supp
    _extract_column_cofactors(em)
    return em


def _project_t(ring, tR, exps, coeff):
    """Monomial over (x,y,params) with x,y already stripped -> Poly in t."""
    te = [0] * tR.nvars
    for i, e in enumerate(exps):
        if e:
            te[tR.index[ring.vars[i]]] = e
    return tR.monomial(coeff, tuple(te))


def _solve_linear(equations, eliminated, keep, tR):
    """Gaussian elimination over the parameter fraction field; returns
    {eliminated name: {kept name: RatFrac}} and demands consistency."""
    pending = [dict(eq) for eq in equations]
    solution = {}
    unsolved = set(eliminated)
    progress = True
    while unsolved and progress:
        progress = False
        # prefer short equations and low-degree pivot coefficients
        pending.sort(key=len)
        for eq in pending:
            pivots = [n for n in eq if n in unsolved]
            if not pivots:
                continue
            pivots.sort(key=lambda n: (eq[n].num.total_degree()
                                       + eq[n].den.total_degree(), n))
            piv = pivots[0]
            pc = eq[piv]
            expr = {}
            for n, c in eq.items():
                if n == piv:
                    continue
                expr[n] = -(c / pc)
            # substitute other unsolved names later; record as-is for now
            solution[piv] = expr
            unsolved.discard(piv)
            pending.remove(eq)
            # substitute into the remaining equations
            for other in pending:
                c = other.pop(piv, None)
                if c is None or c.is_zero():
                    continue
                for n, v in expr.items():
                    cur = other.get(n)
                    add = c * v
                    other[n] = add if cur is None else cur + add
                for n in [n for n, v in other.items() if v.is_zero()]:
                    del other[n]
            progress = True
            break
        if not progress and unsolved:
            # trivial multiplier syzygies like (0, c*f_y, -c*f_x) leave a
            # kernel that never touches the kept coefficients; pin the
            # free names to zero (consistency is still checked below)
            name = sorted(unsolved)[-1]
            solution[name] = {}
            unsolved.discard(name)
            for other in pending:
                other.pop(name, None)
            progress = True
    if unsolved:
        raise SupportError("underdetermined: %s stay free" % sorted(unsolved))
    # close the solutions over kept names only
    closed = {}

    def close(name, seen):
        if name in closed:
            return closed[name]
        if name in seen:
            raise SupportError("cyclic solution at %s" % name)
        seen = seen | {name}
        out = {}
        for n, v in solution[name].items():
            if n in solution:
                for kn, kv in close(n, seen).items():
                    cur = out.get(kn)
                    add = v * kv
                    out[kn] = add if cur is None else cur + add
            else:
                cur = out.get(n)
                out[n] = v if cur is None else cur + v
        closed[name] = {k: v for k, v in out.items() if not v.is_zero()}
        return closed[name]

    for name in solution:
        close(name, frozenset())
    # every leftover equation must now vanish identically
    for eq in pending:
        acc = {}
        for n, c in eq.items():
            if n in closed:
                for kn, kv in closed[n].items():
                    cur = acc.get(kn)
                    add = c * kv
                    acc[kn] = add if cur is None else cur + add
            else:
                cur = acc.get(n)
                acc[n] = c if cur is None else cur + c
        for kn, v in acc.items():
            if not v.is_zero():
                raise SupportError("inconsistent system: residue at %s" % kn)
    return closed


def _extract_column_cofactors(em):
    """Divide a declared cofactor out of its column, recording it."""
    supp = em.fam.supports
    spec = supp.get("rowdiv")
    if not spec:
        return
    idx_s, poly_s = spec.split()
    idx = int(idx_s) - 1
    q = parse_poly(poly_s, em.ring)
    new = [r[:] for r in em.rows]
    # the cofactor lives in one row (a target monomial); divide it out
    row = new[idx]
    new[idx] = [x.exact_div(q) for x in row]
    em.rows = new
    em.col_cofactors[idx] = q


def reconstruction_holds(em, sample_kept=None):
    """(a P) v == g1 f + g2 fx + g3 fy for each kept unit vector."""
    fam = em.fam
    ring = fam.ring
    f = fam.f
    fx = f.diff(fam.xvar)
    fy = f.diff(fam.yvar)
    names = sample_kept or em.keep
    for j, kname in enumerate(em.keep):
        if kname not in names:
            continue
        g1, g2, g3 = em.g_polys(kname)
        h = g1 * f + g2 * fx + g3 * fy
        acc = ring.zero()
        for i, (ex, ey) in enumerate(em.target):
            entry = em.rows[i][j]
            if em.col_cofactors.get(i) is not None:
                entry = entry * em.col_cofactors[i]
            if entry.is_zero():
                continue
            lift = entry.subs({}, ring)
            acc = acc + lift * ring.monomial(1, _emb(ring, fam, ex, ey))
        if not (h - acc).is_zero():
            return False
    return True


# ---------------------------------------------------------------------------
# discriminants


def poly_sqrt_of_multiple(p, var):
    """Given p = c * D^2 with D squarefree in var, recover primitive D
    via gcd(p, dp/dvar)."""
    g = poly_gcd(p, p.diff(var))
    return _canonical_sign(g)


def _canonical_sign(p):
    """Primitive integer content; the pure power of the last variable
    (by ring order) present in p gets a positive coefficient."""
    if p.is_zero():
        return p
    c = p.content()
    if c != 1:
        p = p * (1 / c)
    ring = p.ring
    best = None
    for k, coeff in p.t.items():
        e = ring.unpack(k)
        nz = [i for i, x in enumerate(e) if x]
        if len(nz) <= 1:
            i = nz[0] if nz else -1
            if best is None or i > best[0]:
                best = (i, coeff)
    anchor = best[1] if best is not None else p.lead_coeff()
    return -p if anchor < 0 else p


@dataclass
class DiscriminantResult:
    matrix: EliminationMatrix
    raw_det: Poly
    discriminant: Poly
    multiplicity: int
    constant: object
    cofactors: list          # (poly, exponent) pairs divided out of det


def family_discriminant(fam, supp=None):
    """det of the elimination matrix, reduced to the primitive
    discriminant: squarefree part with declared cofactors stripped."""
    em = eliminate(fam, supp)
    d = em.det()
    if isinstance(d, RatFrac):
        d = d.as_poly()
    if d.is_zero():
        raise SupportError("elimination determinant vanishes identically")
    var = _busiest_var(d)
    g = poly_gcd(d, d.diff(var))
    sf = d.exact_div(g) if g.total_degree() > 0 else d
    cofs = []
    declared = fam.extras.get("cofactor", "")
    for name in declared.split():
        q = parse_poly(name, em.ring)
        e = 0
        while True:
            try:
                sf = sf.exact_div(q)
                e += 1
            except NotDivisible:
                break
        # exponent in the squarefree part is 0 or 1; the raw multiplicity
        # is recovered below
        raw_e = 0
        dd = d
        while True:
            try:
                dd = dd.exact_div(q)
                raw_e += 1
            except NotDivisible:
                break
        if raw_e:
            cofs.append((q, raw_e))
            d = dd
    disc = _canonical_sign(sf)
    mult = 0
    dd = d
    while True:
        try:
            dd = dd.exact_div(disc)
            mult += 1
        except NotDivisible:
            break
    if mult == 0:
        raise SupportError("squarefree part does not divide the determinant")
    const = _proportionality(d, disc ** mult)
    return DiscriminantResult(em, d, disc, mult, const, cofs)


def _busiest_var(p):
    degs = [(p.degree(i), i) for i in range(p.ring.nvars)]
    degs.sort()
    return degs[-1][1]


def _proportionality(a, b):
    """a = c*b exactly; returns c or None."""
    try:
        q = a.exact_div(b)
    except NotDivisible:
        return None
    return q.const_value() if q.is_const() else None


def iterated_resultant(fam):
    """Res_x(Res_y(f, f_y), Res_y(f_x, f_y)): an independent oracle that
    vanishes on the whole singular-parameter locus (plus extra factors)."""
    f = fam.f
    fx = f.diff(fam.xvar)
    fy = f.diff(fam.yvar)
    r1 = resultant(f, fy, fam.yvar)
    r2 = resultant(fx, fy, fam.yvar)
    return resultant(r1, r2, fam.xvar)


# ---------------------------------------------------------------------------
# scripted matrix pipelines


def run_pipeline(matrix, steps, ring):
    """Apply an ordered list of exact matrix operations.

    Steps (tuples):
      ("combine_row", i, coeffs)    row_i := sum_j coeffs[j] * row_j
      ("divide_row", i, poly)       exact division, aborts on failure
      ("replace_row", i, row)
      ("diff", var_index)           entrywise derivative
      ("conjugate", L_inv_times, R) matrix := L^-1 * matrix * R
      ("scale_row", i, value)
    Entries may be Poly or RatFrac; results are exact."""
    M = [row[:] for row in matrix]
    n = len(M)
    for idx, step in enumerate(steps):
        op = step[0]
        if op == "combine_row":
            _, i, coeffs = step
            acc = None
            for j, c in enumerate(coeffs):
                if c == 0:
                    continue
                part = [e * c for e in M[j]]
                acc = part if acc is None else [a + b for a, b in
                                                zip(acc, part)]
            M[i] = acc
        elif op == "divide_row":
            _, i, q = step
            try:
                M[i] = [e.exact_div(q) for e in M[i]]
            except NotDivisible:
                raise NotDivisible("pipeline step %d: row %d not divisible"
                                   % (idx, i + 1))
        elif op == "replace_row":
            _, i, row = step
            M[i] = list(row)
        elif op == "diff":
            _, v = step
            M = [[e.diff(v) for e in row] for row in M]
        elif op == "conjugate":
            _, L, Rm = step
            A = PolyMatrix(ring, M)
            Li = matrix_invert(L)
            M = (Li * A * Rm).rows
        elif op == "scale_row":
            _, i, c = step
            M[i] = [e * c for e in M[i]]
        else:
            raise KernelError("unknown pipeline op %r" % (op,))
    return M
